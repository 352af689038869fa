#include "biascorr/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "biascorr/bias_analysis.hpp"
#include "biascorr/biascorr_star.hpp"
#include "biascorr/metrics.hpp"

namespace biascorr {

namespace {

using ordered_json = nlohmann::ordered_json;

std::pair<double, double> mean_sd(const Vec& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(sq / n) : 0.0};
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ordered_json scaler_json(const Standardizer& s) {
    ordered_json j;
    j["mean"] = s.mean;
    j["scale"] = s.scale;
    j["active"] = s.active;
    return j;
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::nobias: return "nobias";
        case Method::ssbias: return "ssbias";
        case Method::greene: return "greene";
        case Method::biascorr: return "biascorr";
        case Method::biascorr_star: return "biascorr_star";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "nobias") return Method::nobias;
    if (s == "ssbias") return Method::ssbias;
    if (s == "greene") return Method::greene;
    if (s == "biascorr") return Method::biascorr;
    if (s == "biascorr_star" || s == "biascorr-star") return Method::biascorr_star;
    throw std::invalid_argument("unknown method: " + s);
}

std::vector<int> predict_greene(const GreeneParams& params,
                                const std::vector<SelectionSample>& samples) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(logistic_predict(params.beta, s.x_pred, 0.0) > 0.5 ? 1 : 0);
    }
    return out;
}

std::string config_digest(const Dataset& data, const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(cfg.method) << '|' << to_string(cfg.g_s_kind) << '|'
       << to_string(cfg.g_y_kind) << '|' << cfg.fit.learning_rate << '|'
       << cfg.fit.weight_decay << '|' << cfg.fit.stop_pct << '|' << cfg.fit.max_iters << '|'
       << cfg.fit.draws << '|' << cfg.fit.init_sigma << '|' << cfg.fit.init_rho << '|'
       << cfg.split_fraction << '|' << data.n() << '|' << data.feature_names.size();
    if (cfg.forced_s_bar) os << "|sbar=" << *cfg.forced_s_bar;
    if (cfg.target_eta) os << "|eta=" << *cfg.target_eta;
    for (auto s : cfg.seeds) os << '|' << s;
    std::ostringstream hex;
    hex << std::hex << fnv1a(os.str());
    return hex.str();
}

namespace {

struct SeedRun {
    SeedOutcome outcome;
    SavedModel model;
};

SeedRun run_one_seed(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
    auto [train_raw, test_raw] = train_test_split(data, cfg.split_fraction, seed);

    const Dataset train = apply_masking(train_raw, cfg.target_eta);

    const Standardizer scaler = Standardizer::fit(train);
    const Mat x_train = scaler.apply(train.X);
    const Mat x_test = scaler.apply(test_raw.X);

    SeedRun run;
    run.outcome.seed = seed;
    run.outcome.eta = missingness_ratio(train);
    run.model.method = cfg.method;
    run.model.scaler = scaler;
    run.model.feature_names = data.feature_names;

    FitConfig fit_cfg = cfg.fit;
    fit_cfg.seed = seed;

    std::vector<int> train_pred;
    std::vector<int> test_pred;

    auto predict_with = [&](const PredictorParams& p, const Mat& x,
                            const std::vector<std::size_t>& cols) {
        std::vector<int> out;
        out.reserve(x.size());
        const Mat sub = feature_matrix(x, cols);
        for (const auto& row : sub) out.push_back(p.predict(row) > 0.5 ? 1 : 0);
        return out;
    };

    switch (cfg.method) {
        case Method::nobias:
        case Method::ssbias: {
            Mat feats;
            std::vector<int> targets;
            for (std::size_t i = 0; i < train.n(); ++i) {
                if (cfg.method == Method::ssbias && train.selection[i] == 0.0) continue;
                Vec row;
                for (std::size_t c : train.pred_idx) row.push_back(x_train[i][c]);
                feats.push_back(std::move(row));
                targets.push_back(train.y[i]);
            }
            ClassifierFit fit =
                fit_binary_classifier(PredictorKind::logit, feats, targets, fit_cfg);
            run.model.baseline = fit.params;
            run.outcome.converged = fit.converged;
            train_pred = predict_with(fit.params, x_train, train.pred_idx);
            test_pred = predict_with(fit.params, x_test, test_raw.pred_idx);
            break;
        }
        case Method::greene: {
            const auto samples = make_selection_samples(train, x_train);
            // canonical labeled-first order: the corrected method rebuilds its
            // training set this way, so the s_bar = 0 sweep point matches exactly
            std::vector<SelectionSample> ordered;
            ordered.reserve(samples.size());
            for (const auto& s : samples) {
                if (s.selection == 1.0) ordered.push_back(s);
            }
            for (const auto& s : samples) {
                if (s.selection != 1.0) ordered.push_back(s);
            }
            GreeneFit fit = fit_greene(ordered, fit_cfg);
            run.model.greene = fit.params;
            run.outcome.converged = fit.converged;
            train_pred = predict_greene(fit.params, samples);
            test_pred = predict_greene(fit.params, make_selection_samples(test_raw, x_test));
            break;
        }
        case Method::biascorr: {
            BiasCorrOptions opt;
            opt.g_s_kind = cfg.g_s_kind;
            opt.g_y_kind = cfg.g_y_kind;
            opt.h_cfg = fit_cfg;
            opt.classifier_cfg = cfg.classifier_fit;
            opt.forced_s_bar = cfg.forced_s_bar;
            const auto samples = make_selection_samples(train, x_train);
            BiasCorrOutput out = run_biascorr(samples, opt);
            run.model.greene = out.h_params;
            run.outcome.converged = out.h_converged;
            run.outcome.s_bar = out.s_bar;
            train_pred = predict_greene(out.h_params, samples);
            test_pred = predict_greene(out.h_params, make_selection_samples(test_raw, x_test));
            break;
        }
        case Method::biascorr_star: {
            BiasCorrOptions opt;
            opt.g_s_kind = cfg.g_s_kind;
            opt.g_y_kind = cfg.g_y_kind;
            opt.h_cfg = fit_cfg;
            opt.classifier_cfg = cfg.classifier_fit;
            opt.forced_s_bar = cfg.forced_s_bar;

            const auto train_samples = make_selection_samples(train, x_train);
            std::vector<SelectionSample> d_s;
            for (const auto& s : train_samples) {
                if (s.selection == 1.0) d_s.push_back(s);
            }
            std::vector<SelectionSample> pool;
            if (cfg.star_pool_is_test) {
                pool = make_selection_samples(test_raw, x_test);
            } else {
                for (const auto& s : train_samples) {
                    if (s.selection == 0.0) pool.push_back(s);
                }
            }
            if (pool.empty()) {
                throw std::runtime_error("biascorr_star: empty unlabeled pool");
            }
            BiasCorrStarOutput out = run_biascorr_star(d_s, pool, train.n(), opt);
            run.model.greene = out.result.h_params;
            run.outcome.converged = out.result.h_converged;
            run.outcome.s_bar = out.result.s_bar;
            train_pred = predict_greene(out.result.h_params, train_samples);
            test_pred =
                predict_greene(out.result.h_params, make_selection_samples(test_raw, x_test));
            break;
        }
    }

    run.outcome.train_accuracy = metrics(train_pred, train.y).accuracy;
    const Metrics test_m = metrics(test_pred, test_raw.y);
    run.outcome.test_accuracy = test_m.accuracy;
    run.outcome.f1 = test_m.f1;
    return run;
}

}  // namespace

ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw std::invalid_argument("run_experiment: no seeds");
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentReport rep;
    rep.method = cfg.method;
    rep.g_s_kind = cfg.g_s_kind;
    rep.g_y_kind = cfg.g_y_kind;
    rep.seeds = cfg.seeds;
    rep.config_digest = config_digest(data, cfg);

    Vec train_acc, test_acc, f1s, etas, sbars;
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k) {
        SeedRun run = run_one_seed(data, cfg, cfg.seeds[k]);
        rep.per_seed.push_back(run.outcome);
        if (k == 0) rep.model = std::move(run.model);
        train_acc.push_back(run.outcome.train_accuracy);
        test_acc.push_back(run.outcome.test_accuracy);
        f1s.push_back(run.outcome.f1);
        etas.push_back(run.outcome.eta);
        sbars.push_back(run.outcome.s_bar);
    }
    std::tie(rep.train_accuracy_mean, rep.train_accuracy_sd) = mean_sd(train_acc);
    std::tie(rep.test_accuracy_mean, rep.test_accuracy_sd) = mean_sd(test_acc);
    std::tie(rep.f1_mean, rep.f1_sd) = mean_sd(f1s);
    rep.eta = mean_sd(etas).first;
    rep.s_bar = mean_sd(sbars).first;
    rep.threshold = rep.s_bar < 1.0 ? eta_threshold(rep.s_bar) : 1.0;
    rep.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::string ExperimentReport::to_json_string() const {
    ordered_json j;
    j["method"] = to_string(method);
    j["g_s"] = to_string(g_s_kind);
    j["g_y"] = to_string(g_y_kind);
    j["seeds"] = seeds;
    j["config_digest"] = config_digest;
    j["eta"] = eta;
    j["s_bar"] = s_bar;
    j["threshold"] = threshold;
    j["train_accuracy"] = {{"mean", train_accuracy_mean}, {"sd", train_accuracy_sd}};
    j["test_accuracy"] = {{"mean", test_accuracy_mean}, {"sd", test_accuracy_sd}};
    j["f1"] = {{"mean", f1_mean}, {"sd", f1_sd}};
    j["per_seed"] = ordered_json::array();
    for (const auto& o : per_seed) {
        j["per_seed"].push_back({{"seed", o.seed},
                                 {"train_accuracy", o.train_accuracy},
                                 {"test_accuracy", o.test_accuracy},
                                 {"f1", o.f1},
                                 {"eta", o.eta},
                                 {"s_bar", o.s_bar},
                                 {"converged", o.converged}});
    }
    ordered_json m;
    m["method"] = to_string(model.method);
    if (model.method == Method::nobias || model.method == Method::ssbias) {
        m["kind"] = to_string(model.baseline.kind);
        m["weights"] = model.baseline.weights;
        m["bias"] = model.baseline.bias;
        m["input_dim"] = model.baseline.input_dim;
    } else {
        m["beta"] = model.greene.beta;
        m["gamma"] = model.greene.gamma;
        m["sigma"] = model.greene.sigma;
        m["rho"] = model.greene.rho;
    }
    m["scaler"] = scaler_json(model.scaler);
    m["feature_names"] = model.feature_names;
    j["model"] = m;
    return j.dump(2) + "\n";
}

std::string ExperimentReport::human_table() const {
    std::ostringstream os;
    os.precision(4);
    os << std::fixed;
    os << "method=" << to_string(method);
    if (method == Method::biascorr || method == Method::biascorr_star) {
        os << " (" << to_string(g_s_kind) << ", " << to_string(g_y_kind) << ")";
    }
    os << "  seeds=" << seeds.size() << "\n";
    os << "  train acc: " << train_accuracy_mean << " +/- " << train_accuracy_sd << " %\n";
    os << "  test  acc: " << test_accuracy_mean << " +/- " << test_accuracy_sd << " %\n";
    os << "  f1       : " << f1_mean << " +/- " << f1_sd << " %\n";
    os << "  eta=" << eta << "  s_bar=" << s_bar << "  1/(2-s_bar)=" << threshold << "\n";
    os << "  wall time: " << wall_time_sec << " s\n";
    return os.str();
}

void ExperimentReport::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report file: " + path);
    out << to_json_string();
}

}  // namespace biascorr
