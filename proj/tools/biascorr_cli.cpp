#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "biascorr/bias_analysis.hpp"
#include "biascorr/biascorr.hpp"
#include "biascorr/data.hpp"
#include "biascorr/experiment.hpp"
#include "biascorr/metrics.hpp"

namespace {

using namespace biascorr;
using ordered_json = nlohmann::ordered_json;

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
    }
    if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
    return seeds;
}

Vec parse_reals(const std::string& csv) {
    Vec out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

struct CommonOpts {
    std::string dataset;
    std::string schema;
    std::string method = "biascorr";
    std::string gs = "probit";
    std::string gy = "logit";
    std::string seeds = "1,2,3,4,5";
    double lr = 0.01;
    double weight_decay = 1e-4;
    int draws = 200;
    double stop_pct = 0.025;
    double split = 0.7;
    std::string out;
};

void add_fit_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seeds", o.seeds, "comma-separated seed list");
    cmd->add_option("--lr", o.lr, "learning rate");
    cmd->add_option("--weight-decay", o.weight_decay, "weight decay");
    cmd->add_option("--draws", o.draws, "random draws R for the simulated likelihood");
    cmd->add_option("--stop-pct", o.stop_pct, "stop when the loss changes less than this percent");
    cmd->add_option("--split", o.split, "training fraction");
}

ExperimentConfig make_config(const CommonOpts& o) {
    ExperimentConfig cfg;
    cfg.method = method_from_string(o.method);
    cfg.g_s_kind = predictor_kind_from_string(o.gs);
    cfg.g_y_kind = predictor_kind_from_string(o.gy);
    cfg.seeds = parse_seeds(o.seeds);
    cfg.fit.learning_rate = o.lr;
    cfg.fit.weight_decay = o.weight_decay;
    cfg.fit.draws = o.draws;
    cfg.fit.stop_pct = o.stop_pct;
    cfg.classifier_fit.learning_rate = o.lr;
    cfg.classifier_fit.weight_decay = o.weight_decay;
    cfg.split_fraction = o.split;
    return cfg;
}

int cmd_synth(const std::string& out_prefix, std::size_t n, std::size_t d_sel,
              std::size_t d_pred, double eta, double rho, double sigma,
              const std::string& seeds_csv, const std::string& beta_csv,
              const std::string& gamma_csv) {
    SynthSpec spec;
    spec.n = n;
    spec.d_sel = d_sel;
    spec.d_pred = d_pred;
    spec.rho = rho;
    spec.sigma = sigma;
    spec.seed = parse_seeds(seeds_csv).front();

    if (!gamma_csv.empty()) {
        spec.gamma = parse_reals(gamma_csv);
    } else {
        spec.gamma.assign(d_sel, 1.0);
        spec.gamma.push_back(intercept_for_selection_rate(spec.gamma, 1.0 - eta));
    }
    if (!beta_csv.empty()) {
        spec.beta = parse_reals(beta_csv);
    } else {
        spec.beta.clear();
        for (std::size_t j = 0; j < d_pred; ++j) {
            spec.beta.push_back(j % 2 == 0 ? 1.5 : -1.5);
        }
        spec.beta.push_back(0.0);
    }

    SyntheticData data = generate_synthetic(spec);
    write_dataset_csv(data.dataset, out_prefix + ".csv");
    data.dataset.schema.to_json_file(out_prefix + ".schema.json");

    ordered_json truth;
    truth["gamma"] = spec.gamma;
    truth["beta"] = spec.beta;
    truth["sigma"] = spec.sigma;
    truth["rho"] = spec.rho;
    truth["seed"] = spec.seed;
    truth["p_select"] = data.truth.p_select;
    truth["f_label"] = data.truth.f_label;
    std::ofstream tf(out_prefix + ".truth.json");
    if (!tf) throw std::runtime_error("cannot write truth file");
    tf << truth.dump(2) << "\n";

    std::cout << "wrote " << out_prefix << ".csv (" << data.dataset.n() << " rows), "
              << out_prefix << ".schema.json, " << out_prefix << ".truth.json\n"
              << "realized eta=" << missingness_ratio(data.dataset) << "\n";
    return 0;
}

int cmd_inject(const CommonOpts& o, std::optional<double> eta, const BiasRule& flag_rule) {
    DatasetSchema schema = DatasetSchema::from_json_file(o.schema);
    Dataset data = load_csv_dataset(o.dataset, schema);
    BiasRule rule;
    if (!flag_rule.feature.empty()) {
        rule = flag_rule;
    } else if (schema.bias_rule.has_value()) {
        rule = *schema.bias_rule;
    } else {
        throw std::runtime_error(
            "no bias rule: add one to the schema or pass --rule-feature");
    }
    if (eta.has_value()) rule = rule_for_target_eta(data, rule, *eta);
    Dataset biased = inject_mnar_bias(data, rule);
    const double realized = missingness_ratio(biased);
    std::cout << "rule: " << rule.feature << " " << rule.comparator << " " << rule.threshold
              << "\n|D_u| = "
              << static_cast<std::size_t>(realized * static_cast<double>(biased.n()) + 0.5)
              << " of " << biased.n() << "  eta = " << realized << "\n";
    if (!o.out.empty()) {
        write_dataset_csv(biased, o.out);
        std::cout << "wrote " << o.out << "\n";
    }
    return 0;
}

int cmd_train(const CommonOpts& o, const std::string& sbar, const std::string& pool) {
    DatasetSchema schema = DatasetSchema::from_json_file(o.schema);
    Dataset data = load_csv_dataset(o.dataset, schema);
    ExperimentConfig cfg = make_config(o);
    if (!sbar.empty()) cfg.forced_s_bar = std::stod(sbar);
    cfg.star_pool_is_test = (pool == "test");
    ExperimentReport rep = run_experiment(data, cfg);
    std::cout << rep.human_table();
    if (!o.out.empty()) {
        rep.save(o.out);
        std::cout << "report written to " << o.out << "\n";
    }
    bool all_converged = true;
    for (const auto& s : rep.per_seed) all_converged = all_converged && s.converged;
    return all_converged ? 0 : 1;
}

int cmd_analyze(const CommonOpts& o, const std::string& truth_path, const std::string& sbar) {
    DatasetSchema schema = DatasetSchema::from_json_file(o.schema);
    Dataset data = load_csv_dataset(o.dataset, schema);
    const std::uint64_t seed = parse_seeds(o.seeds).front();

    auto [train_raw, test] = train_test_split(data, o.split, seed);
    const Dataset train = apply_masking(train_raw, std::nullopt);
    const double eta = missingness_ratio(train);
    if (eta == 0.0) {
        throw std::runtime_error("no unlabeled samples; nothing to analyze");
    }

    double s_bar;
    if (!sbar.empty()) {
        s_bar = std::stod(sbar);
    } else {
        const Standardizer scaler = Standardizer::fit(train);
        const auto samples = make_selection_samples(train, scaler.apply(train.X));
        BiasCorrOptions opt;
        opt.g_s_kind = predictor_kind_from_string(o.gs);
        opt.h_cfg.seed = seed;
        opt.classifier_cfg.learning_rate = o.lr;
        opt.classifier_cfg.weight_decay = o.weight_decay;

        Mat x_all;
        std::vector<int> s_all;
        std::vector<SelectionSample> d_u;
        for (const auto& s : samples) {
            x_all.push_back(s.x_sel);
            s_all.push_back(s.selection == 1.0 ? 1 : 0);
            if (s.selection == 0.0) d_u.push_back(s);
        }
        FitConfig gs_cfg = opt.classifier_cfg;
        gs_cfg.seed = seed;
        ClassifierFit gs = fit_binary_classifier(opt.g_s_kind, x_all, s_all, gs_cfg);
        s_bar = estimate_soft_selection(gs.params, d_u);
    }

    ordered_json j;
    j["eta"] = eta;
    j["s_bar"] = s_bar;
    j["threshold"] = eta_threshold(s_bar);
    j["theorem_regime"] = eta > eta_threshold(s_bar);

    if (!truth_path.empty()) {
        std::ifstream tf(truth_path);
        if (!tf) throw std::runtime_error("cannot open truth file: " + truth_path);
        ordered_json truth;
        tf >> truth;
        const Vec p_all = truth.at("p_select").get<Vec>();
        const Vec f_all = truth.at("f_label").get<Vec>();
        Vec p_true, f_true;
        for (std::size_t id : train.row_ids) {
            if (id >= p_all.size()) {
                throw std::runtime_error("truth file does not cover the training rows");
            }
            p_true.push_back(p_all[id]);
            f_true.push_back(f_all[id]);
        }
        try {
            const BiasReport rep = analyze_oracle(p_true, f_true, s_bar, eta);
            j["bias_greene"] = rep.bias_greene;
            j["bias_biascorr"] = rep.bias_biascorr;
            j["term1"] = rep.term1;
            j["term2"] = rep.term2;
            j["diff_lower_bound"] = rep.diff_lower_bound;
            j["biascorr_bias_lower"] = rep.bias_biascorr < rep.bias_greene;
        } catch (const std::domain_error& e) {
            // the closed forms need every denominator positive; report the
            // violation instead of a partial number
            j["bias_defined"] = false;
            j["bias_note"] = e.what();
        }
    } else {
        j["note"] = "ground-truth models unknown for real data; supply --truth from "
                    "`synth` to get the closed-form bias values";
    }

    std::cout << j.dump(2) << "\n";
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw std::runtime_error("cannot write " + o.out);
        f << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& axis, const std::string& grid_csv) {
    DatasetSchema schema = DatasetSchema::from_json_file(o.schema);
    Dataset data = load_csv_dataset(o.dataset, schema);
    const Vec grid = parse_reals(grid_csv);
    if (grid.empty()) throw std::runtime_error("--grid must list at least one value");

    ordered_json all = ordered_json::array();
    bool all_converged = true;
    for (double v : grid) {
        ExperimentConfig cfg = make_config(o);
        if (axis == "eta") {
            cfg.target_eta = v;
        } else if (axis == "sbar" || axis == "s_bar") {
            cfg.forced_s_bar = v;
        } else {
            throw std::runtime_error("sweep axis must be 'eta' or 'sbar'");
        }
        ExperimentReport rep = run_experiment(data, cfg);
        std::cout << "--- " << axis << " = " << v << " ---\n" << rep.human_table();
        for (const auto& s : rep.per_seed) all_converged = all_converged && s.converged;
        ordered_json entry = ordered_json::parse(rep.to_json_string());
        entry["sweep_axis"] = axis;
        entry["sweep_value"] = v;
        all.push_back(entry);
    }
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw std::runtime_error("cannot write " + o.out);
        f << all.dump(2) << "\n";
    }
    return all_converged ? 0 : 1;
}

int cmd_eval(const CommonOpts& o, const std::string& model_path) {
    std::ifstream mf(model_path);
    if (!mf) throw std::runtime_error("cannot open model file: " + model_path);
    ordered_json j;
    mf >> j;
    const ordered_json& m = j.at("model");

    DatasetSchema schema = DatasetSchema::from_json_file(o.schema);
    Dataset data = load_csv_dataset(o.dataset, schema);

    Standardizer scaler;
    scaler.mean = m.at("scaler").at("mean").get<Vec>();
    scaler.scale = m.at("scaler").at("scale").get<Vec>();
    scaler.active = m.at("scaler").at("active").get<std::vector<bool>>();
    if (scaler.mean.size() != data.feature_names.size()) {
        throw std::runtime_error("model was trained on a different encoding (" +
                                 std::to_string(scaler.mean.size()) + " columns vs " +
                                 std::to_string(data.feature_names.size()) + ")");
    }
    const Mat x = scaler.apply(data.X);

    std::vector<int> pred;
    const Method method = method_from_string(m.at("method").get<std::string>());
    if (method == Method::nobias || method == Method::ssbias) {
        PredictorParams p;
        p.kind = predictor_kind_from_string(m.at("kind").get<std::string>());
        p.weights = m.at("weights").get<Vec>();
        p.bias = m.at("bias").get<double>();
        p.input_dim = m.at("input_dim").get<int>();
        const Mat sub = feature_matrix(x, data.pred_idx);
        for (const auto& row : sub) pred.push_back(p.predict(row) > 0.5 ? 1 : 0);
    } else {
        GreeneParams p;
        p.beta = m.at("beta").get<Vec>();
        p.gamma = m.at("gamma").get<Vec>();
        p.sigma = m.at("sigma").get<double>();
        p.rho = m.at("rho").get<double>();
        pred = predict_greene(p, make_selection_samples(data, x));
    }

    const Metrics res = metrics(pred, data.y);
    ordered_json out;
    out["n"] = data.n();
    out["accuracy"] = res.accuracy;
    out["f1"] = res.f1;
    std::cout << out.dump(2) << "\n";
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw std::runtime_error("cannot write " + o.out);
        f << out.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"training and analysis of classifiers under non-random label missingness"};
    app.require_subcommand(1);

    CommonOpts o;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with masked labels");
    std::size_t n = 3000, d_sel = 3, d_pred = 2;
    double eta = 0.7, rho = 0.6, sigma = 1.0;
    std::string beta_csv, gamma_csv, out_prefix = "synth";
    synth->add_option("--n", n, "number of samples");
    synth->add_option("--dsel", d_sel, "selection covariates");
    synth->add_option("--dpred", d_pred, "prediction covariates (first dpred of dsel)");
    synth->add_option("--eta", eta, "target missingness ratio");
    synth->add_option("--rho", rho, "noise correlation");
    synth->add_option("--sigma", sigma, "prediction noise scale");
    synth->add_option("--seeds", o.seeds, "seed list; first seed drives the generator");
    synth->add_option("--beta", beta_csv, "prediction coefficients, intercept last");
    synth->add_option("--gamma", gamma_csv, "selection coefficients, intercept last");
    synth->add_option("--out", out_prefix, "output prefix");

    // inject
    auto* inject = app.add_subcommand("inject", "apply a label-masking rule to a dataset");
    std::string inject_eta;
    BiasRule flag_rule;
    inject->add_option("--dataset", o.dataset)->required();
    inject->add_option("--schema", o.schema)->required();
    inject->add_option("--eta", inject_eta, "retarget the rule threshold to this missingness");
    inject->add_option("--rule-feature", flag_rule.feature,
                       "mask with this feature instead of the schema rule");
    inject->add_option("--rule-comparator", flag_rule.comparator, "> | >= | < | <=")
        ->default_val(">");
    inject->add_option("--rule-threshold", flag_rule.threshold, "keep-label threshold");
    inject->add_option("--out", o.out, "write the masked dataset as CSV");

    // train
    auto* train = app.add_subcommand("train", "fit a method over seeds and report metrics");
    std::string sbar, pool = "train";
    train->add_option("--dataset", o.dataset)->required();
    train->add_option("--schema", o.schema)->required();
    train->add_option("--method", o.method,
                      "nobias | ssbias | greene | biascorr | biascorr_star");
    train->add_option("--gs", o.gs, "selection classifier: probit | logit");
    train->add_option("--gy", o.gy, "pseudolabel classifier: logit | mlp");
    train->add_option("--sbar", sbar, "force the soft selection value (skips g_s)");
    train->add_option("--pool", pool, "biascorr_star pool: train | test");
    train->add_option("--out", o.out, "write the JSON report here");
    add_fit_flags(train, o);

    // analyze
    auto* analyze = app.add_subcommand(
        "analyze", "missingness ratio, soft selection value and bias threshold");
    std::string truth_path;
    analyze->add_option("--dataset", o.dataset)->required();
    analyze->add_option("--schema", o.schema)->required();
    analyze->add_option("--gs", o.gs, "selection classifier: probit | logit");
    analyze->add_option("--truth", truth_path, "truth JSON from `synth` for oracle mode");
    analyze->add_option("--sbar", sbar, "use this soft selection value instead of fitting g_s");
    analyze->add_option("--out", o.out, "write the JSON report here");
    add_fit_flags(analyze, o);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "grid over eta or the forced soft selection");
    std::string axis = "eta", grid = "0.5,0.6,0.7";
    sweep->add_option("--dataset", o.dataset)->required();
    sweep->add_option("--schema", o.schema)->required();
    sweep->add_option("--axis", axis, "eta | sbar");
    sweep->add_option("--grid", grid, "comma-separated values");
    sweep->add_option("--method", o.method);
    sweep->add_option("--gs", o.gs);
    sweep->add_option("--gy", o.gy);
    sweep->add_option("--out", o.out, "write the JSON report list here");
    add_fit_flags(sweep, o);

    // eval
    auto* eval = app.add_subcommand("eval", "score a saved model on a dataset");
    std::string model_path;
    eval->add_option("--model", model_path, "report JSON written by `train --out`")->required();
    eval->add_option("--dataset", o.dataset)->required();
    eval->add_option("--schema", o.schema)->required();
    eval->add_option("--out", o.out, "write metrics JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return cmd_synth(out_prefix, n, d_sel, d_pred, eta, rho, sigma, o.seeds, beta_csv,
                             gamma_csv);
        }
        if (inject->parsed()) {
            return cmd_inject(o,
                              inject_eta.empty()
                                  ? std::nullopt
                                  : std::optional<double>(std::stod(inject_eta)),
                              flag_rule);
        }
        if (train->parsed()) return cmd_train(o, sbar, pool);
        if (analyze->parsed()) return cmd_analyze(o, truth_path, sbar);
        if (sweep->parsed()) return cmd_sweep(o, axis, grid);
        if (eval->parsed()) return cmd_eval(o, model_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
