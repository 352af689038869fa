#include "biascorr/biascorr.hpp"

#include <cmath>
#include <stdexcept>

#include "biascorr/rng.hpp"

namespace biascorr {

double estimate_soft_selection(const PredictorParams& g_s,
                               const std::vector<SelectionSample>& d_u) {
    if (d_u.empty()) {
        throw std::invalid_argument(
            "estimate_soft_selection: no unlabeled samples, nothing to correct");
    }
    double acc = 0.0;
    for (const auto& s : d_u) acc += g_s.predict(s.x_sel);
    return acc / static_cast<double>(d_u.size());
}

std::vector<int> assign_pseudolabels(const PredictorParams& g_y,
                                     const std::vector<SelectionSample>& d_u) {
    std::vector<int> labels(d_u.size());
    for (std::size_t i = 0; i < d_u.size(); ++i) {
        labels[i] = g_y.predict(d_u[i].x_pred) > 0.5 ? 1 : 0;
    }
    return labels;
}

std::vector<SelectionSample> build_modified_training_set(
    const std::vector<SelectionSample>& d_s, const std::vector<SelectionSample>& d_u,
    double s_bar, const std::vector<int>& pseudolabels) {
    if (pseudolabels.size() != d_u.size()) {
        throw std::invalid_argument(
            "build_modified_training_set: pseudolabel count does not match unlabeled set");
    }
    std::vector<SelectionSample> out;
    out.reserve(d_s.size() + d_u.size());
    for (const auto& s : d_s) {
        SelectionSample m = s;
        m.selection = 1.0;
        out.push_back(std::move(m));
    }
    for (std::size_t i = 0; i < d_u.size(); ++i) {
        SelectionSample m = d_u[i];
        m.label = pseudolabels[i];
        m.selection = s_bar;
        out.push_back(std::move(m));
    }
    return out;
}

BiasCorrOutput run_biascorr(const std::vector<SelectionSample>& d_tr,
                            const BiasCorrOptions& opt) {
    std::vector<SelectionSample> d_s;
    std::vector<SelectionSample> d_u;
    for (const auto& s : d_tr) {
        s.validate();
        if (s.selection == 1.0) {
            d_s.push_back(s);
        } else if (s.selection == 0.0) {
            d_u.push_back(s);
        } else {
            throw std::invalid_argument(
                "run_biascorr: input selection values must be 0 or 1");
        }
    }
    if (d_s.empty()) {
        throw std::invalid_argument("run_biascorr: no labeled samples");
    }

    BiasCorrOutput out;

    if (d_u.empty()) {
        // Fully labeled input: nothing to correct, plain joint fit.
        out.no_unlabeled_warning = true;
        GreeneFit fit = fit_greene(d_s, opt.h_cfg);
        out.h_params = std::move(fit.params);
        out.h_loss_trace = std::move(fit.loss_trace);
        out.h_converged = fit.converged;
        out.s_bar = 1.0;
        out.modified_set_size = d_s.size();
        return out;
    }

    // g_s on the whole training set, targets = observed selection values
    if (!opt.forced_s_bar.has_value()) {
        Mat x_all;
        std::vector<int> s_all;
        x_all.reserve(d_tr.size());
        for (const auto& s : d_tr) {
            x_all.push_back(s.x_sel);
            s_all.push_back(s.selection == 1.0 ? 1 : 0);
        }
        FitConfig gs_cfg = opt.classifier_cfg;
        gs_cfg.seed = opt.h_cfg.seed + rng_stream::selection_classifier;
        ClassifierFit gs = fit_binary_classifier(opt.g_s_kind, x_all, s_all, gs_cfg);
        out.g_s = std::move(gs.params);
        out.g_s_one_class_warning = gs.one_class_warning;
        out.s_bar = estimate_soft_selection(out.g_s, d_u);
    } else {
        out.s_bar = *opt.forced_s_bar;
    }
    if (out.s_bar < 0.01) out.s_bar_near_zero_warning = true;

    // g_y on the labeled part only, targets = observed labels
    {
        Mat x_s;
        std::vector<int> y_s;
        x_s.reserve(d_s.size());
        for (const auto& s : d_s) {
            x_s.push_back(s.x_pred);
            y_s.push_back(*s.label);
        }
        FitConfig gy_cfg = opt.classifier_cfg;
        gy_cfg.seed = opt.h_cfg.seed + rng_stream::label_classifier;
        ClassifierFit gy = fit_binary_classifier(opt.g_y_kind, x_s, y_s, gy_cfg);
        out.g_y = std::move(gy.params);
        out.g_y_one_class_warning = gy.one_class_warning;
    }

    out.pseudolabels = assign_pseudolabels(out.g_y, d_u);
    std::vector<SelectionSample> modified =
        build_modified_training_set(d_s, d_u, out.s_bar, out.pseudolabels);
    out.modified_set_size = modified.size();

    GreeneFit fit = fit_greene(modified, opt.h_cfg);
    out.h_params = std::move(fit.params);
    out.h_loss_trace = std::move(fit.loss_trace);
    out.h_converged = fit.converged;
    return out;
}

}  // namespace biascorr
