#pragma once

#include <optional>
#include <vector>

#include "biascorr/greene.hpp"
#include "biascorr/predictor.hpp"

namespace biascorr {

struct BiasCorrOptions {
    PredictorKind g_s_kind = PredictorKind::probit;
    PredictorKind g_y_kind = PredictorKind::logit;
    FitConfig h_cfg;           // main-model fit
    FitConfig classifier_cfg;  // g_s / g_y fits (looser default stop)
    // When set, g_s is not trained and this value is used as the soft
    // selection; used by the s_bar sweep and the collapse-to-baseline check.
    std::optional<double> forced_s_bar;

    BiasCorrOptions() { classifier_cfg.stop_pct = 0.05; }
};

struct BiasCorrOutput {
    GreeneParams h_params;
    Vec h_loss_trace;
    bool h_converged = false;
    double s_bar = 1.0;
    std::vector<int> pseudolabels;  // one per unlabeled sample, original order
    PredictorParams g_s;
    PredictorParams g_y;
    std::size_t modified_set_size = 0;
    bool no_unlabeled_warning = false;  // degenerated to the plain fit
    bool s_bar_near_zero_warning = false;
    bool g_y_one_class_warning = false;
    bool g_s_one_class_warning = false;
};

/// Mean predicted selection probability of g_s over the unlabeled samples.
double estimate_soft_selection(const PredictorParams& g_s,
                               const std::vector<SelectionSample>& d_u);

/// Hard labels 1[g_y(x_pred) > 0.5]; ties at 0.5 map to 0.
std::vector<int> assign_pseudolabels(const PredictorParams& g_y,
                                     const std::vector<SelectionSample>& d_u);

/// Labeled samples keep (y, s'=1); unlabeled ones get (y'=pseudolabel,
/// s'=s_bar). Output order: d_s then d_u, features untouched.
std::vector<SelectionSample> build_modified_training_set(
    const std::vector<SelectionSample>& d_s, const std::vector<SelectionSample>& d_u,
    double s_bar, const std::vector<int>& pseudolabels);

/// Full pipeline: fit g_s on everything (targets s), g_y on the labeled part
/// (targets y), compute s_bar and pseudolabels, build the modified set and fit
/// the robust classifier on it.
BiasCorrOutput run_biascorr(const std::vector<SelectionSample>& d_tr,
                            const BiasCorrOptions& opt);

}  // namespace biascorr
