#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biascorr/biascorr.hpp"
#include "biascorr/data.hpp"

namespace biascorr {

enum class Method { nobias, ssbias, greene, biascorr, biascorr_star };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct ExperimentConfig {
    Method method = Method::biascorr;
    PredictorKind g_s_kind = PredictorKind::probit;
    PredictorKind g_y_kind = PredictorKind::logit;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    FitConfig fit;             // main-model optimizer settings
    FitConfig classifier_fit;  // g_s / g_y settings
    double split_fraction = 0.7;
    std::optional<double> forced_s_bar;
    std::optional<double> target_eta;  // re-derive the masking threshold by quantile
    bool star_pool_is_test = false;    // BiasCorr*: draw the pool from the test split

    ExperimentConfig() { classifier_fit.stop_pct = 0.05; }
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double f1 = 0.0;
    double eta = 0.0;
    double s_bar = 1.0;
    bool converged = false;
};

/// Fitted model of the first seed, kept so `eval` can re-score datasets.
struct SavedModel {
    Method method = Method::biascorr;
    GreeneParams greene;          // greene / biascorr / biascorr_star
    PredictorParams baseline;     // nobias / ssbias
    Standardizer scaler;
    std::vector<std::string> feature_names;
};

struct ExperimentReport {
    Method method = Method::biascorr;
    PredictorKind g_s_kind = PredictorKind::probit;
    PredictorKind g_y_kind = PredictorKind::logit;
    std::vector<std::uint64_t> seeds;
    double train_accuracy_mean = 0.0, train_accuracy_sd = 0.0;
    double test_accuracy_mean = 0.0, test_accuracy_sd = 0.0;
    double f1_mean = 0.0, f1_sd = 0.0;
    double eta = 0.0;
    double s_bar = 1.0;
    double threshold = 0.5;  // 1/(2 - s_bar)
    double wall_time_sec = 0.0;
    std::vector<SeedOutcome> per_seed;
    std::string config_digest;
    SavedModel model;

    /// Deterministic machine-readable form. Wall time is reported on stdout
    /// only so reruns with identical flags produce bit-identical files.
    std::string to_json_string() const;
    std::string human_table() const;
    void save(const std::string& path) const;
};

/// Runs the configured method over every seed: split, mask, standardize on
/// the training side, fit, score. The dataset is the full (unsplit) table.
ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& cfg);

/// Predictions of a fitted joint model: 1[sigmoid(beta . x_pred) > 0.5].
std::vector<int> predict_greene(const GreeneParams& params,
                                const std::vector<SelectionSample>& samples);

std::string config_digest(const Dataset& data, const ExperimentConfig& cfg);

}  // namespace biascorr
