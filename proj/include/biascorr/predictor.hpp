#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace biascorr {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

enum class PredictorKind { logit, probit, mlp };

std::string to_string(PredictorKind k);
PredictorKind predictor_kind_from_string(const std::string& s);

/// Shared optimizer settings for every fitting routine. One iteration is one
/// epoch of minibatch SGD over a seeded shuffle; the stopping rule compares
/// the full-data loss of consecutive epochs. batch_size 0 means full batch.
struct FitConfig {
    double learning_rate = 0.01;
    double weight_decay = 1e-4;
    double stop_pct = 0.025;  // stop when the percent change in loss drops below this
    int max_iters = 2000;
    std::uint64_t seed = 0;
    int draws = 200;  // R, random draws for the simulated likelihood
    double init_sigma = 0.01;
    double init_rho = 0.01;
    int batch_size = 32;
    // epochs between the two loss values compared by the stopping rule; 1
    // compares consecutive epochs
    int stop_window = 10;

    void validate() const;  // throws std::invalid_argument
};

/// Parameters of a trained binary classifier (selection predictor g_s or
/// pseudolabel predictor g_y). For the mlp kind the single hidden layer is
/// stored row-major in `weights` with `hidden_bias` and `output_weights`
/// alongside.
struct PredictorParams {
    PredictorKind kind = PredictorKind::logit;
    int input_dim = 0;
    int hidden_dim = 0;
    Vec weights;
    Vec hidden_bias;
    Vec output_weights;
    double bias = 0.0;

    double predict(std::span<const double> x) const;  // probability of class 1
};

struct ClassifierFit {
    PredictorParams params;
    Vec loss_trace;
    bool one_class_warning = false;
    bool converged = false;
};

/// Overflow-safe sigmoid.
double sigmoid(double t);

/// exp(beta.x + noise) / (1 + exp(beta.x + noise)); the class-0 probability
/// is one minus this value.
double logistic_predict(const Vec& beta, const Vec& x, double noise);

/// params - lr * (grad + weight_decay * params), elementwise.
Vec sgd_step(const Vec& params, const Vec& grad, const FitConfig& cfg);

/// Full-batch gradient descent on the Bernoulli negative log-likelihood under
/// the kind's link. Deterministic given cfg.seed.
ClassifierFit fit_binary_classifier(PredictorKind kind, const Mat& features,
                                    const std::vector<int>& targets,
                                    const FitConfig& cfg);

/// |cur - prev| / |prev| in percent; large when prev is zero.
double percent_change(double prev, double cur);

}  // namespace biascorr
