#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "biascorr/predictor.hpp"

namespace biascorr {

inline constexpr double kSigmaFloor = 1e-6;
inline constexpr double kRhoClamp = 1.0 - 1e-6;

/// Parameters of the joint selection/prediction model: prediction
/// coefficients beta, selection coefficients gamma, prediction-noise scale
/// sigma and noise correlation rho. sigma and rho stay inside their clamps
/// after every optimizer step.
struct GreeneParams {
    Vec beta;
    Vec gamma;
    double sigma = 0.01;
    double rho = 0.01;

    void project();
};

/// One training record: selection features, prediction features (a sub-vector
/// of the selection features by construction), an optional binary label and a
/// selection value in [0,1] (0/1 for raw data, s_bar for modified sets).
struct SelectionSample {
    Vec x_sel;
    Vec x_pred;
    std::optional<int> label;
    double selection = 0.0;

    void validate() const;  // invariants on label/selection pairing
};

/// n x R standard-normal draws, generated once per fit and held fixed.
class DrawMatrix {
public:
    DrawMatrix() = default;
    static DrawMatrix generate(std::size_t n, std::size_t r, std::uint64_t seed);

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return r_; }
    std::uint64_t seed() const { return seed_; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data_.data() + i * r_, r_);
    }

private:
    std::size_t n_ = 0;
    std::size_t r_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> data_;
};

struct GreeneGradient {
    Vec beta;
    Vec gamma;
    double sigma = 0.0;
    double rho = 0.0;
};

struct GreeneFit {
    GreeneParams params;
    Vec loss_trace;
    bool converged = false;
};

/// Thrown when the loss turns non-finite mid-fit; carries the last finite state.
class GreeneDivergenceError : public std::runtime_error {
public:
    GreeneDivergenceError(const std::string& what, GreeneParams last)
        : std::runtime_error(what), last_finite_state(std::move(last)) {}
    GreeneParams last_finite_state;
};

/// Phi[(2s-1) * (gamma.x + rho*eps) / sqrt(1-rho^2)]; the s=1 / s=0 cases are
/// the two conditional selection probabilities and soft s interpolates them.
double selection_prob_given_eps(const Vec& gamma, const Vec& x_sel, double rho,
                                double eps, double s);

/// log of the R-draw average of [(1-s) + s f(y|x,eps_r)] * P(s|x,eps_r);
/// the average is floored at 1e-300 before the log.
double sample_sim_likelihood(const GreeneParams& params, const SelectionSample& sample,
                             std::span<const double> draws_row);

/// Simulated negative log-likelihood: minus the mean of sample_sim_likelihood.
/// Requires draws shaped (n, R) with R > sqrt(n).
double total_loss(const GreeneParams& params, const std::vector<SelectionSample>& dataset,
                  const DrawMatrix& draws);

/// Deterministic Gauss-Hermite evaluation of the exact (integral-form)
/// negative log-likelihood; test oracle for the simulated loss.
double exact_loss_quadrature(const GreeneParams& params,
                             const std::vector<SelectionSample>& dataset, int nodes);

/// Analytic gradient of total_loss over (beta, gamma, sigma, rho).
GreeneGradient loss_gradient(const GreeneParams& params,
                             const std::vector<SelectionSample>& dataset,
                             const DrawMatrix& draws);

/// Full-batch projected gradient descent on the simulated loss. beta and
/// gamma start at zero, sigma/rho at their configured initial values; the
/// draws come once from cfg.seed and stay fixed for the whole fit.
GreeneFit fit_greene(const std::vector<SelectionSample>& dataset, const FitConfig& cfg);

}  // namespace biascorr
