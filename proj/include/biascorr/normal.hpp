#pragma once

#include <utility>
#include <vector>

namespace biascorr {

/// Standard normal CDF, rational Chebyshev approximation (Cody's erf/erfc).
/// Throws std::domain_error for non-finite input.
double std_normal_cdf(double z);

/// Standard normal density exp(-z^2/2)/sqrt(2*pi).
double std_normal_pdf(double z);

/// Inverse standard normal CDF for p in (0,1), Newton-refined to ~1e-12.
double std_normal_quantile(double p);

/// Gauss-Hermite nodes and weights for integrals of the form
/// integral exp(-t^2) f(t) dt = sum w_k f(t_k). Nodes ascending.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

/// integral f(eps) phi(eps) deps evaluated on a Gauss-Hermite rule
/// via the substitution eps = sqrt(2) * t.
template <typename F>
double integrate_gaussian(const GaussHermite& rule, F&& f) {
    constexpr double inv_sqrt_pi = 0.5641895835477562869;
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        acc += rule.weights[k] * f(1.4142135623730951 * rule.nodes[k]);
    }
    return acc * inv_sqrt_pi;
}

}  // namespace biascorr
