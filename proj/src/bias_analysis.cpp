#include "biascorr/bias_analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biascorr {

namespace {

void check_unit_interval(const Vec& v, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0 && v[i] <= 1.0)) {
            throw std::domain_error(std::string(name) + "[" + std::to_string(i) +
                                    "] must lie in (0,1]");
        }
    }
}

}  // namespace

void OracleModels::validate() const {
    if (p_true.size() != p_hat.size() || p_true.size() != f_true.size() ||
        p_true.size() != f_hat.size() || p_true.empty()) {
        throw std::invalid_argument("OracleModels: vectors must be nonempty and equal-sized");
    }
    check_unit_interval(p_true, "p_true");
    check_unit_interval(p_hat, "p_hat");
    check_unit_interval(f_true, "f_true");
    check_unit_interval(f_hat, "f_hat");
}

double optimal_loss(const Vec& f_true) {
    if (f_true.empty()) throw std::invalid_argument("optimal_loss: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < f_true.size(); ++i) {
        if (!(f_true[i] > 0.0 && f_true[i] <= 1.0)) {
            throw std::domain_error("optimal_loss: likelihood out of (0,1] at index " +
                                    std::to_string(i));
        }
        acc += std::log(f_true[i]);
    }
    return -acc / static_cast<double>(f_true.size());
}

namespace {

// Shared body of the two closed-form biases; `shift` is 0 for the plain
// estimator and s_bar*eta for the corrected one.
double bias_closed_form(const OracleModels& oracle, double shift) {
    oracle.validate();
    const std::size_t n = oracle.p_true.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double denom =
            oracle.p_hat[i] +
            (oracle.p_true[i] + shift) * oracle.p_hat[i] * (oracle.f_hat[i] - 1.0);
        if (!(denom > 0.0)) {
            throw std::domain_error("bias denominator non-positive at index " +
                                    std::to_string(i));
        }
        acc += std::log(oracle.f_true[i] / denom);
    }
    return std::fabs(acc / static_cast<double>(n));
}

}  // namespace

double greene_bias(const OracleModels& oracle) { return bias_closed_form(oracle, 0.0); }

double biascorr_bias(const OracleModels& oracle, double s_bar, double eta) {
    if (!(s_bar >= 0.0 && s_bar <= 1.0) || !(eta >= 0.0 && eta <= 1.0)) {
        throw std::domain_error("biascorr_bias: s_bar and eta must lie in [0,1]");
    }
    return bias_closed_form(oracle, s_bar * eta);
}

DiffTerms diff_terms(const OracleModels& oracle, double s_bar, double eta) {
    oracle.validate();
    const double se = s_bar * eta;
    const std::size_t n = oracle.p_true.size();
    double sum_p = 0.0;
    double sum_f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_p += oracle.p_true[i];
        sum_f += oracle.f_hat[i] * (2.0 * oracle.p_true[i] + se);
    }
    DiffTerms t;
    t.term1 = 1.0 - se - 2.0 * sum_p / static_cast<double>(n);
    t.term2 = sum_f / static_cast<double>(n);
    t.lower_bound = se * (t.term1 + t.term2);
    return t;
}

double eta_threshold(double s_bar) {
    if (!(s_bar >= 0.0 && s_bar < 1.0)) {
        throw std::domain_error("eta_threshold: s_bar must lie in [0,1)");
    }
    return 1.0 / (2.0 - s_bar);
}

BiasReport analyze_oracle(const Vec& p_true, const Vec& f_true, double s_bar, double eta) {
    BiasReport rep;
    rep.eta = eta;
    rep.s_bar = s_bar;
    rep.threshold = eta_threshold(s_bar);

    OracleModels plain{p_true, p_true, f_true, f_true};
    rep.bias_greene = greene_bias(plain);

    // Under the perfect-model premise the expectation of the modified
    // selection value is p + s_bar*eta.
    Vec p_hat_mod(p_true.size());
    for (std::size_t i = 0; i < p_true.size(); ++i) {
        p_hat_mod[i] = std::min(p_true[i] + s_bar * eta, 1.0);
    }
    OracleModels corrected{p_true, p_hat_mod, f_true, f_true};
    rep.bias_biascorr = biascorr_bias(corrected, s_bar, eta);

    const DiffTerms t = diff_terms(plain, s_bar, eta);
    rep.term1 = t.term1;
    rep.term2 = t.term2;
    rep.diff_lower_bound = t.lower_bound;
    return rep;
}

}  // namespace biascorr
