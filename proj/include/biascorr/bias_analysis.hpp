#pragma once

#include <vector>

#include "biascorr/predictor.hpp"

namespace biascorr {

/// Ground-truth and estimated model values for one dataset, known only in
/// oracle mode (synthetic data). p_hat / f_hat hold the estimated selection
/// and outcome expectations; for the corrected estimator they refer to the
/// modified selection values and pseudolabels.
struct OracleModels {
    Vec p_true;  // p(s_i)
    Vec p_hat;
    Vec f_true;  // f(y_i | x_i)
    Vec f_hat;

    void validate() const;
};

struct DiffTerms {
    double term1 = 0.0;
    double term2 = 0.0;
    double lower_bound = 0.0;  // s_bar*eta*(term1 + term2)
};

struct BiasReport {
    double eta = 0.0;
    double s_bar = 0.0;
    double threshold = 0.0;  // 1/(2 - s_bar)
    double bias_greene = 0.0;
    double bias_biascorr = 0.0;
    double term1 = 0.0;
    double term2 = 0.0;
    double diff_lower_bound = 0.0;
};

/// Loss of the fully observed optimum: -(1/n) sum log f_i.
double optimal_loss(const Vec& f_true);

/// |(1/n) sum log( f_i / (p_hat_i + p_i*p_hat_i*(f_hat_i - 1)) )|
double greene_bias(const OracleModels& oracle);

/// Same with the corrected denominator p_hat_i + (p_i + s_bar*eta)*p_hat_i*(f_hat_i - 1),
/// where p_hat/f_hat are the modified-set estimates.
double biascorr_bias(const OracleModels& oracle, double s_bar, double eta);

/// Decomposition of the bias difference under a perfect oracle
/// (p_hat = p_true, shared outcome model):
///   term1 = 1 - s_bar*eta - (1/n) sum 2 p_i
///   term2 = (1/n) sum f_hat_i (2 p_i + s_bar*eta)
DiffTerms diff_terms(const OracleModels& oracle, double s_bar, double eta);

/// Missingness threshold 1/(2 - s_bar) above which the corrected estimator
/// is guaranteed the lower bias.
double eta_threshold(double s_bar);

/// Full oracle-mode report under the perfect-model premise: the plain
/// estimator is scored with (p_hat = p, f_hat = f), the corrected one with
/// the modified-selection expectation p + s_bar*eta and the same outcome model.
BiasReport analyze_oracle(const Vec& p_true, const Vec& f_true, double s_bar, double eta);

}  // namespace biascorr
