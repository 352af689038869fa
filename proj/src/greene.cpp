#include "biascorr/greene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "biascorr/normal.hpp"
#include "biascorr/rng.hpp"

namespace biascorr {

namespace {

constexpr double kAvgFloor = 1e-300;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_R_exceeds_sqrt_n(std::size_t n, std::size_t r) {
    if (static_cast<double>(r) * static_cast<double>(r) <= static_cast<double>(n)) {
        throw std::invalid_argument(
            "simulated likelihood needs R > sqrt(n) draws for the estimate to be "
            "asymptotically exact (n=" +
            std::to_string(n) + ", R=" + std::to_string(r) + ")");
    }
}

// Per-draw weight (1-s) + s*f(y|x,eps) and its derivative in t = beta.x + sigma*eps.
// With s == 0 the prediction model never enters, matching the hard-unselected case.
struct DrawWeight {
    double w;
    double dw_dt;  // zero when s == 0
};

inline DrawWeight draw_weight(double s, int y, double t) {
    if (s <= 0.0) return {1.0, 0.0};
    const double q = sigmoid(t);
    const double f = (y == 1) ? q : 1.0 - q;
    const double df_dt = (y == 1 ? 1.0 : -1.0) * q * (1.0 - q);
    return {(1.0 - s) + s * f, s * df_dt};
}

}  // namespace

void GreeneParams::project() {
    sigma = std::max(sigma, kSigmaFloor);
    rho = std::clamp(rho, -kRhoClamp, kRhoClamp);
}

void SelectionSample::validate() const {
    if (selection < 0.0 || selection > 1.0 || !std::isfinite(selection)) {
        throw std::invalid_argument("SelectionSample: selection must lie in [0,1]");
    }
    if (selection > 0.0 && !label.has_value()) {
        throw std::invalid_argument("SelectionSample: positive selection requires a label");
    }
    if (!label.has_value() && selection != 0.0) {
        throw std::invalid_argument("SelectionSample: missing label requires selection 0");
    }
}

DrawMatrix DrawMatrix::generate(std::size_t n, std::size_t r, std::uint64_t seed) {
    DrawMatrix m;
    m.n_ = n;
    m.r_ = r;
    m.seed_ = seed;
    m.data_.resize(n * r);
    Rng rng(seed, rng_stream::draws);
    for (auto& v : m.data_) v = rng.normal();
    return m;
}

double selection_prob_given_eps(const Vec& gamma, const Vec& x_sel, double rho,
                                double eps, double s) {
    if (gamma.size() != x_sel.size()) {
        throw std::invalid_argument("selection_prob_given_eps: dimension mismatch");
    }
    if (!std::isfinite(eps) || !std::isfinite(rho) || !std::isfinite(s)) {
        throw std::domain_error("selection_prob_given_eps: non-finite input");
    }
    const double r = std::clamp(rho, -kRhoClamp, kRhoClamp);
    const double arg = (dot(gamma, x_sel) + r * eps) / std::sqrt(1.0 - r * r);
    return std_normal_cdf((2.0 * s - 1.0) * arg);
}

namespace {

// Single pass over one sample: returns the floored draw-average and, when
// grad accumulators are supplied, adds d(log avg)/d(theta) into them.
double sample_average(const GreeneParams& p, const SelectionSample& sample,
                      std::span<const double> eps_row, GreeneGradient* grad,
                      std::size_t sample_index) {
    const double s = sample.selection;
    const int y = sample.label.value_or(0);
    const double c = 2.0 * s - 1.0;
    const double rho = p.rho;
    const double r2 = 1.0 - rho * rho;
    const double sq = std::sqrt(r2);
    const double gx = dot(p.gamma, sample.x_sel);
    const double bx = (s > 0.0) ? dot(p.beta, sample.x_pred) : 0.0;

    const std::size_t R = eps_row.size();
    double acc = 0.0;
    double acc_dt = 0.0;    // sum of P * dw/dt            (beta, sigma channel)
    double acc_dte = 0.0;   // sum of P * dw/dt * eps      (sigma channel)
    double acc_dsel = 0.0;  // sum of w * phi(c*arg) * c   (gamma, rho channel)
    double acc_drho = 0.0;  // sum of w * phi(c*arg) * c * darg/drho
    for (std::size_t r = 0; r < R; ++r) {
        const double e = eps_row[r];
        const double arg = (gx + rho * e) / sq;
        const double P = std_normal_cdf(c * arg);
        const DrawWeight dw = draw_weight(s, y, bx + p.sigma * e);
        acc += dw.w * P;
        if (grad != nullptr) {
            if (dw.dw_dt != 0.0) {
                acc_dt += P * dw.dw_dt;
                acc_dte += P * dw.dw_dt * e;
            }
            const double dsel = std_normal_pdf(c * arg) * c;
            acc_dsel += dw.w * dsel;
            acc_drho += dw.w * dsel * (e / sq + arg * rho / r2);
        }
    }
    const double inv_r = 1.0 / static_cast<double>(R);
    const double avg = std::max(acc * inv_r, kAvgFloor);
    if (!std::isfinite(avg)) {
        throw std::runtime_error("simulated likelihood non-finite at sample " +
                                 std::to_string(sample_index));
    }
    if (grad != nullptr) {
        const double scale = inv_r / avg;  // d(log avg)/d(sum component)
        if (!std::isfinite(scale)) {
            throw std::runtime_error("likelihood gradient non-finite at sample " +
                                     std::to_string(sample_index));
        }
        for (std::size_t k = 0; k < p.beta.size(); ++k) {
            grad->beta[k] += scale * acc_dt * sample.x_pred[k];
        }
        grad->sigma += scale * acc_dte;
        const double gsel = scale * acc_dsel / sq;
        for (std::size_t k = 0; k < p.gamma.size(); ++k) {
            grad->gamma[k] += gsel * sample.x_sel[k];
        }
        grad->rho += scale * acc_drho;
    }
    return avg;
}

// Loss (and optional gradient) over the indexed samples with fixed draw rows.
double eval_subset(const GreeneParams& params, const std::vector<SelectionSample>& dataset,
                   const DrawMatrix& draws, std::span<const std::size_t> rows,
                   GreeneGradient* grad) {
    if (grad != nullptr) {
        grad->beta.assign(params.beta.size(), 0.0);
        grad->gamma.assign(params.gamma.size(), 0.0);
        grad->sigma = 0.0;
        grad->rho = 0.0;
    }
    double loss = 0.0;
    for (const std::size_t i : rows) {
        dataset[i].validate();
        if (dataset[i].x_sel.size() != params.gamma.size() ||
            dataset[i].x_pred.size() != params.beta.size()) {
            throw std::invalid_argument("total_loss: feature dimensions disagree at sample " +
                                        std::to_string(i));
        }
        loss += std::log(sample_average(params, dataset[i], draws.row(i), grad, i));
    }
    const double inv_n = -1.0 / static_cast<double>(rows.size());
    if (grad != nullptr) {
        for (auto& v : grad->beta) v *= inv_n;
        for (auto& v : grad->gamma) v *= inv_n;
        grad->sigma *= inv_n;
        grad->rho *= inv_n;
    }
    return inv_n * loss;
}

double eval_loss(const GreeneParams& params, const std::vector<SelectionSample>& dataset,
                 const DrawMatrix& draws, GreeneGradient* grad) {
    const std::size_t n = dataset.size();
    if (n == 0) throw std::invalid_argument("total_loss: empty dataset");
    if (draws.rows() != n) {
        throw std::invalid_argument("total_loss: draw matrix has " +
                                    std::to_string(draws.rows()) + " rows for " +
                                    std::to_string(n) + " samples");
    }
    check_R_exceeds_sqrt_n(n, draws.cols());
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return eval_subset(params, dataset, draws, all, grad);
}

}  // namespace

double sample_sim_likelihood(const GreeneParams& params, const SelectionSample& sample,
                             std::span<const double> draws_row) {
    sample.validate();
    return std::log(sample_average(params, sample, draws_row, nullptr, 0));
}

double total_loss(const GreeneParams& params, const std::vector<SelectionSample>& dataset,
                  const DrawMatrix& draws) {
    return eval_loss(params, dataset, draws, nullptr);
}

GreeneGradient loss_gradient(const GreeneParams& params,
                             const std::vector<SelectionSample>& dataset,
                             const DrawMatrix& draws) {
    GreeneGradient g;
    eval_loss(params, dataset, draws, &g);
    return g;
}

double exact_loss_quadrature(const GreeneParams& params,
                             const std::vector<SelectionSample>& dataset, int nodes) {
    if (nodes < 20) {
        throw std::invalid_argument("exact_loss_quadrature: need at least 20 nodes");
    }
    if (dataset.empty()) {
        throw std::invalid_argument("exact_loss_quadrature: empty dataset");
    }
    const GaussHermite rule = gauss_hermite(nodes);
    const double rho = std::clamp(params.rho, -kRhoClamp, kRhoClamp);
    const double sq = std::sqrt(1.0 - rho * rho);
    double loss = 0.0;
    for (const auto& sample : dataset) {
        sample.validate();
        const double s = sample.selection;
        const int y = sample.label.value_or(0);
        const double c = 2.0 * s - 1.0;
        const double gx = dot(params.gamma, sample.x_sel);
        const double bx = (s > 0.0) ? dot(params.beta, sample.x_pred) : 0.0;
        const double integral = integrate_gaussian(rule, [&](double eps) {
            const double P = std_normal_cdf(c * (gx + rho * eps) / sq);
            return draw_weight(s, y, bx + params.sigma * eps).w * P;
        });
        loss += std::log(std::max(integral, kAvgFloor));
    }
    return -loss / static_cast<double>(dataset.size());
}

GreeneFit fit_greene(const std::vector<SelectionSample>& dataset, const FitConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("fit_greene: empty dataset");
    const std::size_t n = dataset.size();
    check_R_exceeds_sqrt_n(n, static_cast<std::size_t>(cfg.draws));

    const DrawMatrix draws =
        DrawMatrix::generate(n, static_cast<std::size_t>(cfg.draws), cfg.seed);

    GreeneParams params;
    params.beta.assign(dataset.front().x_pred.size(), 0.0);
    params.gamma.assign(dataset.front().x_sel.size(), 0.0);
    params.sigma = cfg.init_sigma;
    params.rho = cfg.init_rho;
    params.project();

    GreeneFit fit;
    GreeneGradient grad;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch =
        cfg.batch_size == 0 ? n : std::min<std::size_t>(cfg.batch_size, n);
    Rng shuffle_rng(cfg.seed, rng_stream::batches);

    auto apply_step = [&](int epoch) {
        params.beta = sgd_step(params.beta, grad.beta, cfg);
        params.gamma = sgd_step(params.gamma, grad.gamma, cfg);
        // no weight decay on the noise scale or the correlation
        if (!std::isfinite(grad.sigma) || !std::isfinite(grad.rho)) {
            throw std::runtime_error("fit_greene: non-finite sigma/rho gradient at epoch " +
                                     std::to_string(epoch));
        }
        params.sigma -= cfg.learning_rate * grad.sigma;
        params.rho -= cfg.learning_rate * grad.rho;
        params.project();
    };

    for (int epoch = 0; epoch < cfg.max_iters; ++epoch) {
        const double loss = eval_loss(params, dataset, draws, nullptr);
        if (!std::isfinite(loss)) {
            throw GreeneDivergenceError("fit_greene: loss diverged at epoch " +
                                            std::to_string(epoch),
                                        fit.params);
        }
        fit.params = params;
        fit.loss_trace.push_back(loss);
        if (epoch >= cfg.stop_window &&
            percent_change(fit.loss_trace[epoch - cfg.stop_window], loss) < cfg.stop_pct) {
            fit.converged = true;
            break;
        }

        if (batch < n) {
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const std::size_t j = i + shuffle_rng.below(n - i);
                std::swap(order[i], order[j]);
            }
        }
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            eval_subset(params, dataset, draws,
                        std::span<const std::size_t>(order).subspan(start, len), &grad);
            apply_step(epoch);
        }
    }
    return fit;
}

}  // namespace biascorr
