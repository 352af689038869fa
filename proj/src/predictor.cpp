#include "biascorr/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "biascorr/normal.hpp"
#include "biascorr/rng.hpp"

namespace biascorr {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr int kMlpHidden = 64;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double clamp_prob(double p) {
    return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

}  // namespace

std::string to_string(PredictorKind k) {
    switch (k) {
        case PredictorKind::logit: return "logit";
        case PredictorKind::probit: return "probit";
        case PredictorKind::mlp: return "mlp";
    }
    return "?";
}

PredictorKind predictor_kind_from_string(const std::string& s) {
    if (s == "logit" || s == "lr") return PredictorKind::logit;
    if (s == "probit") return PredictorKind::probit;
    if (s == "mlp") return PredictorKind::mlp;
    throw std::invalid_argument("unknown predictor kind: " + s);
}

void FitConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
    if (!(stop_pct > 0.0)) throw std::invalid_argument("stop_pct must be > 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (draws < 1) throw std::invalid_argument("draws must be >= 1");
    if (batch_size < 0) throw std::invalid_argument("batch_size must be >= 0");
    if (stop_window < 1) throw std::invalid_argument("stop_window must be >= 1");
}

double sigmoid(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double logistic_predict(const Vec& beta, const Vec& x, double noise) {
    if (beta.size() != x.size()) {
        throw std::invalid_argument("logistic_predict: dimension mismatch");
    }
    if (!std::isfinite(noise)) {
        throw std::domain_error("logistic_predict: non-finite noise");
    }
    return sigmoid(dot(beta, x) + noise);
}

Vec sgd_step(const Vec& params, const Vec& grad, const FitConfig& cfg) {
    if (params.size() != grad.size()) {
        throw std::invalid_argument("sgd_step: dimension mismatch");
    }
    Vec out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            throw std::runtime_error("sgd_step: non-finite gradient at component " +
                                     std::to_string(i));
        }
        out[i] = params[i] - cfg.learning_rate * (grad[i] + cfg.weight_decay * params[i]);
    }
    return out;
}

double percent_change(double prev, double cur) {
    const double denom = std::max(std::fabs(prev), 1e-300);
    return std::fabs(cur - prev) / denom * 100.0;
}

double PredictorParams::predict(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim) {
        throw std::invalid_argument("PredictorParams::predict: dimension mismatch");
    }
    if (kind == PredictorKind::mlp) {
        double out = bias;
        for (int j = 0; j < hidden_dim; ++j) {
            double h = hidden_bias[j] +
                       dot(std::span(weights).subspan(static_cast<std::size_t>(j) * input_dim,
                                                      input_dim),
                           x);
            if (h > 0.0) out += output_weights[j] * h;
        }
        return sigmoid(out);
    }
    const double t = dot(weights, x) + bias;
    return kind == PredictorKind::probit ? std_normal_cdf(t) : sigmoid(t);
}

namespace {

struct FlatModel {
    PredictorKind kind;
    int input_dim;
    int hidden_dim;
    Vec theta;  // linear: [w..., b]; mlp: [W(h*d), b_h(h), w_out(h), b(1)]

    static FlatModel init(PredictorKind kind, int input_dim, std::uint64_t seed) {
        FlatModel m;
        m.kind = kind;
        m.input_dim = input_dim;
        m.hidden_dim = (kind == PredictorKind::mlp) ? kMlpHidden : 0;
        if (kind == PredictorKind::mlp) {
            m.theta.assign(static_cast<std::size_t>(m.hidden_dim) * input_dim +
                               2 * m.hidden_dim + 1,
                           0.0);
            Rng rng(seed, rng_stream::init);
            const double wscale = std::sqrt(6.0 / input_dim);
            for (int j = 0; j < m.hidden_dim * input_dim; ++j) {
                m.theta[j] = (2.0 * rng.uniform() - 1.0) * wscale;
            }
            const double oscale = std::sqrt(6.0 / m.hidden_dim);
            const std::size_t off = static_cast<std::size_t>(m.hidden_dim) * input_dim +
                                    m.hidden_dim;
            for (int j = 0; j < m.hidden_dim; ++j) {
                m.theta[off + j] = (2.0 * rng.uniform() - 1.0) * oscale;
            }
        } else {
            m.theta.assign(static_cast<std::size_t>(input_dim) + 1, 0.0);
        }
        return m;
    }

    PredictorParams unpack() const {
        PredictorParams p;
        p.kind = kind;
        p.input_dim = input_dim;
        p.hidden_dim = hidden_dim;
        if (kind == PredictorKind::mlp) {
            const std::size_t wsz = static_cast<std::size_t>(hidden_dim) * input_dim;
            p.weights.assign(theta.begin(), theta.begin() + wsz);
            p.hidden_bias.assign(theta.begin() + wsz, theta.begin() + wsz + hidden_dim);
            p.output_weights.assign(theta.begin() + wsz + hidden_dim,
                                    theta.begin() + wsz + 2 * hidden_dim);
            p.bias = theta.back();
        } else {
            p.weights.assign(theta.begin(), theta.end() - 1);
            p.bias = theta.back();
        }
        return p;
    }
};

// Mean Bernoulli NLL over the indexed rows, plus its gradient in the
// flattened parameterization when grad is supplied.
double nll_and_grad(const FlatModel& m, const Mat& X, const std::vector<int>& y,
                    std::span<const std::size_t> rows, Vec* grad) {
    const std::size_t n = rows.size();
    const int d = m.input_dim;
    if (grad != nullptr) grad->assign(m.theta.size(), 0.0);
    double loss = 0.0;
    Vec hidden(m.hidden_dim, 0.0);
    for (const std::size_t i : rows) {
        const auto& x = X[i];
        double p;
        double t;
        if (m.kind == PredictorKind::mlp) {
            t = m.theta.back();
            const std::size_t wsz = static_cast<std::size_t>(m.hidden_dim) * d;
            for (int j = 0; j < m.hidden_dim; ++j) {
                double h = m.theta[wsz + j];
                const double* wj = &m.theta[static_cast<std::size_t>(j) * d];
                for (int k = 0; k < d; ++k) h += wj[k] * x[k];
                hidden[j] = h > 0.0 ? h : 0.0;
                t += m.theta[wsz + m.hidden_dim + j] * hidden[j];
            }
            p = sigmoid(t);
        } else {
            t = m.theta[d];
            for (int k = 0; k < d; ++k) t += m.theta[k] * x[k];
            p = (m.kind == PredictorKind::probit) ? std_normal_cdf(t) : sigmoid(t);
        }
        const double pc = clamp_prob(p);
        loss -= y[i] == 1 ? std::log(pc) : std::log(1.0 - pc);
        if (grad == nullptr) continue;

        // d(mean NLL)/dt for one sample
        double dt;
        if (m.kind == PredictorKind::probit) {
            dt = std_normal_pdf(t) * (pc - y[i]) / (pc * (1.0 - pc));
        } else {
            dt = p - y[i];
        }
        dt /= static_cast<double>(n);

        if (m.kind == PredictorKind::mlp) {
            const std::size_t wsz = static_cast<std::size_t>(m.hidden_dim) * d;
            grad->back() += dt;
            for (int j = 0; j < m.hidden_dim; ++j) {
                const double hj = hidden[j];
                (*grad)[wsz + m.hidden_dim + j] += dt * hj;
                if (hj > 0.0) {
                    const double dh = dt * m.theta[wsz + m.hidden_dim + j];
                    (*grad)[wsz + j] += dh;
                    double* gj = &(*grad)[static_cast<std::size_t>(j) * d];
                    for (int k = 0; k < d; ++k) gj[k] += dh * x[k];
                }
            }
        } else {
            (*grad)[d] += dt;
            for (int k = 0; k < d; ++k) (*grad)[k] += dt * x[k];
        }
    }
    return loss / static_cast<double>(n);
}

ClassifierFit constant_fit(PredictorKind kind, int input_dim, int the_class) {
    ClassifierFit fit;
    FlatModel m = FlatModel::init(kind, input_dim, 0);
    std::fill(m.theta.begin(), m.theta.end(), 0.0);
    m.theta.back() = the_class == 1 ? 8.0 : -8.0;
    fit.params = m.unpack();
    fit.one_class_warning = true;
    fit.converged = true;
    return fit;
}

}  // namespace

ClassifierFit fit_binary_classifier(PredictorKind kind, const Mat& features,
                                    const std::vector<int>& targets,
                                    const FitConfig& cfg) {
    cfg.validate();
    if (features.empty() || features.size() != targets.size()) {
        throw std::invalid_argument("fit_binary_classifier: empty data or size mismatch");
    }
    const int d = static_cast<int>(features.front().size());
    for (const auto& row : features) {
        if (static_cast<int>(row.size()) != d) {
            throw std::invalid_argument("fit_binary_classifier: ragged feature matrix");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw std::domain_error("fit_binary_classifier: non-finite feature");
            }
        }
    }

    const bool any_pos = std::any_of(targets.begin(), targets.end(), [](int t) { return t == 1; });
    const bool any_neg = std::any_of(targets.begin(), targets.end(), [](int t) { return t == 0; });
    if (!any_pos || !any_neg) {
        return constant_fit(kind, d, any_pos ? 1 : 0);
    }

    FlatModel m = FlatModel::init(kind, d, cfg.seed);
    ClassifierFit fit;
    Vec grad;
    const std::size_t n = features.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch =
        cfg.batch_size == 0 ? n : std::min<std::size_t>(cfg.batch_size, n);
    Rng shuffle_rng(cfg.seed, rng_stream::batches);
    for (int epoch = 0; epoch < cfg.max_iters; ++epoch) {
        const double loss = nll_and_grad(m, features, targets, order, nullptr);
        if (!std::isfinite(loss)) {
            throw std::runtime_error("fit_binary_classifier: loss diverged at epoch " +
                                     std::to_string(epoch));
        }
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
            nll_and_grad(m, features, targets,
                         std::span<const std::size_t>(order).subspan(start, len), &grad);
            m.theta = sgd_step(m.theta, grad, cfg);
        }
    }
    fit.params = m.unpack();
    return fit;
}

}  // namespace biascorr
