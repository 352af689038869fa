#include "biascorr/biascorr_star.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "biascorr/rng.hpp"

namespace biascorr {

Vec distinct_key(const Vec& x_sel) {
    Vec key(x_sel.size());
    for (std::size_t i = 0; i < x_sel.size(); ++i) {
        key[i] = std::round(x_sel[i] * 1e6) / 1e6;
    }
    return key;
}

std::vector<SelectionSample> draw_target_samples(const std::vector<SelectionSample>& d_N,
                                                 std::size_t n, std::uint64_t seed) {
    if (d_N.empty()) throw std::invalid_argument("draw_target_samples: empty pool");
    if (n == 0) throw std::invalid_argument("draw_target_samples: n must be positive");
    Rng rng(seed, rng_stream::augment);
    std::vector<SelectionSample> out;
    out.reserve(n);
    if (d_N.size() >= n) {
        // partial Fisher-Yates, take the first n positions
        std::vector<std::size_t> idx(d_N.size());
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + rng.below(idx.size() - i);
            std::swap(idx[i], idx[j]);
            out.push_back(d_N[idx[i]]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(d_N[rng.below(d_N.size())]);
        }
    }
    return out;
}

AugmentationPlan empirical_freq_augment(const std::vector<SelectionSample>& d_s,
                                        const std::vector<SelectionSample>& d_n,
                                        std::size_t n) {
    const std::size_t m = d_s.size();
    if (m >= n) {
        throw std::invalid_argument("empirical_freq_augment: need n > |d_s|");
    }
    AugmentationPlan plan;
    plan.target_n = n;
    plan.drawn_pool = d_n;

    std::map<Vec, std::pair<std::size_t, std::size_t>> counts;  // (a_t, b_t)
    std::map<Vec, std::vector<std::size_t>> occurrences;        // positions of t in d_n
    for (const auto& s : d_s) {
        counts[distinct_key(s.x_sel)].first += 1;
    }
    for (std::size_t i = 0; i < d_n.size(); ++i) {
        const Vec key = distinct_key(d_n[i].x_sel);
        counts[key].second += 1;
        occurrences[key].push_back(i);
    }
    plan.per_distinct_counts = counts;

    const std::size_t wanted = n - m;
    for (const auto& [key, ab] : counts) {
        if (plan.added.size() == wanted) break;
        const auto [a_t, b_t] = ab;
        if (b_t <= a_t) continue;
        const auto it = occurrences.find(key);
        if (it == occurrences.end()) continue;  // distinct to d_s only
        std::size_t take = std::min(b_t - a_t, wanted - plan.added.size());
        for (std::size_t k = 0; k < take; ++k) {
            plan.added.push_back(d_n[it->second[k]]);
        }
    }
    plan.shortfall = plan.added.size() < wanted;
    return plan;
}

BiasCorrStarOutput run_biascorr_star(const std::vector<SelectionSample>& d_s,
                                     const std::vector<SelectionSample>& d_N,
                                     std::size_t n, const BiasCorrOptions& opt) {
    std::vector<SelectionSample> drawn = draw_target_samples(d_N, n, opt.h_cfg.seed);
    BiasCorrStarOutput out;
    out.plan = empirical_freq_augment(d_s, drawn, n);

    std::vector<SelectionSample> d_aug;
    d_aug.reserve(d_s.size() + out.plan.added.size());
    for (const auto& s : d_s) {
        SelectionSample t = s;
        t.selection = 1.0;
        d_aug.push_back(std::move(t));
    }
    for (const auto& s : out.plan.added) {
        SelectionSample t = s;
        t.selection = 0.0;
        t.label.reset();  // pool labels, if any, are not used
        d_aug.push_back(std::move(t));
    }
    out.result = run_biascorr(d_aug, opt);
    return out;
}

double selection_estimate_error_bound(double a_prime, double p0_n, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::domain_error("selection_estimate_error_bound: delta must lie in (0,1)");
    }
    if (!(a_prime >= 1.0)) {
        throw std::domain_error("selection_estimate_error_bound: a' must be >= 1");
    }
    if (!(p0_n > 0.0)) {
        throw std::domain_error("selection_estimate_error_bound: p0*n must be positive");
    }
    return std::sqrt((std::log(2.0 * a_prime) + std::log(1.0 / delta)) / p0_n);
}

}  // namespace biascorr
