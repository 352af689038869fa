#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "biascorr/biascorr.hpp"
#include "biascorr/greene.hpp"

namespace biascorr {

/// Result of the empirical-frequency augmentation step. Distinct samples are
/// keyed by their selection-feature vector rounded to 6 decimal places and
/// visited in lexicographic key order.
struct AugmentationPlan {
    std::size_t target_n = 0;
    std::vector<SelectionSample> drawn_pool;  // the n samples drawn from the target pool
    std::vector<SelectionSample> added;       // the n-m samples chosen for the unlabeled set
    std::map<Vec, std::pair<std::size_t, std::size_t>> per_distinct_counts;  // key -> (a_t, b_t)
    bool shortfall = false;  // ran out of distinct samples before reaching n-m
};

/// Rounded key used for distinct-sample comparison.
Vec distinct_key(const Vec& x_sel);

/// Uniform draw of n samples from the pool: without replacement when the pool
/// is large enough, with replacement otherwise. Deterministic given seed.
std::vector<SelectionSample> draw_target_samples(const std::vector<SelectionSample>& d_N,
                                                 std::size_t n, std::uint64_t seed);

/// Algorithm core: for each distinct sample t of d_n with b_t > a_t, add
/// b_t - a_t copies (first occurrences in d_n order) until n - m samples have
/// been added; the final group is truncated if it overshoots.
AugmentationPlan empirical_freq_augment(const std::vector<SelectionSample>& d_s,
                                        const std::vector<SelectionSample>& d_n,
                                        std::size_t n);

struct BiasCorrStarOutput {
    BiasCorrOutput result;
    AugmentationPlan plan;
};

/// Augment the biased labeled set from the unlabeled target pool, mark the
/// added samples unselected, and run the standard correction on the union.
BiasCorrStarOutput run_biascorr_star(const std::vector<SelectionSample>& d_s,
                                     const std::vector<SelectionSample>& d_N,
                                     std::size_t n, const BiasCorrOptions& opt);

/// High-probability error bound for the empirical selection-probability
/// estimate: sqrt((log(2 a') + log(1/delta)) / p0_n), natural logarithm.
double selection_estimate_error_bound(double a_prime, double p0_n, double delta);

}  // namespace biascorr
