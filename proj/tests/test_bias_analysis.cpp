#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "biascorr/bias_analysis.hpp"
#include "biascorr/rng.hpp"

using namespace biascorr;

TEST_CASE("optimal loss") {
    CHECK(optimal_loss({1.0, 1.0, 1.0}) == doctest::Approx(0.0));
    CHECK(optimal_loss({0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(optimal_loss({0.8, 0.9, 0.7}) == doctest::Approx(0.2284).epsilon(1e-3));
    CHECK_THROWS_AS(optimal_loss({0.5, 0.0}), std::domain_error);
}

TEST_CASE("closed-form bias of the uncorrected estimator") {
    SUBCASE("perfect models on fully observed data have zero bias") {
        OracleModels o{{1.0, 1.0}, {1.0, 1.0}, {0.7, 0.9}, {0.7, 0.9}};
        CHECK(greene_bias(o) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("hand-computed single sample") {
        OracleModels o{{0.5}, {0.5}, {0.8}, {0.8}};
        CHECK(greene_bias(o) == doctest::Approx(std::fabs(std::log(0.8 / 0.45))).epsilon(1e-12));
        CHECK(greene_bias(o) == doctest::Approx(0.5754).epsilon(1e-3));
    }
    SUBCASE("non-positive denominator is rejected with the index") {
        // f_hat -> 0 with p = p_hat = 1 drives the denominator to zero
        CHECK_THROWS_WITH_AS(greene_bias(OracleModels{{1.0}, {1.0}, {0.5}, {1e-300}}),
                             doctest::Contains("index 0"), std::domain_error);
    }
}

TEST_CASE("closed-form bias of the corrected estimator") {
    OracleModels o{{0.5}, {0.5}, {0.8}, {0.8}};
    SUBCASE("zero shift reduces to the uncorrected bias") {
        CHECK(biascorr_bias(o, 0.0, 0.7) == doctest::Approx(greene_bias(o)).epsilon(1e-14));
        CHECK(biascorr_bias(o, 0.4, 0.0) == doctest::Approx(greene_bias(o)).epsilon(1e-14));
    }
    SUBCASE("hand-computed single sample with shift 0.2") {
        // denominator: 0.5 + 0.7*0.5*(-0.2) = 0.43
        CHECK(biascorr_bias(o, 0.4, 0.5) ==
              doctest::Approx(std::fabs(std::log(0.8 / 0.43))).epsilon(1e-12));
        CHECK(biascorr_bias(o, 0.4, 0.5) == doctest::Approx(0.6208).epsilon(1e-3));
    }
}

namespace {

// Expectation oracle: mask each sample independently, average the per-sample
// likelihood argument over realizations, then take logs. Matches the
// derivation step that replaces the selection indicator by its expectation.
double mc_expected_loss(const Vec& p_true, const Vec& p_hat, const Vec& f_hat,
                        double soft_value, int realizations, std::uint64_t seed) {
    Rng rng(seed, rng_stream::masking);
    double loss = 0.0;
    for (std::size_t i = 0; i < p_true.size(); ++i) {
        double acc = 0.0;
        for (int r = 0; r < realizations; ++r) {
            const double s = rng.uniform() < p_true[i] ? 1.0 : soft_value;
            acc += ((1.0 - s) + s * f_hat[i]) * p_hat[i];
        }
        loss += std::log(acc / realizations);
    }
    return -loss / static_cast<double>(p_true.size());
}

}  // namespace

TEST_CASE("monte-carlo masking oracle matches both closed forms") {
    // constant selection probability so the global missing ratio equals the
    // per-sample masking rate
    const std::size_t n = 50;
    Rng rng(31, 7);
    Vec p_true(n, 0.35), f(n);
    for (auto& v : f) v = 0.55 + 0.35 * rng.uniform();
    const double eta = 0.65;  // 1 - 0.35
    const double s_bar = 0.4;
    const double l_star = optimal_loss(f);

    SUBCASE("uncorrected estimator") {
        const double mc = mc_expected_loss(p_true, p_true, f, 0.0, 100000, 5);
        const double closed = greene_bias(OracleModels{p_true, p_true, f, f});
        CHECK(std::fabs(std::fabs(mc - l_star) - closed) < 1e-2);
    }
    SUBCASE("corrected estimator") {
        Vec p_hat_mod(n);
        for (std::size_t i = 0; i < n; ++i) p_hat_mod[i] = p_true[i] + s_bar * eta;
        const double mc = mc_expected_loss(p_true, p_hat_mod, f, s_bar, 100000, 6);
        const double closed =
            biascorr_bias(OracleModels{p_true, p_hat_mod, f, f}, s_bar, eta);
        CHECK(std::fabs(std::fabs(mc - l_star) - closed) < 1e-2);
    }
}

TEST_CASE("difference decomposition") {
    SUBCASE("hand-computed uniform instance") {
        const std::size_t n = 10;
        OracleModels o{Vec(n, 0.3), Vec(n, 0.3), Vec(n, 0.5), Vec(n, 0.5)};
        const DiffTerms t = diff_terms(o, 0.3, 0.7);
        CHECK(t.term1 == doctest::Approx(0.19).epsilon(1e-12));
        CHECK(t.term2 == doctest::Approx(0.405).epsilon(1e-12));
        CHECK(t.lower_bound == doctest::Approx(0.21 * 0.595).epsilon(1e-12));
    }
    SUBCASE("zero shift gives a zero lower bound") {
        OracleModels o{{0.4}, {0.4}, {0.6}, {0.6}};
        CHECK(diff_terms(o, 0.0, 0.5).lower_bound == 0.0);
        CHECK(diff_terms(o, 0.5, 0.0).lower_bound == 0.0);
    }
    SUBCASE("term2 is positive for any oracle in (0,1)") {
        Rng rng(41, 8);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 1 + static_cast<std::size_t>(rng.below(20));
            Vec p(n), f(n);
            for (auto& v : p) v = 0.01 + 0.98 * rng.uniform();
            for (auto& v : f) v = 0.01 + 0.98 * rng.uniform();
            OracleModels o{p, p, f, f};
            CHECK(diff_terms(o, rng.uniform(), rng.uniform()).term2 > 0.0);
        }
    }
}

TEST_CASE("threshold for the missingness ratio") {
    CHECK(eta_threshold(0.0) == doctest::Approx(0.5));
    CHECK(eta_threshold(0.2957) == doctest::Approx(0.5868).epsilon(1e-4));
    CHECK(eta_threshold(0.4240) == doctest::Approx(0.6345).epsilon(1e-4));
    CHECK_THROWS_AS(eta_threshold(1.0), std::domain_error);
}

TEST_CASE("bias values are invariant under sample permutation") {
    Rng rng(51, 9);
    const std::size_t n = 17;
    Vec p(n), f(n);
    for (auto& v : p) v = 0.05 + 0.4 * rng.uniform();
    for (auto& v : f) v = 0.5 + 0.45 * rng.uniform();
    OracleModels o{p, p, f, f};
    const double base = greene_bias(o);
    OracleModels rev{Vec(p.rbegin(), p.rend()), Vec(p.rbegin(), p.rend()),
                     Vec(f.rbegin(), f.rend()), Vec(f.rbegin(), f.rend())};
    CHECK(greene_bias(rev) == doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("above the threshold the corrected estimator dominates") {
    Rng rng(61, 10);
    int accepted = 0;
    while (accepted < 250) {
        const std::size_t n = 5 + static_cast<std::size_t>(rng.below(40));
        Vec p(n), f(n);
        for (auto& v : p) v = 0.05 + 0.40 * rng.uniform();
        for (auto& v : f) v = 0.50 + 0.45 * rng.uniform();
        double mean_p = 0.0;
        double max_p = 0.0;
        for (double v : p) {
            mean_p += v;
            max_p = std::max(max_p, v);
        }
        mean_p /= static_cast<double>(n);
        const double eta = 1.0 - mean_p;
        const double s_bar = 0.05 + 0.9 * rng.uniform();
        if (eta <= eta_threshold(s_bar) + 1e-9) continue;
        if (max_p + s_bar * eta > 0.98) continue;
        ++accepted;

        const BiasReport rep = analyze_oracle(p, f, s_bar, eta);
        CHECK(rep.term1 > 0.0);
        CHECK(rep.term2 > 0.0);
        CHECK(rep.bias_biascorr < rep.bias_greene);
        CHECK(rep.diff_lower_bound ==
              doctest::Approx(s_bar * eta * (rep.term1 + rep.term2)).epsilon(1e-12));
        CHECK(rep.threshold == doctest::Approx(1.0 / (2.0 - s_bar)).epsilon(1e-12));
    }
}
