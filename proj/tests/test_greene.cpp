#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biascorr/data.hpp"
#include "biascorr/greene.hpp"
#include "biascorr/normal.hpp"
#include "biascorr/rng.hpp"
#include "test_support.hpp"

using namespace biascorr;
using testsup::random_instance;
using testsup::random_params;

TEST_CASE("selection probability kernel") {
    CHECK(selection_prob_given_eps({0.0}, {1.0}, 0.0, 2.0, 1.0) == doctest::Approx(0.5));
    // soft value 0.5 kills the argument entirely
    CHECK(selection_prob_given_eps({0.7}, {1.3}, 0.4, -0.9, 0.5) == doctest::Approx(0.5));
    CHECK(selection_prob_given_eps({0.5}, {1.0}, 0.6, 1.0, 1.0) ==
          doctest::Approx(std_normal_cdf(1.375)).epsilon(1e-12));
    CHECK_THROWS_AS(selection_prob_given_eps({0.5}, {1.0}, 0.6, NAN, 1.0),
                    std::domain_error);
}

TEST_CASE("s=1 and s=0 probabilities are complementary") {
    Rng rng(17, 1);
    for (int i = 0; i < 200; ++i) {
        const Vec gamma = {rng.normal(), rng.normal()};
        const Vec x = {rng.normal(), rng.normal()};
        const double rho = -0.9 + 1.8 * rng.uniform();
        const double eps = rng.normal();
        const double p1 = selection_prob_given_eps(gamma, x, rho, eps, 1.0);
        const double p0 = selection_prob_given_eps(gamma, x, rho, eps, 0.0);
        CHECK(std::fabs(p1 + p0 - 1.0) < 1e-12);
    }
}

TEST_CASE("sample likelihood for an unselected sample ignores the label model") {
    GreeneParams p;
    p.beta = {0.4};
    p.gamma = {0.8};
    p.sigma = 0.5;
    p.rho = 0.3;
    SelectionSample s;
    s.x_sel = {1.2};
    s.x_pred = {1.2};
    s.selection = 0.0;
    const DrawMatrix draws = DrawMatrix::generate(1, 200, 3);
    const double got = sample_sim_likelihood(p, s, draws.row(0));
    double expect = 0.0;
    for (double e : draws.row(0)) {
        expect += std_normal_cdf(-(p.gamma[0] * 1.2 + p.rho * e) /
                                 std::sqrt(1.0 - p.rho * p.rho));
    }
    expect = std::log(expect / 200.0);
    CHECK(got == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("sigma = rho = 0 makes the likelihood draw-independent") {
    GreeneParams p;
    p.beta = {0.7, -0.2};
    p.gamma = {0.5, 0.1};
    p.sigma = 0.0;
    p.rho = 0.0;
    SelectionSample s;
    s.x_sel = {0.3, -1.0};
    s.x_pred = {0.3, -1.0};
    s.selection = 1.0;
    s.label = 1;
    const DrawMatrix d1 = DrawMatrix::generate(1, 64, 1);
    const DrawMatrix d2 = DrawMatrix::generate(1, 64, 2);
    const double l1 = sample_sim_likelihood(p, s, d1.row(0));
    const double l2 = sample_sim_likelihood(p, s, d2.row(0));
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-14));
    const double bx = 0.7 * 0.3 - 0.2 * -1.0;
    const double gx = 0.5 * 0.3 + 0.1 * -1.0;
    const double expect = std::log(sigmoid(bx) * std_normal_cdf(gx));
    CHECK(l1 == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("rho = 0 factorizes into selection and prediction parts") {
    GreeneParams p;
    p.beta = {0.9};
    p.gamma = {0.4};
    p.sigma = 1.0;
    p.rho = 0.0;
    SelectionSample s;
    s.x_sel = {0.8};
    s.x_pred = {0.8};
    s.selection = 1.0;
    s.label = 1;
    const std::size_t R = 100000;
    const DrawMatrix draws = DrawMatrix::generate(1, R, 9);
    const double joint = sample_sim_likelihood(p, s, draws.row(0));
    double pred = 0.0;
    for (double e : draws.row(0)) pred += sigmoid(p.beta[0] * 0.8 + p.sigma * e);
    const double factored = std::log(std_normal_cdf(p.gamma[0] * 0.8)) +
                            std::log(pred / static_cast<double>(R));
    CHECK(std::fabs(joint - factored) < 1e-3);
}

TEST_CASE("missing label with positive selection is rejected") {
    GreeneParams p;
    p.beta = {0.1};
    p.gamma = {0.1};
    SelectionSample s;
    s.x_sel = {1.0};
    s.x_pred = {1.0};
    s.selection = 0.7;
    const DrawMatrix draws = DrawMatrix::generate(1, 16, 0);
    CHECK_THROWS_AS(sample_sim_likelihood(p, s, draws.row(0)), std::invalid_argument);
}

TEST_CASE("total_loss basics") {
    auto data = random_instance(6, 2, 2, 21);
    const GreeneParams p = random_params(2, 2, 22);
    const DrawMatrix draws = DrawMatrix::generate(6, 64, 5);

    SUBCASE("single sample equals minus its log-likelihood") {
        std::vector<SelectionSample> one = {data[0]};
        const DrawMatrix d1 = DrawMatrix::generate(1, 64, 5);
        CHECK(total_loss(p, one, d1) ==
              doctest::Approx(-sample_sim_likelihood(p, one[0], d1.row(0))).epsilon(1e-14));
    }
    SUBCASE("duplicating the dataset leaves the mean unchanged") {
        const double base = total_loss(p, data, draws);
        std::vector<SelectionSample> doubled = data;
        doubled.insert(doubled.end(), data.begin(), data.end());
        DrawMatrix d2 = DrawMatrix::generate(12, 64, 5);
        // rebuild with the duplicated draw rows by evaluating per sample
        double acc = 0.0;
        for (std::size_t i = 0; i < doubled.size(); ++i) {
            acc += sample_sim_likelihood(p, doubled[i], draws.row(i % 6));
        }
        CHECK(base == doctest::Approx(-acc / 12.0).epsilon(1e-13));
    }
    SUBCASE("permutation with identically permuted draws is invariant") {
        const double base = total_loss(p, data, draws);
        std::vector<std::size_t> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        double acc = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            acc += sample_sim_likelihood(p, data[perm[i]], draws.row(perm[i]));
        }
        CHECK(base == doctest::Approx(-acc / 6.0).epsilon(1e-13));
    }
    SUBCASE("R <= sqrt(n) is a precondition error") {
        const DrawMatrix bad = DrawMatrix::generate(6, 2, 5);
        CHECK_THROWS_WITH_AS(total_loss(p, data, bad),
                             doctest::Contains("R > sqrt(n)"), std::invalid_argument);
    }
}

TEST_CASE("draw matrix regeneration is reproducible") {
    const DrawMatrix a = DrawMatrix::generate(4, 32, 77);
    const DrawMatrix b = DrawMatrix::generate(4, 32, 77);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t r = 0; r < 32; ++r) CHECK(a.row(i)[r] == b.row(i)[r]);
    }
}

TEST_CASE("quadrature oracle") {
    auto data = random_instance(8, 2, 2, 31);
    GreeneParams p = random_params(2, 2, 32);

    SUBCASE("constant integrand case matches the closed form") {
        p.sigma = 0.0;
        p.rho = 0.0;
        double closed = 0.0;
        for (const auto& s : data) {
            const double gx = std::inner_product(p.gamma.begin(), p.gamma.end(),
                                                 s.x_sel.begin(), 0.0);
            double w = 1.0;
            if (s.selection > 0.0) {
                const double bx = std::inner_product(p.beta.begin(), p.beta.end(),
                                                     s.x_pred.begin(), 0.0);
                const double q = sigmoid(bx);
                const double f = *s.label == 1 ? q : 1.0 - q;
                w = (1.0 - s.selection) + s.selection * f;
            }
            closed += std::log(w * std_normal_cdf((2.0 * s.selection - 1.0) * gx));
        }
        closed = -closed / static_cast<double>(data.size());
        CHECK(exact_loss_quadrature(p, data, 40) == doctest::Approx(closed).epsilon(1e-10));
    }
    SUBCASE("20 vs 40 nodes agree") {
        CHECK(std::fabs(exact_loss_quadrature(p, data, 20) -
                        exact_loss_quadrature(p, data, 40)) < 1e-6);
    }
    SUBCASE("node floor enforced") {
        CHECK_THROWS_AS(exact_loss_quadrature(p, data, 10), std::invalid_argument);
    }
}

TEST_CASE("simulated loss converges to the quadrature value") {
    auto data = random_instance(10, 2, 2, 41);
    const GreeneParams p = random_params(2, 2, 42);
    const DrawMatrix draws = DrawMatrix::generate(10, 100000, 43);
    const double sim = total_loss(p, data, draws);
    const double exact = exact_loss_quadrature(p, data, 40);
    CHECK(std::fabs(sim - exact) < 0.01);
}

namespace {

GreeneGradient finite_difference(const GreeneParams& p,
                                 const std::vector<SelectionSample>& data,
                                 const DrawMatrix& draws, double h = 1e-6) {
    GreeneGradient g;
    auto eval = [&](const GreeneParams& q) { return total_loss(q, data, draws); };
    for (std::size_t j = 0; j < p.beta.size(); ++j) {
        GreeneParams a = p, b = p;
        a.beta[j] += h;
        b.beta[j] -= h;
        g.beta.push_back((eval(a) - eval(b)) / (2.0 * h));
    }
    for (std::size_t j = 0; j < p.gamma.size(); ++j) {
        GreeneParams a = p, b = p;
        a.gamma[j] += h;
        b.gamma[j] -= h;
        g.gamma.push_back((eval(a) - eval(b)) / (2.0 * h));
    }
    {
        GreeneParams a = p, b = p;
        a.sigma += h;
        b.sigma -= h;
        g.sigma = (eval(a) - eval(b)) / (2.0 * h);
    }
    {
        GreeneParams a = p, b = p;
        a.rho += h;
        b.rho -= h;
        g.rho = (eval(a) - eval(b)) / (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("analytic gradient matches finite differences") {
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        auto data = random_instance(12, 3, 2, 100 + trial);
        const GreeneParams p = random_params(2, 3, 200 + trial);
        const DrawMatrix draws = DrawMatrix::generate(12, 64, 300 + trial);
        const GreeneGradient got = loss_gradient(p, data, draws);
        const GreeneGradient fd = finite_difference(p, data, draws);
        for (std::size_t j = 0; j < got.beta.size(); ++j) {
            CHECK(testsup::rel_err(got.beta[j], fd.beta[j]) < 1e-5);
        }
        for (std::size_t j = 0; j < got.gamma.size(); ++j) {
            CHECK(testsup::rel_err(got.gamma[j], fd.gamma[j]) < 1e-5);
        }
        CHECK(testsup::rel_err(got.sigma, fd.sigma) < 1e-5);
        CHECK(testsup::rel_err(got.rho, fd.rho) < 1e-5);
    }
}

TEST_CASE("beta gradient vanishes when nothing is selected") {
    auto data = random_instance(8, 2, 2, 55, 0.0);  // everything unlabeled
    const GreeneParams p = random_params(2, 2, 56);
    const DrawMatrix draws = DrawMatrix::generate(8, 32, 57);
    const GreeneGradient g = loss_gradient(p, data, draws);
    for (double v : g.beta) CHECK(v == 0.0);
    CHECK(g.sigma == 0.0);
}

TEST_CASE("soft selection values reconnect the beta gradient") {
    auto data = random_instance(8, 2, 2, 65, 0.0);
    Rng rng(66, 4);
    for (auto& s : data) {
        s.selection = 0.35;  // soft value as assigned by the correction
        s.label = rng.uniform() < 0.5 ? 1 : 0;
    }
    const GreeneParams p = random_params(2, 2, 67);
    const DrawMatrix draws = DrawMatrix::generate(8, 32, 68);
    const GreeneGradient g = loss_gradient(p, data, draws);
    bool any_nonzero = false;
    for (double v : g.beta) any_nonzero = any_nonzero || v != 0.0;
    CHECK(any_nonzero);
}

TEST_CASE("fit_greene is deterministic and keeps parameters inside the clamps") {
    auto data = random_instance(60, 2, 2, 71);
    FitConfig cfg;
    cfg.seed = 9;
    cfg.draws = 16;
    cfg.max_iters = 60;
    cfg.stop_pct = 1e-9;
    const GreeneFit a = fit_greene(data, cfg);
    const GreeneFit b = fit_greene(data, cfg);
    CHECK(a.params.beta == b.params.beta);
    CHECK(a.params.gamma == b.params.gamma);
    CHECK(a.params.sigma == b.params.sigma);
    CHECK(a.params.rho == b.params.rho);
    CHECK(a.loss_trace == b.loss_trace);
    CHECK(a.params.sigma >= kSigmaFloor);
    CHECK(std::fabs(a.params.rho) <= kRhoClamp);
}

TEST_CASE("fit_greene recovers the generating decision rule at rho = 0") {
    SynthSpec spec;
    spec.n = 5000;
    spec.d_sel = 3;
    spec.d_pred = 2;
    spec.gamma = {0.8, 0.4, -0.3, 0.2};
    spec.beta = {1.2, -0.9, 0.1};
    spec.sigma = 0.3;
    spec.rho = 0.0;
    spec.seed = 3;
    const SyntheticData synth = generate_synthetic(spec);
    const Standardizer scaler = Standardizer::fit(synth.dataset);
    const auto samples = make_selection_samples(synth.dataset, scaler.apply(synth.dataset.X));

    FitConfig cfg;
    cfg.seed = 4;
    cfg.draws = 100;
    cfg.learning_rate = 0.5;
    cfg.stop_pct = 0.001;
    cfg.max_iters = 400;
    cfg.batch_size = 0;  // plain gradient descent so the trace is monotone
    const GreeneFit fit = fit_greene(samples, cfg);
    // sign agreement on the informative coordinates
    for (std::size_t j = 0; j < 2; ++j) {
        if (std::fabs(spec.beta[j]) > 0.5) {
            CHECK(fit.params.beta[j] * spec.beta[j] > 0.0);
        }
    }

    // loss trace settles into a non-increasing tail
    const auto& trace = fit.loss_trace;
    REQUIRE(trace.size() > 11);
    for (std::size_t i = 11; i < trace.size(); ++i) {
        CHECK(trace[i] <= trace[i - 1] + 1e-9);
    }
}
