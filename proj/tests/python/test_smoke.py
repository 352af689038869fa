"""Smoke checks for the compiled extension."""

import math

import _biascorr as bc


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def test_normal():
    approx(bc.std_normal_cdf(0.0), 0.5)
    approx(bc.std_normal_cdf(1.96), 0.975002, 1e-6)
    approx(bc.std_normal_pdf(0.0), 0.3989422804014327, 1e-12)
    approx(bc.std_normal_cdf(bc.std_normal_quantile(0.3)), 0.3, 1e-9)


def test_logistic():
    approx(bc.logistic_predict([1.0], [1.0], 0.5), 1.0 / (1.0 + math.exp(-1.5)), 1e-12)


def test_selection_prob():
    approx(bc.selection_prob_given_eps([0.0], [1.0], 0.0, 2.0, 1.0), 0.5)
    approx(bc.selection_prob_given_eps([0.9], [1.0], 0.3, -0.4, 0.5), 0.5)


def test_bias_formulas():
    approx(bc.optimal_loss([0.5, 0.5]), math.log(2.0), 1e-12)
    g = bc.greene_bias([0.5], [0.5], [0.8], [0.8])
    approx(g, abs(math.log(0.8 / 0.45)), 1e-12)
    b = bc.biascorr_bias([0.5], [0.5], [0.8], [0.8], 0.4, 0.5)
    approx(b, abs(math.log(0.8 / 0.43)), 1e-12)
    approx(bc.eta_threshold(0.0), 0.5)
    rep = bc.analyze_oracle([0.2, 0.3], [0.8, 0.7], 0.4, 0.75)
    assert rep.bias_biascorr < rep.bias_greene
    assert rep.term1 > 0 and rep.term2 > 0


def test_error_bound():
    approx(bc.selection_estimate_error_bound(10, 100.0, 0.05), 0.2448, 1e-4)


def test_end_to_end():
    gamma = [1.0, 1.0, bc.intercept_for_selection_rate([1.0, 1.0], 0.35)]
    data = bc.generate_synthetic(
        n=400, d_sel=2, d_pred=1, gamma=gamma, beta=[1.5, 0.0], sigma=1.0, rho=0.6, seed=3
    )
    samples = data["samples"]
    assert len(samples) == 400
    labeled = sum(1 for s in samples if s.label is not None)
    assert 0 < labeled < 400

    cfg = bc.FitConfig(draws=32, max_iters=25, seed=7)
    opt = bc.BiasCorrOptions(
        g_s_kind=bc.PredictorKind.probit, g_y_kind=bc.PredictorKind.logit, config=cfg
    )
    out = bc.run_biascorr(samples, opt)
    assert 0.0 < out.s_bar < 1.0
    assert out.modified_set_size == 400
    assert len(out.h_params.beta) == 2  # one covariate plus intercept

    # rerun must be identical
    out2 = bc.run_biascorr(samples, opt)
    assert out.h_params.beta == out2.h_params.beta

    preds = [1 if bc.logistic_predict(out.h_params.beta, s.x_pred, 0.0) > 0.5 else 0
             for s in samples]
    acc, f1 = bc.metrics(preds, data["labels"])
    assert 0.0 <= acc <= 100.0 and 0.0 <= f1 <= 100.0


def test_biascorr_star():
    gamma = [1.0, bc.intercept_for_selection_rate([1.0], 0.5)]
    data = bc.generate_synthetic(
        n=300, d_sel=1, d_pred=1, gamma=gamma, beta=[1.0, 0.0], sigma=0.5, rho=0.4, seed=5
    )
    samples = data["samples"]
    d_s = [s for s in samples if s.selection == 1.0]
    pool = [s for s in samples if s.selection == 0.0]
    cfg = bc.FitConfig(draws=32, max_iters=20, seed=2)
    opt = bc.BiasCorrOptions(config=cfg)
    out = bc.run_biascorr_star(d_s, pool, len(samples), opt)
    assert out.modified_set_size == len(samples)
    assert 0.0 <= out.s_bar <= 1.0

    # samples carry the trailing intercept column, matching the fitted models
    d_u = [bc.SelectionSample([v, 1.0], [v, 1.0], None, 0.0) for v in (-1.0, 0.0, 1.0)]
    s_bar = bc.estimate_soft_selection(out.g_s, d_u)
    assert 0.0 <= s_bar <= 1.0
    labels = bc.assign_pseudolabels(out.g_y, d_u)
    assert set(labels) <= {0, 1}
    modified = bc.build_modified_training_set(d_s[:2], d_u, 0.3, [1, 0, 1])
    assert len(modified) == 5
    assert modified[-1].selection == 0.3


def test_fit_greene_runs():
    cfg = bc.FitConfig(draws=16, max_iters=10, seed=1)
    samples = [
        bc.SelectionSample([0.5, 1.0], [0.5, 1.0], 1, 1.0),
        bc.SelectionSample([-0.5, 1.0], [-0.5, 1.0], 0, 1.0),
        bc.SelectionSample([0.2, 1.0], [0.2, 1.0], None, 0.0),
    ]
    fit = bc.fit_greene(samples, cfg)
    assert len(fit.loss_trace) > 1
    loss = bc.total_loss(fit.params, samples, draws=16, seed=1)
    assert math.isfinite(loss)
    exact = bc.exact_loss_quadrature(fit.params, samples, nodes=40)
    assert math.isfinite(exact)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok {name}")
    print("python smoke tests passed")
