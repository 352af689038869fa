#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "biascorr/bias_analysis.hpp"
#include "biascorr/biascorr.hpp"
#include "biascorr/biascorr_star.hpp"
#include "biascorr/data.hpp"
#include "biascorr/greene.hpp"
#include "biascorr/metrics.hpp"
#include "biascorr/normal.hpp"
#include "biascorr/predictor.hpp"

namespace py = pybind11;
using namespace biascorr;

namespace {

FitConfig make_fit_config(double learning_rate, double weight_decay, double stop_pct,
                          int max_iters, std::uint64_t seed, int draws, double init_sigma,
                          double init_rho, int batch_size, int stop_window) {
    FitConfig cfg;
    cfg.learning_rate = learning_rate;
    cfg.weight_decay = weight_decay;
    cfg.stop_pct = stop_pct;
    cfg.max_iters = max_iters;
    cfg.seed = seed;
    cfg.draws = draws;
    cfg.init_sigma = init_sigma;
    cfg.init_rho = init_rho;
    cfg.batch_size = batch_size;
    cfg.stop_window = stop_window;
    return cfg;
}

SelectionSample make_sample(Vec x_sel, Vec x_pred, py::object label, double selection) {
    SelectionSample s;
    s.x_sel = std::move(x_sel);
    s.x_pred = std::move(x_pred);
    if (!label.is_none()) s.label = label.cast<int>();
    s.selection = selection;
    s.validate();
    return s;
}

}  // namespace

PYBIND11_MODULE(_biascorr, m) {
    m.doc() = "classifiers robust to non-random label missingness";

    m.def("std_normal_cdf", &std_normal_cdf, py::arg("z"));
    m.def("std_normal_pdf", &std_normal_pdf, py::arg("z"));
    m.def("std_normal_quantile", &std_normal_quantile, py::arg("p"));
    m.def("logistic_predict", &logistic_predict, py::arg("beta"), py::arg("x"),
          py::arg("noise") = 0.0);

    py::class_<FitConfig>(m, "FitConfig")
        .def(py::init(&make_fit_config), py::arg("learning_rate") = 0.01,
             py::arg("weight_decay") = 1e-4, py::arg("stop_pct") = 0.025,
             py::arg("max_iters") = 2000, py::arg("seed") = 0, py::arg("draws") = 200,
             py::arg("init_sigma") = 0.01, py::arg("init_rho") = 0.01,
             py::arg("batch_size") = 32, py::arg("stop_window") = 10)
        .def_readwrite("learning_rate", &FitConfig::learning_rate)
        .def_readwrite("weight_decay", &FitConfig::weight_decay)
        .def_readwrite("stop_pct", &FitConfig::stop_pct)
        .def_readwrite("max_iters", &FitConfig::max_iters)
        .def_readwrite("seed", &FitConfig::seed)
        .def_readwrite("draws", &FitConfig::draws)
        .def_readwrite("init_sigma", &FitConfig::init_sigma)
        .def_readwrite("init_rho", &FitConfig::init_rho)
        .def_readwrite("batch_size", &FitConfig::batch_size)
        .def_readwrite("stop_window", &FitConfig::stop_window);

    py::enum_<PredictorKind>(m, "PredictorKind")
        .value("logit", PredictorKind::logit)
        .value("probit", PredictorKind::probit)
        .value("mlp", PredictorKind::mlp);

    py::class_<PredictorParams>(m, "PredictorParams")
        .def_readonly("kind", &PredictorParams::kind)
        .def_readonly("weights", &PredictorParams::weights)
        .def_readonly("bias", &PredictorParams::bias)
        .def("predict",
             [](const PredictorParams& p, const Vec& x) { return p.predict(x); });

    py::class_<ClassifierFit>(m, "ClassifierFit")
        .def_readonly("params", &ClassifierFit::params)
        .def_readonly("loss_trace", &ClassifierFit::loss_trace)
        .def_readonly("one_class_warning", &ClassifierFit::one_class_warning)
        .def_readonly("converged", &ClassifierFit::converged);

    m.def("fit_binary_classifier", &fit_binary_classifier, py::arg("kind"),
          py::arg("features"), py::arg("targets"), py::arg("config"));

    py::class_<SelectionSample>(m, "SelectionSample")
        .def(py::init(&make_sample), py::arg("x_sel"), py::arg("x_pred"),
             py::arg("label") = py::none(), py::arg("selection") = 0.0)
        .def_readonly("x_sel", &SelectionSample::x_sel)
        .def_readonly("x_pred", &SelectionSample::x_pred)
        .def_readonly("selection", &SelectionSample::selection)
        .def_property_readonly("label", [](const SelectionSample& s) -> py::object {
            if (s.label.has_value()) return py::int_(*s.label);
            return py::none();
        });

    py::class_<GreeneParams>(m, "GreeneParams")
        .def(py::init([](Vec beta, Vec gamma, double sigma, double rho) {
                 GreeneParams p;
                 p.beta = std::move(beta);
                 p.gamma = std::move(gamma);
                 p.sigma = sigma;
                 p.rho = rho;
                 return p;
             }),
             py::arg("beta"), py::arg("gamma"), py::arg("sigma") = 0.01,
             py::arg("rho") = 0.01)
        .def_readwrite("beta", &GreeneParams::beta)
        .def_readwrite("gamma", &GreeneParams::gamma)
        .def_readwrite("sigma", &GreeneParams::sigma)
        .def_readwrite("rho", &GreeneParams::rho);

    py::class_<GreeneFit>(m, "GreeneFit")
        .def_readonly("params", &GreeneFit::params)
        .def_readonly("loss_trace", &GreeneFit::loss_trace)
        .def_readonly("converged", &GreeneFit::converged);

    m.def("selection_prob_given_eps", &selection_prob_given_eps, py::arg("gamma"),
          py::arg("x_sel"), py::arg("rho"), py::arg("eps"), py::arg("s"));
    m.def(
        "total_loss",
        [](const GreeneParams& p, const std::vector<SelectionSample>& data, int draws,
           std::uint64_t seed) {
            return total_loss(p, data, DrawMatrix::generate(data.size(), draws, seed));
        },
        py::arg("params"), py::arg("dataset"), py::arg("draws"), py::arg("seed") = 0);
    m.def("exact_loss_quadrature", &exact_loss_quadrature, py::arg("params"),
          py::arg("dataset"), py::arg("nodes") = 40);
    m.def("fit_greene", &fit_greene, py::arg("dataset"), py::arg("config"));

    py::class_<BiasCorrOptions>(m, "BiasCorrOptions")
        .def(py::init([](PredictorKind gs, PredictorKind gy, const FitConfig& h_cfg,
                         py::object forced_s_bar) {
                 BiasCorrOptions o;
                 o.g_s_kind = gs;
                 o.g_y_kind = gy;
                 o.h_cfg = h_cfg;
                 o.classifier_cfg.learning_rate = h_cfg.learning_rate;
                 o.classifier_cfg.weight_decay = h_cfg.weight_decay;
                 if (!forced_s_bar.is_none()) o.forced_s_bar = forced_s_bar.cast<double>();
                 return o;
             }),
             py::arg("g_s_kind") = PredictorKind::probit,
             py::arg("g_y_kind") = PredictorKind::logit, py::arg("config") = FitConfig{},
             py::arg("forced_s_bar") = py::none());

    py::class_<BiasCorrOutput>(m, "BiasCorrOutput")
        .def_readonly("h_params", &BiasCorrOutput::h_params)
        .def_readonly("h_loss_trace", &BiasCorrOutput::h_loss_trace)
        .def_readonly("s_bar", &BiasCorrOutput::s_bar)
        .def_readonly("pseudolabels", &BiasCorrOutput::pseudolabels)
        .def_readonly("g_s", &BiasCorrOutput::g_s)
        .def_readonly("g_y", &BiasCorrOutput::g_y)
        .def_readonly("modified_set_size", &BiasCorrOutput::modified_set_size)
        .def_readonly("no_unlabeled_warning", &BiasCorrOutput::no_unlabeled_warning);

    m.def("estimate_soft_selection", &estimate_soft_selection, py::arg("g_s"),
          py::arg("d_u"));
    m.def("assign_pseudolabels", &assign_pseudolabels, py::arg("g_y"), py::arg("d_u"));
    m.def("build_modified_training_set", &build_modified_training_set, py::arg("d_s"),
          py::arg("d_u"), py::arg("s_bar"), py::arg("pseudolabels"));
    m.def("run_biascorr", &run_biascorr, py::arg("dataset"), py::arg("options"));
    m.def(
        "run_biascorr_star",
        [](const std::vector<SelectionSample>& d_s, const std::vector<SelectionSample>& d_N,
           std::size_t n, const BiasCorrOptions& opt) {
            return run_biascorr_star(d_s, d_N, n, opt).result;
        },
        py::arg("d_s"), py::arg("d_pool"), py::arg("n"), py::arg("options"));
    m.def("selection_estimate_error_bound", &selection_estimate_error_bound,
          py::arg("a_prime"), py::arg("p0_n"), py::arg("delta"));

    py::class_<BiasReport>(m, "BiasReport")
        .def_readonly("eta", &BiasReport::eta)
        .def_readonly("s_bar", &BiasReport::s_bar)
        .def_readonly("threshold", &BiasReport::threshold)
        .def_readonly("bias_greene", &BiasReport::bias_greene)
        .def_readonly("bias_biascorr", &BiasReport::bias_biascorr)
        .def_readonly("term1", &BiasReport::term1)
        .def_readonly("term2", &BiasReport::term2)
        .def_readonly("diff_lower_bound", &BiasReport::diff_lower_bound);

    m.def("optimal_loss", &optimal_loss, py::arg("f_true"));
    m.def(
        "greene_bias",
        [](const Vec& p_true, const Vec& p_hat, const Vec& f_true, const Vec& f_hat) {
            return greene_bias(OracleModels{p_true, p_hat, f_true, f_hat});
        },
        py::arg("p_true"), py::arg("p_hat"), py::arg("f_true"), py::arg("f_hat"));
    m.def(
        "biascorr_bias",
        [](const Vec& p_true, const Vec& p_hat, const Vec& f_true, const Vec& f_hat,
           double s_bar, double eta) {
            return biascorr_bias(OracleModels{p_true, p_hat, f_true, f_hat}, s_bar, eta);
        },
        py::arg("p_true"), py::arg("p_hat"), py::arg("f_true"), py::arg("f_hat"),
        py::arg("s_bar"), py::arg("eta"));
    m.def("eta_threshold", &eta_threshold, py::arg("s_bar"));
    m.def("analyze_oracle", &analyze_oracle, py::arg("p_true"), py::arg("f_true"),
          py::arg("s_bar"), py::arg("eta"));

    m.def(
        "generate_synthetic",
        [](std::size_t n, std::size_t d_sel, std::size_t d_pred, Vec gamma, Vec beta,
           double sigma, double rho, std::uint64_t seed) {
            SynthSpec spec;
            spec.n = n;
            spec.d_sel = d_sel;
            spec.d_pred = d_pred;
            spec.gamma = std::move(gamma);
            spec.beta = std::move(beta);
            spec.sigma = sigma;
            spec.rho = rho;
            spec.seed = seed;
            SyntheticData data = generate_synthetic(spec);
            const Standardizer scaler = Standardizer::fit(data.dataset);
            py::dict out;
            out["samples"] = make_selection_samples(data.dataset, scaler.apply(data.dataset.X));
            out["labels"] = data.dataset.y;
            out["p_select"] = data.truth.p_select;
            out["f_label"] = data.truth.f_label;
            return out;
        },
        py::arg("n"), py::arg("d_sel"), py::arg("d_pred"), py::arg("gamma"), py::arg("beta"),
        py::arg("sigma") = 1.0, py::arg("rho") = 0.0, py::arg("seed") = 0);

    m.def(
        "metrics",
        [](const std::vector<int>& pred, const std::vector<int>& labels) {
            const Metrics res = metrics(pred, labels);
            return py::make_tuple(res.accuracy, res.f1);
        },
        py::arg("predictions"), py::arg("labels"));

    m.def("intercept_for_selection_rate", &intercept_for_selection_rate,
          py::arg("gamma_covariates"), py::arg("rate"));
}
