#pragma once

#include <cmath>
#include <vector>

#include "biascorr/greene.hpp"
#include "biascorr/rng.hpp"

namespace testsup {

using biascorr::GreeneParams;
using biascorr::SelectionSample;
using biascorr::Vec;

// Small random instance with a mix of labeled and unlabeled samples.
inline std::vector<SelectionSample> random_instance(std::size_t n, std::size_t d_sel,
                                                    std::size_t d_pred, std::uint64_t seed,
                                                    double labeled_fraction = 0.6) {
    biascorr::Rng rng(seed, 99);
    std::vector<SelectionSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        SelectionSample s;
        for (std::size_t j = 0; j < d_sel; ++j) s.x_sel.push_back(rng.normal());
        for (std::size_t j = 0; j < d_pred; ++j) s.x_pred.push_back(s.x_sel[j]);
        if (rng.uniform() < labeled_fraction) {
            s.selection = 1.0;
            s.label = rng.uniform() < 0.5 ? 1 : 0;
        } else {
            s.selection = 0.0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline GreeneParams random_params(std::size_t d_pred, std::size_t d_sel, std::uint64_t seed) {
    biascorr::Rng rng(seed, 98);
    GreeneParams p;
    for (std::size_t j = 0; j < d_pred; ++j) p.beta.push_back(0.5 * rng.normal());
    for (std::size_t j = 0; j < d_sel; ++j) p.gamma.push_back(0.5 * rng.normal());
    p.sigma = 0.3 + 0.5 * rng.uniform();
    p.rho = -0.7 + 1.4 * rng.uniform();
    return p;
}

inline double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1e-12, std::fabs(want));
}

}  // namespace testsup
