#pragma once

#include <stdexcept>
#include <vector>

namespace biascorr {

struct Metrics {
    double accuracy = 0.0;  // percent
    double f1 = 0.0;        // percent; 0 when precision + recall is 0
};

inline Metrics metrics(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw std::invalid_argument("metrics: empty input or length mismatch");
    }
    std::size_t correct = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++correct;
        if (predictions[i] == 1 && labels[i] == 1) ++tp;
        if (predictions[i] == 1 && labels[i] == 0) ++fp;
        if (predictions[i] == 0 && labels[i] == 1) ++fn;
    }
    Metrics m;
    m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
    const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1 = (precision + recall) > 0.0 ? 100.0 * 2.0 * precision * recall / (precision + recall)
                                      : 0.0;
    return m;
}

}  // namespace biascorr
