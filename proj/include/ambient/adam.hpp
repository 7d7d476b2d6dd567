#pragma once

#include <vector>

#include "ambient/layers.hpp"

namespace ambient::nn {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment buffers, one flat vector per parameter tensor.
struct AdamState {
    long t = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    void init(const std::vector<ParamRef>& params);
    bool initialized() const { return !m.empty(); }
};

// One bias-corrected update: theta -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(const std::vector<ParamRef>& params, AdamState& st, const AdamConfig& cfg);

}  // namespace ambient::nn
