#include "ambient/adam.hpp"

#include <cmath>

#include "ambient/errors.hpp"

namespace ambient::nn {

void AdamState::init(const std::vector<ParamRef>& params) {
    t = 0;
    m.clear();
    v.clear();
    for (const auto& p : params) {
        m.emplace_back(p.value->size(), 0.0);
        v.emplace_back(p.value->size(), 0.0);
    }
}

void adam_step(const std::vector<ParamRef>& params, AdamState& st, const AdamConfig& cfg) {
    if (!st.initialized()) st.init(params);
    if (st.m.size() != params.size()) throw ConfigError("adam_step: state/param mismatch");
    ++st.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& theta = params[i].value->v;
        const auto& g = params[i].grad->v;
        auto& mi = st.m[i];
        auto& vi = st.v[i];
        for (std::size_t j = 0; j < theta.size(); ++j) {
            mi[j] = cfg.beta1 * mi[j] + (1.0 - cfg.beta1) * g[j];
            vi[j] = cfg.beta2 * vi[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double m_hat = mi[j] / bc1;
            const double v_hat = vi[j] / bc2;
            theta[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

}  // namespace ambient::nn
