#include "mma/optimizer.hpp"

#include <cmath>

#include "mma/error.hpp"

namespace mma {

void AdamOptimizer::step(ParamStore& params) {
    auto& entries = params.entries();
    if (moments_.empty()) {
        moments_.resize(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            moments_[i].m.assign(entries[i].second.size(), 0.0);
            moments_[i].v.assign(entries[i].second.size(), 0.0);
        }
    }
    if (moments_.size() != entries.size()) {
        throw ContractError("optimizer: parameter set changed between steps");
    }
    for (const auto& [name, t] : entries) {
        for (double g : t.grad()) {
            if (!std::isfinite(g)) {
                throw NumericalError("optimizer: non-finite gradient in parameter " + name);
            }
        }
    }

    ++step_count_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(step_count_));

    for (std::size_t i = 0; i < entries.size(); ++i) {
        Tensor& p = entries[i].second;
        auto& m = moments_[i].m;
        auto& v = moments_[i].v;
        const auto& g = p.grad();
        auto& w = p.value();
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = opt_.beta1 * m[j] + (1.0 - opt_.beta1) * g[j];
            v[j] = opt_.beta2 * v[j] + (1.0 - opt_.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            w[j] -= opt_.lr * m_hat / (std::sqrt(v_hat) + opt_.eps);
        }
    }
    params.zero_grads();
}

}  // namespace mma
