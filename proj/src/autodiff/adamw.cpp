#include "dlab/autodiff/adamw.hpp"

#include <cmath>

#include "dlab/errors.hpp"

namespace dlab::ad {

AdamW::AdamW(const ParamStore& params, AdamWConfig config) : config_(config) {
    for (const auto& [name, value] : params) {
        first_.emplace(name, Tensor::zeros(value.shape()));
        second_.emplace(name, Tensor::zeros(value.shape()));
    }
}

void AdamW::step(ParamStore& params, const GradMap& grads) {
    for (const auto& [name, value] : params) {
        auto g = grads.find(name);
        if (g == grads.end()) throw ContractError("missing gradient for parameter '" + name + "'");
        if (g->second.shape() != value.shape()) {
            throw DimensionError("gradient for '" + name + "' has shape " + shape_to_string(g->second.shape()) +
                                 ", parameter has " + shape_to_string(value.shape()));
        }
        if (first_.count(name) == 0) throw ContractError("optimizer state has no slot for '" + name + "'");
    }

    ++step_;
    const double lr = config_.learning_rate;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const double keep = 1.0 - lr * config_.weight_decay;
    const double inv_correction1 = 1.0 / correction1;
    const double inv_correction2 = 1.0 / correction2;
    const double eps = config_.epsilon;

    for (const auto& [name, value] : params) {
        double* p = params.values(name).data();
        const double* g = grads.at(name).values().data();
        double* m = first_.at(name).values().data();
        double* v = second_.at(name).values().data();
        const std::size_t n = value.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double gi = g[i];
            const double mi = b1 * m[i] + (1.0 - b1) * gi;
            const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
            m[i] = mi;
            v[i] = vi;
            // Decoupled decay first, then the bias-corrected moment step.
            p[i] = keep * p[i] - lr * (mi * inv_correction1) / (std::sqrt(vi * inv_correction2) + eps);
        }
    }
}

} // namespace dlab::ad
