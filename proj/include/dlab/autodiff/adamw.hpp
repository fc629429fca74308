#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dlab/autodiff/param_store.hpp"

namespace dlab::ad {

struct AdamWConfig {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

/// Adaptive-moment optimizer with bias correction and decoupled weight decay.
/// Decay is applied first, p <- p - lr * wd * p, then the moment step.
class AdamW {
public:
    AdamW(const ParamStore& params, AdamWConfig config);

    /// Throws ContractError if `grads` lacks any parameter or shapes differ.
    void step(ParamStore& params, const GradMap& grads);

    std::uint64_t step_count() const noexcept { return step_; }
    const AdamWConfig& config() const noexcept { return config_; }
    const Tensor& first_moment(const std::string& name) const { return first_.at(name); }
    const Tensor& second_moment(const std::string& name) const { return second_.at(name); }

private:
    AdamWConfig config_;
    std::map<std::string, Tensor> first_;
    std::map<std::string, Tensor> second_;
    std::uint64_t step_ = 0;
};

} // namespace dlab::ad
