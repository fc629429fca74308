#pragma once

#include <cstdint>
#include <functional>

#include "dlab/autodiff/param_store.hpp"

namespace dlab::ad {

/// Builds a scalar loss on `tape` from the bound parameters. Must be
/// deterministic: the same parameters must give the same loss.
using LossFn = std::function<Var(Tape& tape, const BoundParams& params)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t probes = 0;
};

/// Compares tape gradients with central differences at `probe_count`
/// coordinates sampled uniformly over all parameter elements. When
/// `probe_count` is at least the element count, every coordinate is checked.
/// Relative error is |g_tape - g_fd| / max(1e-8, |g_tape| + |g_fd|).
GradCheckResult grad_check(const LossFn& loss, const ParamStore& params, std::size_t probe_count,
                           std::uint64_t seed, double step = 1e-5);

} // namespace dlab::ad
