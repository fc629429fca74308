#include "dlab/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dlab/autodiff/rng.hpp"
#include "dlab/errors.hpp"

namespace dlab::ad {

namespace {

double evaluate(const LossFn& loss, const ParamStore& params) {
    Tape tape;
    BoundParams bound(tape, params);
    const Var out = loss(tape, bound);
    if (out.value().size() != 1) {
        throw ContractError("grad_check needs a scalar loss, got " + shape_to_string(out.shape()));
    }
    return out.value()[0];
}

} // namespace

GradCheckResult grad_check(const LossFn& loss, const ParamStore& params, std::size_t probe_count,
                           std::uint64_t seed, double step) {
    if (probe_count == 0) throw ContractError("grad_check needs at least one probe");

    Tape tape;
    BoundParams bound(tape, params);
    const Var out = loss(tape, bound);
    if (out.value().size() != 1) {
        throw ContractError("grad_check needs a scalar loss, got " + shape_to_string(out.shape()));
    }
    const GradMap analytic = bound.gradients(tape.backward(out));

    // Flat index -> (parameter name, element).
    std::vector<std::pair<std::string, std::size_t>> coords;
    const std::size_t total = params.total_elements();
    if (probe_count >= total) {
        for (const auto& [name, value] : params) {
            for (std::size_t i = 0; i < value.size(); ++i) coords.emplace_back(name, i);
        }
    } else {
        Rng rng(seed);
        for (std::size_t k = 0; k < probe_count; ++k) {
            auto flat = static_cast<std::size_t>(rng.below(total));
            for (const auto& [name, value] : params) {
                if (flat < value.size()) {
                    coords.emplace_back(name, flat);
                    break;
                }
                flat -= value.size();
            }
        }
    }

    GradCheckResult result;
    ParamStore probe = params;
    for (const auto& [name, index] : coords) {
        auto values = probe.values(name);
        const double original = values[index];
        values[index] = original + step;
        const double up = evaluate(loss, probe);
        values[index] = original - step;
        const double down = evaluate(loss, probe);
        values[index] = original;

        const double fd = (up - down) / (2.0 * step);
        const double g = analytic.at(name)[index];
        const double err = std::abs(g - fd) / std::max(1e-8, std::abs(g) + std::abs(fd));
        result.max_relative_error = std::max(result.max_relative_error, err);
        ++result.probes;
    }
    return result;
}

} // namespace dlab::ad
