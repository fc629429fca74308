#include "dlab/autodiff/param_store.hpp"

#include <algorithm>

#include "dlab/errors.hpp"

namespace dlab::ad {

void ParamStore::add(const std::string& name, Tensor value) {
    if (name.empty()) throw ContractError("parameter name must not be empty");
    if (!params_.emplace(name, std::move(value)).second) {
        throw ContractError("duplicate parameter name '" + name + "'");
    }
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter '" + name + "'");
    return it->second;
}

void ParamStore::assign(const std::string& name, const Tensor& value) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter '" + name + "'");
    if (it->second.shape() != value.shape()) {
        throw DimensionError("parameter '" + name + "' has shape " + shape_to_string(it->second.shape()) +
                             ", cannot assign " + shape_to_string(value.shape()));
    }
    std::copy(value.values().begin(), value.values().end(), it->second.values().begin());
}

std::span<double> ParamStore::values(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter '" + name + "'");
    return it->second.values();
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [name, _] : params_) out.push_back(name);
    return out;
}

std::size_t ParamStore::total_elements() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, t] : params_) n += t.size();
    return n;
}

BoundParams::BoundParams(Tape& tape, const ParamStore& params) {
    for (const auto& [name, value] : params) vars_.emplace(name, tape.leaf(value));
}

Var BoundParams::operator[](const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw ContractError("parameter '" + name + "' is not bound");
    return it->second;
}

GradMap BoundParams::gradients(const Gradients& grads) const {
    GradMap out;
    for (const auto& [name, var] : vars_) out.emplace(name, grads.of(var));
    return out;
}

GradMap BoundParams::gradients(Gradients&& grads) const {
    GradMap out;
    for (const auto& [name, var] : vars_) out.emplace(name, grads.take(var));
    return out;
}

} // namespace dlab::ad
