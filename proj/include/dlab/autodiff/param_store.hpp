#pragma once

#include <map>
#include <string>
#include <vector>

#include "dlab/autodiff/tape.hpp"
#include "dlab/autodiff/tensor.hpp"

namespace dlab::ad {

using GradMap = std::map<std::string, Tensor>;

/// Named parameters, iterated in lexicographic name order. Shapes are fixed
/// when a parameter is added.
class ParamStore {
public:
    void add(const std::string& name, Tensor value);
    bool contains(const std::string& name) const { return params_.count(name) != 0; }
    const Tensor& get(const std::string& name) const;
    /// Replaces the values; the new tensor must have the same shape.
    void assign(const std::string& name, const Tensor& value);
    std::span<double> values(const std::string& name);

    std::vector<std::string> names() const;
    std::size_t size() const noexcept { return params_.size(); }
    std::size_t total_elements() const noexcept;

    auto begin() const noexcept { return params_.begin(); }
    auto end() const noexcept { return params_.end(); }

    friend bool operator==(const ParamStore&, const ParamStore&) = default;

private:
    std::map<std::string, Tensor> params_;
};

/// Parameters registered as leaves on a tape.
class BoundParams {
public:
    BoundParams(Tape& tape, const ParamStore& params);

    Var operator[](const std::string& name) const;
    /// Gradients for every bound parameter, zeros where the loss does not reach.
    GradMap gradients(const Gradients& grads) const;
    GradMap gradients(Gradients&& grads) const;

private:
    std::map<std::string, Var> vars_;
};

} // namespace dlab::ad
