#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dlab/autodiff/tape.hpp"

namespace dlab::model {

enum class SoftLoss { MSE, KLD };

std::string to_string(SoftLoss kind);
SoftLoss soft_loss_from_string(std::string_view text);

/// Student objective and training schedule.
struct DistillConfig {
    /// Weight of the soft (teacher) term; 0 is plain cross-entropy.
    double alpha = 1.0;
    double temperature = 2.0;
    SoftLoss soft_loss = SoftLoss::MSE;
    /// When set, MSE compares logits divided by the temperature.
    bool mse_use_temperature = false;
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double learning_rate = 5e-4;
    double weight_decay = 0.01;
    std::uint64_t seed = 42;

    /// Throws ConfigError naming the field and its bound.
    void validate() const;
    friend bool operator==(const DistillConfig&, const DistillConfig&) = default;
};

/// Batch-mean loss (1 - alpha) * CE(student, gold) + alpha * soft, where
/// soft is mean squared logit error or T^2 * KL(softmax(t/T) || softmax(s/T)).
/// `teacher_logits` must have the student's shape, or be empty when alpha == 0.
/// Teacher logits are constants.
ad::Var distill_loss(ad::Var student_logits, const ad::Tensor& teacher_logits, std::span<const std::size_t> gold,
                     const DistillConfig& cfg);

/// Single-item convenience form.
double distill_loss(std::span<const double> student_logits, std::span<const double> teacher_logits,
                    std::size_t gold, const DistillConfig& cfg);

} // namespace dlab::model
