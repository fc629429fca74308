#include "dlab/model/distill.hpp"

#include <cmath>
#include <vector>

#include "dlab/errors.hpp"

namespace dlab::model {

using ad::Tensor;
using ad::Var;

std::string to_string(SoftLoss kind) { return kind == SoftLoss::MSE ? "mse" : "kld"; }

SoftLoss soft_loss_from_string(std::string_view text) {
    if (text == "mse" || text == "MSE") return SoftLoss::MSE;
    if (text == "kld" || text == "KLD") return SoftLoss::KLD;
    throw ConfigError("unknown soft loss '" + std::string(text) + "' (expected mse or kld)");
}

void DistillConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1], got " + std::to_string(alpha));
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ConfigError("temperature must be > 0, got " + std::to_string(temperature));
    }
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

namespace {

Var hard_loss(Var student, std::span<const std::size_t> gold) {
    return ad::scale(ad::mean(ad::pick(ad::log_softmax(student), gold)), -1.0);
}

Var soft_loss(Var student, const Tensor& teacher, const DistillConfig& cfg) {
    ad::Tape& tape = *student.tape;
    const double t = cfg.temperature;
    if (cfg.soft_loss == SoftLoss::MSE) {
        if (!cfg.mse_use_temperature) {
            Var diff = ad::sub(student, tape.constant(teacher));
            return ad::mean(ad::mul(diff, diff));
        }
        Tensor softened = teacher;
        for (auto& v : softened.values()) v /= t;
        Var diff = ad::sub(ad::scale(student, 1.0 / t), tape.constant(std::move(softened)));
        return ad::mean(ad::mul(diff, diff));
    }

    // T^2 * mean over rows of sum_i p_i (log p_i - log q_i), p from the teacher.
    const std::size_t n = teacher.cols(), rows = teacher.size() / n;
    Tensor p(teacher.shape()), log_p(teacher.shape());
    std::vector<double> row(n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < n; ++i) row[i] = teacher[r * n + i] / t;
        const auto lp = ad::log_softmax_values(row);
        for (std::size_t i = 0; i < n; ++i) {
            log_p[r * n + i] = lp[i];
            p[r * n + i] = std::exp(lp[i]);
        }
    }
    Var log_q = ad::log_softmax(ad::scale(student, 1.0 / t));
    Var kl_terms = ad::mul(tape.constant(std::move(p)), ad::sub(tape.constant(std::move(log_p)), log_q));
    return ad::scale(ad::sum(kl_terms), t * t / static_cast<double>(rows));
}

} // namespace

Var distill_loss(Var student_logits, const Tensor& teacher_logits, std::span<const std::size_t> gold,
                 const DistillConfig& cfg) {
    cfg.validate();
    const Tensor& s = student_logits.value();
    if (s.rank() != 2) throw DimensionError("student logits must be [items x choices]");
    if (gold.size() != s.rows()) throw DimensionError("one gold index per student row required");
    for (auto g : gold) {
        if (g >= s.cols()) throw ContractError("gold index " + std::to_string(g) + " out of range");
    }
    if (!s.all_finite()) throw ContractError("student logits must be finite");

    const double alpha = cfg.alpha;
    if (alpha == 0.0) return hard_loss(student_logits, gold);
    if (teacher_logits.shape() != s.shape()) {
        throw DimensionError("teacher logits " + ad::shape_to_string(teacher_logits.shape()) +
                             " do not match student logits " + ad::shape_to_string(s.shape()));
    }
    if (!teacher_logits.all_finite()) throw ContractError("teacher logits must be finite");
    Var soft = soft_loss(student_logits, teacher_logits, cfg);
    if (alpha == 1.0) return soft;
    return ad::add(ad::scale(hard_loss(student_logits, gold), 1.0 - alpha), ad::scale(soft, alpha));
}

double distill_loss(std::span<const double> student_logits, std::span<const double> teacher_logits,
                    std::size_t gold, const DistillConfig& cfg) {
    if (student_logits.empty()) throw DimensionError("empty student logits");
    ad::Tape tape;
    const std::size_t n = student_logits.size();
    Var s = tape.constant(Tensor({1, n}, std::vector<double>(student_logits.begin(), student_logits.end())));
    Tensor t = teacher_logits.empty()
                   ? Tensor()
                   : Tensor({1, teacher_logits.size()}, std::vector<double>(teacher_logits.begin(), teacher_logits.end()));
    const std::size_t g[1] = {gold};
    return distill_loss(s, t, g, cfg).value().item();
}

} // namespace dlab::model
