#include "dlab/model/trainer.hpp"

#include <numeric>

#include "dlab/autodiff/adamw.hpp"
#include "dlab/autodiff/rng.hpp"
#include "dlab/errors.hpp"

namespace dlab::model {

namespace {

double accuracy(const MCQModel& model, std::span<const EncodedItem> items) {
    const auto logits = model.logits(items);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (argmax(logits[i]) == items[i].gold) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(items.size());
}

TrainResult run_training(MCQModel& student, const Vocab& vocab, const data::Dataset& data, const MCQModel* teacher,
                         const DistillConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw ContractError("cannot train on an empty dataset");
    if (teacher == nullptr && cfg.alpha != 0.0) {
        throw ContractError("training without a teacher requires alpha = 0");
    }
    if (student.config().vocab_size != vocab.size()) {
        throw ContractError("student vocabulary size " + std::to_string(student.config().vocab_size) +
                            " differs from the vocabulary (" + std::to_string(vocab.size()) + ")");
    }
    if (teacher != nullptr && teacher->config().vocab_size != student.config().vocab_size) {
        throw ContractError("teacher vocabulary size " + std::to_string(teacher->config().vocab_size) +
                            " differs from student vocabulary size " +
                            std::to_string(student.config().vocab_size));
    }
    if (data.n_choices() != student.config().n_choices) {
        throw ContractError("dataset has " + std::to_string(data.n_choices()) + " choices, model scores " +
                            std::to_string(student.config().n_choices));
    }

    const auto items = encode_all(data, vocab, student.config().max_len);
    const std::size_t n = student.config().n_choices;

    // The teacher is frozen, so its logits are computed once. With alpha = 0
    // they would be multiplied by zero and are skipped.
    std::vector<std::vector<double>> teacher_logits;
    if (teacher != nullptr && cfg.alpha != 0.0) {
        teacher_logits = teacher->logits(encode_all(data, vocab, teacher->config().max_len));
    }

    ad::AdamW optimizer(student.params(),
                        ad::AdamWConfig{cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay});
    const Rng shuffle_root = Rng(cfg.seed).stream("shuffle");

    std::vector<std::size_t> order(items.size());
    std::vector<EncodedItem> batch;
    std::vector<std::size_t> gold;
    TrainResult result;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = shuffle_root.stream("epoch", epoch);
        rng.shuffle(std::span<std::size_t>(order));

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            gold.clear();
            ad::Tensor targets;
            if (!teacher_logits.empty()) targets = ad::Tensor::zeros({end - start, n});
            for (std::size_t k = start; k < end; ++k) {
                batch.push_back(items[order[k]]);
                gold.push_back(items[order[k]].gold);
                if (!teacher_logits.empty()) {
                    for (std::size_t c = 0; c < n; ++c) targets.at(k - start, c) = teacher_logits[order[k]][c];
                }
            }
            ad::Tape tape;
            ad::BoundParams bound(tape, student.params());
            const ad::Var logits = student.forward(bound, batch);
            const ad::Var loss = distill_loss(logits, targets, gold, cfg);
            optimizer.step(student.params(), bound.gradients(tape.backward(loss)));
        }
        result.epoch_accuracy.push_back(accuracy(student, items));
    }
    return result;
}

} // namespace

TrainResult train(MCQModel& student, const Vocab& vocab, const data::Dataset& data, const MCQModel* teacher,
                  const DistillConfig& cfg) {
    if (data.role == data::Role::BenchmarkTest) {
        throw ContaminationGuardError("refusing to train on benchmark-test data outside the placement phase");
    }
    return run_training(student, vocab, data, teacher, cfg);
}

TrainResult train(MCQModel& student, const Vocab& vocab, const data::Dataset& data, const MCQModel* teacher,
                  const DistillConfig& cfg, const BenchmarkTrainingPermit&) {
    return run_training(student, vocab, data, teacher, cfg);
}

double evaluate(const MCQModel& model, const Vocab& vocab, const data::Dataset& data) {
    if (data.empty()) throw ContractError("cannot evaluate on an empty dataset");
    if (model.config().vocab_size != vocab.size()) {
        throw ContractError("model vocabulary size differs from the vocabulary");
    }
    const auto items = encode_all(data, vocab, model.config().max_len);
    return accuracy(model, items);
}

} // namespace dlab::model
