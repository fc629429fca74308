#pragma once

#include <vector>

#include "dlab/data/dataset.hpp"
#include "dlab/model/distill.hpp"
#include "dlab/model/mcq_model.hpp"

namespace dlab::pipeline {
struct PlacementAccess;
}

namespace dlab::model {

/// Proof that the caller is the placement phase, the one place allowed to
/// train on benchmark-test data. Only the pipeline can mint one.
class BenchmarkTrainingPermit {
private:
    BenchmarkTrainingPermit() = default;
    friend struct dlab::pipeline::PlacementAccess;
};

struct TrainResult {
    /// Training-set accuracy after each epoch.
    std::vector<double> epoch_accuracy;
    double final_accuracy() const { return epoch_accuracy.empty() ? 0.0 : epoch_accuracy.back(); }
};

/// Shuffled mini-batch training of `student` on `data` with the distillation
/// objective. Without a teacher, cfg.alpha must be 0. Rejects benchmark-test
/// data with ContaminationGuardError.
TrainResult train(MCQModel& student, const Vocab& vocab, const data::Dataset& data, const MCQModel* teacher,
                  const DistillConfig& cfg);

/// Placement-only overload that may train on benchmark-test data.
TrainResult train(MCQModel& student, const Vocab& vocab, const data::Dataset& data, const MCQModel* teacher,
                  const DistillConfig& cfg, const BenchmarkTrainingPermit& permit);

/// Fraction of items whose argmax logit (lowest index on ties) is the gold
/// answer. Throws ContractError on an empty dataset.
double evaluate(const MCQModel& model, const Vocab& vocab, const data::Dataset& data);

} // namespace dlab::model
