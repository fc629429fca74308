#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlab/data/dataset.hpp"
#include "dlab/model/distill.hpp"
#include "dlab/model/mcq_model.hpp"
#include "dlab/model/trainer.hpp"
#include "dlab/model/vocab.hpp"

namespace dlab::pipeline {

/// Grants the placement phase its benchmark-training permit.
struct PlacementAccess {
    static model::BenchmarkTrainingPermit grant() { return {}; }
};

struct Architecture {
    std::size_t embed_dim = 32;
    std::size_t hidden_dim = 64;
    std::size_t hidden_layers = 2;
    friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct TrainingSchedule {
    std::size_t epochs = 40;
    std::size_t batch_size = 16;
    double learning_rate = 5e-3;
    double weight_decay = 0.0;
    friend bool operator==(const TrainingSchedule&, const TrainingSchedule&) = default;
};

struct LaunderingConfig {
    data::TaskSpec bench;
    std::size_t bench_size = 200;
    std::size_t max_len = 64;
    data::AlignmentSpec align;
    std::size_t intermediate_size = 5000;
    std::optional<data::CorruptionMode> corruption;
    Architecture teacher_arch;
    TrainingSchedule teacher_train;
    Architecture student_arch;
    /// Student objective; its seed is replaced by a per-run derived seed.
    model::DistillConfig distill;
    std::vector<std::uint64_t> seeds{42};

    /// Throws ConfigError on any invalid nested value or an empty seed list.
    void validate() const;
    friend bool operator==(const LaunderingConfig&, const LaunderingConfig&) = default;
};

struct ExperimentRecord {
    std::string experiment_id;
    std::string phase;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    model::SoftLoss soft_loss = model::SoftLoss::MSE;
    double temperature = 0.0;
    std::size_t size = 0;
    /// 1-based position in a distillation chain; 0 outside chains.
    std::size_t iteration = 0;
    double train_acc = 0.0;
    double bench_acc = 0.0;
    double leakage = 0.0;
    double wall_time_s = 0.0;

    friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

/// Benchmark accuracy minus chance (1 / n_choices).
double leakage(double accuracy, std::size_t n_choices);

struct PlacementResult {
    model::MCQModel teacher;
    double accuracy;
};

/// Trains a teacher with hard labels directly on benchmark-test data; the
/// only entry point allowed to do so. Wrong role -> ContaminationGuardError.
PlacementResult placement(const data::Dataset& bench, const model::Vocab& vocab, const Architecture& arch,
                          const TrainingSchedule& schedule, std::size_t max_len, std::uint64_t seed);

struct LayeringResult {
    model::MCQModel student;
    double train_acc;
};

/// Distills a freshly initialised student from `teacher` on intermediate
/// data. The student is initialised from a seed derived from cfg.seed.
LayeringResult layering(const model::MCQModel& teacher, const model::Vocab& vocab,
                        const data::Dataset& intermediate, const Architecture& arch, std::size_t max_len,
                        const model::DistillConfig& cfg);

struct IntegrationResult {
    double accuracy;
    double leakage;
};

IntegrationResult integration(const model::MCQModel& student, const model::Vocab& vocab,
                              const data::Dataset& bench);

/// Datasets and shared vocabulary of one experiment seed.
struct Workspace {
    data::Dataset bench;
    data::Dataset intermediate;
    model::Vocab vocab;
};

Workspace prepare(const LaunderingConfig& cfg, std::uint64_t seed);

/// Seed of the student trained at chain position `iteration` (1-based).
std::uint64_t student_seed(std::uint64_t experiment_seed, std::size_t iteration);
std::uint64_t teacher_seed(std::uint64_t experiment_seed);

/// One record per seed, in seed-list order. `jobs` > 1 runs seeds concurrently.
std::vector<ExperimentRecord> run_laundering(const LaunderingConfig& cfg, std::size_t jobs = 1);

/// Teacher chain: the student of step t-1 teaches a fresh student at step t.
/// Records are seed-major, n_iter per seed.
std::vector<ExperimentRecord> iterative(const LaunderingConfig& cfg, std::size_t n_iter, std::size_t jobs = 1);

enum class SweepAxis { Alpha, Size, Loss, Rho };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(std::string_view text);

/// Applies one axis value (numeric text, or "mse"/"kld" for Loss) to a config.
LaunderingConfig apply_axis(LaunderingConfig cfg, SweepAxis axis, const std::string& value);

/// Every (value, seed) cell through run_laundering. Output is sorted by axis
/// value, then by position in the seed list, regardless of `jobs`.
std::vector<ExperimentRecord> sweep(const LaunderingConfig& cfg, SweepAxis axis,
                                    const std::vector<std::string>& values, std::size_t jobs = 1);

} // namespace dlab::pipeline
