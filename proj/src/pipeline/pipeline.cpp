#include "dlab/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "dlab/autodiff/rng.hpp"
#include "dlab/data/corruption.hpp"
#include "dlab/data/generator.hpp"
#include "dlab/errors.hpp"

namespace dlab::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Runs fn(0..count-1) on up to `jobs` threads; rethrows the first failure.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

model::ModelConfig model_config(const Architecture& arch, const model::Vocab& vocab, std::size_t n_choices,
                                std::size_t max_len) {
    model::ModelConfig c;
    c.vocab_size = vocab.size();
    c.embed_dim = arch.embed_dim;
    c.hidden_dim = arch.hidden_dim;
    c.hidden_layers = arch.hidden_layers;
    c.n_choices = n_choices;
    c.max_len = max_len;
    return c;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

ExperimentRecord make_record(const LaunderingConfig& cfg, std::uint64_t seed, std::string phase,
                             std::size_t iteration, double train_acc, const IntegrationResult& eval,
                             double seconds) {
    ExperimentRecord r;
    r.phase = std::move(phase);
    r.experiment_id = r.phase + "-s" + std::to_string(seed);
    if (iteration > 0) r.experiment_id += "-t" + std::to_string(iteration);
    r.seed = seed;
    r.alpha = cfg.distill.alpha;
    r.soft_loss = cfg.distill.soft_loss;
    r.temperature = cfg.distill.temperature;
    r.size = cfg.intermediate_size;
    r.iteration = iteration;
    r.train_acc = train_acc;
    r.bench_acc = eval.accuracy;
    r.leakage = eval.leakage;
    r.wall_time_s = seconds;
    return r;
}

model::DistillConfig distill_for(const LaunderingConfig& cfg, std::uint64_t seed, std::size_t iteration) {
    model::DistillConfig d = cfg.distill;
    d.seed = student_seed(seed, iteration);
    return d;
}

} // namespace

void LaunderingConfig::validate() const {
    bench.validate();
    align.validate();
    distill.validate();
    if (corruption) corruption->validate();
    if (bench_size < 1) throw ConfigError("[bench].size must be >= 1");
    if (intermediate_size < 1) throw ConfigError("[intermediate].size must be >= 1");
    if (max_len < 4) throw ConfigError("[bench].max_len must be >= 4");
    for (const auto* arch : {&teacher_arch, &student_arch}) {
        if (arch->embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
        if (arch->hidden_layers > 0 && arch->hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
    }
    if (teacher_train.epochs < 1) throw ConfigError("[teacher].epochs must be >= 1");
    if (teacher_train.batch_size < 1) throw ConfigError("[teacher].batch_size must be >= 1");
    if (!(teacher_train.learning_rate >= 0.0)) throw ConfigError("[teacher].learning_rate must be >= 0");
    if (!(teacher_train.weight_decay >= 0.0)) throw ConfigError("[teacher].weight_decay must be >= 0");
    if (seeds.empty()) throw ConfigError("[sweep].seeds must list at least one seed");
}

double leakage(double accuracy, std::size_t n_choices) {
    if (n_choices == 0) throw ContractError("leakage needs a positive choice count");
    return accuracy - 1.0 / static_cast<double>(n_choices);
}

PlacementResult placement(const data::Dataset& bench, const model::Vocab& vocab, const Architecture& arch,
                          const TrainingSchedule& schedule, std::size_t max_len, std::uint64_t seed) {
    if (bench.role != data::Role::BenchmarkTest) {
        throw ContaminationGuardError("placement trains on benchmark-test data; got a " + to_string(bench.role) +
                                      " dataset");
    }
    if (bench.empty()) throw ContractError("placement needs a non-empty benchmark");
    model::MCQModel teacher(model_config(arch, vocab, bench.n_choices(), max_len), derive_seed(seed, "init"));
    model::DistillConfig hp;
    hp.alpha = 0.0;
    hp.epochs = schedule.epochs;
    hp.batch_size = schedule.batch_size;
    hp.learning_rate = schedule.learning_rate;
    hp.weight_decay = schedule.weight_decay;
    hp.seed = seed;
    model::train(teacher, vocab, bench, nullptr, hp, PlacementAccess::grant());
    const double acc = model::evaluate(teacher, vocab, bench);
    return PlacementResult{std::move(teacher), acc};
}

LayeringResult layering(const model::MCQModel& teacher, const model::Vocab& vocab,
                        const data::Dataset& intermediate, const Architecture& arch, std::size_t max_len,
                        const model::DistillConfig& cfg) {
    if (intermediate.role != data::Role::IntermediateTrain) {
        throw ContaminationGuardError("layering only trains on intermediate-train data; got a " +
                                      to_string(intermediate.role) + " dataset");
    }
    model::MCQModel student(model_config(arch, vocab, teacher.config().n_choices, max_len),
                            derive_seed(cfg.seed, "init"));
    const auto result = model::train(student, vocab, intermediate, &teacher, cfg);
    return LayeringResult{std::move(student), result.final_accuracy()};
}

IntegrationResult integration(const model::MCQModel& student, const model::Vocab& vocab,
                              const data::Dataset& bench) {
    if (bench.role != data::Role::BenchmarkTest) {
        throw ContaminationGuardError("integration evaluates on benchmark-test data; got a " +
                                      to_string(bench.role) + " dataset");
    }
    if (bench.empty()) throw ContractError("integration needs a non-empty benchmark");
    const double acc = model::evaluate(student, vocab, bench);
    return IntegrationResult{acc, leakage(acc, bench.n_choices())};
}

std::uint64_t student_seed(std::uint64_t experiment_seed, std::size_t iteration) {
    return derive_seed(experiment_seed, "student", iteration);
}

std::uint64_t teacher_seed(std::uint64_t experiment_seed) { return derive_seed(experiment_seed, "teacher"); }

Workspace prepare(const LaunderingConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    data::TaskSpec task = cfg.bench;
    task.knowledge_seed = derive_seed(seed, "knowledge");
    Workspace ws;
    ws.bench = data::gen_benchmark(task, cfg.bench_size, derive_seed(seed, "bench"));
    ws.intermediate =
        data::gen_intermediate(task, cfg.align, cfg.intermediate_size, derive_seed(seed, "intermediate"), ws.bench);
    if (cfg.corruption) ws.intermediate = data::corrupt(ws.intermediate, *cfg.corruption, derive_seed(seed, "corrupt"));
    ws.vocab = model::build_vocab({&ws.bench, &ws.intermediate});
    return ws;
}

namespace {

std::vector<ExperimentRecord> run_chain(const LaunderingConfig& cfg, std::uint64_t seed, std::size_t n_iter,
                                        const std::string& phase) {
    auto start = Clock::now();
    const Workspace ws = prepare(cfg, seed);
    const auto placed =
        placement(ws.bench, ws.vocab, cfg.teacher_arch, cfg.teacher_train, cfg.max_len, teacher_seed(seed));

    std::vector<ExperimentRecord> out;
    std::optional<model::MCQModel> teacher = placed.teacher;
    for (std::size_t t = 1; t <= n_iter; ++t) {
        auto layered =
            layering(*teacher, ws.vocab, ws.intermediate, cfg.student_arch, cfg.max_len, distill_for(cfg, seed, t));
        const auto eval = integration(layered.student, ws.vocab, ws.bench);
        const std::size_t iteration = phase == "iterate" ? t : 0;
        out.push_back(make_record(cfg, seed, phase, iteration, layered.train_acc, eval, seconds_since(start)));
        start = Clock::now();
        teacher = std::move(layered.student);
    }
    return out;
}

} // namespace

std::vector<ExperimentRecord> run_laundering(const LaunderingConfig& cfg, std::size_t jobs) {
    cfg.validate();
    std::vector<ExperimentRecord> out(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), jobs,
                 [&](std::size_t i) { out[i] = run_chain(cfg, cfg.seeds[i], 1, "launder").front(); });
    return out;
}

std::vector<ExperimentRecord> iterative(const LaunderingConfig& cfg, std::size_t n_iter, std::size_t jobs) {
    cfg.validate();
    if (n_iter < 1) throw ContractError("iterative distillation needs at least one iteration");
    std::vector<std::vector<ExperimentRecord>> per_seed(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), jobs,
                 [&](std::size_t i) { per_seed[i] = run_chain(cfg, cfg.seeds[i], n_iter, "iterate"); });
    std::vector<ExperimentRecord> out;
    for (auto& recs : per_seed) out.insert(out.end(), recs.begin(), recs.end());
    return out;
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::Size: return "size";
        case SweepAxis::Loss: return "loss";
        case SweepAxis::Rho: return "rho";
    }
    return "unknown";
}

SweepAxis sweep_axis_from_string(std::string_view text) {
    for (auto a : {SweepAxis::Alpha, SweepAxis::Size, SweepAxis::Loss, SweepAxis::Rho}) {
        if (to_string(a) == text) return a;
    }
    throw ConfigError("unknown sweep axis '" + std::string(text) + "' (expected alpha, size, loss or rho)");
}

namespace {

double parse_number(const std::string& text, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty()) {
        throw ConfigError(std::string("sweep ") + what + " value '" + text + "' is not a number");
    }
    return v;
}

} // namespace

LaunderingConfig apply_axis(LaunderingConfig cfg, SweepAxis axis, const std::string& value) {
    switch (axis) {
        case SweepAxis::Alpha:
            cfg.distill.alpha = parse_number(value, "alpha");
            break;
        case SweepAxis::Size: {
            const double v = parse_number(value, "size");
            if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
                throw ConfigError("sweep size value '" + value + "' must be a positive integer");
            }
            cfg.intermediate_size = static_cast<std::size_t>(v);
            break;
        }
        case SweepAxis::Loss:
            cfg.distill.soft_loss = model::soft_loss_from_string(value);
            break;
        case SweepAxis::Rho:
            cfg.align.rho = parse_number(value, "rho");
            break;
    }
    cfg.validate();
    return cfg;
}

std::vector<ExperimentRecord> sweep(const LaunderingConfig& cfg, SweepAxis axis,
                                    const std::vector<std::string>& values, std::size_t jobs) {
    if (values.empty()) throw ConfigError("sweep needs at least one axis value");
    cfg.validate();

    struct Cell {
        LaunderingConfig cfg;
        std::string value;
        double order;
    };
    std::vector<Cell> cells;
    for (const auto& v : values) {
        const double order = axis == SweepAxis::Loss ? 0.0 : parse_number(v, to_string(axis).c_str());
        cells.push_back({apply_axis(cfg, axis, v), v, order});
    }
    std::stable_sort(cells.begin(), cells.end(), [axis](const Cell& a, const Cell& b) {
        if (axis == SweepAxis::Loss) return a.value < b.value;
        return a.order < b.order;
    });

    const std::size_t n_seeds = cfg.seeds.size();
    std::vector<ExperimentRecord> out(cells.size() * n_seeds);
    parallel_for(out.size(), jobs, [&](std::size_t k) {
        const Cell& cell = cells[k / n_seeds];
        const auto seed = cfg.seeds[k % n_seeds];
        auto rec = run_chain(cell.cfg, seed, 1, "sweep").front();
        rec.experiment_id = "sweep-" + to_string(axis) + "=" +
                            (axis == SweepAxis::Loss ? cell.value : format_value(cell.order)) + "-s" +
                            std::to_string(seed);
        out[k] = std::move(rec);
    });
    return out;
}

} // namespace dlab::pipeline
