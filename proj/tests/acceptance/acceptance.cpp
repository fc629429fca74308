// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Experiment runs are shared between criteria where the configurations agree.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dlab/autodiff/grad_check.hpp"
#include "dlab/autodiff/rng.hpp"
#include "dlab/data/corruption.hpp"
#include "dlab/data/generator.hpp"
#include "dlab/data/jsonl.hpp"
#include "dlab/errors.hpp"
#include "dlab/harness/cli.hpp"
#include "dlab/harness/config.hpp"
#include "dlab/model/checkpoint.hpp"
#include "dlab/model/encode.hpp"
#include "dlab/model/trainer.hpp"
#include "dlab/pipeline/pipeline.hpp"

using namespace dlab;
namespace fs = std::filesystem;
using Records = std::vector<pipeline::ExperimentRecord>;

namespace {

constexpr double kChance = 0.25;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

pipeline::LaunderingConfig base_config() {
    auto cfg = harness::parse_config("").laundering;
    cfg.seeds = {1, 2, 3, 4, 5};
    return cfg;
}

double mean_acc(const Records& recs, std::size_t iteration = 0) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& r : recs) {
        if (r.iteration != iteration) continue;
        sum += r.bench_acc;
        ++n;
    }
    return n == 0 ? std::nan("") : sum / static_cast<double>(n);
}

double mean_leakage(const Records& recs) {
    double sum = 0;
    for (const auto& r : recs) sum += r.leakage;
    return sum / static_cast<double>(recs.size());
}

// Memoised experiment runs keyed by a short description.
class Runs {
public:
    const Records& launder(const std::string& key, const pipeline::LaunderingConfig& cfg) {
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, pipeline::run_laundering(cfg)).first;
        return it->second;
    }
    const Records& chain(const std::string& key, const pipeline::LaunderingConfig& cfg, std::size_t n) {
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, pipeline::iterative(cfg, n)).first;
        return it->second;
    }

    const Records& alpha(double a) {
        // The alpha = 1 run at iteration 1 of the chain is the plain launder run.
        if (a == 1.0) return chain_alpha(1.0);
        auto cfg = base_config();
        cfg.distill.alpha = a;
        return launder("alpha=" + fmt("%g", a), cfg);
    }
    const Records& chain_alpha(double a) {
        auto cfg = base_config();
        cfg.distill.alpha = a;
        return chain("chain alpha=" + fmt("%g", a), cfg, 5);
    }

private:
    std::map<std::string, Records> cache_;
};

Runs runs;

Records first_iteration(const Records& chain) {
    Records out;
    for (const auto& r : chain) {
        if (r.iteration == 1) out.push_back(r);
    }
    return out;
}

Outcome gradient_correctness() {
    data::TaskSpec spec;
    auto ds = data::gen_intermediate(spec, {}, 400, 5);
    const auto vocab = model::build_vocab({&ds});
    model::ModelConfig mc;
    mc.vocab_size = vocab.size();
    mc.max_len = 32;

    // A trained operating point: at init nearly all gradients sit below the
    // finite-difference noise floor and the relative error is meaningless.
    model::DistillConfig hard;
    hard.alpha = 0;
    hard.epochs = 20;
    hard.batch_size = 16;
    hard.learning_rate = 5e-3;
    hard.weight_decay = 0;
    model::MCQModel teacher(mc, 4);
    model::train(teacher, vocab, ds, nullptr, hard);
    model::MCQModel student(mc, 3);
    hard.epochs = 5;
    model::train(student, vocab, ds, nullptr, hard);

    ds.items.resize(16);
    const auto enc = model::encode_all(ds, vocab, mc.max_len);
    std::vector<std::size_t> gold;
    for (const auto& e : enc) gold.push_back(e.gold);
    const auto tl = teacher.logits(enc);
    ad::Tensor targets = ad::Tensor::zeros({enc.size(), mc.n_choices});
    for (std::size_t i = 0; i < enc.size(); ++i) {
        for (std::size_t c = 0; c < mc.n_choices; ++c) targets.at(i, c) = tl[i][c];
    }

    const auto start = std::chrono::steady_clock::now();
    double worst = 0;
    for (double alpha : {0.0, 0.3, 1.0}) {
        for (auto kind : {model::SoftLoss::MSE, model::SoftLoss::KLD}) {
            for (double t : {1.0, 2.0}) {
                model::DistillConfig cfg;
                cfg.alpha = alpha;
                cfg.soft_loss = kind;
                cfg.temperature = t;
                auto loss = [&](ad::Tape&, const ad::BoundParams& p) {
                    return model::distill_loss(student.forward(p, enc), targets, gold, cfg);
                };
                worst = std::max(worst, ad::grad_check(loss, student.params(), 400, 11).max_relative_error);
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < 1e-4 && secs < 10.0,
            fmt("max relative error %.3g over 12 configs x 400 probes (< 1e-4), check time %.1fs (< 10s)", worst, secs)};
}

Outcome loss_linearity() {
    Rng rng(2024);
    double worst = 0;
    for (int s = 0; s < 1000; ++s) {
        const std::size_t rows = 1 + rng.below(6), n = 2 + rng.below(4);
        ad::Tensor student = ad::Tensor::zeros({rows, n}), teacher = ad::Tensor::zeros({rows, n});
        for (auto& v : student.values()) v = rng.uniform(-6, 6);
        for (auto& v : teacher.values()) v = rng.uniform(-6, 6);
        std::vector<std::size_t> gold(rows);
        for (auto& g : gold) g = rng.below(n);
        model::DistillConfig cfg;
        cfg.soft_loss = s % 2 == 0 ? model::SoftLoss::MSE : model::SoftLoss::KLD;
        cfg.temperature = rng.uniform(0.5, 4.0);
        cfg.mse_use_temperature = s % 4 == 0;
        const double alpha = rng.uniform();
        auto eval = [&](double a) {
            cfg.alpha = a;
            ad::Tape tape;
            return model::distill_loss(tape.leaf(student), teacher, gold, cfg).value().item();
        };
        const double mixed = eval(alpha), l0 = eval(0), l1 = eval(1);
        worst = std::max(worst, std::abs(mixed - ((1 - alpha) * l0 + alpha * l1)));
    }
    return {worst <= 1e-12, fmt("max |L(a) - ((1-a)L(0) + aL(1))| = %.3g over 1000 samples (<= 1e-12)", worst)};
}

std::optional<pipeline::PlacementResult> placed_teacher;
model::Vocab placed_vocab;

Outcome placement_contamination() {
    const auto cfg = base_config();
    const auto start = std::chrono::steady_clock::now();
    const auto ws = pipeline::prepare(cfg, 1);
    placed_teacher = pipeline::placement(ws.bench, ws.vocab, cfg.teacher_arch, cfg.teacher_train, cfg.max_len,
                                         pipeline::teacher_seed(1));
    placed_vocab = ws.vocab;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {placed_teacher->accuracy >= 0.95 && secs < 30.0,
            fmt("teacher accuracy %.4f on %g benchmark items (>= 0.95), %.1fs (< 30s)", placed_teacher->accuracy,
                static_cast<double>(ws.bench.size()), secs)};
}

Outcome clean_control() {
    const double m = mean_acc(runs.alpha(0.0));
    return {std::abs(m - kChance) <= 0.05, fmt("alpha=0 mean accuracy %.4f (within 0.25 +/- 0.05)", m)};
}

Outcome laundering_effect() {
    const double control = mean_acc(runs.alpha(0.0));
    const double laundered = mean_acc(runs.alpha(1.0), 1);
    return {laundered - control >= 0.15,
            fmt("alpha=1 mean %.4f vs control %.4f, gap %.4f (>= 0.15)", laundered, control, laundered - control)};
}

Outcome alpha_monotonicity() {
    std::vector<double> means;
    for (double a : {0.0, 0.25, 0.5, 0.75}) means.push_back(mean_acc(runs.alpha(a)));
    means.push_back(mean_acc(runs.alpha(1.0), 1));
    int inversions = 0;
    bool small = true;
    for (std::size_t i = 1; i < means.size(); ++i) {
        if (means[i] < means[i - 1]) {
            ++inversions;
            small = small && means[i - 1] - means[i] <= 0.02;
        }
    }
    std::string detail = "means";
    for (double m : means) detail += fmt(" %.4f", m);
    detail += " at alpha 0, .25, .5, .75, 1; inversions " + std::to_string(inversions) + " (<= 1, each <= 0.02)";
    return {inversions <= 1 && small, detail};
}

Outcome alignment_effect() {
    const double high = mean_leakage(first_iteration(runs.alpha(1.0)));
    auto cfg = base_config();
    cfg.align.rho = 0.2;
    const double low = mean_leakage(runs.launder("rho=0.2", cfg));
    return {high > low, fmt("mean leakage %.4f at rho=0.8 vs %.4f at rho=0.2 (strictly greater)", high, low)};
}

Outcome size_effect() {
    const double full = mean_acc(runs.alpha(1.0), 1);
    auto cfg = base_config();
    cfg.intermediate_size = 250;
    const double small = mean_acc(runs.launder("size=250", cfg));
    return {full - small >= 0.05 && small > kChance + 0.05,
            fmt("size 5000 mean %.4f, size 250 mean %.4f, gap %.4f (>= 0.05), size 250 > 0.30", full, small,
                full - small)};
}

Outcome iterative_drift() {
    const auto& a1 = runs.chain_alpha(1.0);
    const auto& a6 = runs.chain_alpha(0.6);
    const double d1 = mean_acc(a1, 5) - mean_acc(a1, 1);
    const double d6 = mean_acc(a6, 5) - mean_acc(a6, 1);
    return {d1 > d6 && d6 <= 0.0,
            fmt("alpha=1 iter5-iter1 %.4f, alpha=0.6 iter5-iter1 %.4f (first > second, second <= 0)", d1, d6)};
}

Outcome corruption_persistence() {
    using M = data::CorruptionMode;
    const std::vector<std::pair<std::string, M>> modes{{"random_choices", M::random_choices()},
                                                       {"identical_choices", M::identical_choices()},
                                                       {"random_questions_and_choices", M::random_questions_and_choices()},
                                                       {"identical_questions_and_choices",
                                                        M::identical_questions_and_choices()}};
    std::vector<double> means;
    std::string detail = "means";
    for (const auto& [name, mode] : modes) {
        auto cfg = base_config();
        cfg.corruption = mode;
        means.push_back(mean_acc(runs.launder("corrupt=" + name, cfg)));
        detail += " " + name + "=" + fmt("%.4f", means.back());
    }
    bool ordered = true;
    for (std::size_t i = 1; i < means.size(); ++i) ordered = ordered && means[i - 1] >= means[i] - 0.03;
    detail += "; identical_choices > 0.30, ordering with tolerance 0.03";
    return {means[1] > kChance + 0.05 && ordered, detail};
}

Outcome contamination_guard() {
    auto cfg = base_config();
    cfg.bench_size = 20;
    cfg.intermediate_size = 40;
    const auto ws = pipeline::prepare(cfg, 1);
    const auto teacher = model::MCQModel(model::ModelConfig{ws.vocab.size(), 8, 8, 1, 4, cfg.max_len}, 1);
    int rejected = 0, attempts = 0;
    auto expect_guard = [&](const std::function<void()>& fn) {
        ++attempts;
        try {
            fn();
        } catch (const ContaminationGuardError&) {
            ++rejected;
        }
    };
    model::DistillConfig hard;
    hard.alpha = 0;
    hard.epochs = 1;
    const auto corrupted = data::corrupt(ws.bench, data::CorruptionMode::random_choices(), 3);
    std::stringstream buf;
    data::write_jsonl(ws.bench, buf);
    const auto reloaded = data::read_jsonl(buf);
    for (const auto* bench : {&ws.bench, &corrupted, &reloaded}) {
        expect_guard([&] { pipeline::layering(teacher, ws.vocab, *bench, cfg.student_arch, cfg.max_len, cfg.distill); });
        expect_guard([&] {
            model::MCQModel m = teacher;
            model::train(m, ws.vocab, *bench, nullptr, hard);
        });
        expect_guard([&] {
            model::MCQModel m = teacher;
            model::train(m, ws.vocab, *bench, &teacher, cfg.distill);
        });
    }
    // Placement is the only permitted path and accepts the benchmark.
    bool placement_ok = true;
    try {
        pipeline::placement(ws.bench, ws.vocab, cfg.teacher_arch, {1, 16, 5e-3, 0}, cfg.max_len, 1);
    } catch (const std::exception&) {
        placement_ok = false;
    }
    return {rejected == attempts && placement_ok,
            fmt("%g of %g benchmark-tagged training attempts rejected; placement allowed: ", rejected, attempts) +
                (placement_ok ? "yes" : "no")};
}

Outcome determinism() {
    const auto dir = fs::temp_directory_path() / "dlab-acceptance";
    fs::create_directories(dir);
    {
        std::ofstream(dir / "launder.cfg") << "[sweep]\nseeds = 1, 2\n";
    }
    std::ostringstream out, err;
    int codes = 0;
    for (const char* name : {"a.csv", "b.csv"}) {
        codes += harness::run_cli({"launder", "--config", (dir / "launder.cfg").string(), "--out", (dir / name).string()},
                                  out, err);
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    };
    const auto a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
    fs::remove_all(dir);
    return {codes == 0 && !a.empty() && a == b,
            fmt("exit codes sum %g, CSV sizes %g and %g bytes, identical: ", codes, static_cast<double>(a.size()),
                static_cast<double>(b.size())) +
                (a == b ? "yes" : "no")};
}

Outcome round_trips() {
    std::vector<std::string> failures;
    const auto cfg = base_config();
    const auto ws = pipeline::prepare(cfg, 2);
    const auto corrupted =
        data::corrupt(ws.intermediate, data::CorruptionMode::identical_questions_and_choices('z', 13, 4), 6);
    for (const auto* ds : {&ws.bench, &ws.intermediate, &corrupted}) {
        std::stringstream buf;
        data::write_jsonl(*ds, buf);
        if (!(data::read_jsonl(buf) == *ds)) failures.push_back("jsonl");
    }

    if (placed_teacher) {
        std::stringstream buf;
        model::save_checkpoint(placed_teacher->teacher, placed_vocab, buf);
        const auto back = model::load_checkpoint(buf);
        if (!(back.model == placed_teacher->teacher) || !(back.vocab == placed_vocab)) failures.push_back("checkpoint");
    } else {
        failures.push_back("checkpoint (no teacher)");
    }

    auto ec = harness::parse_config("");
    ec.laundering.distill.alpha = 0.1 + 0.2;
    ec.laundering.distill.temperature = std::nextafter(2.0, 3.0);
    ec.laundering.align.rho = 1.0 / 3.0;
    ec.laundering.corruption = data::CorruptionMode::random_questions_and_choices(31, 7);
    ec.laundering.seeds = {0, 7, 18446744073709551615ull};
    ec.sweep.axis = pipeline::SweepAxis::Alpha;
    ec.sweep.values = {"0", "0.5"};
    if (!(harness::parse_config(harness::serialize_config(ec)) == ec)) failures.push_back("config");

    std::string detail = "dataset JSONL x3, checkpoint, config: ";
    if (failures.empty()) return {true, detail + "all value-exact"};
    for (const auto& f : failures) detail += f + " ";
    return {false, detail + "differ"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradient_correctness},
        {"loss algebra", loss_linearity},
        {"placement contamination", placement_contamination},
        {"clean control", clean_control},
        {"laundering effect", laundering_effect},
        {"alpha monotonicity", alpha_monotonicity},
        {"alignment effect", alignment_effect},
        {"data-size effect", size_effect},
        {"iterative drift", iterative_drift},
        {"corruption persistence", corruption_persistence},
        {"contamination guard", contamination_guard},
        {"determinism", determinism},
        {"round trips", round_trips},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::printf("%s [%2zu] %-24s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
