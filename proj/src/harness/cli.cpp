#include "dlab/harness/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dlab/autodiff/rng.hpp"
#include "dlab/data/corruption.hpp"
#include "dlab/data/jsonl.hpp"
#include "dlab/data/overlap.hpp"
#include "dlab/errors.hpp"
#include "dlab/harness/config.hpp"
#include "dlab/harness/report.hpp"
#include "dlab/harness/results.hpp"
#include "dlab/model/checkpoint.hpp"
#include "dlab/pipeline/pipeline.hpp"

namespace dlab::harness {

namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

ExperimentConfig config_or_default(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : load_config(path);
}

void write_manifest(const std::string& path, const ExperimentConfig& cfg, const std::string& command,
                    const std::map<std::string, std::string>& artifacts, const std::string& started) {
    nlohmann::json j;
    j["tool"] = "dlab";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["config"] = serialize_config(cfg);
    j["artifacts"] = artifacts;
    j["started"] = started;
    j["finished"] = utc_now();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

void store(const std::vector<pipeline::ExperimentRecord>& records, const std::string& path, bool append) {
    if (append) {
        append_results(records, path);
    } else {
        write_results(records, path);
    }
}

// Wall time is the only nondeterministic column; it stays 0 unless asked for.
std::vector<pipeline::ExperimentRecord> finish(std::vector<pipeline::ExperimentRecord> records, bool keep_time) {
    if (!keep_time) {
        for (auto& r : records) r.wall_time_s = 0.0;
    }
    return records;
}

struct RunFlags {
    std::string config;
    std::string out;
    std::string manifest;
    std::vector<std::uint64_t> seeds;
    std::size_t jobs = 1;
    bool append = false;
    bool record_time = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "Experiment config file or run manifest")->check(CLI::ExistingFile);
        cmd->add_option("--out", out, "Results CSV")->required();
        cmd->add_option("--manifest", manifest, "Write a run manifest (JSON) here");
        cmd->add_option("--seed", seeds, "Experiment seed(s); overrides [sweep].seeds");
        cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_flag("--append", append, "Append to an existing results file");
        cmd->add_flag("--record-time", record_time, "Keep measured wall time in the CSV");
    }

    ExperimentConfig resolve() const {
        auto cfg = config_or_default(config);
        if (!seeds.empty()) cfg.laundering.seeds = seeds;
        return cfg;
    }
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Data laundering lab: synthetic benchmarks, contamination and distillation experiments", "dlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // generate
    auto* gen = app.add_subcommand("generate", "Write the benchmark and/or intermediate dataset of one seed");
    std::string gen_config, gen_bench, gen_inter;
    std::uint64_t gen_seed = 0;
    gen->add_option("--config", gen_config, "Experiment config")->check(CLI::ExistingFile);
    gen->add_option("--seed", gen_seed, "Experiment seed")->required();
    gen->add_option("--bench-out", gen_bench, "Benchmark JSONL output");
    gen->add_option("--intermediate-out", gen_inter, "Intermediate JSONL output");

    // contaminate
    auto* con = app.add_subcommand("contaminate", "Placement: train a teacher directly on benchmark-test data");
    std::string con_config, con_bench, con_inter, con_out;
    std::uint64_t con_seed = 0;
    con->add_option("--config", con_config, "Experiment config")->check(CLI::ExistingFile);
    con->add_option("--bench", con_bench, "Benchmark JSONL")->required()->check(CLI::ExistingFile);
    con->add_option("--intermediate", con_inter, "Intermediate JSONL, for the shared vocabulary")
        ->required()
        ->check(CLI::ExistingFile);
    con->add_option("--seed", con_seed, "Experiment seed")->required();
    con->add_option("--out", con_out, "Teacher checkpoint output")->required();

    // distill
    auto* dis = app.add_subcommand("distill", "Layering: distill a fresh student from a teacher");
    std::string dis_config, dis_teacher, dis_data, dis_out;
    std::uint64_t dis_seed = 0;
    std::size_t dis_iteration = 1;
    dis->add_option("--config", dis_config, "Experiment config")->check(CLI::ExistingFile);
    dis->add_option("--teacher", dis_teacher, "Teacher checkpoint")->required()->check(CLI::ExistingFile);
    dis->add_option("--data", dis_data, "Intermediate JSONL")->required()->check(CLI::ExistingFile);
    dis->add_option("--seed", dis_seed, "Experiment seed")->required();
    dis->add_option("--iteration", dis_iteration, "Chain position of the student")->check(CLI::PositiveNumber);
    dis->add_option("--out", dis_out, "Student checkpoint output")->required();

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "Integration: benchmark accuracy and leakage of a model");
    std::string eva_model, eva_data;
    eva->add_option("--model", eva_model, "Model checkpoint")->required()->check(CLI::ExistingFile);
    eva->add_option("--data", eva_data, "Benchmark JSONL")->required()->check(CLI::ExistingFile);

    // launder / iterate / sweep
    auto* lau = app.add_subcommand("launder", "Placement, layering and integration for every seed");
    RunFlags lau_flags;
    lau_flags.attach(lau);

    auto* ite = app.add_subcommand("iterate", "Iterative distillation chain");
    RunFlags ite_flags;
    std::size_t ite_n = 0;
    ite_flags.attach(ite);
    ite->add_option("--iterations", ite_n, "Chain length; overrides [sweep].iterations")->check(CLI::PositiveNumber);

    auto* swp = app.add_subcommand("sweep", "Run every (axis value, seed) cell");
    RunFlags swp_flags;
    std::string swp_axis;
    std::vector<std::string> swp_values;
    swp_flags.attach(swp);
    swp->add_option("--axis", swp_axis, "alpha, size, loss or rho; overrides [sweep].axis");
    swp->add_option("--values", swp_values, "Axis values; overrides [sweep].values")->delimiter(',');

    // corrupt
    auto* cor = app.add_subcommand("corrupt", "Apply a corruption transform to a dataset");
    std::string cor_data, cor_mode, cor_out;
    std::uint64_t cor_seed = 0;
    std::optional<char> cor_fill;
    std::optional<std::size_t> cor_qlen, cor_clen;
    cor->add_option("--data", cor_data, "Input JSONL")->required()->check(CLI::ExistingFile);
    cor->add_option("--mode", cor_mode, "random_choices, identical_choices, random_questions_and_choices or "
                                        "identical_questions_and_choices")
        ->required();
    cor->add_option("--seed", cor_seed, "Corruption seed")->required();
    cor->add_option("--fill", cor_fill, "Fill letter for identical modes");
    cor->add_option("--question-len", cor_qlen, "Replacement question length");
    cor->add_option("--choice-len", cor_clen, "Replacement choice length");
    cor->add_option("--out", cor_out, "Output JSONL")->required();

    // overlap
    auto* ovl = app.add_subcommand("overlap", "Count question pairs with token Jaccard >= tau");
    std::string ovl_a, ovl_b;
    double ovl_tau = 0.5;
    ovl->add_option("--a", ovl_a, "First dataset")->required()->check(CLI::ExistingFile);
    ovl->add_option("--b", ovl_b, "Second dataset")->required()->check(CLI::ExistingFile);
    ovl->add_option("--tau", ovl_tau, "Similarity threshold in (0, 1]");

    // report
    auto* rep = app.add_subcommand("report", "Aggregate a results CSV into plot-ready TSV");
    std::string rep_in, rep_group, rep_value = "bench_acc", rep_out;
    rep->add_option("--in", rep_in, "Results CSV")->required()->check(CLI::ExistingFile);
    rep->add_option("--group", rep_group, "Column to group by")->required();
    rep->add_option("--value", rep_value, "Column to summarise");
    rep->add_option("--out", rep_out, "TSV output (standard output when omitted)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            if (gen_bench.empty() && gen_inter.empty()) {
                throw ConfigError("generate needs --bench-out and/or --intermediate-out");
            }
            const auto cfg = config_or_default(gen_config);
            const auto ws = pipeline::prepare(cfg.laundering, gen_seed);
            if (!gen_bench.empty()) data::write_jsonl(ws.bench, gen_bench);
            if (!gen_inter.empty()) data::write_jsonl(ws.intermediate, gen_inter);
            out << "benchmark " << ws.bench.size() << " items, intermediate " << ws.intermediate.size() << " items\n";
        } else if (con->parsed()) {
            const auto cfg = config_or_default(con_config).laundering;
            const auto bench = data::read_jsonl(con_bench);
            const auto inter = data::read_jsonl(con_inter);
            const auto vocab = model::build_vocab({&bench, &inter});
            const auto placed = pipeline::placement(bench, vocab, cfg.teacher_arch, cfg.teacher_train, cfg.max_len,
                                                    pipeline::teacher_seed(con_seed));
            model::save_checkpoint(placed.teacher, vocab, con_out);
            out << "teacher benchmark accuracy " << placed.accuracy << '\n';
        } else if (dis->parsed()) {
            const auto cfg = config_or_default(dis_config).laundering;
            const auto teacher = model::load_checkpoint(dis_teacher);
            const auto data = data::read_jsonl(dis_data);
            auto dcfg = cfg.distill;
            dcfg.seed = pipeline::student_seed(dis_seed, dis_iteration);
            const auto layered =
                pipeline::layering(teacher.model, teacher.vocab, data, cfg.student_arch, cfg.max_len, dcfg);
            model::save_checkpoint(layered.student, teacher.vocab, dis_out);
            out << "student train accuracy " << layered.train_acc << '\n';
        } else if (eva->parsed()) {
            const auto ckpt = model::load_checkpoint(eva_model);
            const auto bench = data::read_jsonl(eva_data);
            const auto r = pipeline::integration(ckpt.model, ckpt.vocab, bench);
            out << "accuracy " << r.accuracy << "\nleakage " << r.leakage << '\n';
        } else if (lau->parsed()) {
            const auto started = utc_now();
            const auto cfg = lau_flags.resolve();
            const auto records = finish(pipeline::run_laundering(cfg.laundering, lau_flags.jobs), lau_flags.record_time);
            store(records, lau_flags.out, lau_flags.append);
            if (!lau_flags.manifest.empty()) {
                write_manifest(lau_flags.manifest, cfg, "launder", {{"results", lau_flags.out}}, started);
            }
        } else if (ite->parsed()) {
            const auto started = utc_now();
            auto cfg = ite_flags.resolve();
            if (ite_n > 0) cfg.sweep.iterations = ite_n;
            const auto records = finish(pipeline::iterative(cfg.laundering, cfg.sweep.iterations, ite_flags.jobs),
                                        ite_flags.record_time);
            store(records, ite_flags.out, ite_flags.append);
            if (!ite_flags.manifest.empty()) {
                write_manifest(ite_flags.manifest, cfg, "iterate", {{"results", ite_flags.out}}, started);
            }
        } else if (swp->parsed()) {
            const auto started = utc_now();
            auto cfg = swp_flags.resolve();
            if (!swp_axis.empty()) cfg.sweep.axis = pipeline::sweep_axis_from_string(swp_axis);
            if (!swp_values.empty()) cfg.sweep.values = swp_values;
            if (!cfg.sweep.axis) throw ConfigError("sweep needs an axis (--axis or [sweep].axis)");
            const auto records = finish(
                pipeline::sweep(cfg.laundering, *cfg.sweep.axis, cfg.sweep.values, swp_flags.jobs),
                swp_flags.record_time);
            store(records, swp_flags.out, swp_flags.append);
            if (!swp_flags.manifest.empty()) {
                write_manifest(swp_flags.manifest, cfg, "sweep", {{"results", swp_flags.out}}, started);
            }
        } else if (cor->parsed()) {
            auto mode = data::corruption_from_string(cor_mode);
            if (cor_fill) mode.fill = *cor_fill;
            if (cor_qlen) mode.question_len = *cor_qlen;
            if (cor_clen) mode.choice_len = *cor_clen;
            mode.validate();
            const auto ds = data::read_jsonl(cor_data);
            data::write_jsonl(data::corrupt(ds, mode, cor_seed), cor_out);
        } else if (ovl->parsed()) {
            const auto a = data::read_jsonl(ovl_a);
            const auto b = data::read_jsonl(ovl_b);
            out << data::vocab_overlap(a, b, ovl_tau) << '\n';
        } else if (rep->parsed()) {
            const auto groups = aggregate(read_results(rep_in), rep_group, rep_value);
            if (rep_out.empty()) {
                write_tsv(groups, out);
            } else {
                std::ostringstream buf;
                write_tsv(groups, buf);
                std::ofstream file(rep_out, std::ios::binary | std::ios::trunc);
                if (!file) throw FormatError("cannot open " + rep_out + " for writing");
                file << buf.str();
            }
        }
    } catch (const ContaminationGuardError& e) {
        err << "dlab: role guard: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        err << "dlab: invalid configuration: " << e.what() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        err << "dlab: invalid data: " << e.what() << '\n';
        return 1;
    } catch (const ContractError& e) {
        err << "dlab: invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "dlab: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace dlab::harness
