#include "dlab/harness/results.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dlab/errors.hpp"

namespace dlab::harness {

namespace {

std::string real6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void bad_row(std::size_t line, const std::string& what) {
    throw FormatError("results line " + std::to_string(line) + ": " + what);
}

double parse_real(std::size_t line, const std::string& column, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (text.empty() || used != text.size()) bad_row(line, column + " '" + text + "' is not a number");
    return v;
}

std::uint64_t parse_uint(std::size_t line, const std::string& column, const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) {
        bad_row(line, column + " '" + text + "' is not a non-negative integer");
    }
    return v;
}

void check_field(const std::string& text, const char* what) {
    if (text.find_first_of(",\n\r") != std::string::npos) {
        throw FormatError(std::string(what) + " '" + text + "' cannot be written to CSV (contains a separator)");
    }
}

} // namespace

const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> columns = {"experiment_id", "phase",     "seed",      "alpha",
                                                     "soft_loss",     "temperature", "size",    "iteration",
                                                     "train_acc",     "bench_acc", "leakage",   "wall_time_s"};
    return columns;
}

std::string result_header() {
    std::string out;
    for (const auto& c : result_columns()) {
        if (!out.empty()) out += ',';
        out += c;
    }
    return out;
}

std::string format_record(const pipeline::ExperimentRecord& r) {
    check_field(r.experiment_id, "experiment id");
    check_field(r.phase, "phase");
    std::string out;
    out += r.experiment_id + ',';
    out += r.phase + ',';
    out += std::to_string(r.seed) + ',';
    out += real6(r.alpha) + ',';
    out += model::to_string(r.soft_loss) + ',';
    out += real6(r.temperature) + ',';
    out += std::to_string(r.size) + ',';
    out += std::to_string(r.iteration) + ',';
    out += real6(r.train_acc) + ',';
    out += real6(r.bench_acc) + ',';
    out += real6(r.leakage) + ',';
    out += real6(r.wall_time_s);
    return out;
}

void write_results(const std::vector<pipeline::ExperimentRecord>& records, std::ostream& out) {
    out << result_header() << '\n';
    for (const auto& r : records) out << format_record(r) << '\n';
}

void write_results(const std::vector<pipeline::ExperimentRecord>& records, const std::filesystem::path& path) {
    std::ostringstream buf;
    write_results(records, buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << buf.str();
    if (!out) throw FormatError("failed writing " + path.string());
}

void append_results(const std::vector<pipeline::ExperimentRecord>& records, const std::filesystem::path& path) {
    std::string first_line;
    bool fresh = true;
    {
        std::ifstream in(path, std::ios::binary);
        if (in && std::getline(in, first_line)) fresh = false;
    }
    if (fresh) {
        write_results(records, path);
        return;
    }
    if (!first_line.empty() && first_line.back() == '\r') first_line.pop_back();
    if (first_line != result_header()) {
        throw FormatError("cannot append to " + path.string() + ": header '" + first_line +
                          "' does not match the results schema");
    }
    std::string rows;
    for (const auto& r : records) rows += format_record(r) + '\n';
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw FormatError("cannot open " + path.string() + " for appending");
    out << rows;
}

std::vector<pipeline::ExperimentRecord> read_results(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("results line 1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != result_header()) throw FormatError("results line 1: unexpected header '" + line + "'");

    const auto& cols = result_columns();
    std::vector<pipeline::ExperimentRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != cols.size()) {
            bad_row(line_no, "expected " + std::to_string(cols.size()) + " fields, found " + std::to_string(f.size()));
        }
        pipeline::ExperimentRecord r;
        r.experiment_id = f[0];
        r.phase = f[1];
        r.seed = parse_uint(line_no, cols[2], f[2]);
        r.alpha = parse_real(line_no, cols[3], f[3]);
        try {
            r.soft_loss = model::soft_loss_from_string(f[4]);
        } catch (const std::exception&) {
            bad_row(line_no, "soft_loss '" + f[4] + "' is not mse or kld");
        }
        r.temperature = parse_real(line_no, cols[5], f[5]);
        r.size = static_cast<std::size_t>(parse_uint(line_no, cols[6], f[6]));
        r.iteration = static_cast<std::size_t>(parse_uint(line_no, cols[7], f[7]));
        r.train_acc = parse_real(line_no, cols[8], f[8]);
        r.bench_acc = parse_real(line_no, cols[9], f[9]);
        r.leakage = parse_real(line_no, cols[10], f[10]);
        r.wall_time_s = parse_real(line_no, cols[11], f[11]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<pipeline::ExperimentRecord> read_results(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open results file " + path.string());
    return read_results(in);
}

} // namespace dlab::harness
