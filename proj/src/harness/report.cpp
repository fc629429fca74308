#include "dlab/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "dlab/errors.hpp"
#include "dlab/harness/results.hpp"

namespace dlab::harness {

namespace {

bool as_number(const std::string& text, double& out) {
    std::size_t used = 0;
    try {
        out = std::stod(text, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == text.size();
}

std::string real_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

std::string column_value(const pipeline::ExperimentRecord& r, const std::string& column) {
    const auto& cols = result_columns();
    const auto it = std::find(cols.begin(), cols.end(), column);
    if (it == cols.end()) throw ConfigError("unknown results column '" + column + "'");
    const auto row = format_record(r);
    auto index = static_cast<std::size_t>(it - cols.begin());
    std::size_t start = 0;
    while (index-- > 0) start = row.find(',', start) + 1;
    const auto end = row.find(',', start);
    return row.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::vector<GroupStats> aggregate(const std::vector<pipeline::ExperimentRecord>& records, const std::string& column,
                                  const std::string& value_column) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : records) {
        double v = 0.0;
        const auto text = column_value(r, value_column);
        if (!as_number(text, v)) throw ConfigError("results column '" + value_column + "' is not numeric");
        groups[column_value(r, column)].push_back(v);
    }

    std::vector<GroupStats> out;
    for (const auto& [key, values] : groups) {
        GroupStats g;
        g.x = key;
        g.n = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        g.mean = sum / static_cast<double>(g.n);
        if (g.n > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - g.mean) * (v - g.mean);
            g.sd = std::sqrt(ss / static_cast<double>(g.n - 1));
        }
        out.push_back(std::move(g));
    }

    bool numeric = true;
    for (const auto& g : out) {
        double ignored = 0.0;
        numeric = numeric && as_number(g.x, ignored);
    }
    if (numeric) {
        std::stable_sort(out.begin(), out.end(),
                         [](const GroupStats& a, const GroupStats& b) { return std::stod(a.x) < std::stod(b.x); });
    }
    return out;
}

void write_tsv(const std::vector<GroupStats>& groups, std::ostream& out) {
    out << "x\tmean\tsd\tn\n";
    for (const auto& g : groups) out << g.x << '\t' << real_cell(g.mean) << '\t' << real_cell(g.sd) << '\t' << g.n << '\n';
}

} // namespace dlab::harness
