#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dlab/pipeline/pipeline.hpp"

namespace dlab::harness {

struct GroupStats {
    std::string x;
    double mean = 0.0;
    /// Sample standard deviation; 0 for a single row.
    double sd = 0.0;
    std::size_t n = 0;
};

/// Groups rows by a results column and summarises `value_column`
/// (bench_acc by default). Groups are ordered numerically when every key
/// parses as a number, lexicographically otherwise.
std::vector<GroupStats> aggregate(const std::vector<pipeline::ExperimentRecord>& records, const std::string& column,
                                  const std::string& value_column = "bench_acc");

/// Plot-ready TSV with header "x\tmean\tsd\tn".
void write_tsv(const std::vector<GroupStats>& groups, std::ostream& out);

/// Text of one column of a record, exactly as written to the CSV.
std::string column_value(const pipeline::ExperimentRecord& r, const std::string& column);

} // namespace dlab::harness
