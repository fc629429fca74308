#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlab/pipeline/pipeline.hpp"

namespace dlab::harness {

/// experiment_id,phase,seed,alpha,soft_loss,temperature,size,iteration,train_acc,bench_acc,leakage,wall_time_s
const std::vector<std::string>& result_columns();
std::string result_header();

/// One CSV row; reals use 6 significant digits.
std::string format_record(const pipeline::ExperimentRecord& r);

void write_results(const std::vector<pipeline::ExperimentRecord>& records, std::ostream& out);
void write_results(const std::vector<pipeline::ExperimentRecord>& records, const std::filesystem::path& path);

/// Appends rows to an existing results file after checking its header; a
/// missing or empty file gets a fresh header. On a header mismatch throws
/// FormatError and leaves the file untouched.
void append_results(const std::vector<pipeline::ExperimentRecord>& records, const std::filesystem::path& path);

/// Throws FormatError (with line number) on a bad header or row.
std::vector<pipeline::ExperimentRecord> read_results(std::istream& in);
std::vector<pipeline::ExperimentRecord> read_results(const std::filesystem::path& path);

} // namespace dlab::harness
