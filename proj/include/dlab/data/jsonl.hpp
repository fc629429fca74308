#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dlab/data/dataset.hpp"

namespace dlab::data {

// Layout: first line is a header object
//   {"format":"dlab-mcq","version":1,"role":...,"manifest":{...}}
// followed by one object per item with keys id, question, choices, answer, meta.
// UTF-8, LF line endings.

void write_jsonl(const Dataset& ds, std::ostream& out);
void write_jsonl(const Dataset& ds, const std::filesystem::path& path);

/// Throws FormatError (with 1-based line number) on malformed lines or a
/// missing header, ValidationError on invariant violations.
Dataset read_jsonl(std::istream& in);
Dataset read_jsonl(const std::filesystem::path& path);

/// Manifest as a single-line JSON object.
std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text);

} // namespace dlab::data
