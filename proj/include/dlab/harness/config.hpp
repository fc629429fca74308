#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dlab/pipeline/pipeline.hpp"

namespace dlab::harness {

// Experiment config files are flat key = value lines grouped under
// [bench], [intermediate], [teacher], [student], [distill] and [sweep].
// '#' and ';' start comments. Every key is optional; unknown keys and
// out-of-range values are rejected with a ConfigError naming them.

struct SweepPlan {
    std::optional<pipeline::SweepAxis> axis;
    std::vector<std::string> values;
    /// Chain length for `iterate`.
    std::size_t iterations = 5;

    friend bool operator==(const SweepPlan&, const SweepPlan&) = default;
};

struct ExperimentConfig {
    pipeline::LaunderingConfig laundering;
    SweepPlan sweep;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config(const std::string& text);

/// Reads an INI-style config, or the config snapshot inside a run manifest
/// (a JSON object with a "config" string field).
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its effective value; doubles keep 17 significant digits
/// so parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

} // namespace dlab::harness
