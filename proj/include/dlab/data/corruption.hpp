#pragma once

#include <cstdint>

#include "dlab/data/dataset.hpp"

namespace dlab::data {

/// Replaces question and/or choice text per `mode`, keeping item count,
/// choice count and answer indices. Random modes draw lowercase letters.
/// The step is appended to the manifest's corruption history.
Dataset corrupt(const Dataset& ds, const CorruptionMode& mode, std::uint64_t seed);

} // namespace dlab::data
