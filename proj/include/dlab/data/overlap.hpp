#pragma once

#include <cstddef>

#include "dlab/data/dataset.hpp"

namespace dlab::data {

/// Number of question pairs (qa from a, qb from b) whose token-set Jaccard
/// similarity is at least `tau`. Symmetric in a and b.
std::size_t vocab_overlap(const Dataset& a, const Dataset& b, double tau = 0.5);

} // namespace dlab::data
