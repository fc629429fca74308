#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlab/data/dataset.hpp"

namespace dlab::data {

/// Question skeleton: words with the concept token inserted at `concept_slot`.
struct QuestionTemplate {
    std::vector<std::string> words;
    std::size_t concept_slot = 0;
    friend bool operator==(const QuestionTemplate&, const QuestionTemplate&) = default;
};

/// Benchmark concepts are "c<i>", the disjoint intermediate pool uses "d<i>".
std::string concept_token(bool benchmark_pool, std::size_t index);
/// Attribute j of a concept, e.g. "c12p3".
std::string attribute_token(bool benchmark_pool, std::size_t concept_index, std::size_t attribute);

std::vector<QuestionTemplate> benchmark_templates(const TaskSpec& spec);
/// Shared prefix of round(template_overlap * template_count) benchmark
/// templates, then fresh ones drawn from a different word bank.
std::vector<QuestionTemplate> intermediate_templates(const TaskSpec& spec, const AlignmentSpec& align,
                                                     std::uint64_t seed);

/// Benchmark-test dataset; gold is the knowledge-map attribute of the concept.
Dataset gen_benchmark(const TaskSpec& spec, std::size_t size, std::uint64_t seed);

/// Intermediate-train dataset. Gold labels follow an independent knowledge
/// map over benchmark and pool concepts. Items whose content hash appears
/// in `exclude` are redrawn; 1000 consecutive rejections throw
/// GenerationError.
Dataset gen_intermediate(const TaskSpec& bench_spec, const AlignmentSpec& align, std::size_t size,
                         std::uint64_t seed, const Dataset& exclude);
Dataset gen_intermediate(const TaskSpec& bench_spec, const AlignmentSpec& align, std::size_t size,
                         std::uint64_t seed);

/// Regenerates a dataset from its manifest, corruptions included.
Dataset replay(const Manifest& manifest);

} // namespace dlab::data
