#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dlab::data {

/// Four-way (by default) multiple-choice question.
struct MCQItem {
    std::string id;
    std::string question;
    std::vector<std::string> choices;
    std::size_t answer = 0;
    std::map<std::string, std::string> meta;

    friend bool operator==(const MCQItem&, const MCQItem&) = default;
};

/// FNV-1a 64 over "question|choice0|...|choiceN".
std::uint64_t content_hash(const MCQItem& item);

enum class Role { BenchmarkTest, IntermediateTrain };

std::string to_string(Role role);
Role role_from_string(std::string_view text);

/// Latent structure of the synthetic benchmark. Every concept owns
/// `attributes_per_concept` attribute tokens; exactly one of them is the
/// correct one according to the knowledge map.
struct TaskSpec {
    std::size_t concept_count = 300;
    std::size_t attributes_per_concept = 4;
    std::size_t noise_token_pool = 50;
    std::size_t question_noise_len = 3;
    /// Attributes of the concept mentioned in the question text.
    std::size_t context_attributes = 2;
    std::size_t template_count = 8;
    std::size_t n_choices = 4;
    std::uint64_t knowledge_seed = 0;

    /// Throws ConfigError on inconsistent values.
    void validate() const;
    /// Concept index -> index of its correct attribute.
    std::vector<std::size_t> knowledge_map() const;

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Controls how close the intermediate dataset is to the benchmark domain.
struct AlignmentSpec {
    /// Probability that an intermediate item uses a benchmark concept.
    double rho = 0.8;
    /// Fraction of intermediate question templates shared with the benchmark.
    double template_overlap = 0.5;

    void validate() const;
    friend bool operator==(const AlignmentSpec&, const AlignmentSpec&) = default;
};

struct CorruptionMode {
    enum class Kind { RandomChoices, IdenticalChoices, RandomQuestionsAndChoices, IdenticalQuestionsAndChoices };

    Kind kind = Kind::RandomChoices;
    char fill = 'a';
    std::size_t question_len = 50;
    std::size_t choice_len = 10;

    static CorruptionMode random_choices(std::size_t len = 10);
    static CorruptionMode identical_choices(char fill = 'a', std::size_t len = 10);
    static CorruptionMode random_questions_and_choices(std::size_t q_len = 50, std::size_t c_len = 10);
    static CorruptionMode identical_questions_and_choices(char fill = 'a', std::size_t q_len = 50,
                                                          std::size_t c_len = 10);

    bool replaces_questions() const noexcept;
    bool is_identical() const noexcept;
    void validate() const;

    friend bool operator==(const CorruptionMode&, const CorruptionMode&) = default;
};

/// "random_choices", "identical_choices", "random_questions_and_choices",
/// "identical_questions_and_choices".
std::string to_string(CorruptionMode::Kind kind);
CorruptionMode::Kind corruption_kind_from_string(std::string_view text);
/// Default-parameter mode for a kind name.
CorruptionMode corruption_from_string(std::string_view text);

struct CorruptionStep {
    CorruptionMode mode;
    std::uint64_t seed = 0;
    friend bool operator==(const CorruptionStep&, const CorruptionStep&) = default;
};

/// Enough to regenerate a dataset from scratch.
struct Manifest {
    /// "benchmark", "intermediate", or "external" (not replayable).
    std::string generator = "external";
    std::optional<TaskSpec> task;
    std::optional<AlignmentSpec> alignment;
    std::size_t size = 0;
    std::uint64_t seed = 0;
    /// Benchmark (size, seed) whose content hashes were excluded.
    std::optional<std::pair<std::size_t, std::uint64_t>> excluded_benchmark;
    std::vector<CorruptionStep> corruptions;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct Dataset {
    std::vector<MCQItem> items;
    Role role = Role::IntermediateTrain;
    Manifest manifest;

    std::size_t size() const noexcept { return items.size(); }
    bool empty() const noexcept { return items.empty(); }
    /// Choice count of the first item, 0 when empty.
    std::size_t n_choices() const noexcept;

    /// Throws ValidationError naming the offending item: duplicate id,
    /// no choices, inconsistent choice count, answer out of range.
    void validate() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

} // namespace dlab::data
