#include "dlab/data/dataset.hpp"

#include <set>

#include "dlab/autodiff/rng.hpp"
#include "dlab/errors.hpp"

namespace dlab::data {

std::uint64_t content_hash(const MCQItem& item) {
    std::string text = item.question;
    for (const auto& c : item.choices) {
        text += '|';
        text += c;
    }
    return fnv1a64(text);
}

std::string to_string(Role role) {
    return role == Role::BenchmarkTest ? "benchmark-test" : "intermediate-train";
}

Role role_from_string(std::string_view text) {
    if (text == "benchmark-test") return Role::BenchmarkTest;
    if (text == "intermediate-train") return Role::IntermediateTrain;
    throw FormatError("unknown dataset role '" + std::string(text) + "'");
}

void TaskSpec::validate() const {
    if (n_choices < 2) throw ConfigError("n_choices must be at least 2");
    if (attributes_per_concept < n_choices) {
        throw ConfigError("attributes_per_concept (" + std::to_string(attributes_per_concept) +
                          ") must be >= n_choices (" + std::to_string(n_choices) + ")");
    }
    if (concept_count < n_choices) {
        throw ConfigError("concept_count (" + std::to_string(concept_count) + ") must be >= n_choices (" +
                          std::to_string(n_choices) + ")");
    }
    if (template_count == 0) throw ConfigError("template_count must be positive");
    if (noise_token_pool == 0 && question_noise_len > 0) {
        throw ConfigError("question_noise_len > 0 needs a non-empty noise_token_pool");
    }
}

std::vector<std::size_t> TaskSpec::knowledge_map() const {
    Rng rng = Rng(knowledge_seed).stream("knowledge");
    std::vector<std::size_t> map(concept_count);
    for (auto& m : map) m = static_cast<std::size_t>(rng.below(attributes_per_concept));
    return map;
}

void AlignmentSpec::validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0,1], got " + std::to_string(rho));
    if (!(template_overlap >= 0.0 && template_overlap <= 1.0)) {
        throw ConfigError("template_overlap must lie in [0,1], got " + std::to_string(template_overlap));
    }
}

CorruptionMode CorruptionMode::random_choices(std::size_t len) {
    return {Kind::RandomChoices, 'a', 50, len};
}

CorruptionMode CorruptionMode::identical_choices(char fill, std::size_t len) {
    return {Kind::IdenticalChoices, fill, 50, len};
}

CorruptionMode CorruptionMode::random_questions_and_choices(std::size_t q_len, std::size_t c_len) {
    return {Kind::RandomQuestionsAndChoices, 'a', q_len, c_len};
}

CorruptionMode CorruptionMode::identical_questions_and_choices(char fill, std::size_t q_len, std::size_t c_len) {
    return {Kind::IdenticalQuestionsAndChoices, fill, q_len, c_len};
}

bool CorruptionMode::replaces_questions() const noexcept {
    return kind == Kind::RandomQuestionsAndChoices || kind == Kind::IdenticalQuestionsAndChoices;
}

bool CorruptionMode::is_identical() const noexcept {
    return kind == Kind::IdenticalChoices || kind == Kind::IdenticalQuestionsAndChoices;
}

void CorruptionMode::validate() const {
    if (choice_len == 0) throw ConfigError("corruption choice length must be positive");
    if (replaces_questions() && question_len == 0) throw ConfigError("corruption question length must be positive");
    if (is_identical() && (fill < 'a' || fill > 'z')) throw ConfigError("corruption fill must be a lowercase letter");
}

std::string to_string(CorruptionMode::Kind kind) {
    switch (kind) {
        case CorruptionMode::Kind::RandomChoices: return "random_choices";
        case CorruptionMode::Kind::IdenticalChoices: return "identical_choices";
        case CorruptionMode::Kind::RandomQuestionsAndChoices: return "random_questions_and_choices";
        case CorruptionMode::Kind::IdenticalQuestionsAndChoices: return "identical_questions_and_choices";
    }
    return "unknown";
}

CorruptionMode::Kind corruption_kind_from_string(std::string_view text) {
    for (auto k : {CorruptionMode::Kind::RandomChoices, CorruptionMode::Kind::IdenticalChoices,
                   CorruptionMode::Kind::RandomQuestionsAndChoices,
                   CorruptionMode::Kind::IdenticalQuestionsAndChoices}) {
        if (to_string(k) == text) return k;
    }
    throw ConfigError("unknown corruption mode '" + std::string(text) + "'");
}

CorruptionMode corruption_from_string(std::string_view text) {
    CorruptionMode mode;
    mode.kind = corruption_kind_from_string(text);
    return mode;
}

std::size_t Dataset::n_choices() const noexcept {
    return items.empty() ? 0 : items.front().choices.size();
}

void Dataset::validate() const {
    std::set<std::string> ids;
    const std::size_t n = n_choices();
    for (const auto& item : items) {
        if (!ids.insert(item.id).second) throw ValidationError("duplicate item id '" + item.id + "'");
        if (item.choices.empty()) throw ValidationError("item '" + item.id + "' has no choices");
        if (item.choices.size() != n) {
            throw ValidationError("item '" + item.id + "' has " + std::to_string(item.choices.size()) +
                                  " choices, dataset uses " + std::to_string(n));
        }
        if (item.answer >= item.choices.size()) {
            throw ValidationError("item '" + item.id + "' has answer " + std::to_string(item.answer) +
                                  " but only " + std::to_string(item.choices.size()) + " choices");
        }
    }
}

} // namespace dlab::data
