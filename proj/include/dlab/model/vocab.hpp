#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dlab/data/dataset.hpp"

namespace dlab::model {

/// Token <-> id mapping shared by teacher and student. Ids 0..3 are reserved.
class Vocab {
public:
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kUnk = 1;
    static constexpr std::int32_t kQuestionSep = 2;
    static constexpr std::int32_t kChoiceSep = 3;
    static constexpr std::size_t kReserved = 4;

    /// Reserved ids only.
    Vocab();
    /// Reserved ids followed by `tokens` (must be sorted and unique).
    explicit Vocab(std::vector<std::string> tokens);

    std::int32_t id(const std::string& token) const;
    const std::string& token(std::int32_t id) const;
    bool contains(const std::string& token) const { return index_.count(token) != 0; }
    std::size_t size() const noexcept { return tokens_.size(); }
    /// All tokens in id order, reserved markers included.
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> index_;
};

/// Covers every question and choice token of every dataset; ids assigned in
/// lexicographic token order. Throws ContractError for an empty list.
Vocab build_vocab(std::span<const data::Dataset> datasets);
Vocab build_vocab(std::initializer_list<const data::Dataset*> datasets);

} // namespace dlab::model
