#include "dlab/model/vocab.hpp"

#include <algorithm>
#include <set>

#include "dlab/data/text.hpp"
#include "dlab/errors.hpp"

namespace dlab::model {

namespace {
const std::vector<std::string> kReservedTokens = {"<pad>", "<unk>", "<qsep>", "<csep>"};
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> tokens) {
    if (!std::is_sorted(tokens.begin(), tokens.end()) ||
        std::adjacent_find(tokens.begin(), tokens.end()) != tokens.end()) {
        throw ContractError("vocabulary tokens must be sorted and unique");
    }
    tokens_ = kReservedTokens;
    tokens_.insert(tokens_.end(), std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end()));
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second) {
            throw ContractError("token '" + tokens_[i] + "' collides with a reserved marker");
        }
    }
}

std::int32_t Vocab::id(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end() || it->second < static_cast<std::int32_t>(kReserved)) return kUnk;
    return it->second;
}

const std::string& Vocab::token(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
        throw ContractError("token id " + std::to_string(id) + " outside vocabulary of " +
                            std::to_string(tokens_.size()));
    }
    return tokens_[static_cast<std::size_t>(id)];
}

namespace {

void collect(const data::Dataset& ds, std::set<std::string>& out) {
    for (const auto& item : ds.items) {
        for (auto& t : data::tokenize(item.question)) out.insert(std::move(t));
        for (const auto& c : item.choices) {
            for (auto& t : data::tokenize(c)) out.insert(std::move(t));
        }
    }
}

Vocab from_set(std::set<std::string> tokens) {
    for (const auto& r : kReservedTokens) tokens.erase(r);
    return Vocab(std::vector<std::string>(tokens.begin(), tokens.end()));
}

} // namespace

Vocab build_vocab(std::span<const data::Dataset> datasets) {
    if (datasets.empty()) throw ContractError("build_vocab needs at least one dataset");
    std::set<std::string> tokens;
    for (const auto& ds : datasets) collect(ds, tokens);
    return from_set(std::move(tokens));
}

Vocab build_vocab(std::initializer_list<const data::Dataset*> datasets) {
    if (datasets.size() == 0) throw ContractError("build_vocab needs at least one dataset");
    std::set<std::string> tokens;
    for (const auto* ds : datasets) collect(*ds, tokens);
    return from_set(std::move(tokens));
}

} // namespace dlab::model
