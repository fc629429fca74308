#include "dlab/data/corruption.hpp"

#include "dlab/autodiff/rng.hpp"
#include "dlab/errors.hpp"

namespace dlab::data {

namespace {

std::string random_letters(Rng& rng, std::size_t len) {
    std::string s(len, 'a');
    for (auto& c : s) c = static_cast<char>('a' + rng.below(26));
    return s;
}

} // namespace

Dataset corrupt(const Dataset& ds, const CorruptionMode& mode, std::uint64_t seed) {
    mode.validate();
    if (ds.empty()) throw ContractError("cannot corrupt an empty dataset");

    Dataset out = ds;
    const Rng root(seed);
    const bool identical = mode.is_identical();
    for (std::size_t i = 0; i < out.items.size(); ++i) {
        auto& item = out.items[i];
        Rng rng = root.stream("corrupt", i);
        if (mode.replaces_questions()) {
            item.question = identical ? std::string(mode.question_len, mode.fill) : random_letters(rng, mode.question_len);
        }
        for (auto& choice : item.choices) {
            choice = identical ? std::string(mode.choice_len, mode.fill) : random_letters(rng, mode.choice_len);
        }
    }
    out.manifest.corruptions.push_back({mode, seed});
    return out;
}

} // namespace dlab::data
