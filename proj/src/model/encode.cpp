#include "dlab/model/encode.hpp"

#include "dlab/data/text.hpp"
#include "dlab/errors.hpp"

namespace dlab::model {

EncodedItem encode(const data::MCQItem& item, const Vocab& vocab, std::size_t max_len) {
    if (max_len < 4) throw ContractError("max_len must be at least 4");
    EncodedItem out;
    out.n_choices = item.choices.size();
    out.max_len = max_len;
    out.gold = item.answer;
    out.ids.assign(out.n_choices * max_len, Vocab::kPad);

    std::vector<std::int32_t> question{Vocab::kQuestionSep};
    for (const auto& t : data::tokenize(item.question)) question.push_back(vocab.id(t));
    question.push_back(Vocab::kChoiceSep);

    for (std::size_t c = 0; c < out.n_choices; ++c) {
        std::int32_t* row = out.ids.data() + c * max_len;
        std::size_t pos = 0;
        for (auto id : question) {
            if (pos == max_len) break;
            row[pos++] = id;
        }
        for (const auto& t : data::tokenize(item.choices[c])) {
            if (pos == max_len) break;
            row[pos++] = vocab.id(t);
        }
    }
    return out;
}

std::vector<EncodedItem> encode_all(const data::Dataset& ds, const Vocab& vocab, std::size_t max_len) {
    std::vector<EncodedItem> out;
    out.reserve(ds.size());
    for (const auto& item : ds.items) out.push_back(encode(item, vocab, max_len));
    return out;
}

} // namespace dlab::model
