#pragma once

#include <cstdint>
#include <vector>

#include "dlab/data/dataset.hpp"
#include "dlab/model/vocab.hpp"

namespace dlab::model {

/// One token sequence per choice: QSEP, question tokens, CSEP, choice
/// tokens, truncated or PAD-filled to max_len.
struct EncodedItem {
    std::size_t n_choices = 0;
    std::size_t max_len = 0;
    /// n_choices x max_len, row-major.
    std::vector<std::int32_t> ids;
    std::size_t gold = 0;

    std::span<const std::int32_t> sequence(std::size_t choice) const {
        return std::span<const std::int32_t>(ids).subspan(choice * max_len, max_len);
    }
    friend bool operator==(const EncodedItem&, const EncodedItem&) = default;
};

/// Throws ContractError when max_len < 4.
EncodedItem encode(const data::MCQItem& item, const Vocab& vocab, std::size_t max_len);
std::vector<EncodedItem> encode_all(const data::Dataset& ds, const Vocab& vocab, std::size_t max_len);

} // namespace dlab::model
