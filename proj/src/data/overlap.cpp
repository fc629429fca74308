#include "dlab/data/overlap.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "dlab/data/text.hpp"
#include "dlab/errors.hpp"

namespace dlab::data {

namespace {

std::vector<std::vector<std::string>> question_sets(const Dataset& ds) {
    std::vector<std::vector<std::string>> out;
    out.reserve(ds.size());
    for (const auto& item : ds.items) {
        auto tokens = tokenize(item.question);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        out.push_back(std::move(tokens));
    }
    return out;
}

std::size_t intersection_size(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::size_t n = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

} // namespace

std::size_t vocab_overlap(const Dataset& a, const Dataset& b, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw ContractError("vocab_overlap threshold must lie in (0,1]");
    if (a.empty() || b.empty()) throw ContractError("vocab_overlap needs two non-empty datasets");

    const auto sa = question_sets(a);
    const auto sb = question_sets(b);
    std::size_t count = 0;
    for (const auto& x : sa) {
        for (const auto& y : sb) {
            const std::size_t inter = intersection_size(x, y);
            const std::size_t uni = x.size() + y.size() - inter;
            // Two empty questions are identical.
            const double jaccard = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
            if (jaccard >= tau) ++count;
        }
    }
    return count;
}

} // namespace dlab::data
