#include "dlab/data/text.hpp"

#include <cctype>

namespace dlab::data {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (current.size() > kMaxAtomicTokenLength) {
            for (char c : current) out.emplace_back(1, c);
        } else {
            out.push_back(current);
        }
        current.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    flush();
    return out;
}

} // namespace dlab::data
