#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dlab::data {

/// Tokens longer than this are split into single characters, so random
/// character strings stay representable with a small vocabulary.
inline constexpr std::size_t kMaxAtomicTokenLength = 9;

/// Lowercases, splits on whitespace, and breaks long tokens into characters.
std::vector<std::string> tokenize(std::string_view text);

} // namespace dlab::data
