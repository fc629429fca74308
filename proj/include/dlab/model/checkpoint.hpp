#pragma once

#include <filesystem>
#include <iosfwd>

#include "dlab/model/mcq_model.hpp"
#include "dlab/model/vocab.hpp"

namespace dlab::model {

// Binary layout, all integers and floats little-endian:
//   magic "DLABMCQ\0", u32 version (1)
//   u64 vocab_size, embed_dim, hidden_dim, hidden_layers, n_choices, max_len
//   u64 token count, then per token: u32 byte length, bytes
//   u64 parameter count, then per parameter (lexicographic by name):
//     u32 name length, name bytes, u32 rank, u64 dims[rank], f64 values[]

struct Checkpoint {
    MCQModel model;
    Vocab vocab;
};

void save_checkpoint(const MCQModel& model, const Vocab& vocab, std::ostream& out);
void save_checkpoint(const MCQModel& model, const Vocab& vocab, const std::filesystem::path& path);

/// Throws FormatError on a bad magic, version, or truncated file.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace dlab::model
