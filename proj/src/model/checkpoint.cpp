#include "dlab/model/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "dlab/errors.hpp"

namespace dlab::model {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'L', 'A', 'B', 'M', 'C', 'Q', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 40;

template <typename U>
void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes;
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw FormatError("checkpoint is truncated");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

void put_string(std::ostream& out, const std::string& s) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto len = get_le<std::uint32_t>(in);
    std::string s(len, '\0');
    if (len > 0 && !in.read(s.data(), len)) throw FormatError("checkpoint is truncated");
    return s;
}

std::uint64_t get_count(std::istream& in) {
    const auto n = get_le<std::uint64_t>(in);
    if (n > kMaxCount) throw FormatError("checkpoint count field is implausible");
    return n;
}

} // namespace

void save_checkpoint(const MCQModel& model, const Vocab& vocab, std::ostream& out) {
    const auto& c = model.config();
    if (c.vocab_size != vocab.size()) throw ContractError("model and vocabulary sizes differ");
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kVersion);
    for (std::uint64_t v : {c.vocab_size, c.embed_dim, c.hidden_dim, c.hidden_layers, c.n_choices, c.max_len}) {
        put_le<std::uint64_t>(out, v);
    }
    put_le<std::uint64_t>(out, vocab.size());
    for (const auto& t : vocab.tokens()) put_string(out, t);
    put_le<std::uint64_t>(out, model.params().size());
    for (const auto& [name, tensor] : model.params()) {
        put_string(out, name);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
        for (auto d : tensor.shape()) put_le<std::uint64_t>(out, d);
        for (double v : tensor.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
}

void save_checkpoint(const MCQModel& model, const Vocab& vocab, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    save_checkpoint(model, vocab, out);
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("not a model checkpoint");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));

    ModelConfig c;
    c.vocab_size = get_le<std::uint64_t>(in);
    c.embed_dim = get_le<std::uint64_t>(in);
    c.hidden_dim = get_le<std::uint64_t>(in);
    c.hidden_layers = get_le<std::uint64_t>(in);
    c.n_choices = get_le<std::uint64_t>(in);
    c.max_len = get_le<std::uint64_t>(in);

    const auto token_count = get_count(in);
    if (token_count < Vocab::kReserved) throw FormatError("checkpoint vocabulary lacks reserved tokens");
    std::vector<std::string> tokens;
    for (std::uint64_t i = 0; i < token_count; ++i) {
        auto t = get_string(in);
        if (i >= Vocab::kReserved) tokens.push_back(std::move(t));
    }

    ad::ParamStore params;
    const auto param_count = get_count(in);
    for (std::uint64_t p = 0; p < param_count; ++p) {
        auto name = get_string(in);
        const auto rank = get_le<std::uint32_t>(in);
        if (rank == 0 || rank > 8) throw FormatError("parameter '" + name + "' has invalid rank");
        ad::Shape shape(rank);
        for (auto& d : shape) d = get_count(in);
        std::vector<double> values(ad::shape_size(shape));
        for (auto& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
        params.add(name, ad::Tensor(std::move(shape), std::move(values)));
    }

    try {
        Vocab vocab(std::move(tokens));
        MCQModel model(c, std::move(params));
        if (vocab.size() != c.vocab_size) throw FormatError("checkpoint vocabulary size mismatch");
        return Checkpoint{std::move(model), std::move(vocab)};
    } catch (const ContractError& e) {
        throw FormatError(std::string("inconsistent checkpoint: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("inconsistent checkpoint: ") + e.what());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return load_checkpoint(in);
}

} // namespace dlab::model
