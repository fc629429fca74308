#include "dlab/model/mcq_model.hpp"

#include <cmath>

#include "dlab/autodiff/rng.hpp"
#include "dlab/errors.hpp"

namespace dlab::model {

using ad::Tensor;
using ad::Var;

void ModelConfig::validate() const {
    if (vocab_size < Vocab::kReserved) throw ConfigError("vocab_size must cover the reserved tokens");
    if (embed_dim == 0) throw ConfigError("embed_dim must be positive");
    if (hidden_dim == 0 && hidden_layers > 0) throw ConfigError("hidden_dim must be positive");
    if (n_choices < 2) throw ConfigError("n_choices must be at least 2");
    if (max_len < 4) throw ConfigError("max_len must be at least 4");
}

std::string MCQModel::weight_name(std::size_t layer) { return "mlp." + std::to_string(layer) + ".weight"; }
std::string MCQModel::bias_name(std::size_t layer) { return "mlp." + std::to_string(layer) + ".bias"; }

namespace {

struct LayerShape {
    std::size_t fan_in;
    std::size_t fan_out;
};

std::vector<LayerShape> layer_shapes(const ModelConfig& c) {
    std::vector<LayerShape> out;
    std::size_t in = c.embed_dim;
    for (std::size_t l = 0; l < c.hidden_layers; ++l) {
        out.push_back({in, c.hidden_dim});
        in = c.hidden_dim;
    }
    out.push_back({in, 1});
    return out;
}

Tensor uniform_tensor(ad::Shape shape, double bound, Rng rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = rng.uniform(-bound, bound);
    return t;
}

} // namespace

MCQModel::MCQModel(ModelConfig config, std::uint64_t seed) : config_(config) {
    config_.validate();
    const Rng root(seed);
    const double embed_bound = 1.0 / std::sqrt(static_cast<double>(config_.embed_dim));
    params_.add(embedding_name(),
                uniform_tensor({config_.vocab_size, config_.embed_dim}, embed_bound, root.stream(embedding_name())));
    const auto layers = layer_shapes(config_);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layers[l].fan_in));
        params_.add(weight_name(l),
                    uniform_tensor({layers[l].fan_in, layers[l].fan_out}, bound, root.stream(weight_name(l))));
        params_.add(bias_name(l), uniform_tensor({layers[l].fan_out}, bound, root.stream(bias_name(l))));
    }
}

MCQModel::MCQModel(ModelConfig config, ad::ParamStore params) : config_(config), params_(std::move(params)) {
    config_.validate();
    std::size_t expected = 1;
    auto check = [this](const std::string& name, const ad::Shape& shape) {
        if (!params_.contains(name)) throw DimensionError("model is missing parameter '" + name + "'");
        if (params_.get(name).shape() != shape) {
            throw DimensionError("parameter '" + name + "' has shape " +
                                 ad::shape_to_string(params_.get(name).shape()) + ", expected " +
                                 ad::shape_to_string(shape));
        }
    };
    check(embedding_name(), {config_.vocab_size, config_.embed_dim});
    const auto layers = layer_shapes(config_);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        check(weight_name(l), {layers[l].fan_in, layers[l].fan_out});
        check(bias_name(l), {layers[l].fan_out});
        expected += 2;
    }
    if (params_.size() != expected) throw DimensionError("model has unexpected extra parameters");
    for (const auto& [name, t] : params_) {
        if (!t.all_finite()) throw DimensionError("parameter '" + name + "' has non-finite values");
    }
}

Var MCQModel::forward(const ad::BoundParams& params, std::span<const EncodedItem> items) const {
    if (items.empty()) throw ContractError("forward needs at least one item");
    const std::size_t n = config_.n_choices;
    const std::size_t len = items.front().max_len;
    std::vector<std::int32_t> ids;
    ids.reserve(items.size() * n * len);
    for (const auto& item : items) {
        if (item.n_choices != n || item.max_len != len) {
            throw DimensionError("encoded item has " + std::to_string(item.n_choices) + " choices of length " +
                                 std::to_string(item.max_len) + ", model expects " + std::to_string(n));
        }
        ids.insert(ids.end(), item.ids.begin(), item.ids.end());
    }

    Var h = ad::embed_mean_pool(params[embedding_name()], ids, len, Vocab::kPad);
    for (std::size_t l = 0; l < config_.hidden_layers; ++l) {
        h = ad::relu(ad::add_bias(ad::matmul(h, params[weight_name(l)]), params[bias_name(l)]));
    }
    const std::size_t out = config_.hidden_layers;
    Var scores = ad::add_bias(ad::matmul(h, params[weight_name(out)]), params[bias_name(out)]);
    return ad::reshape(scores, {items.size(), n});
}

std::vector<std::vector<double>> MCQModel::logits(std::span<const EncodedItem> items) const {
    constexpr std::size_t kChunk = 256;
    std::vector<std::vector<double>> out;
    out.reserve(items.size());
    for (std::size_t start = 0; start < items.size(); start += kChunk) {
        const auto chunk = items.subspan(start, std::min(kChunk, items.size() - start));
        ad::Tape tape;
        ad::BoundParams bound(tape, params_);
        const Tensor& result = forward(bound, chunk).value();
        const std::size_t n = config_.n_choices;
        for (std::size_t r = 0; r < chunk.size(); ++r) {
            out.emplace_back(result.values().begin() + static_cast<std::ptrdiff_t>(r * n),
                             result.values().begin() + static_cast<std::ptrdiff_t>((r + 1) * n));
        }
    }
    return out;
}

std::vector<double> MCQModel::logits(const EncodedItem& item) const {
    return logits(std::span<const EncodedItem>(&item, 1)).front();
}

std::size_t argmax(std::span<const double> logits) {
    if (logits.empty()) throw ContractError("argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return best;
}

} // namespace dlab::model
