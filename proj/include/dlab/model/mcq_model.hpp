#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dlab/autodiff/param_store.hpp"
#include "dlab/autodiff/tape.hpp"
#include "dlab/model/encode.hpp"

namespace dlab::model {

struct ModelConfig {
    std::size_t vocab_size = Vocab::kReserved;
    std::size_t embed_dim = 32;
    std::size_t hidden_dim = 64;
    /// Hidden layers of the scorer MLP; 2 gives d -> h -> h -> 1.
    std::size_t hidden_layers = 2;
    std::size_t n_choices = 4;
    std::size_t max_len = 64;

    void validate() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Choice scorer: embed tokens, mean-pool over non-PAD positions, MLP to a
/// scalar. The n_choices scores of an item are its logits.
class MCQModel {
public:
    /// Uniform init on [-1/sqrt(fan_in), 1/sqrt(fan_in)]; the embedding table uses fan_in = embed_dim.
    MCQModel(ModelConfig config, std::uint64_t seed);
    /// Adopts existing parameters; throws DimensionError if they do not match.
    MCQModel(ModelConfig config, ad::ParamStore params);

    const ModelConfig& config() const noexcept { return config_; }
    const ad::ParamStore& params() const noexcept { return params_; }
    ad::ParamStore& params() noexcept { return params_; }

    static std::string embedding_name() { return "embedding"; }
    static std::string weight_name(std::size_t layer);
    static std::string bias_name(std::size_t layer);
    /// Name of the last (scalar output) layer's bias.
    std::string output_bias_name() const { return bias_name(config_.hidden_layers); }

    /// Logits [items x n_choices] recorded on the tape the parameters are bound to.
    ad::Var forward(const ad::BoundParams& params, std::span<const EncodedItem> items) const;

    /// Untaped inference, one logit row per item.
    std::vector<std::vector<double>> logits(std::span<const EncodedItem> items) const;
    std::vector<double> logits(const EncodedItem& item) const;

    friend bool operator==(const MCQModel&, const MCQModel&) = default;

private:
    ModelConfig config_;
    ad::ParamStore params_;
};

/// Index of the largest logit; ties go to the lowest index.
std::size_t argmax(std::span<const double> logits);

} // namespace dlab::model
