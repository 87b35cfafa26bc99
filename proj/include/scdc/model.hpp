#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "scdc/nn/checkpoint.hpp"
#include "scdc/nn/ops.hpp"
#include "scdc/rng.hpp"
#include "scdc/spectrum.hpp"

namespace scdc {

/// Shape of the three-block convolutional encoder and the two heads.
struct ModelConfig {
    int input_length = 1024;
    std::array<int, 3> channels{16, 32, 64};
    std::array<int, 3> kernels{7, 5, 3};
    int pool = 4;
    int hidden_dim = 256;
    int embed_dim = 128;
    int class_count = 2;

    void validate() const;
    /// Flattened encoder width: channels[2] * (input_length / pool^3).
    int feature_dim() const;
};

struct Prediction {
    int label = 0;
    double confidence = 0.0;
};

/// Index of the largest element; ties resolve to the lowest index.
int argmax(std::span<const double> row);

/// Encoder Conv-BN-ReLU-MaxPool x3, an embedding head FC-ReLU-FC and a
/// category head FC-ReLU-FC-softmax.
class ScdcModel {
public:
    ScdcModel(ModelConfig config, std::uint64_t seed);
    ScdcModel(ModelConfig config, const nn::Checkpoint& ckpt);

    const ModelConfig& config() const { return config_; }
    int class_count() const { return config_.class_count; }

    /// x: [B, input_length] -> h: [B, feature_dim]
    nn::Tensor encode(const nn::Tensor& x, nn::Mode mode);
    /// h -> z: [B, embed_dim], not normalized.
    nn::Tensor embed_head(const nn::Tensor& h) const;
    nn::Tensor category_logits(const nn::Tensor& h) const;
    /// h -> rows of class probabilities [B, C].
    nn::Tensor category_head(const nn::Tensor& h) const;

    /// Eval-mode argmax prediction, no graph recorded.
    std::vector<Prediction> predict_class(const nn::Tensor& x);
    /// Eval-mode class probabilities.
    nn::Tensor predict_proba(const nn::Tensor& x);
    /// Eval-mode embeddings.
    nn::Tensor embed(const nn::Tensor& x);

    std::vector<nn::Tensor>& parameters() { return params_; }
    const std::vector<std::string>& parameter_names() const { return names_; }
    nn::Tensor& parameter(const std::string& name);

    /// Parameters, batch-norm running statistics and the model config.
    nn::Checkpoint to_checkpoint() const;

    static ModelConfig config_from_checkpoint(const nn::Checkpoint& ckpt);

private:
    void build(std::uint64_t seed);
    nn::Tensor& add_param(const std::string& name, nn::Shape shape, double bound, Rng& rng);
    nn::Tensor mlp(const nn::Tensor& h, const std::string& prefix) const;
    const nn::Tensor& param(const std::string& name) const;

    ModelConfig config_;
    std::vector<nn::Tensor> params_;
    std::vector<std::string> names_;
    std::array<std::vector<double>, 3> running_mean_;
    std::array<std::vector<double>, 3> running_var_;
};

/// Stacks preprocessed spectra into a [B, L] tensor.
nn::Tensor stack_spectra(std::span<const Spectrum> spectra);
nn::Tensor stack_spectra(std::span<const LabeledSpectrum> spectra);

}  // namespace scdc
