#include "scdc/model.hpp"

#include <algorithm>
#include <cmath>

#include "scdc/config.hpp"

namespace scdc {

using nn::Shape;
using nn::Tensor;

void ModelConfig::validate() const {
    if (input_length < 8) throw DataError("model.input_length must be at least 8");
    for (std::size_t i = 0; i < 3; ++i) {
        if (channels[i] < 1) throw DataError("model.channels must be positive");
        if (kernels[i] < 1 || kernels[i] % 2 == 0) {
            throw DataError("model.kernels must be positive odd integers");
        }
    }
    if (pool < 1) throw DataError("model.pool must be positive");
    if (hidden_dim < 1 || embed_dim < 1) throw DataError("model head widths must be positive");
    if (class_count < 2) throw DataError("model.class_count must be at least 2");
    if (feature_dim() < 1) throw DataError("model.input_length too short for three pooling stages");
}

int ModelConfig::feature_dim() const {
    int len = input_length;
    for (int i = 0; i < 3; ++i) len /= pool;
    return channels[2] * len;
}

int argmax(std::span<const double> row) {
    int best = 0;
    for (std::size_t j = 1; j < row.size(); ++j) {
        if (row[j] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    }
    return best;
}

ScdcModel::ScdcModel(ModelConfig config, std::uint64_t seed) : config_(config) {
    config_.validate();
    build(seed);
}

ScdcModel::ScdcModel(ModelConfig config, const nn::Checkpoint& ckpt) : config_(config) {
    config_.validate();
    build(0);
    for (std::size_t k = 0; k < params_.size(); ++k) {
        const auto& a = ckpt.get(names_[k]);
        if (a.shape != params_[k].shape()) {
            throw nn::ShapeError("checkpoint array '" + names_[k] + "' has shape " +
                                 nn::to_string(a.shape) + ", model expects " +
                                 nn::to_string(params_[k].shape()));
        }
        std::copy(a.values.begin(), a.values.end(), params_[k].values().begin());
    }
    for (std::size_t i = 0; i < 3; ++i) {
        const auto prefix = "encoder.bn" + std::to_string(i + 1);
        running_mean_[i] = ckpt.get(prefix + ".running_mean").values;
        running_var_[i] = ckpt.get(prefix + ".running_var").values;
        if (running_mean_[i].size() != static_cast<std::size_t>(config_.channels[i]) ||
            running_var_[i].size() != static_cast<std::size_t>(config_.channels[i])) {
            throw nn::ShapeError("checkpoint running statistics do not match " + prefix);
        }
    }
}

Tensor& ScdcModel::add_param(const std::string& name, Shape shape, double bound, Rng& rng) {
    const auto n = nn::element_count(shape);
    std::vector<double> v(n);
    for (auto& x : v) x = bound > 0.0 ? rng.uniform(-bound, bound) : 0.0;
    params_.emplace_back(std::move(shape), std::move(v), true);
    names_.push_back(name);
    return params_.back();
}

void ScdcModel::build(std::uint64_t seed) {
    const Rng root = seed_rng(seed).substream("init");
    std::size_t counter = 0;
    auto next = [&] { return root.substream("param", counter++); };

    int cin = 1;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto prefix = "encoder.conv" + std::to_string(i + 1);
        const auto cout = static_cast<std::size_t>(config_.channels[i]);
        const auto k = static_cast<std::size_t>(config_.kernels[i]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(cin) * static_cast<double>(k));
        Rng r1 = next();
        add_param(prefix + ".weight", {cout, static_cast<std::size_t>(cin), k}, bound, r1);
        Rng r2 = next();
        add_param(prefix + ".bias", {cout}, bound, r2);
        const auto bn = "encoder.bn" + std::to_string(i + 1);
        params_.push_back(Tensor::filled({cout}, 1.0, true));
        names_.push_back(bn + ".gamma");
        params_.push_back(Tensor::zeros({cout}, true));
        names_.push_back(bn + ".beta");
        running_mean_[i].assign(cout, 0.0);
        running_var_[i].assign(cout, 1.0);
        cin = config_.channels[i];
    }
    const auto d = static_cast<std::size_t>(config_.feature_dim());
    const auto h = static_cast<std::size_t>(config_.hidden_dim);
    auto head = [&](const std::string& prefix, std::size_t out) {
        const double b1 = 1.0 / std::sqrt(static_cast<double>(d));
        const double b2 = 1.0 / std::sqrt(static_cast<double>(h));
        Rng r1 = next();
        add_param(prefix + ".fc1.weight", {d, h}, b1, r1);
        Rng r2 = next();
        add_param(prefix + ".fc1.bias", {h}, b1, r2);
        Rng r3 = next();
        add_param(prefix + ".fc2.weight", {h, out}, b2, r3);
        Rng r4 = next();
        add_param(prefix + ".fc2.bias", {out}, b2, r4);
    };
    head("embed", static_cast<std::size_t>(config_.embed_dim));
    head("category", static_cast<std::size_t>(config_.class_count));
}

const Tensor& ScdcModel::param(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw std::out_of_range("no parameter named '" + name + "'");
    return params_[static_cast<std::size_t>(it - names_.begin())];
}

Tensor& ScdcModel::parameter(const std::string& name) {
    return const_cast<Tensor&>(std::as_const(*this).param(name));
}

Tensor ScdcModel::encode(const Tensor& x, nn::Mode mode) {
    if (x.rank() != 2 || x.dim(1) != static_cast<std::size_t>(config_.input_length)) {
        throw nn::ShapeError("encode: expected [B, " + std::to_string(config_.input_length) +
                             "], got " + nn::to_string(x.shape()));
    }
    const auto batch = x.dim(0);
    // Parameters are laid out as (weight, bias, gamma, beta) per block.
    Tensor a = nn::reshape(x, {batch, 1, x.dim(1)});
    for (std::size_t i = 0; i < 3; ++i) {
        const auto pad = static_cast<std::size_t>(config_.kernels[i] - 1) / 2;
        a = nn::conv1d(a, params_[4 * i], params_[4 * i + 1], 1, pad);
        a = nn::batchnorm1d(a, params_[4 * i + 2], params_[4 * i + 3],
                            {running_mean_[i], running_var_[i]}, mode);
        a = nn::relu(a);
        a = nn::maxpool1d(a, static_cast<std::size_t>(config_.pool));
    }
    return nn::reshape(a, {batch, a.dim(1) * a.dim(2)});
}

Tensor ScdcModel::mlp(const Tensor& h, const std::string& prefix) const {
    Tensor a = nn::linear(h, param(prefix + ".fc1.weight"), param(prefix + ".fc1.bias"));
    a = nn::relu(a);
    return nn::linear(a, param(prefix + ".fc2.weight"), param(prefix + ".fc2.bias"));
}

Tensor ScdcModel::embed_head(const Tensor& h) const { return mlp(h, "embed"); }

Tensor ScdcModel::category_logits(const Tensor& h) const { return mlp(h, "category"); }

Tensor ScdcModel::category_head(const Tensor& h) const {
    return nn::softmax_rows(category_logits(h));
}

Tensor ScdcModel::predict_proba(const Tensor& x) {
    nn::NoGradGuard guard;
    return category_head(encode(x, nn::Mode::eval));
}

Tensor ScdcModel::embed(const Tensor& x) {
    nn::NoGradGuard guard;
    return embed_head(encode(x, nn::Mode::eval));
}

std::vector<Prediction> ScdcModel::predict_class(const Tensor& x) {
    const Tensor p = predict_proba(x);
    const auto c = p.dim(1);
    std::vector<Prediction> out(p.dim(0));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto row = p.values().subspan(i * c, c);
        out[i].label = argmax(row);
        out[i].confidence = row[static_cast<std::size_t>(out[i].label)];
    }
    return out;
}

nn::Checkpoint ScdcModel::to_checkpoint() const {
    nn::Checkpoint ckpt;
    ckpt.meta["model"] = config_;
    for (std::size_t k = 0; k < params_.size(); ++k) {
        const auto v = params_[k].values();
        ckpt.arrays.push_back({names_[k], params_[k].shape(), {v.begin(), v.end()}});
    }
    for (std::size_t i = 0; i < 3; ++i) {
        const auto prefix = "encoder.bn" + std::to_string(i + 1);
        ckpt.arrays.push_back({prefix + ".running_mean", {running_mean_[i].size()}, running_mean_[i]});
        ckpt.arrays.push_back({prefix + ".running_var", {running_var_[i].size()}, running_var_[i]});
    }
    return ckpt;
}

ModelConfig ScdcModel::config_from_checkpoint(const nn::Checkpoint& ckpt) {
    if (!ckpt.meta.contains("model")) throw std::runtime_error("checkpoint lacks model metadata");
    return ckpt.meta.at("model").get<ModelConfig>();
}

namespace {

template <typename Get>
Tensor stack_impl(std::size_t count, Get get) {
    if (count == 0) throw nn::ShapeError("cannot stack an empty batch");
    const auto len = get(0).size();
    std::vector<double> v;
    v.reserve(count * len);
    for (std::size_t i = 0; i < count; ++i) {
        const auto y = get(i).intensities();
        if (y.size() != len) throw nn::ShapeError("stack_spectra: spectra differ in length");
        v.insert(v.end(), y.begin(), y.end());
    }
    return Tensor({count, len}, std::move(v));
}

}  // namespace

Tensor stack_spectra(std::span<const Spectrum> spectra) {
    return stack_impl(spectra.size(), [&](std::size_t i) -> const Spectrum& { return spectra[i]; });
}

Tensor stack_spectra(std::span<const LabeledSpectrum> spectra) {
    return stack_impl(spectra.size(),
                      [&](std::size_t i) -> const Spectrum& { return spectra[i].spectrum; });
}

}  // namespace scdc
