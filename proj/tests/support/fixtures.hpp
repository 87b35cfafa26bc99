#pragma once

// Hand-built models and corpora shared by trainer, CLI and acceptance tests.

#include <string>
#include <vector>

#include "scdc/model.hpp"
#include "scdc/spectrum.hpp"
#include "scdc/synth.hpp"

namespace fixture {

/// Identity encoder (pool 1, one channel, 1-tap kernels) over one-hot spectra
/// of length `classes`, followed by identity heads: predicts the hot index.
inline scdc::ScdcModel perfect_model(int classes) {
    scdc::ModelConfig cfg;
    cfg.input_length = classes < 8 ? 8 : classes;
    cfg.channels = {1, 1, 1};
    cfg.kernels = {1, 1, 1};
    cfg.pool = 1;
    cfg.hidden_dim = cfg.input_length;
    cfg.embed_dim = 2;
    cfg.class_count = classes;
    scdc::ScdcModel m(cfg, 0);
    for (std::size_t i = 0; i < m.parameters().size(); ++i) {
        auto v = m.parameters()[i].values();
        std::fill(v.begin(), v.end(), 0.0);
    }
    for (int b = 1; b <= 3; ++b) {
        m.parameter("encoder.conv" + std::to_string(b) + ".weight").values()[0] = 1.0;
        m.parameter("encoder.bn" + std::to_string(b) + ".gamma").values()[0] = 1.0;
    }
    const auto d = static_cast<std::size_t>(cfg.input_length);
    auto fc1 = m.parameter("category.fc1.weight").values();
    for (std::size_t i = 0; i < d; ++i) fc1[i * d + i] = 1.0;
    auto fc2 = m.parameter("category.fc2.weight").values();
    for (std::size_t i = 0; i < static_cast<std::size_t>(classes); ++i) fc2[i * static_cast<std::size_t>(classes) + i] = 10.0;
    return m;
}

/// Spectra with a single spike at the label's channel.
inline std::vector<scdc::LabeledSpectrum> one_hot_spectra(int classes, int per_class, int length = 8) {
    std::vector<double> axis(static_cast<std::size_t>(length));
    for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = 100.0 + static_cast<double>(i);
    std::vector<scdc::LabeledSpectrum> out;
    for (int k = 0; k < per_class; ++k)
        for (int c = 0; c < classes; ++c) {
            std::vector<double> y(axis.size(), 0.0);
            y[static_cast<std::size_t>(c)] = 1.0;
            out.push_back({scdc::Spectrum("s" + std::to_string(c) + "_" + std::to_string(k), axis, y), c});
        }
    return out;
}

/// A fast three-class generator config for smoke runs.
inline scdc::synth::SynthConfig tiny_synth(int per_class = 20, int length = 64) {
    scdc::synth::SynthConfig cfg;
    cfg.class_profiles = {{{600.0, 1200.0}, {30.0, 40.0}, {1.0, 0.5}, {0.1}},
                          {{900.0, 1500.0}, {30.0, 40.0}, {1.0, 0.5}, {0.1}},
                          {{700.0, 1650.0}, {40.0, 30.0}, {0.7, 1.0}, {0.1}}};
    cfg.samples_per_class = per_class;
    cfg.length = length;
    cfg.noise_sigma = 0.02;
    cfg.seed = 3;
    return cfg;
}

inline scdc::ModelConfig tiny_model(int input_length = 64, int classes = 3) {
    scdc::ModelConfig cfg;
    cfg.input_length = input_length;
    cfg.channels = {4, 4, 4};
    cfg.kernels = {5, 3, 3};
    cfg.pool = 2;
    cfg.hidden_dim = 16;
    cfg.embed_dim = 8;
    cfg.class_count = classes;
    return cfg;
}

}  // namespace fixture
