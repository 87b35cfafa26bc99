#pragma once

#include <string>

#include "scdc/rng.hpp"
#include "scdc/spectrum.hpp"

namespace scdc::augment {

/// Local perturbations: optional Gaussian smoothing, random scale, additive noise.
struct WeakAugConfig {
    double noise_sigma = 0.01;  // fraction of the spectrum's intensity range
    double scale_low = 0.9;
    double scale_high = 1.1;
    double smooth_prob = 0.5;
    int smooth_kernel = 5;

    void validate() const;
};

/// Weak augmentation followed by a circular channel shift and an optional reversal.
struct StrongAugConfig {
    WeakAugConfig weak;
    int max_shift = 30;
    double flip_prob = 0.5;

    void validate() const;
};

struct AugmentedPair {
    Spectrum weak_view;
    Spectrum strong_view;
    std::string source_id;
};

/// Truncated Gaussian kernel with sigma = (kernel - 1) / 4, renormalized at the edges.
std::vector<double> gaussian_smooth(std::span<const double> x, int kernel);

/// out[i] = x[(i - k) mod L]; positive k moves content towards higher channels.
std::vector<double> circular_shift(std::span<const double> x, long k);

Spectrum weak_augment(const Spectrum& s, const WeakAugConfig& cfg, Rng& rng);
Spectrum strong_augment(const Spectrum& s, const StrongAugConfig& cfg, Rng& rng);

/// Weak and strong views drawn from independent substreams of `rng`.
AugmentedPair make_pair(const Spectrum& s, const WeakAugConfig& weak_cfg,
                        const StrongAugConfig& strong_cfg, const Rng& rng);

}  // namespace scdc::augment
