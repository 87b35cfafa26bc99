#include "scdc/augment.hpp"

#include <algorithm>
#include <cmath>

namespace scdc::augment {

void WeakAugConfig::validate() const {
    if (!(scale_low > 0.0 && scale_low <= scale_high)) {
        throw DataError("weak augmentation needs 0 < scale_low <= scale_high");
    }
    if (!(noise_sigma >= 0.0)) throw DataError("weak augmentation noise_sigma must be >= 0");
    if (!(smooth_prob >= 0.0 && smooth_prob <= 1.0)) {
        throw DataError("weak augmentation smooth_prob must be in [0, 1]");
    }
    if (smooth_kernel < 1 || smooth_kernel % 2 == 0) {
        throw DataError("weak augmentation smooth_kernel must be a positive odd integer");
    }
}

void StrongAugConfig::validate() const {
    weak.validate();
    if (max_shift < 0) throw DataError("strong augmentation max_shift must be >= 0");
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
        throw DataError("strong augmentation flip_prob must be in [0, 1]");
    }
}

std::vector<double> gaussian_smooth(std::span<const double> x, int kernel) {
    const int half = kernel / 2;
    if (half == 0) return {x.begin(), x.end()};
    const double sigma = static_cast<double>(kernel - 1) / 4.0;
    std::vector<double> w(static_cast<std::size_t>(kernel));
    for (int k = -half; k <= half; ++k) {
        w[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * k * k / (sigma * sigma));
    }
    const auto n = static_cast<long>(x.size());
    std::vector<double> out(x.size());
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        double norm = 0.0;
        for (int k = -half; k <= half; ++k) {
            const long j = i + k;
            if (j < 0 || j >= n) continue;
            const double wk = w[static_cast<std::size_t>(k + half)];
            acc += wk * x[static_cast<std::size_t>(j)];
            norm += wk;
        }
        out[static_cast<std::size_t>(i)] = acc / norm;
    }
    return out;
}

std::vector<double> circular_shift(std::span<const double> x, long k) {
    const auto n = static_cast<long>(x.size());
    std::vector<double> out(x.size());
    const long s = ((k % n) + n) % n;
    for (long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>((i + s) % n)] = x[static_cast<std::size_t>(i)];
    }
    return out;
}

Spectrum weak_augment(const Spectrum& s, const WeakAugConfig& cfg, Rng& rng) {
    cfg.validate();
    const auto src = s.intensities();
    const auto [mn, mx] = std::minmax_element(src.begin(), src.end());
    const double range = *mx - *mn;

    // Draw order is fixed so the stream layout does not depend on the outcome.
    const bool smooth = rng.bernoulli(cfg.smooth_prob);
    const double scale = rng.uniform(cfg.scale_low, cfg.scale_high);
    std::vector<double> y = smooth ? gaussian_smooth(src, cfg.smooth_kernel)
                                   : std::vector<double>(src.begin(), src.end());
    const double sd = cfg.noise_sigma * range;
    for (double& v : y) v = v * scale + sd * rng.normal();
    return s.with_intensities(std::move(y));
}

Spectrum strong_augment(const Spectrum& s, const StrongAugConfig& cfg, Rng& rng) {
    cfg.validate();
    if (static_cast<std::size_t>(cfg.max_shift) >= s.size()) {
        throw DataError("strong augmentation max_shift must be below the spectrum length");
    }
    Spectrum w = weak_augment(s, cfg.weak, rng);
    const long shift = rng.uniform_int(-cfg.max_shift, cfg.max_shift);
    const bool flip = rng.bernoulli(cfg.flip_prob);
    auto y = circular_shift(w.intensities(), shift);
    if (flip) std::reverse(y.begin(), y.end());
    return s.with_intensities(std::move(y));
}

AugmentedPair make_pair(const Spectrum& s, const WeakAugConfig& weak_cfg,
                        const StrongAugConfig& strong_cfg, const Rng& rng) {
    Rng weak_rng = rng.substream("weak");
    Rng strong_rng = rng.substream("strong");
    return {weak_augment(s, weak_cfg, weak_rng), strong_augment(s, strong_cfg, strong_rng), s.id()};
}

}  // namespace scdc::augment
