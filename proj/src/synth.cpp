#include "scdc/synth.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace scdc::synth {

void ClassProfile::validate() const {
    if (peak_centers.empty()) throw DataError("class profile needs at least one peak");
    if (peak_widths.size() != peak_centers.size() || peak_heights.size() != peak_centers.size()) {
        throw DataError("class profile peak sequences differ in length");
    }
    for (double w : peak_widths) {
        if (!(w > 0.0)) throw DataError("class profile peak widths must be positive");
    }
    for (double h : peak_heights) {
        if (!(h > 0.0)) throw DataError("class profile peak heights must be positive");
    }
    if (baseline_coeffs.size() > 4) throw DataError("baseline polynomial degree exceeds 3");
}

void SynthConfig::validate() const {
    if (!(axis_low < axis_high)) throw DataError("synth axis_range needs low < high");
    if (samples_per_class < 1) throw DataError("synth samples_per_class must be >= 1");
    if (length < 2) throw DataError("synth length must be >= 2");
    if (!(noise_sigma >= 0.0)) throw DataError("synth noise_sigma must be >= 0");
    if (peak_shift < 0.0 || height_jitter < 0.0 || baseline_jitter < 0.0) {
        throw DataError("synth nuisance magnitudes must be >= 0");
    }
    for (const auto& p : class_profiles) p.validate();
}

std::vector<double> SynthConfig::axis() const {
    std::vector<double> a(static_cast<std::size_t>(length));
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = axis_low + (axis_high - axis_low) * static_cast<double>(i) /
                              static_cast<double>(a.size() - 1);
    }
    a.back() = axis_high;
    return a;
}

namespace {

double polynomial(const std::vector<double>& coeffs, double u) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * u + *it;
    return acc;
}

double gaussian(double x, double center, double width, double height) {
    const double d = (x - center) / width;
    return height * std::exp(-0.5 * d * d);
}

}  // namespace

std::vector<double> evaluate_profile(const ClassProfile& profile, const SynthConfig& config,
                                     const std::vector<double>& axis) {
    std::vector<double> y(axis.size());
    const double span = config.axis_high - config.axis_low;
    for (std::size_t i = 0; i < axis.size(); ++i) {
        double v = polynomial(profile.baseline_coeffs, (axis[i] - config.axis_low) / span);
        for (std::size_t p = 0; p < profile.peak_centers.size(); ++p) {
            v += gaussian(axis[i], profile.peak_centers[p], profile.peak_widths[p],
                          profile.peak_heights[p]);
        }
        y[i] = v;
    }
    return y;
}

Spectrum render_spectrum(const ClassProfile& profile, const SynthConfig& config, Rng& rng,
                         std::string id) {
    profile.validate();
    config.validate();
    const auto axis = config.axis();
    const double span = config.axis_high - config.axis_low;

    const double shift = config.peak_shift * rng.uniform(-1.0, 1.0);
    std::vector<double> heights(profile.peak_heights.size());
    for (std::size_t p = 0; p < heights.size(); ++p) {
        heights[p] = profile.peak_heights[p] * std::max(0.0, 1.0 + config.height_jitter * rng.normal());
    }
    std::vector<double> baseline = profile.baseline_coeffs;
    baseline.resize(std::max<std::size_t>(baseline.size(), 3), 0.0);
    for (std::size_t k = 0; k < 3; ++k) baseline[k] += config.baseline_jitter * rng.normal();

    std::vector<double> y(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i) {
        double v = polynomial(baseline, (axis[i] - config.axis_low) / span);
        for (std::size_t p = 0; p < heights.size(); ++p) {
            v += gaussian(axis[i], profile.peak_centers[p] + shift, profile.peak_widths[p], heights[p]);
        }
        y[i] = v + config.noise_sigma * rng.normal();
    }
    return Spectrum(std::move(id), axis, std::move(y));
}

std::vector<LabeledSpectrum> generate_dataset(const SynthConfig& config) {
    config.validate();
    if (config.class_profiles.size() < 2) throw DataError("synth needs at least two class profiles");
    const Rng root = seed_rng(config.seed);
    std::vector<LabeledSpectrum> out;
    out.reserve(config.class_profiles.size() * static_cast<std::size_t>(config.samples_per_class));
    std::uint64_t index = 0;
    for (std::size_t c = 0; c < config.class_profiles.size(); ++c) {
        for (int k = 0; k < config.samples_per_class; ++k, ++index) {
            Rng rng = root.substream("synth", index);
            std::string id = "c" + std::to_string(c) + "_" + std::to_string(k);
            out.push_back({render_spectrum(config.class_profiles[c], config, rng, std::move(id)),
                           static_cast<int>(c)});
        }
    }
    return out;
}

double nearest_centroid_accuracy(const std::vector<LabeledSpectrum>& data) {
    if (data.empty()) return 0.0;
    const int classes = infer_class_count(data);
    const std::size_t n = data.front().spectrum.size();
    std::vector<std::vector<double>> centroid(static_cast<std::size_t>(classes),
                                              std::vector<double>(n, 0.0));
    std::vector<double> count(static_cast<std::size_t>(classes), 0.0);
    for (const auto& d : data) {
        auto& c = centroid[static_cast<std::size_t>(d.label)];
        const auto y = d.spectrum.intensities();
        for (std::size_t i = 0; i < n; ++i) c[i] += y[i];
        count[static_cast<std::size_t>(d.label)] += 1.0;
    }
    for (std::size_t c = 0; c < centroid.size(); ++c) {
        if (count[c] > 0.0) {
            for (double& v : centroid[c]) v /= count[c];
        }
    }
    std::size_t correct = 0;
    for (const auto& d : data) {
        const auto y = d.spectrum.intensities();
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (std::size_t c = 0; c < centroid.size(); ++c) {
            if (count[c] == 0.0) continue;
            double dist = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double diff = y[i] - centroid[c][i];
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                best_c = static_cast<int>(c);
            }
        }
        if (best_c == d.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace scdc::synth
