#pragma once

#include <cstdint>
#include <vector>

#include "scdc/rng.hpp"
#include "scdc/spectrum.hpp"

namespace scdc::synth {

/// Gaussian peaks over a polynomial baseline. Baseline coefficients are in
/// the normalized axis coordinate u = (x - low) / (high - low), constant term first.
struct ClassProfile {
    std::vector<double> peak_centers;
    std::vector<double> peak_widths;  // standard deviations, wavenumber units
    std::vector<double> peak_heights;
    std::vector<double> baseline_coeffs;

    void validate() const;
};

struct SynthConfig {
    std::vector<ClassProfile> class_profiles;
    int samples_per_class = 100;
    double noise_sigma = 0.0;
    double axis_low = 400.0;
    double axis_high = 1800.0;
    int length = 1024;
    std::uint64_t seed = 0;

    // Per-sample nuisance variation. All zero means every sample of a class
    // is its profile plus white noise.
    double peak_shift = 0.0;       // max |global shift| of peak centers, wavenumbers
    double height_jitter = 0.0;    // relative sd of each peak height
    double baseline_jitter = 0.0;  // sd of added constant/linear/quadratic baseline terms

    void validate() const;
    std::vector<double> axis() const;
};

/// Noise-free evaluation of a profile on `axis` (no nuisance terms).
std::vector<double> evaluate_profile(const ClassProfile& profile, const SynthConfig& config,
                                     const std::vector<double>& axis);

Spectrum render_spectrum(const ClassProfile& profile, const SynthConfig& config, Rng& rng,
                         std::string id = "synthetic");

/// samples_per_class spectra per profile, labelled by profile index, class-major order.
std::vector<LabeledSpectrum> generate_dataset(const SynthConfig& config);

/// The frozen desk-scale benchmark: 6 classes, 200 samples per class, 1024 points.
SynthConfig benchmark_config();

/// Resubstitution accuracy of the nearest-class-centroid rule (Euclidean) on
/// the spectra as given.
double nearest_centroid_accuracy(const std::vector<LabeledSpectrum>& data);

}  // namespace scdc::synth
