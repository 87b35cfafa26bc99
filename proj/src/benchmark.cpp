#include "scdc/synth.hpp"

namespace scdc::synth {

// Three marker sites with two alternative positions each; six of the eight
// combinations become classes, so pairs of classes differ in one to three
// peaks. Two shared peaks and a sloped baseline are common to every class.
SynthConfig benchmark_config() {
    constexpr double site_a[2] = {620.0, 655.0};
    constexpr double site_b[2] = {1085.0, 1125.0};
    constexpr double site_c[2] = {1580.0, 1620.0};
    constexpr int combos[6][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0},
                                  {0, 0, 1}, {1, 1, 0}, {0, 1, 1}};
    SynthConfig cfg;
    for (const auto& combo : combos) {
        ClassProfile p;
        p.peak_centers = {site_a[combo[0]], 1002.0, site_b[combo[1]], 1445.0, site_c[combo[2]]};
        p.peak_widths = {9.0, 6.0, 11.0, 14.0, 10.0};
        p.peak_heights = {0.9, 0.7, 0.8, 0.5, 0.6};
        p.baseline_coeffs = {0.1, 0.15};
        cfg.class_profiles.push_back(std::move(p));
    }
    cfg.samples_per_class = 200;
    cfg.length = 1024;
    cfg.axis_low = 400.0;
    cfg.axis_high = 1800.0;
    cfg.noise_sigma = 0.05;
    cfg.peak_shift = 30.0;
    cfg.height_jitter = 0.2;
    cfg.baseline_jitter = 0.0;
    cfg.seed = 20240601;
    return cfg;
}

}  // namespace scdc::synth
