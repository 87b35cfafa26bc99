#include "scdc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "scdc/rng.hpp"

namespace scdc {

Spectrum::Spectrum(std::string id, std::vector<double> axis, std::vector<double> intensities)
    : id_(std::move(id)), axis_(std::move(axis)), intensities_(std::move(intensities)) {
    if (axis_.size() != intensities_.size()) {
        throw DataError("spectrum '" + id_ + "': axis and intensity lengths differ");
    }
    if (axis_.size() < 2) {
        throw DataError("spectrum '" + id_ + "': needs at least two points");
    }
    for (std::size_t i = 1; i < axis_.size(); ++i) {
        if (!(axis_[i] > axis_[i - 1])) {
            throw DataError("spectrum '" + id_ + "': axis is not strictly increasing");
        }
    }
    for (double v : intensities_) {
        if (!std::isfinite(v)) {
            throw DataError("spectrum '" + id_ + "': non-finite intensity");
        }
    }
}

Spectrum Spectrum::with_intensities(std::vector<double> intensities) const {
    return Spectrum(id_, axis_, std::move(intensities));
}

void PreprocessConfig::validate() const {
    if (target_length < 8) {
        throw DataError("preprocess.target_length must be at least 8");
    }
}

Spectrum resample_to_length(const Spectrum& s, int target_length) {
    if (target_length < 2) {
        throw DataError("resample target length must be at least 2");
    }
    const auto axis = s.axis();
    const auto y = s.intensities();
    const auto n = static_cast<std::size_t>(target_length);
    const double lo = axis.front();
    const double hi = axis.back();

    std::vector<double> out_axis(n);
    std::vector<double> out(n);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        if (i == n - 1) x = hi;
        out_axis[i] = x;
        while (seg + 2 < axis.size() && axis[seg + 1] < x) ++seg;
        if (i == 0) {
            out[i] = y.front();
        } else if (i == n - 1) {
            out[i] = y.back();
        } else {
            const double t = (x - axis[seg]) / (axis[seg + 1] - axis[seg]);
            out[i] = y[seg] + t * (y[seg + 1] - y[seg]);
        }
    }
    // Nudge coincident grid points produced by rounding on nearly-degenerate axes.
    for (std::size_t i = 1; i < n; ++i) {
        if (!(out_axis[i] > out_axis[i - 1])) {
            out_axis[i] = std::nextafter(out_axis[i - 1], hi + 1.0);
        }
    }
    return Spectrum(s.id(), std::move(out_axis), std::move(out));
}

NormalizeResult minmax_normalize(const Spectrum& s) {
    const auto y = s.intensities();
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    const double lo = *mn;
    const double range = *mx - *mn;
    std::vector<double> out(y.size(), 0.0);
    if (!(range > 0.0)) {
        return {s.with_intensities(std::move(out)), true};
    }
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = (y[i] - lo) / range;
    return {s.with_intensities(std::move(out)), false};
}

std::optional<Spectrum> preprocess(const Spectrum& s, const PreprocessConfig& cfg) {
    cfg.validate();
    Spectrum r = static_cast<int>(s.size()) == cfg.target_length
                     ? s
                     : resample_to_length(s, cfg.target_length);
    if (!cfg.normalize) return r;
    auto norm = minmax_normalize(r);
    if (norm.degenerate) return std::nullopt;
    return std::move(norm.spectrum);
}

std::vector<LabeledSpectrum> preprocess_all(const std::vector<LabeledSpectrum>& data,
                                            const PreprocessConfig& cfg,
                                            std::vector<std::string>* dropped) {
    std::vector<LabeledSpectrum> out;
    out.reserve(data.size());
    for (const auto& d : data) {
        if (auto p = preprocess(d.spectrum, cfg)) {
            out.push_back({std::move(*p), d.label});
        } else if (dropped) {
            dropped->push_back(d.spectrum.id());
        }
    }
    return out;
}

std::vector<SpectrumRecord> preprocess_all(const std::vector<SpectrumRecord>& data,
                                           const PreprocessConfig& cfg,
                                           std::vector<std::string>* dropped) {
    std::vector<SpectrumRecord> out;
    out.reserve(data.size());
    for (const auto& d : data) {
        if (auto p = preprocess(d.spectrum, cfg)) {
            out.push_back({std::move(*p), d.label});
        } else if (dropped) {
            dropped->push_back(d.spectrum.id());
        }
    }
    return out;
}

int infer_class_count(const std::vector<LabeledSpectrum>& data) {
    int c = 0;
    for (const auto& d : data) {
        if (d.label < 0) throw DataError("negative class label for '" + d.spectrum.id() + "'");
        c = std::max(c, d.label + 1);
    }
    return c;
}

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<LabeledSpectrum>& data,
                                                       int class_count) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int label = data[i].label;
        if (label < 0 || label >= class_count) {
            throw DataError("label " + std::to_string(label) + " outside [0, " +
                            std::to_string(class_count) + ")");
        }
        by_class[static_cast<std::size_t>(label)].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].empty()) throw DataError("class " + std::to_string(c) + " has no samples");
    }
    return by_class;
}

// Marks `take` of each class's indices, chosen by a seeded shuffle.
std::vector<bool> stratified_pick(const std::vector<std::vector<std::size_t>>& by_class,
                                  std::size_t total, double fraction, std::size_t min_take,
                                  std::size_t keep_back, const Rng& root, std::string_view tag) {
    std::vector<bool> picked(total, false);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto idx = by_class[c];
        Rng rng = root.substream(tag, c);
        std::shuffle(idx.begin(), idx.end(), rng.engine());
        const auto n = idx.size();
        auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
        take = std::max(take, min_take);
        take = std::min(take, n >= keep_back ? n - keep_back : 0);
        for (std::size_t k = 0; k < take; ++k) picked[idx[k]] = true;
    }
    return picked;
}

}  // namespace

SplitDataset split_annotated(const std::vector<LabeledSpectrum>& data, double fraction,
                             std::uint64_t seed, int class_count) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw DataError("annotation fraction must be in (0, 1]");
    }
    if (class_count <= 0) class_count = infer_class_count(data);
    const auto by_class = indices_by_class(data, class_count);
    const auto picked =
        stratified_pick(by_class, data.size(), fraction, 1, 0, seed_rng(seed), "annotate");

    SplitDataset out;
    out.class_count = class_count;
    out.annotation_fraction = fraction;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (picked[i]) {
            out.annotated.push_back(data[i]);
        } else {
            out.unannotated.push_back(data[i].spectrum);
        }
    }
    return out;
}

HoldOut hold_out_test(const std::vector<LabeledSpectrum>& data, double test_fraction,
                      std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
        throw DataError("test fraction must be in [0, 1)");
    }
    const int class_count = infer_class_count(data);
    const auto by_class = indices_by_class(data, class_count);
    const auto picked =
        stratified_pick(by_class, data.size(), test_fraction, 0, 1, seed_rng(seed), "holdout");
    HoldOut out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        (picked[i] ? out.test : out.train).push_back(data[i]);
    }
    return out;
}

}  // namespace scdc
