#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scdc {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One intensity sequence over a strictly increasing wavenumber axis.
///
/// The constructor enforces the invariants: at least two points, matching
/// lengths, strictly increasing axis and finite intensities.
class Spectrum {
public:
    Spectrum(std::string id, std::vector<double> axis, std::vector<double> intensities);

    /// Same axis and id, new intensities (length must match).
    Spectrum with_intensities(std::vector<double> intensities) const;

    const std::string& id() const { return id_; }
    std::span<const double> axis() const { return axis_; }
    std::span<const double> intensities() const { return intensities_; }
    std::size_t size() const { return intensities_.size(); }

    friend bool operator==(const Spectrum&, const Spectrum&) = default;

private:
    std::string id_;
    std::vector<double> axis_;
    std::vector<double> intensities_;
};

struct LabeledSpectrum {
    Spectrum spectrum;
    int label = 0;
};

/// A CSV row: the label is absent for unannotated rows.
struct SpectrumRecord {
    Spectrum spectrum;
    std::optional<int> label;
};

struct SplitDataset {
    std::vector<LabeledSpectrum> annotated;
    std::vector<Spectrum> unannotated;
    std::vector<LabeledSpectrum> test;
    int class_count = 0;
    double annotation_fraction = 1.0;
};

struct PreprocessConfig {
    int target_length = 1024;
    bool normalize = true;

    void validate() const;
};

struct NormalizeResult {
    Spectrum spectrum;
    bool degenerate = false;
};

Spectrum resample_to_length(const Spectrum& s, int target_length);

/// Maps intensities onto [0, 1]. A constant spectrum maps to zeros and is
/// flagged degenerate.
NormalizeResult minmax_normalize(const Spectrum& s);

/// Resample then normalize; nullopt when the spectrum is degenerate.
std::optional<Spectrum> preprocess(const Spectrum& s, const PreprocessConfig& cfg);

/// Applies `preprocess` to every record, dropping degenerate ones.
/// `dropped` (when given) receives the ids that were excluded.
std::vector<LabeledSpectrum> preprocess_all(const std::vector<LabeledSpectrum>& data,
                                            const PreprocessConfig& cfg,
                                            std::vector<std::string>* dropped = nullptr);
std::vector<SpectrumRecord> preprocess_all(const std::vector<SpectrumRecord>& data,
                                           const PreprocessConfig& cfg,
                                           std::vector<std::string>* dropped = nullptr);

/// Number of classes implied by the labels (max label + 1).
int infer_class_count(const std::vector<LabeledSpectrum>& data);

/// Stratified annotated/unannotated split: per class, round(fraction * n)
/// samples (at least one) are annotated, the rest lose their labels.
/// `class_count` defaults to the inferred count.
SplitDataset split_annotated(const std::vector<LabeledSpectrum>& data, double fraction,
                             std::uint64_t seed, int class_count = 0);

struct HoldOut {
    std::vector<LabeledSpectrum> train;
    std::vector<LabeledSpectrum> test;
};

/// Stratified train/test hold-out. Each class keeps at least one training sample.
HoldOut hold_out_test(const std::vector<LabeledSpectrum>& data, double test_fraction,
                      std::uint64_t seed);

}  // namespace scdc
