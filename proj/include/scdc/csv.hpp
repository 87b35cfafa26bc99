#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "scdc/spectrum.hpp"

namespace scdc {

/// Column layout of a spectra CSV: `id[,label],<axis_1>,...,<axis_L>`.
struct CsvSchema {
    enum class LabelColumn { detect, present, absent };
    LabelColumn label = LabelColumn::detect;
};

std::vector<SpectrumRecord> load_csv(const std::filesystem::path& path, CsvSchema schema = {});
std::vector<SpectrumRecord> parse_csv(std::istream& in, CsvSchema schema = {});

/// Writes the `id,label,<axis...>` layout. All records must share one axis.
void write_csv(const std::filesystem::path& path, const std::vector<SpectrumRecord>& records);
void write_csv(std::ostream& out, const std::vector<SpectrumRecord>& records);

std::vector<SpectrumRecord> to_records(const std::vector<LabeledSpectrum>& data);
std::vector<SpectrumRecord> to_records(const std::vector<Spectrum>& data);

/// Keeps labelled rows only.
std::vector<LabeledSpectrum> labeled_only(const std::vector<SpectrumRecord>& records);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace scdc
