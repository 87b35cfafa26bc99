#include "scdc/csv.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace scdc {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

bool parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf.data(), ptr);
}

std::vector<SpectrumRecord> parse_csv(std::istream& in, CsvSchema schema) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: missing header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

    const auto header = split(line);
    if (header.empty() || header[0] != "id") throw DataError("csv: header must start with 'id'");
    bool has_label = header.size() > 1 && header[1] == "label";
    if (schema.label == CsvSchema::LabelColumn::present && !has_label) {
        throw DataError("csv: expected a 'label' column");
    }
    if (schema.label == CsvSchema::LabelColumn::absent && has_label) {
        throw DataError("csv: unexpected 'label' column");
    }
    const std::size_t first_axis = has_label ? 2 : 1;
    if (header.size() < first_axis + 2) throw DataError("csv: need at least two axis columns");

    std::vector<double> axis;
    for (std::size_t c = first_axis; c < header.size(); ++c) {
        double v = 0.0;
        if (!parse_number(header[c], v)) {
            throw DataError("csv header: non-numeric axis value '" + std::string(header[c]) + "'");
        }
        if (!axis.empty() && !(v > axis.back())) {
            throw DataError("csv header: axis values are not strictly increasing");
        }
        axis.push_back(v);
    }

    std::vector<SpectrumRecord> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const std::string where = "row " + std::to_string(row) + ": ";
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw DataError(where + "expected " + std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        std::optional<int> label;
        if (has_label && !cells[1].empty()) {
            int v = 0;
            const auto* end = cells[1].data() + cells[1].size();
            const auto [ptr, ec] = std::from_chars(cells[1].data(), end, v);
            if (ec != std::errc() || ptr != end || v < 0) {
                throw DataError(where + "invalid label '" + std::string(cells[1]) + "'");
            }
            label = v;
        }
        std::vector<double> values(axis.size());
        for (std::size_t c = 0; c < axis.size(); ++c) {
            if (!parse_number(cells[first_axis + c], values[c])) {
                throw DataError(where + "non-numeric intensity");
            }
        }
        try {
            out.push_back({Spectrum(std::string(cells[0]), axis, std::move(values)), label});
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
    }
    return out;
}

std::vector<SpectrumRecord> load_csv(const std::filesystem::path& path, CsvSchema schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return parse_csv(in, schema);
}

void write_csv(std::ostream& out, const std::vector<SpectrumRecord>& records) {
    out << "id,label";
    if (!records.empty()) {
        for (double a : records.front().spectrum.axis()) out << ',' << format_double(a);
    }
    out << '\n';
    for (const auto& r : records) {
        if (!records.empty() && !std::equal(r.spectrum.axis().begin(), r.spectrum.axis().end(),
                                            records.front().spectrum.axis().begin(),
                                            records.front().spectrum.axis().end())) {
            throw DataError("write_csv: records do not share one axis");
        }
        out << r.spectrum.id() << ',';
        if (r.label) out << *r.label;
        for (double v : r.spectrum.intensities()) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const std::vector<SpectrumRecord>& records) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    write_csv(out, records);
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::vector<SpectrumRecord> to_records(const std::vector<LabeledSpectrum>& data) {
    std::vector<SpectrumRecord> out;
    out.reserve(data.size());
    for (const auto& d : data) out.push_back({d.spectrum, d.label});
    return out;
}

std::vector<SpectrumRecord> to_records(const std::vector<Spectrum>& data) {
    std::vector<SpectrumRecord> out;
    out.reserve(data.size());
    for (const auto& d : data) out.push_back({d, std::nullopt});
    return out;
}

std::vector<LabeledSpectrum> labeled_only(const std::vector<SpectrumRecord>& records) {
    std::vector<LabeledSpectrum> out;
    for (const auto& r : records) {
        if (r.label) out.push_back({r.spectrum, *r.label});
    }
    return out;
}

}  // namespace scdc
