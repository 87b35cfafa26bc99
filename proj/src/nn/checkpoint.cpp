#include "scdc/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace scdc::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr std::size_t kMagicBytes = 8;

void append_u64(std::string& out, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

}  // namespace

const NamedArray& Checkpoint::get(const std::string& name) const {
    for (const auto& a : arrays) {
        if (a.name == name) return a;
    }
    throw std::runtime_error("checkpoint has no array named '" + name + "'");
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    nlohmann::json manifest;
    manifest["format"] = kCheckpointMagic;
    manifest["meta"] = ckpt.meta;
    manifest["arrays"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& a : ckpt.arrays) {
        if (element_count(a.shape) != a.values.size()) {
            throw ShapeError("checkpoint array '" + a.name + "' does not match its shape");
        }
        manifest["arrays"].push_back({{"name", a.name}, {"shape", a.shape}, {"offset", offset}});
        offset += a.values.size() * sizeof(double);
    }
    std::string text = manifest.dump();
    text.append((8 - text.size() % 8) % 8, ' ');

    std::string out(kMagicBytes, '\0');
    std::memcpy(out.data(), kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
    append_u64(out, text.size());
    out += text;
    for (const auto& a : ckpt.arrays) {
        out.append(reinterpret_cast<const char*>(a.values.data()), a.values.size() * sizeof(double));
    }
    return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
    if (bytes.size() < kMagicBytes + 8 ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic) - 1) != 0) {
        throw std::runtime_error("not an SCDC1 checkpoint");
    }
    std::uint64_t manifest_len = 0;
    std::memcpy(&manifest_len, bytes.data() + kMagicBytes, 8);
    const std::size_t data_start = kMagicBytes + 8 + manifest_len;
    if (data_start > bytes.size()) throw std::runtime_error("truncated checkpoint manifest");
    const auto manifest = nlohmann::json::parse(bytes.substr(kMagicBytes + 8, manifest_len));
    if (manifest.at("format") != kCheckpointMagic) {
        throw std::runtime_error("unsupported checkpoint format");
    }
    Checkpoint ckpt;
    ckpt.meta = manifest.at("meta");
    for (const auto& entry : manifest.at("arrays")) {
        NamedArray a;
        a.name = entry.at("name").get<std::string>();
        a.shape = entry.at("shape").get<Shape>();
        const auto offset = entry.at("offset").get<std::uint64_t>();
        const auto count = element_count(a.shape);
        if (data_start + offset + count * sizeof(double) > bytes.size()) {
            throw std::runtime_error("checkpoint array '" + a.name + "' is truncated");
        }
        a.values.resize(count);
        std::memcpy(a.values.data(), bytes.data() + data_start + offset, count * sizeof(double));
        ckpt.arrays.push_back(std::move(a));
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const auto bytes = serialize_checkpoint(ckpt);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

}  // namespace scdc::nn
