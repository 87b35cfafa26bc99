#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "scdc/nn/tensor.hpp"

namespace scdc::nn {

struct NamedArray {
    std::string name;
    Shape shape;
    std::vector<double> values;
};

/// Binary container: the 8-byte magic "SCDC1\0\0\0", a little-endian u64 manifest
/// length, the JSON manifest (padded with spaces to a multiple of 8 bytes),
/// then the raw little-endian float64 arrays. The manifest lists each array's
/// name, shape and byte offset into the data section, plus free-form metadata.
struct Checkpoint {
    nlohmann::json meta = nlohmann::json::object();
    std::vector<NamedArray> arrays;

    const NamedArray& get(const std::string& name) const;
};

inline constexpr char kCheckpointMagic[] = "SCDC1";

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

}  // namespace scdc::nn
