#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scdc/augment.hpp"
#include "scdc/losses.hpp"
#include "scdc/model.hpp"
#include "scdc/spectrum.hpp"
#include "scdc/synth.hpp"
#include "scdc/trainer.hpp"

namespace scdc {

/// Malformed or inconsistent configuration; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const PreprocessConfig& c);
void from_json(const nlohmann::json& j, PreprocessConfig& c);

namespace augment {
void to_json(nlohmann::json& j, const WeakAugConfig& c);
void from_json(const nlohmann::json& j, WeakAugConfig& c);
void to_json(nlohmann::json& j, const StrongAugConfig& c);
void from_json(const nlohmann::json& j, StrongAugConfig& c);
}  // namespace augment

namespace loss {
void to_json(nlohmann::json& j, const ContrastConfig& c);
void from_json(const nlohmann::json& j, ContrastConfig& c);
}  // namespace loss

namespace synth {
void to_json(nlohmann::json& j, const ClassProfile& c);
void from_json(const nlohmann::json& j, ClassProfile& c);
void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);
}  // namespace synth

namespace train {
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
std::string to_string(TrainMode m);
std::string to_string(ViewPolicy v);
}  // namespace train

/// Without either source the frozen synthetic benchmark is used.
struct DatasetConfig {
    std::string csv;                          // labelled corpus, or
    std::optional<synth::SynthConfig> synth;  // a generated one
    std::string test_csv;                     // explicit test split; skips the hold-out
};

struct SplitConfig {
    double test_fraction = 0.4;
    double annotation_fraction = 0.05;
    std::uint64_t seed = 0;
};

struct OutputConfig {
    std::string corpus;  // synth
    std::string checkpoint;
    std::string log;
    std::string report;
    std::string predictions;
    std::string embeddings;
};

/// One JSON document drives every subcommand. Relative paths are resolved
/// against the directory holding the config file.
struct ExperimentConfig {
    DatasetConfig dataset;
    SplitConfig split;
    PreprocessConfig preprocess;
    ModelConfig model;
    train::TrainConfig train;  // carries contrast and augmentation settings
    OutputConfig output;

    void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Strict: unknown keys and wrong types raise ConfigError.
ExperimentConfig parse_experiment(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);

struct PreparedData {
    SplitDataset split;
    std::vector<std::string> dropped_ids;  // degenerate spectra removed by preprocessing
};

/// Loads or generates the corpus, preprocesses it, holds out the test split
/// and selects the annotated subset.
PreparedData prepare_data(const ExperimentConfig& cfg);

/// The corpus named by the config, before preprocessing.
std::vector<SpectrumRecord> load_corpus(const ExperimentConfig& cfg);

}  // namespace scdc
