#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "scdc/augment.hpp"
#include "scdc/losses.hpp"
#include "scdc/metrics.hpp"
#include "scdc/model.hpp"
#include "scdc/spectrum.hpp"

namespace scdc::train {

/// semi: L_sup + L_uns per step. unsupervised: L_uns only, annotated spectra
/// join the unannotated pool. supervised: L_sup only (the ablation baseline),
/// with the same number of steps per epoch as the unannotated pool defines.
enum class TrainMode { unsupervised, semi, supervised };

/// Which augmentation family feeds each contrastive view.
enum class ViewPolicy { weak_strong, weak_only, strong_only };

struct TrainConfig {
    TrainMode mode = TrainMode::semi;
    int epochs = 100;
    int batch_size = 32;
    double lr = 1e-3;
    loss::ContrastConfig contrast;
    augment::WeakAugConfig weak;
    augment::StrongAugConfig strong;
    ViewPolicy views = ViewPolicy::weak_strong;
    std::uint64_t seed = 0;
    std::string checkpoint_path;  // written after every epoch when set
    std::string log_path;         // JSON lines, one per step, when set

    void validate() const;
};

struct StepLog {
    std::int64_t step = 0;
    double l_sup = 0.0;
    double l_cat = 0.0;
    double l_emb = 0.0;
    double l_pse = 0.0;
    int m_confident = 0;
    int batch_unlabeled = 0;
};

struct EpochReport {
    int epoch = 0;
    int steps = 0;
    double l_sup = 0.0;
    double l_cat = 0.0;
    double l_emb = 0.0;
    double l_pse = 0.0;
    double confident_rate = 0.0;  // mean M / B over the epoch
    double seconds = 0.0;
};

struct TrainResult {
    nn::Checkpoint checkpoint;
    std::vector<EpochReport> reports;
    std::vector<StepLog> steps;
    std::vector<std::string> warnings;
};

/// Called after every epoch; lets callers print progress.
using EpochCallback = std::function<void(const EpochReport&)>;

/// Trains a fresh model on preprocessed data. `model` supplies the
/// architecture; its class_count is replaced by data.class_count.
TrainResult train(const SplitDataset& data, const TrainConfig& cfg, ModelConfig model,
                  const PreprocessConfig& preprocess = {}, const EpochCallback& on_epoch = {});

std::string step_log_line(const StepLog& s);

/// Number of optimization steps one epoch performs for a pool of `unlabeled`
/// spectra at batch size `batch` (trailing batches below 2 are skipped).
int steps_per_epoch(std::size_t unlabeled, int batch);

struct EvalReport {
    metrics::ClassificationReport classification;
    metrics::ClusteringReport clustering;
    std::vector<Prediction> predictions;
};

/// Eval-mode predictions over preprocessed test spectra. Throws when a label
/// falls outside the checkpoint's class range or when `class_count` (if non-zero)
/// differs from the checkpoint's.
EvalReport evaluate_checkpoint(const nn::Checkpoint& ckpt, const std::vector<LabeledSpectrum>& test,
                               int class_count = 0);

nlohmann::json to_json(const EvalReport& r);

/// Clamps augmented intensities into [-0.5, 1.5].
void clamp_view(std::vector<double>& v);

}  // namespace scdc::train
