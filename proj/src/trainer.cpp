#include "scdc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "scdc/config.hpp"
#include "scdc/csv.hpp"
#include "scdc/nn/adam.hpp"
#include "scdc/rng.hpp"

namespace scdc::train {

using nn::Tensor;

void TrainConfig::validate() const {
    if (batch_size < 2) throw DataError("train.batch_size must be at least 2");
    if (epochs < 1) throw DataError("train.epochs must be at least 1");
    if (!(lr > 0.0)) throw DataError("train.lr must be positive");
    contrast.validate();
    weak.validate();
    strong.validate();
}

int steps_per_epoch(std::size_t unlabeled, int batch) {
    const auto b = static_cast<std::size_t>(batch);
    std::size_t steps = unlabeled / b;
    if (unlabeled % b >= 2) ++steps;
    return static_cast<int>(steps);
}

void clamp_view(std::vector<double>& v) {
    for (double& x : v) x = std::clamp(x, -0.5, 1.5);
}

std::string step_log_line(const StepLog& s) {
    nlohmann::ordered_json j;
    j["step"] = s.step;
    j["l_sup"] = s.l_sup;
    j["l_cat"] = s.l_cat;
    j["l_emb"] = s.l_emb;
    j["l_pse"] = s.l_pse;
    j["m_confident"] = s.m_confident;
    return j.dump();
}

namespace {

/// Endless stream of indices drawn from successive seeded permutations.
class CyclicSampler {
public:
    CyclicSampler(std::size_t n, Rng rng) : n_(n), rng_(rng) {}

    std::vector<std::size_t> next(std::size_t count) {
        std::vector<std::size_t> out;
        out.reserve(count);
        while (out.size() < count) {
            if (pos_ == perm_.size()) reshuffle();
            out.push_back(perm_[pos_++]);
        }
        return out;
    }

private:
    void reshuffle() {
        perm_.resize(n_);
        std::iota(perm_.begin(), perm_.end(), 0);
        Rng r = rng_.substream("cycle", cycle_++);
        std::shuffle(perm_.begin(), perm_.end(), r.engine());
        pos_ = 0;
    }

    std::size_t n_;
    Rng rng_;
    std::vector<std::size_t> perm_;
    std::size_t pos_ = 0;
    std::uint64_t cycle_ = 0;
};

std::vector<double> view(const Spectrum& s, const TrainConfig& cfg, Rng rng, bool strong) {
    Spectrum v = strong ? augment::strong_augment(s, cfg.strong, rng)
                        : augment::weak_augment(s, cfg.weak, rng);
    std::vector<double> out(v.intensities().begin(), v.intensities().end());
    clamp_view(out);
    return out;
}

nlohmann::json train_echo(const TrainConfig& cfg) {
    nlohmann::json j = cfg;
    j.erase("checkpoint_path");
    j.erase("log_path");
    return j;
}

}  // namespace

TrainResult train(const SplitDataset& data, const TrainConfig& cfg, ModelConfig model_cfg,
                  const PreprocessConfig& preprocess, const EpochCallback& on_epoch) {
    cfg.validate();
    TrainResult result;
    auto warn = [&](std::string msg) {
        spdlog::warn("{}", msg);
        result.warnings.push_back(std::move(msg));
    };

    model_cfg.class_count = data.class_count;
    std::vector<Spectrum> pool = data.unannotated;
    if (cfg.mode == TrainMode::semi && data.annotated.empty()) {
        throw DataError("semi-supervised training needs a non-empty annotated set");
    }
    if (cfg.mode == TrainMode::supervised && data.annotated.empty()) {
        throw DataError("supervised training needs a non-empty annotated set");
    }
    if (cfg.mode == TrainMode::unsupervised && !data.annotated.empty()) {
        warn("unsupervised mode: ignoring labels of " + std::to_string(data.annotated.size()) +
             " annotated spectra");
        for (const auto& a : data.annotated) pool.push_back(a.spectrum);
    }
    for (const auto& s : pool) {
        if (static_cast<int>(s.size()) != model_cfg.input_length) {
            throw DataError("spectrum '" + s.id() + "' has length " + std::to_string(s.size()) +
                            ", model expects " + std::to_string(model_cfg.input_length));
        }
    }

    const Rng root = seed_rng(cfg.seed);
    ScdcModel model(model_cfg, root.substream("model").key());
    auto& params = model.parameters();
    nn::AdamState adam;
    adam.lr = cfg.lr;

    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    int epoch_steps = steps_per_epoch(pool.size(), cfg.batch_size);
    if (cfg.mode == TrainMode::supervised && epoch_steps == 0) {
        epoch_steps = std::max(1, steps_per_epoch(data.annotated.size(), cfg.batch_size));
    }
    if (epoch_steps == 0) throw DataError("unannotated pool is too small for a single batch");
    if (cfg.mode != TrainMode::supervised && pool.size() % batch == 1) {
        warn("trailing unannotated batch of size 1 is skipped each epoch");
    }

    CyclicSampler labeled(data.annotated.size(), root.substream("labeled"));
    const bool use_labels = cfg.mode != TrainMode::unsupervised;
    const bool use_unlabeled = cfg.mode != TrainMode::supervised;

    std::ofstream log;
    if (!cfg.log_path.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(std::filesystem::path(cfg.log_path).parent_path(), ec);
        log.open(cfg.log_path, std::ios::binary | std::ios::trunc);
        if (!log) throw std::runtime_error("cannot write training log '" + cfg.log_path + "'");
    }

    std::int64_t step = 0;
    const auto length = static_cast<std::size_t>(model_cfg.input_length);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), 0);
        {
            Rng r = root.substream("epoch-order", static_cast<std::uint64_t>(epoch));
            std::shuffle(order.begin(), order.end(), r.engine());
        }
        const Rng aug_root = root.substream("augment", static_cast<std::uint64_t>(epoch));

        EpochReport report;
        report.epoch = epoch;
        for (int k = 0; k < epoch_steps; ++k) {
            StepLog entry;
            entry.step = step;
            Tensor total;

            if (use_labels) {
                const auto idx = labeled.next(std::min(batch, data.annotated.size()));
                std::vector<double> xs;
                std::vector<int> ys;
                xs.reserve(idx.size() * length);
                for (auto i : idx) {
                    const auto v = data.annotated[i].spectrum.intensities();
                    xs.insert(xs.end(), v.begin(), v.end());
                    ys.push_back(data.annotated[i].label);
                }
                const Tensor x({idx.size(), length}, std::move(xs));
                const Tensor probs = model.category_head(model.encode(x, nn::Mode::train));
                const Tensor l_sup = loss::supervised_loss(probs, ys);
                entry.l_sup = l_sup.item();
                total = l_sup;
            }

            if (use_unlabeled) {
                const std::size_t begin = static_cast<std::size_t>(k) * batch;
                const std::size_t end = std::min(begin + batch, pool.size());
                const auto n = end - begin;
                std::vector<double> weak_x, strong_x;
                weak_x.reserve(n * length);
                strong_x.reserve(n * length);
                for (std::size_t p = begin; p < end; ++p) {
                    const auto src = order[p];
                    const Rng r = aug_root.substream("sample", src);
                    const bool weak_is_strong = cfg.views == ViewPolicy::strong_only;
                    const bool strong_is_strong = cfg.views != ViewPolicy::weak_only;
                    auto w = view(pool[src], cfg, r.substream("weak"), weak_is_strong);
                    auto s = view(pool[src], cfg, r.substream("strong"), strong_is_strong);
                    weak_x.insert(weak_x.end(), w.begin(), w.end());
                    strong_x.insert(strong_x.end(), s.begin(), s.end());
                }
                const Tensor xw({n, length}, std::move(weak_x));
                const Tensor xs({n, length}, std::move(strong_x));
                const Tensor hs = model.encode(xs, nn::Mode::train);
                const Tensor hw = model.encode(xw, nn::Mode::train);
                const auto terms =
                    loss::unsupervised_objective(model.embed_head(hs), model.embed_head(hw),
                                                 model.category_head(hs), model.category_head(hw),
                                                 cfg.contrast);
                entry.l_cat = terms.l_cat.item();
                entry.l_emb = terms.l_emb.item();
                entry.l_pse = terms.l_pse.item();
                entry.m_confident = terms.pseudo.confident_count();
                entry.batch_unlabeled = static_cast<int>(n);
                total = total.defined() ? loss::semi_objective(total, terms.total) : terms.total;
            }

            nn::zero_grads(params);
            total.backward();
            nn::adam_step(params, adam);

            for (double v : {entry.l_sup, entry.l_cat, entry.l_emb, entry.l_pse}) {
                if (!std::isfinite(v)) {
                    throw std::runtime_error("non-finite loss at step " + std::to_string(step));
                }
            }
            if (log) log << step_log_line(entry) << '\n';
            report.l_sup += entry.l_sup;
            report.l_cat += entry.l_cat;
            report.l_emb += entry.l_emb;
            report.l_pse += entry.l_pse;
            if (entry.batch_unlabeled > 0) {
                report.confident_rate +=
                    static_cast<double>(entry.m_confident) / entry.batch_unlabeled;
            }
            result.steps.push_back(entry);
            ++report.steps;
            ++step;
        }
        const double steps = std::max(1, report.steps);
        report.l_sup /= steps;
        report.l_cat /= steps;
        report.l_emb /= steps;
        report.l_pse /= steps;
        report.confident_rate /= steps;
        report.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.reports.push_back(report);

        result.checkpoint = model.to_checkpoint();
        result.checkpoint.meta["preprocess"] = preprocess;
        result.checkpoint.meta["train"] = train_echo(cfg);
        result.checkpoint.meta["epochs_completed"] = epoch + 1;
        if (!cfg.checkpoint_path.empty()) nn::save_checkpoint(cfg.checkpoint_path, result.checkpoint);
        spdlog::debug("epoch {} steps {} l_sup {:.4f} l_cat {:.4f} l_emb {:.4f} l_pse {:.4f} M/B {:.3f} ({:.1f}s)",
                      epoch, report.steps, report.l_sup, report.l_cat, report.l_emb, report.l_pse,
                      report.confident_rate, report.seconds);
        if (on_epoch) on_epoch(report);
    }
    if (log) {
        log.flush();
        if (!log) throw std::runtime_error("failed writing training log '" + cfg.log_path + "'");
    }
    return result;
}

EvalReport evaluate_checkpoint(const nn::Checkpoint& ckpt, const std::vector<LabeledSpectrum>& test,
                               int class_count) {
    const ModelConfig mc = ScdcModel::config_from_checkpoint(ckpt);
    if (class_count != 0 && class_count != mc.class_count) {
        throw DataError("class count mismatch: checkpoint has " + std::to_string(mc.class_count) +
                        ", data declares " + std::to_string(class_count));
    }
    for (const auto& t : test) {
        if (t.label < 0 || t.label >= mc.class_count) {
            throw DataError("class count mismatch: label " + std::to_string(t.label) + " of '" +
                            t.spectrum.id() + "' outside the checkpoint's " +
                            std::to_string(mc.class_count) + " classes");
        }
    }
    if (test.empty()) throw DataError("empty test set");
    ScdcModel model(mc, ckpt);
    const auto c = static_cast<std::size_t>(mc.class_count);
    std::vector<double> probs;
    probs.reserve(test.size() * c);
    constexpr std::size_t chunk = 256;
    for (std::size_t begin = 0; begin < test.size(); begin += chunk) {
        const auto end = std::min(begin + chunk, test.size());
        const auto p = model.predict_proba(
            stack_spectra(std::span<const LabeledSpectrum>(test.data() + begin, end - begin)));
        probs.insert(probs.end(), p.values().begin(), p.values().end());
    }
    std::vector<int> truth(test.size());
    EvalReport r;
    r.predictions.resize(test.size());
    std::vector<int> clusters(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        truth[i] = test[i].label;
        const auto row = std::span<const double>(probs).subspan(i * c, c);
        r.predictions[i].label = argmax(row);
        r.predictions[i].confidence = row[static_cast<std::size_t>(r.predictions[i].label)];
        clusters[i] = r.predictions[i].label;
    }
    r.classification = metrics::classification_report(truth, probs, mc.class_count);
    r.clustering = metrics::clustering_report(truth, clusters);
    return r;
}

nlohmann::json to_json(const EvalReport& r) {
    return {{"classification", metrics::to_json(r.classification)},
            {"clustering", metrics::to_json(r.clustering)},
            {"samples", r.predictions.size()}};
}

}  // namespace scdc::train
