#include "scdc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "scdc/config.hpp"
#include "scdc/csv.hpp"
#include "scdc/trainer.hpp"

namespace scdc::cli {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string command;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string checkpoint;
    std::string data;
};

void write_text(const std::string& path, const std::string& text) {
    std::error_code ec;
    std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string pick(const std::string& flag, const std::string& from_config) {
    return flag.empty() ? from_config : flag;
}

/// Spectra given on the command line or named by the config, preprocessed
/// without dropping degenerate rows so output rows match input rows.
std::vector<SpectrumRecord> inference_rows(const Options& o, const ExperimentConfig& cfg) {
    const auto raw = o.data.empty() ? load_corpus(cfg) : load_csv(o.data, CsvSchema{});
    std::vector<SpectrumRecord> rows;
    rows.reserve(raw.size());
    for (const auto& r : raw) {
        Spectrum s = r.spectrum;
        if (static_cast<int>(s.size()) != cfg.preprocess.target_length) {
            s = resample_to_length(s, cfg.preprocess.target_length);
        }
        if (cfg.preprocess.normalize) {
            auto n = minmax_normalize(s);
            if (n.degenerate) spdlog::warn("spectrum '{}' is constant; normalized to zeros", s.id());
            s = std::move(n.spectrum);
        }
        rows.push_back({std::move(s), r.label});
    }
    if (rows.empty()) throw DataError("no spectra to process");
    return rows;
}

nn::Checkpoint load_model_checkpoint(const Options& o, const ExperimentConfig& cfg) {
    const std::string path = pick(o.checkpoint, cfg.output.checkpoint);
    if (path.empty()) throw UsageError("no checkpoint: pass --checkpoint or set output.checkpoint");
    return nn::load_checkpoint(path);
}

template <typename Fn>
void for_each_chunk(ScdcModel& model, const std::vector<SpectrumRecord>& rows, Fn&& fn) {
    constexpr std::size_t chunk = 256;
    const auto length = static_cast<std::size_t>(model.config().input_length);
    for (std::size_t begin = 0; begin < rows.size(); begin += chunk) {
        const auto end = std::min(begin + chunk, rows.size());
        std::vector<double> x;
        x.reserve((end - begin) * length);
        for (std::size_t i = begin; i < end; ++i) {
            const auto v = rows[i].spectrum.intensities();
            if (v.size() != length) {
                throw DataError("spectrum '" + rows[i].spectrum.id() + "' has length " +
                                std::to_string(v.size()) + ", model expects " + std::to_string(length));
            }
            x.insert(x.end(), v.begin(), v.end());
        }
        fn(begin, nn::Tensor({end - begin, length}, std::move(x)));
    }
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) out << text;
    else write_text(path, text);
}

int cmd_synth(const Options& o, ExperimentConfig cfg, std::ostream& out) {
    if (!cfg.dataset.synth) throw ConfigError("synth: the config names a CSV dataset, not a generator");
    if (o.seed) cfg.dataset.synth->seed = *o.seed;
    const std::string path = pick(o.out, cfg.output.corpus);
    if (path.empty()) throw UsageError("synth: pass --out or set output.corpus");
    const auto corpus = synth::generate_dataset(*cfg.dataset.synth);
    write_csv(path, to_records(corpus));
    json sidecar = {{"config", cfg},
                    {"generator", *cfg.dataset.synth},
                    {"seed", cfg.dataset.synth->seed},
                    {"rows", corpus.size()}};
    write_text(path + ".json", sidecar.dump(2) + "\n");
    out << "wrote " << corpus.size() << " spectra to " << path << "\n";
    return 0;
}

int cmd_train(const Options& o, ExperimentConfig cfg, std::ostream& out) {
    if (o.seed) cfg.train.seed = *o.seed;
    if (!o.out.empty()) cfg.output.checkpoint = cfg.train.checkpoint_path = o.out;
    if (cfg.output.checkpoint.empty()) throw UsageError("train: pass --out or set output.checkpoint");
    const auto data = prepare_data(cfg);
    for (const auto& id : data.dropped_ids) spdlog::warn("dropped constant spectrum '{}'", id);
    spdlog::info("training {} mode: {} annotated, {} unannotated, {} test, {} classes",
                 train::to_string(cfg.train.mode), data.split.annotated.size(),
                 data.split.unannotated.size(), data.split.test.size(), data.split.class_count);
    const auto result = train::train(data.split, cfg.train, cfg.model, cfg.preprocess,
                                     [](const train::EpochReport& r) {
                                         spdlog::info("epoch {} l_sup {:.4f} l_cat {:.4f} l_emb {:.4f} "
                                                      "l_pse {:.4f} M/B {:.3f}",
                                                      r.epoch, r.l_sup, r.l_cat, r.l_emb, r.l_pse,
                                                      r.confident_rate);
                                     });
    json epochs = json::array();
    for (const auto& r : result.reports) {
        epochs.push_back({{"epoch", r.epoch},
                          {"steps", r.steps},
                          {"l_sup", r.l_sup},
                          {"l_cat", r.l_cat},
                          {"l_emb", r.l_emb},
                          {"l_pse", r.l_pse},
                          {"confident_rate", r.confident_rate}});
    }
    json sidecar = {{"config", cfg},
                    {"class_count", data.split.class_count},
                    {"annotated", data.split.annotated.size()},
                    {"unannotated", data.split.unannotated.size()},
                    {"test", data.split.test.size()},
                    {"dropped", data.dropped_ids},
                    {"warnings", result.warnings},
                    {"epochs", epochs}};
    write_text(cfg.output.checkpoint + ".json", sidecar.dump(2) + "\n");
    out << "trained " << result.steps.size() << " steps; checkpoint " << cfg.output.checkpoint << "\n";
    return 0;
}

int cmd_eval(const Options& o, const ExperimentConfig& cfg, std::ostream& out) {
    const auto ckpt = load_model_checkpoint(o, cfg);
    std::vector<LabeledSpectrum> test;
    if (!o.data.empty()) {
        test = preprocess_all(labeled_only(load_csv(o.data, CsvSchema{})), cfg.preprocess);
    } else {
        test = prepare_data(cfg).split.test;
    }
    if (test.empty()) throw DataError("eval: no labelled test spectra");
    // Labels outside the checkpoint's class range raise a class-count mismatch.
    const auto report = train::evaluate_checkpoint(ckpt, test);
    const std::string path = pick(o.out, cfg.output.report);
    if (!path.empty()) write_text(path, train::to_json(report).dump(2) + "\n");
    metrics::print_table(out, {{"test", report.classification, report.clustering}});
    return 0;
}

int cmd_predict(const Options& o, const ExperimentConfig& cfg, std::ostream& out) {
    const auto ckpt = load_model_checkpoint(o, cfg);
    ScdcModel model(ScdcModel::config_from_checkpoint(ckpt), ckpt);
    const auto rows = inference_rows(o, cfg);
    std::string text = "id,label,confidence\n";
    for_each_chunk(model, rows, [&](std::size_t begin, const nn::Tensor& x) {
        const auto preds = model.predict_class(x);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            text += rows[begin + i].spectrum.id() + "," + std::to_string(preds[i].label) + "," +
                    format_double(preds[i].confidence) + "\n";
        }
    });
    emit(pick(o.out, cfg.output.predictions), text, out);
    return 0;
}

int cmd_embed(const Options& o, const ExperimentConfig& cfg, std::ostream& out) {
    const auto ckpt = load_model_checkpoint(o, cfg);
    ScdcModel model(ScdcModel::config_from_checkpoint(ckpt), ckpt);
    const auto rows = inference_rows(o, cfg);
    const auto e = static_cast<std::size_t>(model.config().embed_dim);
    std::string text = "id";
    for (std::size_t k = 1; k <= e; ++k) text += ",z_" + std::to_string(k);
    text += "\n";
    for_each_chunk(model, rows, [&](std::size_t begin, const nn::Tensor& x) {
        const auto z = model.embed(x);
        for (std::size_t i = 0; i < z.dim(0); ++i) {
            text += rows[begin + i].spectrum.id();
            for (std::size_t k = 0; k < e; ++k) text += "," + format_double(z[i * e + k]);
            text += "\n";
        }
    });
    emit(pick(o.out, cfg.output.embeddings), text, out);
    return 0;
}

}  // namespace

void configure_logging() {
    auto logger = std::make_shared<spdlog::logger>("scdc", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    const char* env = std::getenv("SCDC_LOG_LEVEL");
    const std::string level = env ? env : "info";
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else {
        spdlog::set_level(spdlog::level::info);
        if (level != "info") spdlog::warn("SCDC_LOG_LEVEL '{}' not recognized; using info", level);
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app("Semi-supervised and unsupervised spectral recognition", "scdc");
    app.require_subcommand(1);
    Options o;
    for (const char* name : {"synth", "train", "eval", "predict", "embed"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
        sub->add_option("--out", o.out, "Output path");
        sub->add_option("--seed", o.seed, "Seed override");
        if (std::string(name) == "eval" || std::string(name) == "predict" || std::string(name) == "embed") {
            sub->add_option("--checkpoint", o.checkpoint, "Checkpoint (default: output.checkpoint)");
            sub->add_option("--data", o.data, "CSV of spectra (default: from the config)");
        }
        sub->callback([&o, name] { o.command = name; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        const auto cfg = load_experiment(o.config);
        if (o.command == "synth") return cmd_synth(o, cfg, out);
        if (o.command == "train") return cmd_train(o, cfg, out);
        if (o.command == "eval") return cmd_eval(o, cfg, out);
        if (o.command == "predict") return cmd_predict(o, cfg, out);
        return cmd_embed(o, cfg, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, char** argv) {
    configure_logging();
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace scdc::cli
