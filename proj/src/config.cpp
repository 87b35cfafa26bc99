#include "scdc/config.hpp"

#include <fstream>
#include <set>
#include <type_traits>

#include "scdc/csv.hpp"

namespace scdc {

using nlohmann::json;

namespace {

template <typename T>
bool type_matches(const json& v) {
    if constexpr (std::is_same_v<T, bool>) {
        return v.is_boolean();
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
        return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    } else if constexpr (std::is_integral_v<T>) {
        return v.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
        return v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
        return v.is_string();
    } else {
        return true;
    }
}

/// Strict object reader: every key must be consumed.
class Reader {
public:
    Reader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
        if (!j.is_object()) throw ConfigError(context_ + ": expected a JSON object");
    }

    template <typename T>
    bool get(const char* key, T& out) {
        const auto it = j_.find(key);
        if (it == j_.end()) return false;
        seen_.insert(key);
        if (!type_matches<T>(*it)) {
            throw ConfigError(path(key) + ": unexpected type " + std::string(it->type_name()));
        }
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path(key) + ": " + e.what());
        }
        return true;
    }

    const json* child(const char* key) {
        const auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) throw ConfigError(path(key) + ": unknown key");
        }
    }

    std::string path(const std::string& key) const { return context_ + "." + key; }

private:
    const json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

std::string resolve(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace

void to_json(json& j, const ModelConfig& c) {
    j = {{"input_length", c.input_length}, {"channels", c.channels},     {"kernels", c.kernels},
         {"pool", c.pool},                 {"hidden_dim", c.hidden_dim}, {"embed_dim", c.embed_dim},
         {"class_count", c.class_count}};
}

void from_json(const json& j, ModelConfig& c) {
    Reader r(j, "model");
    r.get("input_length", c.input_length);
    r.get("channels", c.channels);
    r.get("kernels", c.kernels);
    r.get("pool", c.pool);
    r.get("hidden_dim", c.hidden_dim);
    r.get("embed_dim", c.embed_dim);
    r.get("class_count", c.class_count);
    r.finish();
}

void to_json(json& j, const PreprocessConfig& c) {
    j = {{"target_length", c.target_length}, {"normalize", c.normalize}};
}

void from_json(const json& j, PreprocessConfig& c) {
    Reader r(j, "preprocess");
    r.get("target_length", c.target_length);
    r.get("normalize", c.normalize);
    r.finish();
}

namespace augment {

void to_json(json& j, const WeakAugConfig& c) {
    j = {{"noise_sigma", c.noise_sigma},
         {"scale_low", c.scale_low},
         {"scale_high", c.scale_high},
         {"smooth_prob", c.smooth_prob},
         {"smooth_kernel", c.smooth_kernel}};
}

void from_json(const json& j, WeakAugConfig& c) {
    Reader r(j, "weak");
    r.get("noise_sigma", c.noise_sigma);
    r.get("scale_low", c.scale_low);
    r.get("scale_high", c.scale_high);
    r.get("smooth_prob", c.smooth_prob);
    r.get("smooth_kernel", c.smooth_kernel);
    r.finish();
}

void to_json(json& j, const StrongAugConfig& c) {
    j = {{"weak", c.weak}, {"max_shift", c.max_shift}, {"flip_prob", c.flip_prob}};
}

void from_json(const json& j, StrongAugConfig& c) {
    Reader r(j, "strong");
    r.get("weak", c.weak);
    r.get("max_shift", c.max_shift);
    r.get("flip_prob", c.flip_prob);
    r.finish();
}

}  // namespace augment

namespace loss {

void to_json(json& j, const ContrastConfig& c) {
    j = {{"tau", c.tau}, {"tau_e", c.tau_e}, {"epsilon", c.epsilon}};
}

void from_json(const json& j, ContrastConfig& c) {
    Reader r(j, "contrast");
    const bool has_tau_e = j.contains("tau_e");
    r.get("tau", c.tau);
    r.get("tau_e", c.tau_e);
    r.get("epsilon", c.epsilon);
    r.finish();
    if (!has_tau_e) c.tau_e = c.tau;
}

}  // namespace loss

namespace synth {

void to_json(json& j, const ClassProfile& c) {
    j = {{"peak_centers", c.peak_centers},
         {"peak_widths", c.peak_widths},
         {"peak_heights", c.peak_heights},
         {"baseline_coeffs", c.baseline_coeffs}};
}

void from_json(const json& j, ClassProfile& c) {
    Reader r(j, "class_profiles[]");
    r.get("peak_centers", c.peak_centers);
    r.get("peak_widths", c.peak_widths);
    r.get("peak_heights", c.peak_heights);
    r.get("baseline_coeffs", c.baseline_coeffs);
    r.finish();
}

void to_json(json& j, const SynthConfig& c) {
    j = {{"class_profiles", c.class_profiles},
         {"samples_per_class", c.samples_per_class},
         {"noise_sigma", c.noise_sigma},
         {"axis_low", c.axis_low},
         {"axis_high", c.axis_high},
         {"length", c.length},
         {"seed", c.seed},
         {"peak_shift", c.peak_shift},
         {"height_jitter", c.height_jitter},
         {"baseline_jitter", c.baseline_jitter}};
}

void from_json(const json& j, SynthConfig& c) {
    Reader r(j, "synth");
    // Missing keys keep the frozen benchmark's values.
    c = benchmark_config();
    r.get("class_profiles", c.class_profiles);
    r.get("samples_per_class", c.samples_per_class);
    r.get("noise_sigma", c.noise_sigma);
    r.get("axis_low", c.axis_low);
    r.get("axis_high", c.axis_high);
    r.get("length", c.length);
    r.get("seed", c.seed);
    r.get("peak_shift", c.peak_shift);
    r.get("height_jitter", c.height_jitter);
    r.get("baseline_jitter", c.baseline_jitter);
    r.finish();
}

}  // namespace synth

namespace train {

std::string to_string(TrainMode m) {
    switch (m) {
        case TrainMode::unsupervised: return "unsupervised";
        case TrainMode::semi: return "semi";
        case TrainMode::supervised: return "supervised";
    }
    return "semi";
}

std::string to_string(ViewPolicy v) {
    switch (v) {
        case ViewPolicy::weak_strong: return "weak+strong";
        case ViewPolicy::weak_only: return "weak-only";
        case ViewPolicy::strong_only: return "strong-only";
    }
    return "weak+strong";
}

void to_json(json& j, const TrainConfig& c) {
    j = {{"mode", to_string(c.mode)},
         {"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"lr", c.lr},
         {"contrast", c.contrast},
         {"weak", c.weak},
         {"strong", c.strong},
         {"views", to_string(c.views)},
         {"seed", c.seed},
         {"checkpoint_path", c.checkpoint_path},
         {"log_path", c.log_path}};
}

void from_json(const json& j, TrainConfig& c) {
    Reader r(j, "train");
    std::string mode;
    if (r.get("mode", mode)) {
        if (mode == "semi") c.mode = TrainMode::semi;
        else if (mode == "unsupervised") c.mode = TrainMode::unsupervised;
        else if (mode == "supervised") c.mode = TrainMode::supervised;
        else throw ConfigError("train.mode: expected semi, unsupervised or supervised, got '" + mode + "'");
    }
    std::string views;
    if (r.get("views", views)) {
        if (views == "weak+strong") c.views = ViewPolicy::weak_strong;
        else if (views == "weak-only") c.views = ViewPolicy::weak_only;
        else if (views == "strong-only") c.views = ViewPolicy::strong_only;
        else throw ConfigError("train.views: expected weak+strong, weak-only or strong-only, got '" + views + "'");
    }
    r.get("epochs", c.epochs);
    r.get("batch_size", c.batch_size);
    r.get("lr", c.lr);
    r.get("contrast", c.contrast);
    r.get("weak", c.weak);
    r.get("strong", c.strong);
    r.get("seed", c.seed);
    r.get("checkpoint_path", c.checkpoint_path);
    r.get("log_path", c.log_path);
    r.finish();
}

}  // namespace train

void ExperimentConfig::validate() const {
    const bool has_csv = !dataset.csv.empty();
    if (has_csv == dataset.synth.has_value()) {
        throw ConfigError("dataset: exactly one of 'csv' and 'synth' must be given");
    }
    if (!(split.test_fraction >= 0.0 && split.test_fraction < 1.0)) {
        throw ConfigError("split.test_fraction must lie in [0, 1)");
    }
    if (!(split.annotation_fraction >= 0.0 && split.annotation_fraction <= 1.0)) {
        throw ConfigError("split.annotation_fraction must lie in [0, 1]");
    }
    if (model.input_length != preprocess.target_length) {
        throw ConfigError("model.input_length must equal preprocess.target_length");
    }
    try {
        preprocess.validate();
        model.validate();
        train.validate();
        if (dataset.synth) dataset.synth->validate();
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

void to_json(json& j, const ExperimentConfig& c) {
    json dataset = json::object();
    if (!c.dataset.csv.empty()) dataset["csv"] = c.dataset.csv;
    if (c.dataset.synth) dataset["synth"] = *c.dataset.synth;
    if (!c.dataset.test_csv.empty()) dataset["test_csv"] = c.dataset.test_csv;
    json model = c.model;
    model.erase("input_length");
    model.erase("class_count");
    j = {{"dataset", dataset},
         {"split",
          {{"test_fraction", c.split.test_fraction},
           {"annotation_fraction", c.split.annotation_fraction},
           {"seed", c.split.seed}}},
         {"preprocess", c.preprocess},
         {"augment", {{"weak", c.train.weak}, {"strong", c.train.strong}}},
         {"contrast", c.train.contrast},
         {"model", model},
         {"train",
          {{"mode", train::to_string(c.train.mode)},
           {"epochs", c.train.epochs},
           {"batch_size", c.train.batch_size},
           {"lr", c.train.lr},
           {"views", train::to_string(c.train.views)},
           {"seed", c.train.seed}}},
         {"output",
          {{"corpus", c.output.corpus},
           {"checkpoint", c.output.checkpoint},
           {"log", c.output.log},
           {"report", c.output.report},
           {"predictions", c.output.predictions},
           {"embeddings", c.output.embeddings}}}};
}

ExperimentConfig parse_experiment(const json& j, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    Reader top(j, "config");

    if (const json* d = top.child("dataset")) {
        Reader r(*d, "dataset");
        r.get("csv", c.dataset.csv);
        r.get("test_csv", c.dataset.test_csv);
        if (const json* s = r.child("synth")) c.dataset.synth = s->get<synth::SynthConfig>();
        r.finish();
    }
    if (c.dataset.csv.empty() && !c.dataset.synth) c.dataset.synth = synth::benchmark_config();
    if (const json* s = top.child("split")) {
        Reader r(*s, "split");
        r.get("test_fraction", c.split.test_fraction);
        r.get("annotation_fraction", c.split.annotation_fraction);
        r.get("seed", c.split.seed);
        r.finish();
    }
    top.get("preprocess", c.preprocess);
    c.model.input_length = c.preprocess.target_length;
    if (const json* m = top.child("model")) {
        if (m->contains("input_length") || m->contains("class_count")) {
            throw ConfigError("model: input_length and class_count are derived from the data");
        }
        json full = *m;
        full["input_length"] = c.model.input_length;
        full["class_count"] = c.model.class_count;
        c.model = full.get<ModelConfig>();
    }
    if (const json* a = top.child("augment")) {
        Reader r(*a, "augment");
        r.get("weak", c.train.weak);
        c.train.strong.weak = c.train.weak;
        if (const json* s = r.child("strong")) {
            json full = *s;
            if (!full.contains("weak")) full["weak"] = c.train.weak;
            c.train.strong = full.get<augment::StrongAugConfig>();
        }
        r.finish();
    }
    top.get("contrast", c.train.contrast);
    if (const json* t = top.child("train")) {
        for (const char* key : {"contrast", "weak", "strong", "checkpoint_path", "log_path"}) {
            if (t->contains(key)) throw ConfigError(std::string("train.") + key + ": unknown key");
        }
        json full = *t;
        full["contrast"] = c.train.contrast;
        full["weak"] = c.train.weak;
        full["strong"] = c.train.strong;
        c.train = full.get<train::TrainConfig>();
    }
    if (const json* o = top.child("output")) {
        Reader r(*o, "output");
        r.get("corpus", c.output.corpus);
        r.get("checkpoint", c.output.checkpoint);
        r.get("log", c.output.log);
        r.get("report", c.output.report);
        r.get("predictions", c.output.predictions);
        r.get("embeddings", c.output.embeddings);
        r.finish();
    }
    top.finish();

    c.dataset.csv = resolve(c.dataset.csv, base_dir);
    c.dataset.test_csv = resolve(c.dataset.test_csv, base_dir);
    for (std::string* p : {&c.output.corpus, &c.output.checkpoint, &c.output.log,
                           &c.output.report, &c.output.predictions, &c.output.embeddings}) {
        *p = resolve(*p, base_dir);
    }
    c.train.checkpoint_path = c.output.checkpoint;
    c.train.log_path = c.output.log;
    c.validate();
    return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
    }
    return parse_experiment(j, path.parent_path());
}

std::vector<SpectrumRecord> load_corpus(const ExperimentConfig& cfg) {
    if (cfg.dataset.synth) return to_records(synth::generate_dataset(*cfg.dataset.synth));
    return load_csv(cfg.dataset.csv, CsvSchema{});
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
    PreparedData out;
    const auto records = preprocess_all(load_corpus(cfg), cfg.preprocess, &out.dropped_ids);

    std::vector<LabeledSpectrum> labeled;
    std::vector<Spectrum> unlabeled;
    for (const auto& r : records) {
        if (r.label) labeled.push_back({r.spectrum, *r.label});
        else unlabeled.push_back(r.spectrum);
    }
    if (labeled.empty() && cfg.train.mode != train::TrainMode::unsupervised) {
        throw DataError("corpus has no labelled spectra");
    }

    std::vector<LabeledSpectrum> pool = labeled;
    std::vector<LabeledSpectrum> test;
    if (!cfg.dataset.test_csv.empty()) {
        std::vector<LabeledSpectrum> raw = labeled_only(load_csv(cfg.dataset.test_csv, CsvSchema{}));
        test = preprocess_all(raw, cfg.preprocess, &out.dropped_ids);
    } else if (cfg.split.test_fraction > 0.0 && !labeled.empty()) {
        auto held = hold_out_test(labeled, cfg.split.test_fraction, cfg.split.seed);
        pool = std::move(held.train);
        test = std::move(held.test);
    }

    const int classes = labeled.empty() ? 0 : infer_class_count(labeled);
    if (pool.empty() || cfg.split.annotation_fraction == 0.0) {
        out.split.class_count = classes;
        out.split.annotation_fraction = 0.0;
        for (const auto& p : pool) out.split.unannotated.push_back(p.spectrum);
    } else {
        out.split = split_annotated(pool, cfg.split.annotation_fraction, cfg.split.seed, classes);
    }
    for (auto& s : unlabeled) out.split.unannotated.push_back(std::move(s));
    out.split.test = std::move(test);
    for (const auto& t : out.split.test) {
        out.split.class_count = std::max(out.split.class_count, t.label + 1);
    }
    return out;
}

}  // namespace scdc
