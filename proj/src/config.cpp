#include "advhar/config.hpp"

#include "advhar/error.hpp"

namespace advhar {

SubjectShift ShiftConfig::build(std::size_t channels) const {
    if (rotation_degrees == 0.0) {
        SubjectShift s;
        if (offset != 0.0) {
            s.offset.assign(channels, offset);
        }
        s.noise = noise;
        return s;
    }
    return rotation_shift(channels, rotation_degrees, offset, noise);
}

SynthSpec DataConfig::synth_spec() const {
    SynthSpec s = synthetic;
    s.source_shift = source_shift.build(s.channels);
    s.target_shift = target_shift.build(s.channels);
    return s;
}

void RunConfig::validate() const {
    if (data.kind == DataKind::synthetic) {
        data.synth_spec().validate();
    } else if (data.csv_path.empty()) {
        throw ConfigError("data_pipeline.csv.path is required when data_pipeline.kind is csv");
    } else if (!(data.schema.sample_rate > 0.0)) {
        throw ConfigError("data_pipeline.csv.sample_rate must be positive");
    }
    preprocess.validate();
    model.validate();
    trainer_config().validate();
    if (report_digits < 0 || report_digits > 12) {
        throw ConfigError("evaluation.report_digits must lie in [0, 12]");
    }
}

TrainerConfig RunConfig::trainer_config() const {
    TrainerConfig t = trainer;
    t.seed = seed;
    return t;
}

RunConfig benchmark_config() {
    RunConfig cfg;
    cfg.seed = 7;
    cfg.output_dir = "benchmark_run";
    cfg.data.kind = DataKind::synthetic;
    cfg.data.synthetic = SynthSpec{};
    cfg.data.synthetic.num_classes = 4;
    cfg.data.synthetic.channels = 40;
    cfg.data.synthetic.frames = 5;
    cfg.data.synthetic.class_counts = {300, 300, 300, 60};
    cfg.data.synthetic.seed = 7;
    cfg.data.target_shift = {30.0, 0.5, 0.05};
    cfg.preprocess.pca = PcaTarget::dimension(50);
    cfg.preprocess.normalization = NormalizationMode::none;
    cfg.model.generator_blocks = 1;
    cfg.model.generator_filters = 8;
    cfg.model.noise_dim = 16;
    cfg.model.input_skip = true;
    cfg.model.discriminator_filters = 2;
    cfg.model.classifier_filters = 8;
    cfg.trainer.epochs = 150;
    cfg.trainer.micro_cap = 8;
    cfg.trainer.patience = 0;
    return cfg;
}

namespace {

template <typename T>
Json optional_json(const std::optional<T> &v) {
    return v ? Json(*v) : Json(nullptr);
}

Json shift_json(const ShiftConfig &s) {
    return Json{{"rotation_degrees", s.rotation_degrees}, {"offset", s.offset}, {"noise", s.noise}};
}

Json adam_json(const AdamConfig &a) {
    return Json{{"learning_rate", a.learning_rate}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"epsilon", a.epsilon}};
}

std::string to_string(DataKind k) { return k == DataKind::synthetic ? "synthetic" : "csv"; }

DataKind data_kind_from_string(const std::string &s) {
    if (s == "synthetic") return DataKind::synthetic;
    if (s == "csv") return DataKind::csv;
    throw ConfigError("data_pipeline.kind must be synthetic or csv, got '" + s + "'");
}

/// Typed read of a key that to_json always writes.
template <typename T>
T read(const Json &j, const std::string &path, const char *key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception &) {
        throw ConfigError(path + "." + key + " has the wrong type");
    }
}

template <typename T>
std::optional<T> read_optional(const Json &j, const std::string &path, const char *key) {
    if (j.at(key).is_null()) {
        return std::nullopt;
    }
    return read<T>(j, path, key);
}

ShiftConfig shift_from(const Json &j, const std::string &path) {
    return {read<double>(j, path, "rotation_degrees"), read<double>(j, path, "offset"), read<double>(j, path, "noise")};
}

AdamConfig adam_from(const Json &j, const std::string &path) {
    return {read<double>(j, path, "learning_rate"), read<double>(j, path, "beta1"), read<double>(j, path, "beta2"),
            read<double>(j, path, "epsilon")};
}

}  // namespace

Json to_json(const RunConfig &c) {
    const SynthSpec &s = c.data.synthetic;
    Json synthetic{{"num_classes", s.num_classes},
                   {"channels", s.channels},
                   {"frames", s.frames},
                   {"class_counts", s.class_counts},
                   {"target_class_counts", s.target_class_counts},
                   {"signal_scale", s.signal_scale},
                   {"base_noise", s.base_noise},
                   {"amplitude_jitter", s.amplitude_jitter},
                   {"seed", s.seed},
                   {"source_subject", s.source_subject},
                   {"target_subject", s.target_subject},
                   {"source_shift", shift_json(c.data.source_shift)},
                   {"target_shift", shift_json(c.data.target_shift)}};
    Json csv{{"path", c.data.csv_path.string()},
             {"subject_column", c.data.schema.subject_column},
             {"label_column", c.data.schema.label_column},
             {"channel_columns", c.data.schema.channel_columns},
             {"class_names", c.data.schema.class_names},
             {"sample_rate", c.data.schema.sample_rate}};
    const PreprocessConfig &p = c.preprocess;
    Json ranges = Json::array();
    for (const auto &[lo, hi] : p.declared_ranges) {
        ranges.push_back(Json::array({lo, hi}));
    }
    Json pca{{"dim", p.pca ? optional_json(p.pca->dim) : Json(nullptr)},
             {"fraction", p.pca ? optional_json(p.pca->fraction) : Json(nullptr)}};
    Json data{{"kind", to_string(c.data.kind)},
              {"source_subject", c.data.source_subject},
              {"target_subject", c.data.target_subject},
              {"synthetic", synthetic},
              {"csv", csv},
              {"window_seconds", p.window_seconds},
              {"window_frames", optional_json(p.window_frames)},
              {"overlap", p.overlap},
              {"split", Json{{"train", p.split.train}, {"val", p.split.val}, {"test", p.split.test}}},
              {"pca", pca},
              {"normalization", Json{{"mode", to_string(p.normalization)}, {"ranges", ranges}}}};
    const TrainerConfig &t = c.trainer;
    return Json{
        {"cli", Json{{"seed", c.seed}, {"output_dir", c.output_dir.string()}}},
        {"numeric_core", Json{{"generator_optimizer", adam_json(t.generator_adam)},
                              {"discriminator_optimizer", adam_json(t.discriminator_adam)},
                              {"classifier_optimizer", adam_json(t.classifier_adam)}}},
        {"data_pipeline", data},
        {"batch_sampler", Json{{"batching", to_string(t.batching)},
                               {"micro_size", optional_json(t.micro_size)},
                               {"micro_cap", t.micro_cap},
                               {"allow_replacement", t.allow_replacement},
                               {"uniform_matched_steps", t.uniform_matched_steps}}},
        {"adversarial_networks", Json{{"generator_blocks", c.model.generator_blocks},
                                      {"generator_filters", c.model.generator_filters},
                                      {"noise_dim", c.model.noise_dim},
                                      {"input_skip", c.model.input_skip},
                                      {"discriminator_filters", c.model.discriminator_filters},
                                      {"classifier_filters", c.model.classifier_filters}}},
        {"adversarial_trainer", Json{{"mu", t.mu},
                                     {"lambda", t.lambda},
                                     {"epochs", t.epochs},
                                     {"alpha", t.alpha},
                                     {"beta", t.beta},
                                     {"input_noise", t.input_noise},
                                     {"anneal_noise", t.anneal_noise},
                                     {"log_floor", t.log_floor},
                                     {"patience", t.patience},
                                     {"plateau_tolerance", t.plateau_tolerance}}},
        {"evaluation", Json{{"report_digits", c.report_digits}}}};
}

RunConfig run_config_from_json(const Json &in) {
    Json j = to_json(RunConfig{});
    merge_config(j, in);

    RunConfig c;
    const Json &cli = j.at("cli");
    c.seed = read<std::uint64_t>(cli, "cli", "seed");
    c.output_dir = read<std::string>(cli, "cli", "output_dir");

    const Json &nc = j.at("numeric_core");
    c.trainer.generator_adam = adam_from(nc.at("generator_optimizer"), "numeric_core.generator_optimizer");
    c.trainer.discriminator_adam = adam_from(nc.at("discriminator_optimizer"), "numeric_core.discriminator_optimizer");
    c.trainer.classifier_adam = adam_from(nc.at("classifier_optimizer"), "numeric_core.classifier_optimizer");

    const Json &d = j.at("data_pipeline");
    const std::string dp = "data_pipeline";
    c.data.kind = data_kind_from_string(read<std::string>(d, dp, "kind"));
    c.data.source_subject = read<std::string>(d, dp, "source_subject");
    c.data.target_subject = read<std::string>(d, dp, "target_subject");
    const Json &s = d.at("synthetic");
    const std::string sp = dp + ".synthetic";
    SynthSpec &syn = c.data.synthetic;
    syn.num_classes = read<std::size_t>(s, sp, "num_classes");
    syn.channels = read<std::size_t>(s, sp, "channels");
    syn.frames = read<std::size_t>(s, sp, "frames");
    syn.class_counts = read<std::vector<std::size_t>>(s, sp, "class_counts");
    syn.target_class_counts = read<std::vector<std::size_t>>(s, sp, "target_class_counts");
    syn.signal_scale = read<double>(s, sp, "signal_scale");
    syn.base_noise = read<double>(s, sp, "base_noise");
    syn.amplitude_jitter = read<double>(s, sp, "amplitude_jitter");
    syn.seed = read<std::uint64_t>(s, sp, "seed");
    syn.source_subject = read<std::string>(s, sp, "source_subject");
    syn.target_subject = read<std::string>(s, sp, "target_subject");
    c.data.source_shift = shift_from(s.at("source_shift"), sp + ".source_shift");
    c.data.target_shift = shift_from(s.at("target_shift"), sp + ".target_shift");
    const Json &csv = d.at("csv");
    const std::string cp = dp + ".csv";
    c.data.csv_path = read<std::string>(csv, cp, "path");
    c.data.schema.subject_column = read<std::string>(csv, cp, "subject_column");
    c.data.schema.label_column = read<std::string>(csv, cp, "label_column");
    c.data.schema.channel_columns = read<std::vector<std::string>>(csv, cp, "channel_columns");
    c.data.schema.class_names = read<std::vector<std::string>>(csv, cp, "class_names");
    c.data.schema.sample_rate = read<double>(csv, cp, "sample_rate");

    PreprocessConfig &p = c.preprocess;
    p.window_seconds = read<double>(d, dp, "window_seconds");
    p.window_frames = read_optional<std::size_t>(d, dp, "window_frames");
    p.overlap = read<double>(d, dp, "overlap");
    const Json &split = d.at("split");
    p.split.train = read<double>(split, dp + ".split", "train");
    p.split.val = read<double>(split, dp + ".split", "val");
    p.split.test = read<double>(split, dp + ".split", "test");
    const Json &pca = d.at("pca");
    const auto pca_dim = read_optional<std::size_t>(pca, dp + ".pca", "dim");
    const auto pca_fraction = read_optional<double>(pca, dp + ".pca", "fraction");
    if (pca_dim && pca_fraction) {
        throw ConfigError("data_pipeline.pca takes a dim or a fraction, not both");
    }
    if (pca_dim || pca_fraction) {
        p.pca = PcaTarget{pca_dim, pca_fraction};
    }
    const Json &norm = d.at("normalization");
    p.normalization = normalization_mode_from_string(read<std::string>(norm, dp + ".normalization", "mode"));
    for (const Json &r : norm.at("ranges")) {
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
            throw ConfigError("data_pipeline.normalization.ranges entries must be [min, max] pairs");
        }
        p.declared_ranges.emplace_back(r[0].get<double>(), r[1].get<double>());
    }

    const Json &b = j.at("batch_sampler");
    const std::string bp = "batch_sampler";
    c.trainer.batching = batch_mode_from_string(read<std::string>(b, bp, "batching"));
    c.trainer.micro_size = read_optional<std::size_t>(b, bp, "micro_size");
    c.trainer.micro_cap = read<std::size_t>(b, bp, "micro_cap");
    c.trainer.allow_replacement = read<bool>(b, bp, "allow_replacement");
    c.trainer.uniform_matched_steps = read<bool>(b, bp, "uniform_matched_steps");

    const Json &n = j.at("adversarial_networks");
    const std::string np = "adversarial_networks";
    c.model.generator_blocks = read<std::size_t>(n, np, "generator_blocks");
    c.model.generator_filters = read<std::size_t>(n, np, "generator_filters");
    c.model.noise_dim = read<std::size_t>(n, np, "noise_dim");
    c.model.input_skip = read<bool>(n, np, "input_skip");
    c.model.discriminator_filters = read<std::size_t>(n, np, "discriminator_filters");
    c.model.classifier_filters = read<std::size_t>(n, np, "classifier_filters");

    const Json &t = j.at("adversarial_trainer");
    const std::string tp = "adversarial_trainer";
    c.trainer.mu = read<double>(t, tp, "mu");
    c.trainer.lambda = read<double>(t, tp, "lambda");
    c.trainer.epochs = read<std::size_t>(t, tp, "epochs");
    c.trainer.alpha = read<double>(t, tp, "alpha");
    c.trainer.beta = read<double>(t, tp, "beta");
    c.trainer.input_noise = read<double>(t, tp, "input_noise");
    c.trainer.anneal_noise = read<bool>(t, tp, "anneal_noise");
    c.trainer.log_floor = read<double>(t, tp, "log_floor");
    c.trainer.patience = read<std::size_t>(t, tp, "patience");
    c.trainer.plateau_tolerance = read<double>(t, tp, "plateau_tolerance");

    c.report_digits = read<int>(j.at("evaluation"), "evaluation", "report_digits");
    c.validate();
    return c;
}

void merge_config(Json &base, const Json &patch, const std::string &where) {
    if (!patch.is_object()) {
        throw ConfigError((where.empty() ? std::string("config") : where) + " must be a JSON object");
    }
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string path = where.empty() ? it.key() : where + "." + it.key();
        if (!base.contains(it.key())) {
            throw ConfigError("unknown config key '" + path + "'");
        }
        Json &slot = base[it.key()];
        if (slot.is_object() && !slot.empty()) {
            merge_config(slot, it.value(), path);
        } else {
            slot = it.value();
        }
    }
}

void apply_override(Json &doc, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' must look like section.key=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const nlohmann::json::parse_error &) {
        value = text;
    }
    Json patch = value;
    std::size_t end = path.size();
    while (true) {
        const auto dot = path.rfind('.', end - 1);
        const std::string key = path.substr(dot == std::string::npos ? 0 : dot + 1,
                                            end - (dot == std::string::npos ? 0 : dot + 1));
        if (key.empty()) {
            throw ConfigError("override '" + assignment + "' has an empty key");
        }
        patch = Json{{key, patch}};
        if (dot == std::string::npos) break;
        end = dot;
    }
    merge_config(doc, patch);
}

RunConfig resolve_config(const std::filesystem::path &file, const std::vector<std::string> &overrides,
                         bool benchmark_preset) {
    Json doc = to_json(benchmark_preset ? benchmark_config() : RunConfig{});
    if (!file.empty()) {
        Json patch;
        try {
            patch = read_json(file);
        } catch (const DataError &e) {
            throw ConfigError(e.what());
        }
        merge_config(doc, patch);
    }
    for (const auto &o : overrides) {
        apply_override(doc, o);
    }
    return run_config_from_json(doc);
}

}  // namespace advhar
