#include "advhar/experiment.hpp"

#include "advhar/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace advhar {

std::string to_string(NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::declared: return "declared";
        case NormalizationMode::fit: return "fit";
        case NormalizationMode::none: return "none";
    }
    return "none";
}

NormalizationMode normalization_mode_from_string(const std::string &name) {
    if (name == "declared") return NormalizationMode::declared;
    if (name == "fit") return NormalizationMode::fit;
    if (name == "none") return NormalizationMode::none;
    throw ConfigError("unknown normalization mode '" + name + "' (expected declared, fit or none)");
}

void PreprocessConfig::validate() const {
    if (window_frames) {
        if (*window_frames == 0) throw ConfigError("window_frames must be >= 1");
    } else if (!(window_seconds > 0.0)) {
        throw ConfigError("window_seconds must be positive");
    }
    if (!(overlap >= 0.0 && overlap < 1.0)) {
        throw ConfigError("overlap must lie in [0, 1)");
    }
    split.validate();
    if (pca && !pca->dim && !pca->fraction) {
        throw ConfigError("pca needs a dimension or a fraction");
    }
    for (const auto &[lo, hi] : declared_ranges) {
        if (!(lo <= hi)) throw ConfigError("declared range with min > max");
    }
}

PreparedPair prepare_windows(const DomainDataset &source, const DomainDataset &target, const PreprocessConfig &cfg) {
    cfg.validate();
    if (!source.labeled()) {
        throw DataError("source subject '" + source.subject_id + "' has no labels");
    }
    if (source.dim != target.dim) {
        throw DataError("source and target windows differ in dimension");
    }
    PreparedPair out;
    out.source = split_domain(source, cfg.split);
    out.target = split_domain(target, cfg.split);
    if (cfg.pca) {
        const DomainDataset target_train = out.target.train.without_labels();
        out.pca = fit_pca({&out.source.train, &target_train}, *cfg.pca);
        for (DomainSplits *s : {&out.source, &out.target}) {
            s->train = apply_pca(*out.pca, s->train);
            s->val = apply_pca(*out.pca, s->val);
            s->test = apply_pca(*out.pca, s->test);
        }
    }
    return out;
}

PreparedPair prepare_recordings(const RawRecording &source, const RawRecording &target, const PreprocessConfig &cfg) {
    cfg.validate();
    if (source.channel_names != target.channel_names) {
        throw DataError("subjects '" + source.subject_id + "' and '" + target.subject_id +
                        "' have different channels");
    }
    RawRecording src = impute_missing(source);
    RawRecording tgt = impute_missing(target);
    std::optional<NormalizationModel> norm;
    switch (cfg.normalization) {
        case NormalizationMode::declared: {
            if (cfg.declared_ranges.empty()) {
                throw ConfigError("declared normalization needs sensor ranges (or choose mode fit / none)");
            }
            auto ranges = cfg.declared_ranges;
            if (ranges.size() == 1) {
                ranges.assign(src.channel_count(), ranges.front());
            }
            if (ranges.size() != src.channel_count()) {
                throw ConfigError(std::to_string(ranges.size()) + " declared ranges for " +
                                  std::to_string(src.channel_count()) + " channels");
            }
            norm = declared_minmax(ranges);
            break;
        }
        case NormalizationMode::fit: norm = fit_minmax(std::vector<RawRecording>{src, tgt}); break;
        case NormalizationMode::none: break;
    }
    if (norm) {
        src = apply_minmax(*norm, src);
        tgt = apply_minmax(*norm, tgt);
    }
    auto segment = [&](const RawRecording &r) {
        if (cfg.window_frames) {
            return segment_windows_frames(r, *cfg.window_frames, cfg.overlap);
        }
        return segment_windows(r, cfg.window_seconds, cfg.overlap);
    };
    PreparedPair out = prepare_windows(segment(src), segment(tgt), cfg);
    out.normalization = norm;
    return out;
}

PreparedPair prepare_synthetic(const SynthSpec &spec, const PreprocessConfig &cfg) {
    SyntheticPair pair = generate_synthetic_pair(spec);
    pair.target.labels = pair.target_labels;
    return prepare_windows(pair.source, pair.target, cfg);
}

void ModelConfig::validate() const {
    if (generator_blocks == 0 || generator_filters == 0) {
        throw ConfigError("generator needs at least one block and one filter");
    }
    if (discriminator_filters == 0) {
        throw ConfigError("discriminator base filters must be >= 1");
    }
    if (classifier_filters < 4) {
        throw ConfigError("classifier base filters must be >= 4 (layers use cf, cf/2, cf/4)");
    }
}

GeneratorSpec generator_spec(const ModelConfig &m, std::size_t dim, std::uint64_t seed) {
    GeneratorSpec g;
    g.input_dim = dim;
    g.blocks = m.generator_blocks;
    g.filters = m.generator_filters;
    g.noise_dim = m.noise_dim;
    g.input_skip = m.input_skip;
    g.seed = mix_seed(seed, 10);
    return g;
}

DiscriminatorSpec discriminator_spec(const ModelConfig &m, std::size_t dim, std::uint64_t seed) {
    DiscriminatorSpec d;
    d.input_dim = dim;
    d.base_filters = m.discriminator_filters;
    d.seed = mix_seed(seed, 11);
    return d;
}

ClassifierSpec classifier_spec(const ModelConfig &m, std::size_t dim, std::size_t classes, std::uint64_t seed) {
    ClassifierSpec c;
    c.input_dim = dim;
    c.base_filters = m.classifier_filters;
    c.num_classes = classes;
    c.seed = mix_seed(seed, 12);
    return c;
}

ModelBundle make_bundle(const ModelConfig &m, std::size_t dim, std::size_t classes, std::uint64_t seed) {
    m.validate();
    return ModelBundle(generator_spec(m, dim, seed), discriminator_spec(m, dim, seed),
                       classifier_spec(m, dim, classes, seed));
}

ClassificationReport evaluate_classifier(const Classifier &c, const DomainDataset &labeled) {
    if (!labeled.labeled()) {
        throw DataError("evaluation needs labels for '" + labeled.subject_id + "'");
    }
    if (labeled.empty()) {
        throw DataError("evaluation set for '" + labeled.subject_id + "' is empty");
    }
    const std::vector<int> predicted = c.predict(labeled.all_windows());
    return report(confusion(*labeled.labels, predicted, c.spec().num_classes), labeled.class_names);
}

namespace {

Tensor head_rows(const DomainDataset &ds, std::size_t count) {
    std::vector<std::size_t> idx(std::min(count, ds.size()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return ds.batch(idx);
}

}  // namespace

AdaptationRun run_adaptation(const PreparedPair &data, const ModelConfig &model, const TrainerConfig &cfg,
                             const AdaptationOptions &options) {
    const DomainDataset target_train = data.target.train.without_labels();
    ModelBundle bundle = make_bundle(model, data.dim(), data.num_classes(), cfg.seed);

    AdaptationRun run;
    Tensor xs;
    Tensor xt;
    Tensor z;
    double bandwidth = 1.0;
    if (options.track_discrepancy) {
        xs = head_rows(data.source.train, options.discrepancy_points);
        xt = head_rows(target_train, options.discrepancy_points);
        bandwidth = median_distance(xt);
        if (model.noise_dim > 0) {
            RandomSource rng(mix_seed(cfg.seed, 20));
            z = rng.draw(Distribution::standard_normal, Shape{xs.dim(0), model.noise_dim});
        }
    }
    EpochCallback hook = [&](const EpochSummary &summary, const ModelBundle &b) {
        if (options.track_discrepancy) {
            run.discrepancy.push_back(mean_discrepancy(b.generator.generate(xs, z), xt, bandwidth));
        }
        if (options.on_epoch) {
            options.on_epoch(summary, b);
        }
    };
    run.result = train(data.source.train, target_train, std::move(bundle), cfg, hook);
    if (data.target.test.labeled()) {
        run.target_report = evaluate_classifier(run.result.classifier(), data.target.test);
    }
    return run;
}

BaselineRun run_no_transfer(const PreparedPair &data, const ModelConfig &model, const TrainerConfig &cfg) {
    model.validate();
    Classifier init(classifier_spec(model, data.dim(), data.num_classes(), cfg.seed));
    BaselineRun run{train_supervised(data.source.train, std::move(init), cfg), {}};
    run.target_report = evaluate_classifier(run.classifier, data.target.test);
    return run;
}

BaselineRun run_supervised(const PreparedPair &data, const ModelConfig &model, const TrainerConfig &cfg) {
    model.validate();
    if (!data.target.train.labeled()) {
        throw DataError("the supervised baseline needs target labels, and subject '" +
                        data.target.train.subject_id + "' has none");
    }
    Classifier init(classifier_spec(model, data.dim(), data.num_classes(), cfg.seed));
    BaselineRun run{train_supervised(data.target.train, std::move(init), cfg), {}};
    run.target_report = evaluate_classifier(run.classifier, data.target.test);
    return run;
}

std::string fnv1a_hex(const std::string &bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

void append_double(std::string &out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

std::string losses_csv(const std::vector<LossRecord> &history) {
    std::string out = "step,epoch,J_D,J_C,J_G\n";
    for (const LossRecord &r : history) {
        out += std::to_string(r.step) + "," + std::to_string(r.epoch) + ",";
        append_double(out, r.j_d);
        out += ",";
        append_double(out, r.j_c);
        out += ",";
        append_double(out, r.j_g);
        out += "\n";
    }
    return out;
}

}  // namespace advhar
