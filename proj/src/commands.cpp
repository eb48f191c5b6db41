#include "advhar/commands.hpp"

#include "advhar/error.hpp"
#include "advhar/log.hpp"

#include <algorithm>
#include <chrono>

namespace advhar {

namespace {

const char *const kSplits[] = {"train", "val", "test"};

template <typename Splits>
auto &split_of(Splits &s, const std::string &name) {
    if (name == "train") return s.train;
    if (name == "val") return s.val;
    return s.test;
}

const RawRecording &pick_subject(const std::vector<RawRecording> &recs, const std::string &id, std::size_t fallback,
                                 const char *role) {
    if (id.empty()) {
        if (recs.size() <= fallback) {
            throw DataError(std::string("no subject available for the ") + role + " role; the file holds " +
                            std::to_string(recs.size()) + " subject(s)");
        }
        return recs[fallback];
    }
    for (const auto &r : recs) {
        if (r.subject_id == id) return r;
    }
    throw DataError(std::string(role) + " subject '" + id + "' does not occur in the data");
}

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Writes text, remembering its checksum for the record.
void emit(const std::filesystem::path &dir, const std::string &file, const std::string &text, Json &checksums) {
    write_text(dir / file, text);
    checksums[file] = fnv1a_hex(text);
}

void write_report(const std::filesystem::path &dir, const ClassificationReport &r, int digits, Json &checksums) {
    emit(dir, "report.json", to_json(r).dump(2) + "\n", checksums);
    emit(dir, "report.txt", render_report(r, digits), checksums);
}

Json base_record(const RunConfig &cfg, const std::string &command, const std::string &role) {
    return Json{{"command", command}, {"role", role}, {"config", to_json(cfg)}};
}

std::vector<NamedReport> collect_reports(const RunPaths &paths) {
    std::vector<NamedReport> out;
    if (!std::filesystem::exists(paths.root)) {
        return out;
    }
    std::vector<std::filesystem::path> dirs;
    for (const auto &entry : std::filesystem::directory_iterator(paths.root)) {
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "report.json")) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto &dir : dirs) {
        NamedReport nr;
        nr.name = dir.filename().string();
        nr.role = run_role_from_string(nr.name);
        if (std::filesystem::exists(dir / "record.json")) {
            const Json rec = read_json(dir / "record.json");
            if (rec.contains("role") && rec.at("role").is_string()) {
                nr.role = run_role_from_string(rec.at("role").get<std::string>());
            }
        }
        nr.report = report_from_json(read_json(dir / "report.json"));
        out.push_back(std::move(nr));
    }
    return out;
}

void write_comparison_if_possible(const RunPaths &paths) {
    const auto reports = collect_reports(paths);
    if (reports.size() >= 2) {
        write_text(paths.comparison(), render_comparison_csv(compare_runs(reports)));
    }
}

}  // namespace

PreparedPair build_prepared(const RunConfig &cfg) {
    cfg.validate();
    if (cfg.data.kind == DataKind::synthetic) {
        return prepare_synthetic(cfg.data.synth_spec(), cfg.preprocess);
    }
    const auto recs = load_recordings(cfg.data.csv_path, cfg.data.schema);
    const RawRecording &src = pick_subject(recs, cfg.data.source_subject, 0, "source");
    const RawRecording &tgt = pick_subject(recs, cfg.data.target_subject, 1, "target");
    if (src.subject_id == tgt.subject_id) {
        throw ConfigError("source and target subject are the same ('" + src.subject_id + "')");
    }
    return prepare_recordings(src, tgt, cfg.preprocess);
}

PreparedPair load_prepared(const RunPaths &paths) {
    PreparedPair p;
    for (const char *split : kSplits) {
        for (const auto &[role, splits] : {std::pair<const char *, DomainSplits *>{"source", &p.source},
                                           std::pair<const char *, DomainSplits *>{"target", &p.target}}) {
            const auto path = paths.dataset(role, split);
            if (!std::filesystem::exists(path)) {
                throw DataError("prepared dataset " + path.string() + " is missing; run prepare first");
            }
            split_of(*splits, split) = dataset_from_json(read_json(path));
        }
    }
    if (std::filesystem::exists(paths.normalization())) {
        p.normalization = normalization_from_json(read_json(paths.normalization()));
    }
    if (std::filesystem::exists(paths.pca())) {
        p.pca = pca_from_json(read_json(paths.pca()));
    }
    return p;
}

std::size_t cmd_synth(const RunConfig &cfg, const std::filesystem::path &csv_path) {
    cfg.validate();
    const auto recs = synthetic_recordings(cfg.data.synth_spec(), cfg.data.schema.sample_rate);
    write_recordings(csv_path, recs);
    std::size_t frames = 0;
    for (const auto &r : recs) frames += r.frame_count();
    return frames;
}

void cmd_prepare(const RunConfig &cfg) {
    const PreparedPair p = build_prepared(cfg);
    const RunPaths paths{cfg.output_dir};
    for (const char *split : kSplits) {
        write_json(paths.dataset("source", split), to_json(split_of(p.source, split)));
        write_json(paths.dataset("target", split), to_json(split_of(p.target, split)));
    }
    if (p.normalization) {
        write_json(paths.normalization(), to_json(*p.normalization));
    }
    if (p.pca) {
        write_json(paths.pca(), to_json(*p.pca));
    }
}

CommandResult cmd_train(const RunConfig &cfg) {
    cfg.validate();
    const Stopwatch clock;
    const RunPaths paths{cfg.output_dir};
    const PreparedPair data = load_prepared(paths);
    CommandResult out{"adapted", paths.run("adapted"), std::nullopt};
    std::filesystem::create_directories(out.directory);
    Json checksums = Json::object();

    AdaptationRun run;
    try {
        run = run_adaptation(data, cfg.model, cfg.trainer_config());
    } catch (const TrainingDiverged &e) {
        save_bundle_checkpoint(out.directory / "last_good.json", e.last_good(), {cfg.seed, 0});
        throw;
    }
    const TrainState &state = run.result.state;
    emit(out.directory, "losses.csv", losses_csv(state.history), checksums);
    const CheckpointMeta meta{cfg.seed, state.step};
    emit(out.directory, "classifier.json", classifier_checkpoint_text(run.result.classifier(), meta), checksums);
    emit(out.directory, "bundle.json", bundle_checkpoint_text(run.result.bundle, meta), checksums);

    Json record = base_record(cfg, "train", "adapted");
    record["losses"] = "losses.csv";
    record["epochs_run"] = run.result.epochs.size();
    record["steps"] = state.step;
    record["plateaued"] = run.result.plateaued;
    if (data.target.test.labeled()) {
        out.report = run.target_report;
        write_report(out.directory, run.target_report, cfg.report_digits, checksums);
        record["reports"] = Json{{"adapted", to_json(run.target_report)}};
    } else {
        warn("target test split is unlabeled; no report written");
    }
    record["duration_seconds"] = clock.seconds();
    record["checksums"] = checksums;
    write_json(out.directory / "record.json", record);
    write_comparison_if_possible(paths);
    return out;
}

std::vector<CommandResult> cmd_baselines(const RunConfig &cfg, bool supervised) {
    cfg.validate();
    const RunPaths paths{cfg.output_dir};
    const PreparedPair data = load_prepared(paths);
    if (!data.target.test.labeled()) {
        throw DataError("baselines are evaluated on target test labels, and the target subject has none");
    }
    if (supervised && !data.target.train.labeled()) {
        throw DataError("the supervised baseline needs target labels; refusing to run it");
    }
    std::vector<CommandResult> results;
    auto one = [&](const std::string &name, auto &&fn) {
        const Stopwatch clock;
        const BaselineRun run = fn(data, cfg.model, cfg.trainer_config());
        CommandResult r{name, paths.run(name), run.target_report};
        std::filesystem::create_directories(r.directory);
        Json checksums = Json::object();
        emit(r.directory, "classifier.json", classifier_checkpoint_text(run.classifier, {cfg.seed, 0}), checksums);
        write_report(r.directory, run.target_report, cfg.report_digits, checksums);
        Json record = base_record(cfg, "baselines", name);
        record["reports"] = Json{{name, to_json(run.target_report)}};
        record["duration_seconds"] = clock.seconds();
        record["checksums"] = checksums;
        write_json(r.directory / "record.json", record);
        results.push_back(std::move(r));
    };
    one("no_transfer", run_no_transfer);
    if (supervised) {
        one("supervised", run_supervised);
    }
    write_comparison_if_possible(paths);
    return results;
}

CommandResult cmd_evaluate(const RunConfig &cfg, const std::filesystem::path &checkpoint, const std::string &name) {
    cfg.validate();
    const RunPaths paths{cfg.output_dir};
    const PreparedPair data = load_prepared(paths);
    const ClassifierCheckpoint ckpt = load_classifier_checkpoint(checkpoint);
    const ClassifierSpec &spec = ckpt.classifier.spec();
    if (spec.input_dim != data.dim() || spec.num_classes != data.num_classes()) {
        throw DataError("checkpoint expects " + std::to_string(spec.input_dim) + "-dim windows and " +
                        std::to_string(spec.num_classes) + " classes, but the prepared data has " +
                        std::to_string(data.dim()) + " and " + std::to_string(data.num_classes()));
    }
    CommandResult r{name, paths.run(name), evaluate_classifier(ckpt.classifier, data.target.test)};
    std::filesystem::create_directories(r.directory);
    Json checksums = Json::object();
    write_report(r.directory, *r.report, cfg.report_digits, checksums);
    const auto record_path = r.directory / "record.json";
    Json record = std::filesystem::exists(record_path) ? read_json(record_path)
                                                       : base_record(cfg, "evaluate", to_string(run_role_from_string(name)));
    record["evaluated_checkpoint"] = checkpoint.string();
    record["reports"][name] = to_json(*r.report);
    for (auto it = checksums.begin(); it != checksums.end(); ++it) {
        record["checksums"][it.key()] = it.value();
    }
    write_json(record_path, record);
    write_comparison_if_possible(paths);
    return r;
}

std::string cmd_report(const RunConfig &cfg) {
    const RunPaths paths{cfg.output_dir};
    const auto reports = collect_reports(paths);
    if (reports.size() < 2) {
        throw DataError("report needs at least two evaluated runs under " + paths.root.string() + ", found " +
                        std::to_string(reports.size()));
    }
    const Comparison cmp = compare_runs(reports);
    write_text(paths.comparison(), render_comparison_csv(cmp));
    return render_comparison_text(cmp);
}

}  // namespace advhar
