#pragma once

#include "advhar/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace advhar {

/// Output layout under RunConfig::output_dir.
struct RunPaths {
    std::filesystem::path root;

    std::filesystem::path prepared() const { return root / "prepared"; }
    std::filesystem::path dataset(const std::string &role, const std::string &split) const {
        return prepared() / (role + "_" + split + ".json");
    }
    std::filesystem::path normalization() const { return prepared() / "normalization.json"; }
    std::filesystem::path pca() const { return prepared() / "pca.json"; }
    std::filesystem::path run(const std::string &name) const { return root / name; }
    std::filesystem::path comparison() const { return root / "comparison.csv"; }
};

/// The pair after preprocessing, as stored on disk by cmd_prepare.
PreparedPair load_prepared(const RunPaths &paths);
/// Loads, applying the configured preprocessing, without writing anything.
PreparedPair build_prepared(const RunConfig &cfg);

/// Writes the two subjects' recordings as CSV; returns the number of frames written.
std::size_t cmd_synth(const RunConfig &cfg, const std::filesystem::path &csv_path);

/// Writes 3 splits x 2 subjects plus fitted normalization / PCA models.
void cmd_prepare(const RunConfig &cfg);

struct CommandResult {
    std::string name;
    std::filesystem::path directory;
    std::optional<ClassificationReport> report;
};

/// Adversarial adaptation on prepared data. Writes losses.csv, classifier.json,
/// bundle.json, record.json and, when target test labels exist, report.json/txt.
/// On divergence writes last_good.json and rethrows.
CommandResult cmd_train(const RunConfig &cfg);

/// No-Transfer, and Supervised when requested. Supervised without target labels is a DataError.
std::vector<CommandResult> cmd_baselines(const RunConfig &cfg, bool supervised);

/// Reports a checkpoint on the target test split into `name`'s run directory.
CommandResult cmd_evaluate(const RunConfig &cfg, const std::filesystem::path &checkpoint, const std::string &name);

/// Collects report.json of every run directory and writes comparison.csv; returns the text table.
std::string cmd_report(const RunConfig &cfg);

}  // namespace advhar
