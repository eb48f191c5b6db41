#pragma once

#include "advhar/experiment.hpp"
#include "advhar/serialization.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace advhar {

/// Rotation of consecutive channel pairs, constant offset and additive noise.
struct ShiftConfig {
    double rotation_degrees = 0.0;
    double offset = 0.0;
    double noise = 0.0;

    SubjectShift build(std::size_t channels) const;
};

enum class DataKind { synthetic, csv };

struct DataConfig {
    DataKind kind = DataKind::synthetic;
    SynthSpec synthetic;
    ShiftConfig source_shift;
    ShiftConfig target_shift;
    std::filesystem::path csv_path;
    CsvSchema schema;
    /// Subjects picked from the CSV; empty picks the first and second subject.
    std::string source_subject;
    std::string target_subject;

    /// The synthetic spec with both shifts applied.
    SynthSpec synth_spec() const;
};

/// Everything a command needs. Serialized as one JSON document with a section per
/// module; see to_json for the layout.
struct RunConfig {
    std::uint64_t seed = 7;
    std::filesystem::path output_dir = "run";
    DataConfig data;
    PreprocessConfig preprocess;
    ModelConfig model;
    TrainerConfig trainer;  // trainer.seed is overwritten by seed
    int report_digits = 2;

    void validate() const;
    /// The trainer settings with the run seed applied.
    TrainerConfig trainer_config() const;
};

/// The scaled-down synthetic adaptation benchmark: 4 classes, 40 channels x 5 frames
/// projected to 50 dimensions, target rotated 30 degrees and offset by 0.5.
RunConfig benchmark_config();

Json to_json(const RunConfig &cfg);
/// Reads a document produced by to_json; absent keys keep their defaults and
/// unknown keys are a ConfigError.
RunConfig run_config_from_json(const Json &j);

/// Overlays `patch` onto `base`; every key of `patch` must already exist in `base`.
void merge_config(Json &base, const Json &patch, const std::string &where = "");
/// "section.key=value" (dots nest); the value is parsed as JSON, falling back to a string.
void apply_override(Json &doc, const std::string &assignment);

/// defaults (or the benchmark preset), then the file, then the overrides.
RunConfig resolve_config(const std::filesystem::path &file, const std::vector<std::string> &overrides,
                         bool benchmark_preset = false);

}  // namespace advhar
