#pragma once

#include "advhar/dataset.hpp"
#include "advhar/evaluation.hpp"
#include "advhar/networks.hpp"
#include "advhar/pca.hpp"
#include "advhar/recording.hpp"
#include "advhar/synthetic.hpp"
#include "advhar/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace advhar {

enum class NormalizationMode { declared, fit, none };

std::string to_string(NormalizationMode mode);
NormalizationMode normalization_mode_from_string(const std::string &name);

struct PreprocessConfig {
    /// Window length in seconds; window_frames, when set, takes precedence.
    double window_seconds = 1.0;
    std::optional<std::size_t> window_frames;
    double overlap = 0.7;
    SplitSpec split;
    /// Unset keeps the raw window dimension.
    std::optional<PcaTarget> pca;
    NormalizationMode normalization = NormalizationMode::declared;
    /// Per-channel (min, max); a single pair applies to every channel.
    std::vector<std::pair<double, double>> declared_ranges;

    void validate() const;
};

/// Train/val/test splits of one source and one target subject in the model's
/// feature space. Target splits keep their labels for evaluation; training code
/// strips them.
struct PreparedPair {
    DomainSplits source;
    DomainSplits target;
    std::optional<NormalizationModel> normalization;
    std::optional<PcaModel> pca;

    std::size_t dim() const noexcept { return source.train.dim; }
    std::size_t num_classes() const noexcept { return source.train.num_classes; }
};

/// Split, then project with a PCA fitted on source-train plus target-train windows.
PreparedPair prepare_windows(const DomainDataset &source, const DomainDataset &target,
                             const PreprocessConfig &cfg);

/// Impute, normalize, segment, then as prepare_windows. The source must be labeled.
PreparedPair prepare_recordings(const RawRecording &source, const RawRecording &target,
                                const PreprocessConfig &cfg);

/// Synthetic pair with its hidden target labels restored, then as prepare_windows.
PreparedPair prepare_synthetic(const SynthSpec &spec, const PreprocessConfig &cfg);

/// The tunable network sizes.
struct ModelConfig {
    std::size_t generator_blocks = 2;   // cb
    std::size_t generator_filters = 32;  // gf
    std::size_t noise_dim = 16;
    bool input_skip = true;
    std::size_t discriminator_filters = 8;  // df
    std::size_t classifier_filters = 64;    // cf

    void validate() const;
};

GeneratorSpec generator_spec(const ModelConfig &m, std::size_t dim, std::uint64_t seed);
DiscriminatorSpec discriminator_spec(const ModelConfig &m, std::size_t dim, std::uint64_t seed);
ClassifierSpec classifier_spec(const ModelConfig &m, std::size_t dim, std::size_t classes, std::uint64_t seed);
/// Initialization seeds derive from the run seed, so the baselines and the adapted
/// run start from the same classifier weights.
ModelBundle make_bundle(const ModelConfig &m, std::size_t dim, std::size_t classes, std::uint64_t seed);

ClassificationReport evaluate_classifier(const Classifier &c, const DomainDataset &labeled);

struct AdaptationRun {
    TrainResult result;
    ClassificationReport target_report;
    /// Mean discrepancy between G(X_s, z) and X_t on the training windows after each epoch.
    std::vector<double> discrepancy;
};

struct AdaptationOptions {
    bool track_discrepancy = false;
    /// Windows per domain used for the discrepancy estimate.
    std::size_t discrepancy_points = 300;
    EpochCallback on_epoch;
};

AdaptationRun run_adaptation(const PreparedPair &data, const ModelConfig &model, const TrainerConfig &cfg,
                             const AdaptationOptions &options = {});

struct BaselineRun {
    Classifier classifier;
    ClassificationReport target_report;
};

/// Source-trained classifier evaluated on the target test split.
BaselineRun run_no_transfer(const PreparedPair &data, const ModelConfig &model, const TrainerConfig &cfg);
/// Target-trained classifier (target labels) evaluated on the target test split.
BaselineRun run_supervised(const PreparedPair &data, const ModelConfig &model, const TrainerConfig &cfg);

/// 64-bit FNV-1a of a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string &bytes);

/// "step,epoch,J_D,J_C,J_G" rows with round-trip precision.
std::string losses_csv(const std::vector<LossRecord> &history);

}  // namespace advhar
