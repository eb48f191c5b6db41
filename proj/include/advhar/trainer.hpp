#pragma once

#include "advhar/dataset.hpp"
#include "advhar/error.hpp"
#include "advhar/networks.hpp"
#include "advhar/optimizer.hpp"
#include "advhar/random.hpp"
#include "advhar/sampler.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace advhar {

enum class BatchMode { micro, uniform };

std::string to_string(BatchMode mode);
BatchMode batch_mode_from_string(const std::string &name);

struct TrainerConfig {
    double mu = 1.0;      // adversarial weight in the generator objective
    double lambda = 1.0;  // classification weight in the generator objective
    std::size_t epochs = 150;
    /// Fixed m; when unset m is the smallest source class count, capped by micro_cap.
    std::optional<std::size_t> micro_size;
    std::size_t micro_cap = 32;
    bool allow_replacement = false;
    /// Discriminator targets are +alpha (target domain) and -alpha (generated).
    double alpha = 0.9;
    /// Only used by optimal_discriminator_value; the training targets are symmetric.
    double beta = 0.1;
    /// Amplitude of the uniform [0, 1) noise added to discriminator inputs.
    double input_noise = 0.1;
    bool anneal_noise = true;
    double log_floor = 1e-12;
    AdamConfig generator_adam;
    AdamConfig discriminator_adam;
    AdamConfig classifier_adam;
    std::uint64_t seed = 0;
    /// Epochs per moving-average window of the plateau rule; 0 disables it.
    std::size_t patience = 10;
    double plateau_tolerance = 1e-3;
    BatchMode batching = BatchMode::micro;
    /// Uniform batching takes as many steps per epoch as micro batching would.
    bool uniform_matched_steps = true;

    void validate() const;
};

/// One executed train step.
struct LossRecord {
    std::uint64_t step = 0;
    std::uint64_t epoch = 0;
    double j_d = 0.0;
    double j_c = 0.0;
    double j_g = 0.0;

    friend bool operator==(const LossRecord &, const LossRecord &) = default;
};

struct TrainState {
    std::uint64_t epoch = 0;
    std::uint64_t step = 0;
    std::vector<LossRecord> history;
    OptimizerState generator_opt;
    OptimizerState discriminator_opt;
    OptimizerState classifier_opt;
    RandomSource rng{0};
    double noise_amplitude = 0.0;

    TrainState() = default;
    explicit TrainState(const TrainerConfig &cfg);
};

/// Tensors consumed by one sub-update.
struct StepInputs {
    Tensor source;  // [N x d]
    std::vector<int> labels;
    Tensor target;      // [N x d]
    Tensor noise;       // z, [N x noise_dim]
    Tensor real_jitter;  // added to target windows before D, [N x d]
    Tensor fake_jitter;  // added to generated windows before D, [N x d]
};

StepInputs draw_step_inputs(const Tensor &source, std::vector<int> labels, const Tensor &target,
                            std::size_t noise_dim, double noise_amplitude, RandomSource &rng);

// Losses evaluated directly on critic outputs.

/// mean (alpha - real)^2 + mean (-alpha - fake)^2
double discriminator_loss_value(const Tensor &real_scores, const Tensor &fake_scores, double alpha);
/// mean over rows of -log p_source[y] - log p_generated[y]
double classifier_loss_value(const Tensor &source_probs, const Tensor &generated_probs,
                             const std::vector<int> &labels, double log_floor = 1e-12);
/// mu * mean (alpha - fake)^2 + lambda * mean -log p_generated[y]
double generator_loss_value(const Tensor &fake_scores, const Tensor &generated_probs, const std::vector<int> &labels,
                            double mu, double lambda, double alpha, double log_floor = 1e-12);

// The same losses recorded on a tape. Only the named player's parameters are
// trainable; the other networks enter as constants.

Var discriminator_loss(Tape &tape, Discriminator &d, const Generator &g, const StepInputs &in,
                       const TrainerConfig &cfg);
Var classifier_loss(Tape &tape, Classifier &c, const Generator &g, const StepInputs &in, const TrainerConfig &cfg);
Var generator_loss(Tape &tape, Generator &g, const Discriminator &d, const Classifier &c, const StepInputs &in,
                   const TrainerConfig &cfg);

/// D*(x) for smoothed targets alpha (real) and beta (generated).
double optimal_discriminator_value(double p_target, double p_generated, double alpha, double beta);

/// One D, then C, then G update on the batch. Each sub-update draws fresh z and jitter.
/// Throws DivergenceError naming the player whose loss is not finite; that player's
/// update is not applied.
LossRecord train_step(ModelBundle &bundle, const DomainDataset &source, const DomainDataset &target,
                      const MiniBatch &batch, const TrainerConfig &cfg, TrainState &state);

struct EpochSummary {
    std::uint64_t epoch = 0;  // 1-based
    std::size_t steps = 0;
    double j_d = 0.0;
    double j_c = 0.0;
    double j_g = 0.0;
};

using EpochCallback = std::function<void(const EpochSummary &, const ModelBundle &)>;

struct TrainResult {
    ModelBundle bundle;
    TrainState state;
    std::vector<EpochSummary> epochs;
    bool plateaued = false;

    const Classifier &classifier() const noexcept { return bundle.classifier; }
};

/// Raised by train(); carries the models as they were at the start of the failing epoch.
class TrainingDiverged : public DivergenceError {
  public:
    TrainingDiverged(const DivergenceError &cause, ModelBundle last_good, std::uint64_t epoch);

    const ModelBundle &last_good() const noexcept { return last_good_; }
    std::uint64_t epoch() const noexcept { return epoch_; }

  private:
    ModelBundle last_good_;
    std::uint64_t epoch_;
};

std::unique_ptr<BatchSampler> make_sampler(const DomainDataset &source, std::size_t target_count,
                                           const TrainerConfig &cfg);

/// Adversarial adaptation from a labeled source to an unlabeled target. A caller-built
/// sampler replaces make_sampler; target blocks are then whatever it pairs with each
/// class block (e.g. pseudo-labeled target windows).
TrainResult train(const DomainDataset &source, const DomainDataset &target, ModelBundle initial,
                  const TrainerConfig &cfg, const EpochCallback &on_epoch = {},
                  std::unique_ptr<BatchSampler> sampler = nullptr);

/// True when the mean of the last `patience` values is not below the mean of the
/// `patience` before it by at least `tolerance`.
bool plateau_reached(const std::vector<double> &per_epoch, std::size_t patience, double tolerance);

/// Cross-entropy training of a classifier alone, with the same sampler and optimizer
/// settings as train(). Used for the baselines.
Classifier train_supervised(const DomainDataset &data, Classifier initial, const TrainerConfig &cfg);

/// Median pairwise Euclidean distance within x ([N x d]), over at most max_points rows.
double median_distance(const Tensor &x, std::size_t max_points = 500);
/// Biased squared maximum mean discrepancy with a Gaussian kernel of the given width.
double mean_discrepancy(const Tensor &x, const Tensor &y, double bandwidth);

}  // namespace advhar
