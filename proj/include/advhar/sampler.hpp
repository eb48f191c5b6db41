#pragma once

#include "advhar/dataset.hpp"
#include "advhar/random.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace advhar {

/// Source and target indices for one training step. For a micro-mini-batch the
/// source indices are laid out class by class: block j holds m windows of class j,
/// and target block j holds the m target windows paired with it.
struct MiniBatch {
    std::vector<std::size_t> source_indices;
    std::vector<int> source_labels;
    std::vector<std::size_t> target_indices;
    /// m for micro-mini-batches, 0 for plain batches.
    std::size_t micro_size = 0;
    std::size_t num_classes = 0;

    std::size_t size() const noexcept { return source_indices.size(); }
    std::span<const std::size_t> source_block(std::size_t j) const;
    std::span<const std::size_t> target_block(std::size_t j) const;
};

/// m = smallest per-class count, optionally capped. Throws DataError naming any
/// class with no windows.
std::size_t compute_micro_size(const DomainDataset &source, std::optional<std::size_t> cap = std::nullopt);

/// Seed for epoch e of a run seeded with `seed`.
std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch);

/// One epoch of micro-mini-batches drawn without replacement.
class EpochPlan {
  public:
    /// Classes with fewer than m windows are an error unless allow_replacement is set,
    /// in which case their queue is reshuffled and reused when it runs dry.
    static EpochPlan build(const DomainDataset &source, std::size_t target_count, std::size_t m,
                           std::uint64_t seed, std::uint64_t epoch = 0, bool allow_replacement = false);
    static EpochPlan build(const DomainDataset &source, const DomainDataset &target, std::size_t m,
                           std::uint64_t seed, std::uint64_t epoch = 0, bool allow_replacement = false);

    std::size_t micro_size() const noexcept { return m_; }
    std::size_t num_classes() const noexcept { return class_queues_.size(); }
    std::size_t batches_per_epoch() const noexcept { return batches_; }
    std::size_t emitted() const noexcept { return emitted_; }
    bool exhausted() const noexcept { return emitted_ >= batches_; }

    /// std::nullopt marks the end of the epoch.
    std::optional<MiniBatch> next();

    const std::vector<std::vector<std::size_t>> &class_queues() const noexcept { return class_queues_; }
    const std::vector<std::size_t> &target_queue() const noexcept { return target_queue_; }

  private:
    EpochPlan() = default;

    std::size_t pop_source(std::size_t cls);
    std::size_t pop_target();

    std::size_t m_ = 0;
    std::size_t batches_ = 0;
    std::size_t emitted_ = 0;
    std::size_t target_count_ = 0;
    std::vector<std::vector<std::size_t>> class_queues_;
    std::vector<std::size_t> class_pos_;
    std::vector<std::vector<std::size_t>> class_members_;
    std::vector<std::size_t> target_queue_;
    std::size_t target_pos_ = 0;
    RandomSource rng_{0};
};

/// Streams mini-batches epoch after epoch.
class BatchSampler {
  public:
    virtual ~BatchSampler() = default;
    virtual void begin_epoch(std::uint64_t epoch) = 0;
    virtual std::optional<MiniBatch> next() = 0;
    virtual std::size_t batches_per_epoch() const = 0;
};

/// Class-balanced sampling: every batch holds exactly m source windows of every class.
class MicroBatchSampler final : public BatchSampler {
  public:
    MicroBatchSampler(const DomainDataset &source, std::size_t target_count, std::size_t m, std::uint64_t seed,
                      bool allow_replacement = false);

    void begin_epoch(std::uint64_t epoch) override;
    std::optional<MiniBatch> next() override;
    std::size_t batches_per_epoch() const override;

  private:
    const DomainDataset *source_;
    std::size_t target_count_;
    std::size_t m_;
    std::uint64_t seed_;
    bool allow_replacement_;
    std::optional<EpochPlan> plan_;
};

/// Plain shuffled batches of m * C source windows with no class structure; the
/// ablation counterpart of MicroBatchSampler. An epoch is one pass over the source
/// unless batches_per_epoch caps it.
class UniformBatchSampler final : public BatchSampler {
  public:
    UniformBatchSampler(const DomainDataset &source, std::size_t target_count, std::size_t batch_size,
                        std::uint64_t seed, std::optional<std::size_t> batches_per_epoch = std::nullopt);

    void begin_epoch(std::uint64_t epoch) override;
    std::optional<MiniBatch> next() override;
    std::size_t batches_per_epoch() const override;

  private:
    const DomainDataset *source_;
    std::size_t target_count_;
    std::size_t batch_size_;
    std::uint64_t seed_;
    std::optional<std::size_t> batch_cap_;
    std::vector<std::size_t> source_order_;
    std::vector<std::size_t> target_order_;
    std::size_t source_pos_ = 0;
    std::size_t target_pos_ = 0;
    std::size_t emitted_ = 0;
    RandomSource rng_{0};
};

}  // namespace advhar
