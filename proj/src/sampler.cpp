#include "advhar/sampler.hpp"

#include "advhar/error.hpp"
#include "advhar/log.hpp"

#include <algorithm>
#include <numeric>

namespace advhar {

std::span<const std::size_t> MiniBatch::source_block(std::size_t j) const {
    if (micro_size == 0 || j >= num_classes) {
        throw ContractError("source_block needs a micro-mini-batch and j < C");
    }
    return std::span(source_indices).subspan(j * micro_size, micro_size);
}

std::span<const std::size_t> MiniBatch::target_block(std::size_t j) const {
    if (micro_size == 0 || j >= num_classes) {
        throw ContractError("target_block needs a micro-mini-batch and j < C");
    }
    return std::span(target_indices).subspan(j * micro_size, micro_size);
}

std::size_t compute_micro_size(const DomainDataset &source, std::optional<std::size_t> cap) {
    const auto counts = source.class_counts();
    std::vector<std::string> empty;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            empty.push_back(c < source.class_names.size() ? source.class_names[c] : std::to_string(c));
        }
    }
    if (!empty.empty()) {
        std::string list;
        for (const auto &name : empty) {
            list += (list.empty() ? "" : ", ") + name;
        }
        throw DataError("source dataset '" + source.subject_id + "' has no windows for class(es): " + list);
    }
    if (counts.empty()) {
        throw DataError("source dataset has no classes");
    }
    std::size_t m = *std::min_element(counts.begin(), counts.end());
    if (cap) {
        if (*cap == 0) {
            throw ConfigError("micro-batch cap must be >= 1");
        }
        m = std::min(m, *cap);
    }
    return m;
}

std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch) { return mix_seed(seed, 0x5EED0000ULL + epoch); }

namespace {

std::vector<std::size_t> iota_vector(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

}  // namespace

EpochPlan EpochPlan::build(const DomainDataset &source, std::size_t target_count, std::size_t m, std::uint64_t seed,
                           std::uint64_t epoch, bool allow_replacement) {
    if (m < 1) {
        throw ConfigError("micro-batch size m must be >= 1");
    }
    if (!source.labeled()) {
        throw ContractError("the source dataset must be labeled");
    }
    if (target_count == 0) {
        throw DataError("the target dataset has no windows");
    }
    EpochPlan plan;
    plan.m_ = m;
    plan.target_count_ = target_count;
    plan.rng_ = RandomSource(epoch_seed(seed, epoch));

    const std::size_t classes = source.num_classes;
    std::size_t min_count = source.size();
    for (std::size_t c = 0; c < classes; ++c) {
        auto members = source.indices_of_class(static_cast<int>(c));
        if (members.empty()) {
            throw DataError("source dataset '" + source.subject_id + "' has no windows for class " +
                            std::to_string(c));
        }
        min_count = std::min(min_count, members.size());
        plan.class_members_.push_back(std::move(members));
    }
    if (min_count < m) {
        if (!allow_replacement) {
            throw DataError("smallest class has " + std::to_string(min_count) + " windows, fewer than m = " +
                            std::to_string(m) + "; enable replacement or lower m");
        }
        warn("smallest class has " + std::to_string(min_count) + " windows, fewer than m = " + std::to_string(m) +
             "; sampling that class with replacement");
    }
    for (auto &members : plan.class_members_) {
        std::vector<std::size_t> queue = members;
        plan.rng_.shuffle(queue);
        plan.class_queues_.push_back(std::move(queue));
    }
    plan.class_pos_.assign(classes, 0);
    plan.target_queue_ = iota_vector(target_count);
    plan.rng_.shuffle(plan.target_queue_);
    plan.batches_ = std::max<std::size_t>(1, min_count / m);
    return plan;
}

EpochPlan EpochPlan::build(const DomainDataset &source, const DomainDataset &target, std::size_t m,
                           std::uint64_t seed, std::uint64_t epoch, bool allow_replacement) {
    return build(source, target.size(), m, seed, epoch, allow_replacement);
}

std::size_t EpochPlan::pop_source(std::size_t cls) {
    auto &queue = class_queues_[cls];
    if (class_pos_[cls] >= queue.size()) {
        queue = class_members_[cls];
        rng_.shuffle(queue);
        class_pos_[cls] = 0;
    }
    return queue[class_pos_[cls]++];
}

std::size_t EpochPlan::pop_target() {
    if (target_pos_ >= target_queue_.size()) {
        target_queue_ = iota_vector(target_count_);
        rng_.shuffle(target_queue_);
        target_pos_ = 0;
    }
    return target_queue_[target_pos_++];
}

std::optional<MiniBatch> EpochPlan::next() {
    if (exhausted()) {
        return std::nullopt;
    }
    MiniBatch batch;
    batch.micro_size = m_;
    batch.num_classes = class_queues_.size();
    batch.source_indices.reserve(m_ * batch.num_classes);
    for (std::size_t c = 0; c < batch.num_classes; ++c) {
        for (std::size_t i = 0; i < m_; ++i) {
            batch.source_indices.push_back(pop_source(c));
            batch.source_labels.push_back(static_cast<int>(c));
        }
    }
    for (std::size_t i = 0; i < m_ * batch.num_classes; ++i) {
        batch.target_indices.push_back(pop_target());
    }
    emitted_ += 1;
    return batch;
}

MicroBatchSampler::MicroBatchSampler(const DomainDataset &source, std::size_t target_count, std::size_t m,
                                     std::uint64_t seed, bool allow_replacement)
    : source_(&source), target_count_(target_count), m_(m), seed_(seed), allow_replacement_(allow_replacement) {
    begin_epoch(0);
}

void MicroBatchSampler::begin_epoch(std::uint64_t epoch) {
    plan_ = EpochPlan::build(*source_, target_count_, m_, seed_, epoch, allow_replacement_);
}

std::optional<MiniBatch> MicroBatchSampler::next() { return plan_->next(); }

std::size_t MicroBatchSampler::batches_per_epoch() const { return plan_->batches_per_epoch(); }

UniformBatchSampler::UniformBatchSampler(const DomainDataset &source, std::size_t target_count,
                                         std::size_t batch_size, std::uint64_t seed,
                                         std::optional<std::size_t> batches_per_epoch)
    : source_(&source), target_count_(target_count), batch_size_(batch_size), seed_(seed),
      batch_cap_(batches_per_epoch) {
    if (batch_size_ < 1) {
        throw ConfigError("batch size must be >= 1");
    }
    if (batch_cap_ && *batch_cap_ == 0) {
        throw ConfigError("batches per epoch must be >= 1");
    }
    if (!source.labeled()) {
        throw ContractError("the source dataset must be labeled");
    }
    if (source.size() < batch_size_) {
        throw DataError("source has fewer windows than one batch");
    }
    if (target_count_ == 0) {
        throw DataError("the target dataset has no windows");
    }
    begin_epoch(0);
}

void UniformBatchSampler::begin_epoch(std::uint64_t epoch) {
    rng_ = RandomSource(epoch_seed(seed_, epoch));
    source_order_ = iota_vector(source_->size());
    rng_.shuffle(source_order_);
    target_order_ = iota_vector(target_count_);
    rng_.shuffle(target_order_);
    source_pos_ = 0;
    target_pos_ = 0;
    emitted_ = 0;
}

std::optional<MiniBatch> UniformBatchSampler::next() {
    if (emitted_ >= batches_per_epoch()) {
        return std::nullopt;
    }
    MiniBatch batch;
    batch.num_classes = source_->num_classes;
    for (std::size_t i = 0; i < batch_size_; ++i) {
        const std::size_t idx = source_order_[source_pos_++];
        batch.source_indices.push_back(idx);
        batch.source_labels.push_back((*source_->labels)[idx]);
        if (target_pos_ >= target_order_.size()) {
            target_order_ = iota_vector(target_count_);
            rng_.shuffle(target_order_);
            target_pos_ = 0;
        }
        batch.target_indices.push_back(target_order_[target_pos_++]);
    }
    emitted_ += 1;
    return batch;
}

std::size_t UniformBatchSampler::batches_per_epoch() const {
    const std::size_t full = std::max<std::size_t>(1, source_->size() / batch_size_);
    return batch_cap_ ? std::min(full, *batch_cap_) : full;
}

}  // namespace advhar
