#include "support.hpp"

#include "advhar/error.hpp"
#include "advhar/log.hpp"
#include "advhar/sampler.hpp"

#include <doctest.h>

#include <set>

using namespace advhar;
using advhar::testing::labeled_dataset;

namespace {

std::vector<MiniBatch> drain(EpochPlan &plan) {
    std::vector<MiniBatch> out;
    while (auto b = plan.next()) out.push_back(*b);
    return out;
}

}  // namespace

TEST_CASE("micro size is the smallest class count, capped") {
    CHECK(compute_micro_size(labeled_dataset({120, 45, 300}, 1, 1)) == 45);
    CHECK(compute_micro_size(labeled_dataset({50, 50, 50}, 1, 1)) == 50);
    CHECK(compute_micro_size(labeled_dataset({120, 45, 300}, 1, 1), 32) == 32);
    CHECK(compute_micro_size(labeled_dataset({120, 45, 300}, 1, 1), 64) == 45);
}

TEST_CASE("an empty class is named in the error") {
    try {
        compute_micro_size(labeled_dataset({4, 0, 5}, 1, 1));
        FAIL("empty class accepted");
    } catch (const DataError &e) {
        CHECK(std::string(e.what()).find("class1") != std::string::npos);
    }
    CHECK_THROWS_AS(compute_micro_size(labeled_dataset({4, 5}, 1, 1).without_labels()), ContractError);
}

TEST_CASE("batches per epoch is the floor of the smallest class over m") {
    const auto even = labeled_dataset({6, 6}, 2, 1);
    auto plan = EpochPlan::build(even, 12, 2, 9);
    CHECK(plan.batches_per_epoch() == 3);
    CHECK(drain(plan).size() == 3);
    CHECK(plan.exhausted());
    CHECK_FALSE(plan.next().has_value());

    CHECK(EpochPlan::build(labeled_dataset({5, 7}, 2, 1), 12, 2, 9).batches_per_epoch() == 2);
}

TEST_CASE("same seed gives the same plan") {
    const auto ds = labeled_dataset({10, 14, 9}, 2, 2);
    auto a = EpochPlan::build(ds, 30, 3, 77);
    auto b = EpochPlan::build(ds, 30, 3, 77);
    CHECK(a.class_queues() == b.class_queues());
    CHECK(a.target_queue() == b.target_queue());
    const auto ba = drain(a);
    const auto bb = drain(b);
    REQUIRE(ba.size() == bb.size());
    for (std::size_t i = 0; i < ba.size(); ++i) {
        CHECK(ba[i].source_indices == bb[i].source_indices);
        CHECK(ba[i].target_indices == bb[i].target_indices);
    }
}

TEST_CASE("a micro-mini-batch holds m source windows of every class and m*C target windows") {
    const auto ds = labeled_dataset({20, 13, 40}, 2, 3);
    auto plan = EpochPlan::build(ds, 50, 4, 5);
    const auto batch = *plan.next();
    CHECK(batch.size() == 12);
    CHECK(batch.target_indices.size() == 12);
    CHECK(batch.micro_size == 4);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(batch.source_block(j).size() == 4);
        CHECK(batch.target_block(j).size() == 4);
        for (std::size_t idx : batch.source_block(j)) CHECK(ds.labels->at(idx) == static_cast<int>(j));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
        CHECK(batch.source_labels[i] == ds.labels->at(batch.source_indices[i]));
    }
    CHECK_THROWS_AS(batch.source_block(3), ContractError);
}

TEST_CASE("queues hold each class index exactly once") {
    const auto ds = labeled_dataset({8, 11, 5}, 1, 4);
    const auto plan = EpochPlan::build(ds, 20, 2, 6);
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<std::size_t> queue = plan.class_queues()[c];
        std::sort(queue.begin(), queue.end());
        CHECK(queue == ds.indices_of_class(static_cast<int>(c)));
    }
}

TEST_CASE("within an epoch no source index repeats") {
    const auto ds = labeled_dataset({30, 17, 44, 25}, 1, 5);
    auto plan = EpochPlan::build(ds, 200, 4, 8);
    std::set<std::size_t> seen;
    std::size_t count = 0;
    for (const auto &b : drain(plan)) {
        for (std::size_t i : b.source_indices) {
            seen.insert(i);
            ++count;
        }
    }
    CHECK(seen.size() == count);
    CHECK(count == 4 * 4 * 4);
}

TEST_CASE("target indices do not repeat until the target queue refills") {
    const auto ds = labeled_dataset({12, 12}, 1, 6);
    // 6 batches of 4 target windows against a pool of 10
    auto plan = EpochPlan::build(ds, 10, 2, 3);
    std::vector<std::size_t> stream;
    for (const auto &b : drain(plan)) stream.insert(stream.end(), b.target_indices.begin(), b.target_indices.end());
    REQUIRE(stream.size() == 24);
    for (std::size_t start = 0; start + 10 <= stream.size(); start += 10) {
        std::set<std::size_t> pass(stream.begin() + static_cast<long>(start), stream.begin() + static_cast<long>(start + 10));
        CHECK(pass.size() == 10);
    }
    for (std::size_t t : stream) CHECK(t < 10);
}

TEST_CASE("epochs reshuffle") {
    const auto ds = labeled_dataset({40, 40}, 1, 7);
    const auto e0 = EpochPlan::build(ds, 80, 4, 11, 0);
    const auto e1 = EpochPlan::build(ds, 80, 4, 11, 1);
    CHECK(e0.class_queues() != e1.class_queues());
    CHECK(epoch_seed(11, 0) != epoch_seed(11, 1));

    MicroBatchSampler sampler(ds, 80, 4, 11);
    sampler.begin_epoch(0);
    const auto first = *sampler.next();
    sampler.begin_epoch(1);
    const auto second = *sampler.next();
    CHECK(first.source_indices != second.source_indices);
    sampler.begin_epoch(0);
    CHECK(sampler.next()->source_indices == first.source_indices);
}

TEST_CASE("undersized classes: error by default, refill with replacement") {
    const auto ds = labeled_dataset({10, 3}, 1, 8);
    CHECK_THROWS_AS(EpochPlan::build(ds, 10, 4, 1), DataError);

    std::vector<std::string> warnings;
    const auto previous = set_warning_sink([&](const std::string &m) { warnings.push_back(m); });
    auto plan = EpochPlan::build(ds, 10, 4, 1, 0, true);
    set_warning_sink(previous);
    CHECK(warnings.size() == 1);
    CHECK(plan.batches_per_epoch() >= 1);
    for (const auto &b : drain(plan)) {
        CHECK(b.source_block(1).size() == 4);
        for (std::size_t idx : b.source_block(1)) CHECK(ds.labels->at(idx) == 1);
    }
}

TEST_CASE("plan preconditions") {
    const auto ds = labeled_dataset({5, 5}, 1, 9);
    CHECK_THROWS_AS(EpochPlan::build(ds, 10, 0, 1), ConfigError);
    CHECK_THROWS_AS(EpochPlan::build(ds, 0, 2, 1), DataError);
    CHECK_THROWS_AS(EpochPlan::build(ds.without_labels(), 10, 2, 1), ContractError);
}

TEST_CASE("uniform batches: plain shuffled batches of a fixed size") {
    const auto ds = labeled_dataset({50, 50, 5}, 1, 10);
    UniformBatchSampler full(ds, 60, 12, 3);
    full.begin_epoch(0);
    CHECK(full.batches_per_epoch() == 105 / 12);
    std::set<std::size_t> seen;
    std::size_t batches = 0;
    while (auto b = full.next()) {
        CHECK(b->size() == 12);
        CHECK(b->target_indices.size() == 12);
        CHECK(b->micro_size == 0);
        seen.insert(b->source_indices.begin(), b->source_indices.end());
        ++batches;
    }
    CHECK(batches == 8);
    CHECK(seen.size() == 96);

    UniformBatchSampler capped(ds, 60, 12, 3, 2);
    capped.begin_epoch(0);
    CHECK(capped.batches_per_epoch() == 2);
    CHECK(capped.next().has_value());
    CHECK(capped.next().has_value());
    CHECK_FALSE(capped.next().has_value());
    CHECK_THROWS_AS(UniformBatchSampler(ds, 60, 200, 3).begin_epoch(0), DataError);
}

TEST_CASE("random class profiles keep both invariants") {
    RandomSource rng(2024);
    std::size_t batches = 0;
    while (batches < 2000) {
        const std::size_t classes = 2 + rng.below(6);
        std::vector<std::size_t> counts;
        for (std::size_t c = 0; c < classes; ++c) counts.push_back(1 + rng.below(40));
        const auto ds = labeled_dataset(counts, 1, rng.next_u64());
        const std::size_t m = compute_micro_size(ds, 1 + rng.below(8));
        MicroBatchSampler sampler(ds, 1 + rng.below(100), m, rng.next_u64());
        for (std::uint64_t epoch = 0; epoch < 3; ++epoch) {
            sampler.begin_epoch(epoch);
            std::set<std::size_t> seen;
            while (auto b = sampler.next()) {
                ++batches;
                for (std::size_t j = 0; j < classes; ++j) {
                    const auto block = b->source_block(j);
                    REQUIRE(block.size() == m);
                    for (std::size_t idx : block) {
                        REQUIRE(ds.labels->at(idx) == static_cast<int>(j));
                        REQUIRE(seen.insert(idx).second);
                    }
                }
            }
        }
    }
}
