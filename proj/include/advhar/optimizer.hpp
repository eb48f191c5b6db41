#pragma once

#include "advhar/tape.hpp"
#include "advhar/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace advhar {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment state for one group of parameters.
struct OptimizerState {
    AdamConfig config;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
    std::uint64_t step_count = 0;

    OptimizerState() = default;
    OptimizerState(AdamConfig cfg, std::span<const Tensor> params);
};

/// One bias-corrected Adam update of params from grads; moments are created lazily
/// on the first call. Throws ShapeError on any misalignment.
void optimizer_step(std::span<Tensor> params, std::span<const Tensor> grads, OptimizerState &state);

/// Same update applied to Parameter objects using their accumulated grads.
void optimizer_step(std::span<Parameter *const> params, OptimizerState &state);

}  // namespace advhar
