#pragma once

#include "support.hpp"

#include "advhar/ops.hpp"

#include <functional>

namespace advhar::testing {

/// sum(w * x) with fixed random weights, so every output element carries a distinct upstream gradient.
inline Var weighted_sum(Tape &tape, const Var &x, RandomSource &rng) {
    Var w = tape.constant(random_tensor(rng, x.shape()));
    return sum(mul(x, w));
}

/// Uniform magnitudes in [0.05, 1] with random sign, keeping kinks out of reach of the FD step.
inline Tensor away_from_zero(RandomSource &rng, Shape shape) {
    Tensor t(std::move(shape));
    for (auto &v : t.data()) {
        const double mag = 0.05 + 0.95 * rng.uniform();
        v = rng.uniform() < 0.5 ? -mag : mag;
    }
    return t;
}

struct OpCase {
    const char *name;
    std::function<std::vector<Tensor>(RandomSource &)> inputs;
    std::function<Var(Tape &, const std::vector<Var> &, RandomSource &)> loss;
};

/// One entry per differentiable operation, each reduced to a scalar loss.
inline std::vector<OpCase> op_cases() {
    return {
        {"conv1d valid",
         [](RandomSource &r) {
             return std::vector<Tensor>{random_tensor(r, {2, 7}), random_tensor(r, {3, 2, 3}), random_tensor(r, {3})};
         },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             return weighted_sum(t, conv1d(v[0], v[1], v[2], 1, Padding::valid), r);
         }},
        {"conv1d same batched stride 2",
         [](RandomSource &r) {
             return std::vector<Tensor>{random_tensor(r, {2, 2, 6}), random_tensor(r, {2, 2, 3}),
                                        random_tensor(r, {2})};
         },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             return weighted_sum(t, conv1d(v[0], v[1], v[2], 2, Padding::same), r);
         }},
        {"positionwise conv1d",
         [](RandomSource &r) {
             return std::vector<Tensor>{random_tensor(r, {2, 3, 5}), random_tensor(r, {5, 3, 3}),
                                        random_tensor(r, {5})};
         },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             return weighted_sum(t, positionwise_conv1d(v[0], v[1], v[2]), r);
         }},
        {"dense",
         [](RandomSource &r) {
             return std::vector<Tensor>{random_tensor(r, {3, 4}), random_tensor(r, {2, 4}), random_tensor(r, {2})};
         },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) { return weighted_sum(t, dense(v[0], v[1], v[2]), r); }},
        {"relu", [](RandomSource &r) { return std::vector<Tensor>{away_from_zero(r, {2, 5})}; },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             return weighted_sum(t, activation(v[0], Activation::relu()), r);
         }},
        {"leaky relu", [](RandomSource &r) { return std::vector<Tensor>{away_from_zero(r, {2, 5})}; },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             return weighted_sum(t, activation(v[0], Activation::leaky_relu(0.2)), r);
         }},
        {"tanh", [](RandomSource &r) { return std::vector<Tensor>{random_tensor(r, {2, 5}, -2, 2)}; },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             return weighted_sum(t, activation(v[0], Activation::tanh()), r);
         }},
        {"softmax", [](RandomSource &r) { return std::vector<Tensor>{random_tensor(r, {3, 4}, -2, 2)}; },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             return weighted_sum(t, activation(v[0], Activation::softmax()), r);
         }},
        {"reshape and concat",
         [](RandomSource &r) {
             return std::vector<Tensor>{random_tensor(r, {2, 6}), random_tensor(r, {2, 2, 3})};
         },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             return weighted_sum(t, concat_channels(reshape(v[0], {2, 2, 3}), v[1]), r);
         }},
        {"elementwise arithmetic",
         [](RandomSource &r) { return std::vector<Tensor>{random_tensor(r, {4}), random_tensor(r, {4})}; },
         [](Tape &t, const std::vector<Var> &v, RandomSource &r) {
             Var e = add(mul(v[0], v[1]), sub(scale(v[0], 3.0), add_scalar(square(v[1]), 0.5)));
             return add(weighted_sum(t, e, r), mean(v[0]));
         }},
        {"squared error to target", [](RandomSource &r) { return std::vector<Tensor>{random_tensor(r, {5, 1})}; },
         [](Tape &, const std::vector<Var> &v, RandomSource &) { return squared_error_to(v[0], -0.9); }},
        {"nll of softmax",
         [](RandomSource &r) { return std::vector<Tensor>{random_tensor(r, {4, 3}, -2, 2)}; },
         [](Tape &, const std::vector<Var> &v, RandomSource &) {
             return nll_loss(activation(v[0], Activation::softmax()), {0, 2, 1, 2});
         }},
    };
}

}  // namespace advhar::testing
