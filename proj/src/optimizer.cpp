#include "advhar/optimizer.hpp"

#include "advhar/error.hpp"

#include <cmath>

namespace advhar {

OptimizerState::OptimizerState(AdamConfig cfg, std::span<const Tensor> params) : config(cfg) {
    for (const Tensor &p : params) {
        first_moment.emplace_back(p.shape());
        second_moment.emplace_back(p.shape());
    }
}

namespace {

void update_one(Tensor &param, const Tensor &grad, Tensor &m, Tensor &v, const AdamConfig &cfg, double correction1,
                double correction2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        param[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

void ensure_moments(std::size_t count, const auto &shape_of, OptimizerState &state) {
    if (state.first_moment.empty() && state.second_moment.empty()) {
        for (std::size_t i = 0; i < count; ++i) {
            state.first_moment.emplace_back(shape_of(i));
            state.second_moment.emplace_back(shape_of(i));
        }
    }
    if (state.first_moment.size() != count || state.second_moment.size() != count) {
        throw ShapeError("optimizer state tracks " + std::to_string(state.first_moment.size()) + " parameters, got " +
                         std::to_string(count));
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (state.first_moment[i].shape() != shape_of(i) || state.second_moment[i].shape() != shape_of(i)) {
            throw ShapeError("optimizer moment " + std::to_string(i) + " does not match parameter shape " +
                             shape_string(shape_of(i)));
        }
    }
}

}  // namespace

void optimizer_step(std::span<Tensor> params, std::span<const Tensor> grads, OptimizerState &state) {
    if (params.size() != grads.size()) {
        throw ShapeError("optimizer_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape() != grads[i].shape()) {
            throw ShapeError("optimizer_step: gradient " + shape_string(grads[i].shape()) + " vs parameter " +
                             shape_string(params[i].shape()));
        }
    }
    ensure_moments(params.size(), [&](std::size_t i) -> const Shape & { return params[i].shape(); }, state);

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.config.beta1, t);
    const double c2 = 1.0 - std::pow(state.config.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        update_one(params[i], grads[i], state.first_moment[i], state.second_moment[i], state.config, c1, c2);
    }
}

void optimizer_step(std::span<Parameter *const> params, OptimizerState &state) {
    for (Parameter *p : params) {
        if (p->grad.shape() != p->value.shape()) {
            throw ShapeError("parameter '" + p->name + "' has no gradient of matching shape");
        }
    }
    ensure_moments(params.size(), [&](std::size_t i) -> const Shape & { return params[i]->value.shape(); }, state);

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.config.beta1, t);
    const double c2 = 1.0 - std::pow(state.config.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        update_one(params[i]->value, params[i]->grad, state.first_moment[i], state.second_moment[i], state.config, c1,
                   c2);
    }
}

}  // namespace advhar
