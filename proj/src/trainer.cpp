#include "advhar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace advhar {

std::string to_string(BatchMode mode) { return mode == BatchMode::micro ? "micro" : "uniform"; }

BatchMode batch_mode_from_string(const std::string &name) {
    if (name == "micro") return BatchMode::micro;
    if (name == "uniform") return BatchMode::uniform;
    throw ConfigError("unknown batching mode '" + name + "' (expected micro or uniform)");
}

void TrainerConfig::validate() const {
    if (!(mu >= 0.0) || !(lambda >= 0.0) || !(mu + lambda > 0.0)) {
        throw ConfigError("mu and lambda must be >= 0 with mu + lambda > 0");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ConfigError("alpha must lie in (0, 1]");
    }
    if (!(beta >= 0.0 && beta < alpha)) {
        throw ConfigError("beta must lie in [0, alpha)");
    }
    if (!(input_noise >= 0.0)) {
        throw ConfigError("input noise amplitude must be >= 0");
    }
    if (!(log_floor > 0.0 && log_floor < 1.0)) {
        throw ConfigError("log floor must lie in (0, 1)");
    }
    if (micro_size && *micro_size == 0) {
        throw ConfigError("micro-batch size must be >= 1");
    }
    if (micro_cap == 0) {
        throw ConfigError("micro-batch cap must be >= 1");
    }
    if (!(plateau_tolerance >= 0.0)) {
        throw ConfigError("plateau tolerance must be >= 0");
    }
    for (const AdamConfig *a : {&generator_adam, &discriminator_adam, &classifier_adam}) {
        if (!(a->learning_rate > 0.0) || !(a->beta1 >= 0.0 && a->beta1 < 1.0) ||
            !(a->beta2 >= 0.0 && a->beta2 < 1.0) || !(a->epsilon > 0.0)) {
            throw ConfigError("optimizer settings out of range");
        }
    }
}

TrainState::TrainState(const TrainerConfig &cfg) : rng(mix_seed(cfg.seed, 4)), noise_amplitude(cfg.input_noise) {
    generator_opt.config = cfg.generator_adam;
    discriminator_opt.config = cfg.discriminator_adam;
    classifier_opt.config = cfg.classifier_adam;
}

namespace {

Tensor jitter(RandomSource &rng, std::size_t n, std::size_t d, double amplitude) {
    if (amplitude <= 0.0) {
        return Tensor(Shape{n, d});
    }
    Tensor t = rng.draw(Distribution::uniform, Shape{n, d});
    for (double &v : t.data()) {
        v *= amplitude;
    }
    return t;
}

void check_inputs(const StepInputs &in) {
    if (in.source.rank() != 2 || in.source.dim(0) == 0) {
        throw ContractError("empty or malformed source batch");
    }
    if (in.labels.size() != in.source.dim(0)) {
        throw ContractError("one label per source window required");
    }
}

double mean_squared_to(const Tensor &x, double target) {
    if (x.empty()) {
        throw ContractError("empty score tensor");
    }
    double s = 0.0;
    for (double v : x.values()) {
        s += (target - v) * (target - v);
    }
    return s / static_cast<double>(x.size());
}

double mean_nll(const Tensor &probs, const std::vector<int> &labels, double floor) {
    if (probs.rank() != 2 || probs.dim(0) != labels.size() || labels.empty()) {
        throw ShapeError("probabilities " + shape_string(probs.shape()) + " do not match " +
                         std::to_string(labels.size()) + " labels");
    }
    const std::size_t c = probs.dim(1);
    double s = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        s -= std::log(std::max(probs[i * c + static_cast<std::size_t>(labels[i])], floor));
    }
    return s / static_cast<double>(labels.size());
}

void zero_grads(const std::vector<Parameter *> &params) {
    for (Parameter *p : params) {
        p->zero_grad();
    }
}

/// Builds the loss on a fresh tape, backpropagates and applies one optimizer step.
template <typename LossFn>
double update(const char *component, std::vector<Parameter *> params, OptimizerState &opt, LossFn &&loss_fn) {
    zero_grads(params);
    Tape tape;
    Var loss = loss_fn(tape);
    const double value = loss.value().item();
    if (!std::isfinite(value)) {
        throw DivergenceError(component, std::string(component) + " loss is not finite");
    }
    tape.backward(loss);
    optimizer_step(std::span<Parameter *const>(params), opt);
    return value;
}

double noise_at_epoch(const TrainerConfig &cfg, std::uint64_t epoch) {
    if (!cfg.anneal_noise || cfg.epochs == 0) {
        return cfg.input_noise;
    }
    const double frac = static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
    return cfg.input_noise * std::max(0.0, 1.0 - frac);
}

}  // namespace

StepInputs draw_step_inputs(const Tensor &source, std::vector<int> labels, const Tensor &target,
                            std::size_t noise_dim, double noise_amplitude, RandomSource &rng) {
    StepInputs in;
    const std::size_t n = source.dim(0);
    const std::size_t d = source.dim(1);
    in.source = source;
    in.labels = std::move(labels);
    in.target = target;
    if (noise_dim > 0) {
        in.noise = rng.draw(Distribution::standard_normal, Shape{n, noise_dim});
    }
    in.real_jitter = jitter(rng, target.dim(0), d, noise_amplitude);
    in.fake_jitter = jitter(rng, n, d, noise_amplitude);
    return in;
}

double discriminator_loss_value(const Tensor &real_scores, const Tensor &fake_scores, double alpha) {
    return mean_squared_to(real_scores, alpha) + mean_squared_to(fake_scores, -alpha);
}

double classifier_loss_value(const Tensor &source_probs, const Tensor &generated_probs,
                             const std::vector<int> &labels, double log_floor) {
    return mean_nll(source_probs, labels, log_floor) + mean_nll(generated_probs, labels, log_floor);
}

double generator_loss_value(const Tensor &fake_scores, const Tensor &generated_probs, const std::vector<int> &labels,
                            double mu, double lambda, double alpha, double log_floor) {
    return mu * mean_squared_to(fake_scores, alpha) + lambda * mean_nll(generated_probs, labels, log_floor);
}

Var discriminator_loss(Tape &tape, Discriminator &d, const Generator &g, const StepInputs &in,
                       const TrainerConfig &cfg) {
    check_inputs(in);
    Var fake = g.forward_frozen(tape, tape.constant(in.source), in.noise);
    Var fake_in = add(fake, tape.constant(in.fake_jitter));
    Var real_in = tape.constant(in.target);
    real_in = add(real_in, tape.constant(in.real_jitter));
    Var real_scores = d.forward(tape, real_in, true);
    Var fake_scores = d.forward(tape, fake_in, true);
    return add(squared_error_to(real_scores, cfg.alpha), squared_error_to(fake_scores, -cfg.alpha));
}

Var classifier_loss(Tape &tape, Classifier &c, const Generator &g, const StepInputs &in, const TrainerConfig &cfg) {
    check_inputs(in);
    Var x = tape.constant(in.source);
    Var fake = g.forward_frozen(tape, x, in.noise);
    Var p_source = c.forward(tape, x, true);
    Var p_fake = c.forward(tape, fake, true);
    return add(nll_loss(p_source, in.labels, cfg.log_floor), nll_loss(p_fake, in.labels, cfg.log_floor));
}

Var generator_loss(Tape &tape, Generator &g, const Discriminator &d, const Classifier &c, const StepInputs &in,
                   const TrainerConfig &cfg) {
    check_inputs(in);
    Var fake = g.forward(tape, tape.constant(in.source), in.noise, true);
    Var scores = d.forward_frozen(tape, add(fake, tape.constant(in.fake_jitter)));
    Var probs = c.forward_frozen(tape, fake);
    return add(scale(squared_error_to(scores, cfg.alpha), cfg.mu),
               scale(nll_loss(probs, in.labels, cfg.log_floor), cfg.lambda));
}

double optimal_discriminator_value(double p_target, double p_generated, double alpha, double beta) {
    if (p_target < 0.0 || p_generated < 0.0) {
        throw ContractError("densities must be non-negative");
    }
    if (!(p_target + p_generated > 0.0)) {
        throw ContractError("optimal discriminator undefined where both densities vanish");
    }
    return (alpha * p_target + beta * p_generated) / (p_target + p_generated);
}

LossRecord train_step(ModelBundle &bundle, const DomainDataset &source, const DomainDataset &target,
                      const MiniBatch &batch, const TrainerConfig &cfg, TrainState &state) {
    if (batch.size() == 0) {
        throw ContractError("empty mini-batch");
    }
    const Tensor xs = source.batch(batch.source_indices);
    const Tensor xt = target.batch(batch.target_indices);
    const std::size_t noise_dim = bundle.generator.spec().noise_dim;
    auto fresh = [&] {
        return draw_step_inputs(xs, batch.source_labels, xt, noise_dim, state.noise_amplitude, state.rng);
    };

    LossRecord rec;
    rec.epoch = state.epoch;
    rec.step = state.step;

    const StepInputs d_in = fresh();
    rec.j_d = update("discriminator", bundle.discriminator.parameters(), state.discriminator_opt,
                     [&](Tape &t) { return discriminator_loss(t, bundle.discriminator, bundle.generator, d_in, cfg); });
    const StepInputs c_in = fresh();
    rec.j_c = update("classifier", bundle.classifier.parameters(), state.classifier_opt,
                     [&](Tape &t) { return classifier_loss(t, bundle.classifier, bundle.generator, c_in, cfg); });
    const StepInputs g_in = fresh();
    rec.j_g = update("generator", bundle.generator.parameters(), state.generator_opt, [&](Tape &t) {
        return generator_loss(t, bundle.generator, bundle.discriminator, bundle.classifier, g_in, cfg);
    });

    state.history.push_back(rec);
    state.step += 1;
    return rec;
}

TrainingDiverged::TrainingDiverged(const DivergenceError &cause, ModelBundle last_good, std::uint64_t epoch)
    : DivergenceError(cause.component(),
                      std::string(cause.what()) + " during epoch " + std::to_string(epoch + 1)),
      last_good_(std::move(last_good)),
      epoch_(epoch) {}

std::unique_ptr<BatchSampler> make_sampler(const DomainDataset &source, std::size_t target_count,
                                           const TrainerConfig &cfg) {
    const std::size_t m = cfg.micro_size ? *cfg.micro_size : compute_micro_size(source, cfg.micro_cap);
    const std::uint64_t seed = mix_seed(cfg.seed, 3);
    if (cfg.batching == BatchMode::micro) {
        return std::make_unique<MicroBatchSampler>(source, target_count, m, seed, cfg.allow_replacement);
    }
    std::optional<std::size_t> cap;
    if (cfg.uniform_matched_steps) {
        const auto counts = source.class_counts();
        cap = std::max<std::size_t>(1, *std::min_element(counts.begin(), counts.end()) / m);
    }
    return std::make_unique<UniformBatchSampler>(source, target_count, m * source.num_classes, seed, cap);
}

bool plateau_reached(const std::vector<double> &per_epoch, std::size_t patience, double tolerance) {
    if (patience == 0 || per_epoch.size() < 2 * patience) {
        return false;
    }
    const auto end = per_epoch.end();
    const double recent = std::accumulate(end - static_cast<std::ptrdiff_t>(patience), end, 0.0) /
                          static_cast<double>(patience);
    const double before = std::accumulate(end - static_cast<std::ptrdiff_t>(2 * patience),
                                          end - static_cast<std::ptrdiff_t>(patience), 0.0) /
                          static_cast<double>(patience);
    return before - recent < tolerance;
}

TrainResult train(const DomainDataset &source, const DomainDataset &target, ModelBundle initial,
                  const TrainerConfig &cfg, const EpochCallback &on_epoch, std::unique_ptr<BatchSampler> sampler) {
    cfg.validate();
    source.validate();
    target.validate();
    if (!source.labeled()) {
        throw ContractError("the source dataset must be labeled");
    }
    if (target.labeled()) {
        throw ContractError("the target dataset must be unlabeled for adaptation");
    }
    if (source.dim != target.dim) {
        throw ShapeError("source windows have dimension " + std::to_string(source.dim) + " but target windows " +
                         std::to_string(target.dim));
    }
    if (initial.generator.spec().input_dim != source.dim || initial.classifier.spec().num_classes != source.num_classes) {
        throw ConfigError("model dimensions do not match the data");
    }

    TrainResult result;
    result.bundle = std::move(initial);
    result.state = TrainState(cfg);
    if (cfg.epochs == 0) {
        return result;
    }
    if (!sampler) {
        sampler = make_sampler(source, target.size(), cfg);
    }
    std::vector<double> g_means;
    for (std::uint64_t e = 0; e < cfg.epochs; ++e) {
        result.state.epoch = e;
        result.state.noise_amplitude = noise_at_epoch(cfg, e);
        sampler->begin_epoch(e);
        ModelBundle snapshot = result.bundle;
        EpochSummary summary;
        summary.epoch = e + 1;
        try {
            while (auto batch = sampler->next()) {
                const LossRecord rec = train_step(result.bundle, source, target, *batch, cfg, result.state);
                summary.steps += 1;
                summary.j_d += rec.j_d;
                summary.j_c += rec.j_c;
                summary.j_g += rec.j_g;
            }
        } catch (const DivergenceError &err) {
            throw TrainingDiverged(err, std::move(snapshot), e);
        }
        const double steps = static_cast<double>(std::max<std::size_t>(1, summary.steps));
        summary.j_d /= steps;
        summary.j_c /= steps;
        summary.j_g /= steps;
        result.epochs.push_back(summary);
        if (on_epoch) {
            on_epoch(summary, result.bundle);
        }
        g_means.push_back(summary.j_g);
        if (plateau_reached(g_means, cfg.patience, cfg.plateau_tolerance)) {
            result.plateaued = true;
            break;
        }
    }
    return result;
}

Classifier train_supervised(const DomainDataset &data, Classifier initial, const TrainerConfig &cfg) {
    cfg.validate();
    data.validate();
    if (!data.labeled()) {
        throw ContractError("supervised training needs labels");
    }
    Classifier c = std::move(initial);
    OptimizerState opt;
    opt.config = cfg.classifier_adam;
    auto sampler = make_sampler(data, data.size(), cfg);
    for (std::uint64_t e = 0; e < cfg.epochs; ++e) {
        sampler->begin_epoch(e);
        while (auto batch = sampler->next()) {
            const Tensor x = data.batch(batch->source_indices);
            update("classifier", c.parameters(), opt, [&](Tape &t) {
                return nll_loss(c.forward(t, t.constant(x), true), batch->source_labels, cfg.log_floor);
            });
        }
    }
    return c;
}

namespace {

double sq_dist(const double *a, const double *b, std::size_t d) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

double mean_kernel(const Tensor &x, const Tensor &y, double gamma) {
    const std::size_t d = x.dim(1);
    const double *px = x.values().data();
    const double *py = y.values().data();
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(0); ++i) {
        for (std::size_t j = 0; j < y.dim(0); ++j) {
            s += std::exp(-gamma * sq_dist(px + i * d, py + j * d, d));
        }
    }
    return s / static_cast<double>(x.dim(0) * y.dim(0));
}

}  // namespace

double median_distance(const Tensor &x, std::size_t max_points) {
    if (x.rank() != 2 || x.dim(0) < 2) {
        throw ShapeError("median distance needs at least two rows");
    }
    const std::size_t n = std::min(x.dim(0), max_points);
    const std::size_t d = x.dim(1);
    const double *p = x.values().data();
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist.push_back(std::sqrt(sq_dist(p + i * d, p + j * d, d)));
        }
    }
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    return *mid;
}

double mean_discrepancy(const Tensor &x, const Tensor &y, double bandwidth) {
    if (x.rank() != 2 || y.rank() != 2 || x.dim(1) != y.dim(1) || x.dim(0) == 0 || y.dim(0) == 0) {
        throw ShapeError("mean discrepancy needs two non-empty [N x d] sets of equal d");
    }
    if (!(bandwidth > 0.0)) {
        throw ContractError("kernel bandwidth must be positive");
    }
    const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);
    return mean_kernel(x, x, gamma) + mean_kernel(y, y, gamma) - 2.0 * mean_kernel(x, y, gamma);
}

}  // namespace advhar
