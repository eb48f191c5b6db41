#include "advhar/networks.hpp"

#include "advhar/error.hpp"

#include <algorithm>
#include <cmath>

namespace advhar {

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::positionwise_conv1d: return "positionwise_conv1d";
        case LayerKind::dense: return "dense";
    }
    return "conv1d";
}

void LayerStack::add_conv(std::string name, std::size_t in_channels, std::size_t filters, std::size_t length,
                          Activation act) {
    Layer layer;
    layer.info = {LayerKind::conv1d, in_channels, filters, kConvKernel, kConvStride, Padding::same, act, length};
    layer.weight = Parameter(name + ".kernel", Tensor(Shape{filters, in_channels, kConvKernel}));
    layer.bias = Parameter(name + ".bias", Tensor(Shape{filters}));
    layers_.push_back(std::move(layer));
}

void LayerStack::add_positionwise(std::string name, std::size_t in_channels, std::size_t length, Activation act) {
    Layer layer;
    layer.info = {LayerKind::positionwise_conv1d, in_channels, length, kConvKernel, kConvStride, Padding::same, act,
                  length};
    layer.weight = Parameter(name + ".kernel", Tensor(Shape{length, in_channels, kConvKernel}));
    layer.bias = Parameter(name + ".bias", Tensor(Shape{length}));
    layers_.push_back(std::move(layer));
}

void LayerStack::add_dense(std::string name, std::size_t in_features, std::size_t units, Activation act) {
    Layer layer;
    layer.info = {LayerKind::dense, in_features, units, 0, 0, Padding::valid, act, 1};
    layer.weight = Parameter(name + ".weight", Tensor(Shape{units, in_features}));
    layer.bias = Parameter(name + ".bias", Tensor(Shape{units}));
    layers_.push_back(std::move(layer));
}

void LayerStack::initialize(RandomSource &rng) {
    for (Layer &layer : layers_) {
        const LayerInfo &info = layer.info;
        const double receptive = info.kind == LayerKind::dense ? 1.0 : static_cast<double>(info.kernel);
        const double fan_in = static_cast<double>(info.in_channels) * receptive;
        const double fan_out = static_cast<double>(info.kind == LayerKind::positionwise_conv1d ? 1 : info.filters) *
                               receptive;
        const bool rectifier =
            info.activation.kind == ActivationKind::relu || info.activation.kind == ActivationKind::leaky_relu;
        const double limit = rectifier ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
        for (double &w : layer.weight.value.data()) {
            w = (2.0 * rng.uniform() - 1.0) * limit;
        }
        layer.bias.value.fill(0.0);
        layer.weight.zero_grad();
        layer.bias.zero_grad();
    }
}

template <typename Bind>
Var LayerStack::run(Tape &tape, Var input, Bind &&bind) const {
    Var h = input;
    for (const Layer &layer : layers_) {
        const LayerInfo &info = layer.info;
        Var w = bind(tape, layer.weight);
        Var b = bind(tape, layer.bias);
        switch (info.kind) {
            case LayerKind::conv1d: h = conv1d(h, w, b, info.stride, info.padding); break;
            case LayerKind::positionwise_conv1d: h = positionwise_conv1d(h, w, b); break;
            case LayerKind::dense: {
                const std::size_t n = h.shape().front();
                const std::size_t features = h.value().size() / n;
                if (h.shape().size() != 2) {
                    h = reshape(h, Shape{n, features});
                }
                h = dense(h, w, b);
                break;
            }
        }
        if (info.activation.kind != ActivationKind::identity) {
            h = activation(h, info.activation);
        }
    }
    return h;
}

Var LayerStack::forward(Tape &tape, Var input, bool trainable) {
    // Parameters are bound through a const path either way; trainable binding needs
    // the mutable Parameter so backward() can deposit gradients.
    if (!trainable) {
        return forward_frozen(tape, input);
    }
    std::size_t next = 0;
    std::vector<Parameter *> params = parameters();
    return run(tape, input, [&](Tape &t, const Parameter &) { return t.parameter(*params[next++], true); });
}

Var LayerStack::forward_frozen(Tape &tape, Var input) const {
    return run(tape, input, [](Tape &t, const Parameter &p) { return t.constant(p.value); });
}

std::vector<LayerInfo> LayerStack::describe() const {
    std::vector<LayerInfo> out;
    out.reserve(layers_.size());
    for (const Layer &layer : layers_) {
        out.push_back(layer.info);
    }
    return out;
}

std::vector<Parameter *> LayerStack::parameters() {
    std::vector<Parameter *> out;
    for (Layer &layer : layers_) {
        out.push_back(&layer.weight);
        out.push_back(&layer.bias);
    }
    return out;
}

std::vector<const Parameter *> LayerStack::parameters() const {
    std::vector<const Parameter *> out;
    for (const Layer &layer : layers_) {
        out.push_back(&layer.weight);
        out.push_back(&layer.bias);
    }
    return out;
}

void GeneratorSpec::validate() const {
    if (input_dim < 1) throw ConfigError("generator input_dim must be >= 1");
    if (blocks < 1) throw ConfigError("generator needs cb >= 1 convolutional blocks");
    if (filters < 1) throw ConfigError("generator needs gf >= 1 filters");
}

void DiscriminatorSpec::validate() const {
    if (input_dim < 1) throw ConfigError("discriminator input_dim must be >= 1");
    if (base_filters < 1) throw ConfigError("discriminator needs df >= 1");
}

void ClassifierSpec::validate() const {
    if (input_dim < 1) throw ConfigError("classifier input_dim must be >= 1");
    if (base_filters < 4) throw ConfigError("classifier needs cf >= 4 so that cf/4 >= 1");
    if (num_classes < 2) throw ConfigError("classifier needs at least 2 classes");
}

namespace {

Tensor tile_noise(const Tensor &z, std::size_t batch, std::size_t noise_dim, std::size_t length) {
    if (z.size() != batch * noise_dim) {
        throw ShapeError("generator expects noise of shape [" + std::to_string(batch) + " x " +
                         std::to_string(noise_dim) + "], got " + shape_string(z.shape()));
    }
    Tensor channel(Shape{batch, 1, length});
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t i = 0; i < length; ++i) {
            channel[n * length + i] = z[n * noise_dim + i % noise_dim];
        }
    }
    return channel;
}

void check_window_batch(const Var &x, std::size_t dim, const char *who) {
    const Shape &s = x.shape();
    if (s.size() != 2 || s[1] != dim) {
        throw ShapeError(std::string(who) + " expects [N x " + std::to_string(dim) + "] input, got " +
                         shape_string(s));
    }
}

Tensor as_batch(const Tensor &x, std::size_t dim, const char *who) {
    if (x.rank() == 1 && x.size() == dim) {
        return x.reshaped(Shape{1, dim});
    }
    if (x.rank() == 2 && x.dim(1) == dim) {
        return x;
    }
    throw ShapeError(std::string(who) + " expects [" + std::to_string(dim) + "] or [N x " + std::to_string(dim) +
                     "] input, got " + shape_string(x.shape()));
}

}  // namespace

Generator::Generator(GeneratorSpec spec) : spec_(spec) {
    spec_.validate();
    const std::size_t d = spec_.input_dim;
    std::size_t channels = spec_.noise_dim > 0 ? 2 : 1;
    for (std::size_t b = 0; b < spec_.blocks; ++b) {
        for (std::size_t l = 0; l < 2; ++l) {
            stack_.add_conv("generator.block" + std::to_string(b) + ".conv" + std::to_string(l), channels,
                            spec_.filters, d, Activation::relu());
            channels = spec_.filters;
        }
    }
    stack_.add_positionwise("generator.output", channels, d, Activation::identity());
    RandomSource rng(spec_.seed);
    stack_.initialize(rng);
}

template <typename Run>
Var Generator::assemble(Tape &tape, const Var &x, const Tensor &z, Run &&run) const {
    check_window_batch(x, spec_.input_dim, "generator");
    const std::size_t n = x.shape()[0];
    const std::size_t d = spec_.input_dim;
    Var h = reshape(x, Shape{n, 1, d});
    if (spec_.noise_dim > 0) {
        h = concat_channels(h, tape.constant(tile_noise(z, n, spec_.noise_dim, d)));
    }
    Var out = run(h);
    if (spec_.input_skip) {
        out = add(out, x);
    }
    return out;
}

Var Generator::forward(Tape &tape, const Var &x, const Tensor &z, bool trainable) {
    return assemble(tape, x, z, [&](const Var &h) { return stack_.forward(tape, h, trainable); });
}

Var Generator::forward_frozen(Tape &tape, const Var &x, const Tensor &z) const {
    return assemble(tape, x, z, [&](const Var &h) { return stack_.forward_frozen(tape, h); });
}

Tensor Generator::generate(const Tensor &x, const Tensor &z) const {
    const bool single = x.rank() == 1;
    Tape tape;
    Var in = tape.constant(as_batch(x, spec_.input_dim, "generator"));
    Tensor out = forward_frozen(tape, in, z).value();
    return single ? out.reshaped(Shape{spec_.input_dim}) : out;
}

Discriminator::Discriminator(DiscriminatorSpec spec) : spec_(spec) {
    spec_.validate();
    const std::size_t d = spec_.input_dim;
    const std::size_t multiples[] = {2, 4, 8, 4, 2};
    std::size_t channels = 1;
    for (std::size_t i = 0; i < 5; ++i) {
        const std::size_t filters = multiples[i] * spec_.base_filters;
        stack_.add_conv("discriminator.conv" + std::to_string(i), channels, filters, d,
                        Activation::leaky_relu(spec_.leaky_slope));
        channels = filters;
    }
    stack_.add_dense("discriminator.output", channels * d, 1, Activation::tanh());
    RandomSource rng(spec_.seed);
    stack_.initialize(rng);
}

Var Discriminator::forward(Tape &tape, const Var &x, bool trainable) {
    check_window_batch(x, spec_.input_dim, "discriminator");
    return stack_.forward(tape, reshape(x, Shape{x.shape()[0], 1, spec_.input_dim}), trainable);
}

Var Discriminator::forward_frozen(Tape &tape, const Var &x) const {
    check_window_batch(x, spec_.input_dim, "discriminator");
    return stack_.forward_frozen(tape, reshape(x, Shape{x.shape()[0], 1, spec_.input_dim}));
}

Tensor Discriminator::score(const Tensor &x) const {
    Tape tape;
    Var in = tape.constant(as_batch(x, spec_.input_dim, "discriminator"));
    return forward_frozen(tape, in).value();
}

Classifier::Classifier(ClassifierSpec spec) : spec_(spec) {
    spec_.validate();
    const std::size_t d = spec_.input_dim;
    const std::size_t filters[] = {spec_.base_filters, spec_.base_filters / 2, spec_.base_filters / 4};
    std::size_t channels = 1;
    for (std::size_t i = 0; i < 3; ++i) {
        stack_.add_conv("classifier.conv" + std::to_string(i), channels, filters[i], d, Activation::relu());
        channels = filters[i];
    }
    stack_.add_dense("classifier.output", channels * d, spec_.num_classes, Activation::softmax());
    RandomSource rng(spec_.seed);
    stack_.initialize(rng);
}

Var Classifier::forward(Tape &tape, const Var &x, bool trainable) {
    check_window_batch(x, spec_.input_dim, "classifier");
    return stack_.forward(tape, reshape(x, Shape{x.shape()[0], 1, spec_.input_dim}), trainable);
}

Var Classifier::forward_frozen(Tape &tape, const Var &x) const {
    check_window_batch(x, spec_.input_dim, "classifier");
    return stack_.forward_frozen(tape, reshape(x, Shape{x.shape()[0], 1, spec_.input_dim}));
}

Tensor Classifier::probabilities(const Tensor &x) const {
    const bool single = x.rank() == 1;
    Tape tape;
    Var in = tape.constant(as_batch(x, spec_.input_dim, "classifier"));
    Tensor out = forward_frozen(tape, in).value();
    return single ? out.reshaped(Shape{spec_.num_classes}) : out;
}

std::vector<int> Classifier::predict(const Tensor &x) const {
    const Tensor probs = probabilities(x);
    const std::size_t c = spec_.num_classes;
    const std::size_t n = probs.size() / c;
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = probs.data().subspan(i * c, c);
        out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

ModelBundle::ModelBundle(const GeneratorSpec &g, const DiscriminatorSpec &d, const ClassifierSpec &c)
    : generator(g), discriminator(d), classifier(c) {}

bool ModelBundle::all_finite() const {
    for (const auto *params :
         {&generator.stack().layers(), &discriminator.stack().layers(), &classifier.stack().layers()}) {
        for (const auto &layer : *params) {
            if (!layer.weight.value.all_finite() || !layer.bias.value.all_finite()) {
                return false;
            }
        }
    }
    return true;
}

std::size_t parameter_count(const std::vector<const Parameter *> &params) {
    std::size_t total = 0;
    for (const Parameter *p : params) {
        total += p->value.size();
    }
    return total;
}

}  // namespace advhar
