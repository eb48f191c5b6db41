#pragma once

// Generator, discriminator and classifier for flattened sensor windows. A window of
// dimension d is treated as a single-channel sequence of length d; every convolution
// runs along that axis with kernel 3, stride 1 and same padding.

#include "advhar/ops.hpp"
#include "advhar/random.hpp"
#include "advhar/tape.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace advhar {

inline constexpr std::size_t kConvKernel = 3;
inline constexpr std::size_t kConvStride = 1;

enum class LayerKind { conv1d, positionwise_conv1d, dense };

std::string to_string(LayerKind kind);

/// Structural description of one layer; what a parameter audit inspects.
struct LayerInfo {
    LayerKind kind = LayerKind::conv1d;
    std::size_t in_channels = 0;  // input features for dense layers
    std::size_t filters = 0;      // output units for dense layers
    std::size_t kernel = 0;
    std::size_t stride = 0;
    Padding padding = Padding::same;
    Activation activation;
    std::size_t length = 0;  // sequence length seen by the layer (1 for dense)

    friend bool operator==(const LayerInfo &, const LayerInfo &) = default;
};

enum class InitScheme { he_uniform, glorot_uniform };

/// A feed-forward stack of conv / positionwise-conv / dense layers. Dense layers
/// flatten their input per sample.
class LayerStack {
  public:
    struct Layer {
        LayerInfo info;
        Parameter weight;
        Parameter bias;
    };

    void add_conv(std::string name, std::size_t in_channels, std::size_t filters, std::size_t length,
                  Activation act);
    void add_positionwise(std::string name, std::size_t in_channels, std::size_t length, Activation act);
    void add_dense(std::string name, std::size_t in_features, std::size_t units, Activation act);

    /// Initializes weights by fan-in (He) or fan-average (Glorot) uniform ranges; biases start at 0.
    void initialize(RandomSource &rng);

    /// input is [N x C x L]. Frozen stacks bind parameters as constants.
    Var forward(Tape &tape, Var input, bool trainable);
    Var forward_frozen(Tape &tape, Var input) const;

    std::vector<LayerInfo> describe() const;
    std::vector<Parameter *> parameters();
    std::vector<const Parameter *> parameters() const;
    std::vector<Layer> &layers() noexcept { return layers_; }
    const std::vector<Layer> &layers() const noexcept { return layers_; }

  private:
    template <typename Bind>
    Var run(Tape &tape, Var input, Bind &&bind) const;

    std::vector<Layer> layers_;
};

struct GeneratorSpec {
    std::size_t input_dim = 100;
    std::size_t blocks = 2;    // cb
    std::size_t filters = 32;  // gf
    std::size_t noise_dim = 16;
    /// Adds the input window to the network output.
    bool input_skip = true;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const GeneratorSpec &, const GeneratorSpec &) = default;
};

struct DiscriminatorSpec {
    std::size_t input_dim = 100;
    std::size_t base_filters = 8;  // df
    double leaky_slope = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const DiscriminatorSpec &, const DiscriminatorSpec &) = default;
};

struct ClassifierSpec {
    std::size_t input_dim = 100;
    std::size_t base_filters = 64;  // cf
    std::size_t num_classes = 6;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const ClassifierSpec &, const ClassifierSpec &) = default;
};

/// G(x, z): cb blocks of two conv layers (gf filters each, relu), then an output
/// conv layer with d filters whose filter j is read out at position j. The noise
/// vector is tiled along the window as one extra input channel.
class Generator {
  public:
    Generator() = default;
    explicit Generator(GeneratorSpec spec);

    const GeneratorSpec &spec() const noexcept { return spec_; }

    /// x [N x d], z [N x noise_dim] -> [N x d]
    Var forward(Tape &tape, const Var &x, const Tensor &z, bool trainable);
    Var forward_frozen(Tape &tape, const Var &x, const Tensor &z) const;
    /// Inference on a batch [N x d] or a single window [d].
    Tensor generate(const Tensor &x, const Tensor &z) const;

    std::vector<LayerInfo> describe() const { return stack_.describe(); }
    std::vector<Parameter *> parameters() { return stack_.parameters(); }
    std::vector<const Parameter *> parameters() const { return stack_.parameters(); }
    LayerStack &stack() noexcept { return stack_; }
    const LayerStack &stack() const noexcept { return stack_; }

  private:
    template <typename Run>
    Var assemble(Tape &tape, const Var &x, const Tensor &z, Run &&run) const;

    GeneratorSpec spec_;
    LayerStack stack_;
};

/// D(x): five conv layers (2df, 4df, 8df, 4df, 2df; leaky relu) then one tanh unit.
class Discriminator {
  public:
    Discriminator() = default;
    explicit Discriminator(DiscriminatorSpec spec);

    const DiscriminatorSpec &spec() const noexcept { return spec_; }

    /// x [N x d] -> scores [N x 1] in (-1, 1)
    Var forward(Tape &tape, const Var &x, bool trainable);
    Var forward_frozen(Tape &tape, const Var &x) const;
    Tensor score(const Tensor &x) const;

    std::vector<LayerInfo> describe() const { return stack_.describe(); }
    std::vector<Parameter *> parameters() { return stack_.parameters(); }
    std::vector<const Parameter *> parameters() const { return stack_.parameters(); }
    LayerStack &stack() noexcept { return stack_; }
    const LayerStack &stack() const noexcept { return stack_; }

  private:
    DiscriminatorSpec spec_;
    LayerStack stack_;
};

/// C(x): three conv layers (cf, cf/2, cf/4; relu) then a softmax dense layer.
class Classifier {
  public:
    Classifier() = default;
    explicit Classifier(ClassifierSpec spec);

    const ClassifierSpec &spec() const noexcept { return spec_; }

    /// x [N x d] -> probabilities [N x classes]
    Var forward(Tape &tape, const Var &x, bool trainable);
    Var forward_frozen(Tape &tape, const Var &x) const;
    Tensor probabilities(const Tensor &x) const;
    std::vector<int> predict(const Tensor &x) const;

    std::vector<LayerInfo> describe() const { return stack_.describe(); }
    std::vector<Parameter *> parameters() { return stack_.parameters(); }
    std::vector<const Parameter *> parameters() const { return stack_.parameters(); }
    LayerStack &stack() noexcept { return stack_; }
    const LayerStack &stack() const noexcept { return stack_; }

  private:
    ClassifierSpec spec_;
    LayerStack stack_;
};

/// The three players of one adaptation run.
struct ModelBundle {
    Generator generator;
    Discriminator discriminator;
    Classifier classifier;

    ModelBundle() = default;
    ModelBundle(const GeneratorSpec &g, const DiscriminatorSpec &d, const ClassifierSpec &c);

    bool all_finite() const;
};

/// Number of scalar parameters.
std::size_t parameter_count(const std::vector<const Parameter *> &params);

}  // namespace advhar
