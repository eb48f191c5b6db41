#pragma once

// Forward kernels and their local gradients. Everything here is a pure function of
// plain tensors; the tape in tape.hpp wires them into reverse-mode differentiation.

#include "advhar/tensor.hpp"

#include <cstddef>
#include <string>

namespace advhar {

enum class Padding { valid, same };

enum class ActivationKind { identity, relu, leaky_relu, tanh, softmax };

struct Activation {
    ActivationKind kind = ActivationKind::identity;
    double slope = 0.2;  // leaky_relu only

    static Activation identity() { return {}; }
    static Activation relu() { return {ActivationKind::relu}; }
    static Activation leaky_relu(double slope) { return {ActivationKind::leaky_relu, slope}; }
    static Activation tanh() { return {ActivationKind::tanh}; }
    static Activation softmax() { return {ActivationKind::softmax}; }

    friend bool operator==(const Activation &, const Activation &) = default;
};

std::string to_string(Padding padding);
std::string to_string(const Activation &activation);
Padding padding_from_string(const std::string &name);
Activation activation_from_string(const std::string &name, double slope = 0.2);

/// Resolved extents of a (possibly batched) 1-D convolution.
struct ConvGeometry {
    std::size_t batch = 1;
    std::size_t in_channels = 0;
    std::size_t length = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;
    std::size_t pad_left = 0;
    std::size_t out_length = 0;
    bool batched = false;
};

/// Same padding follows the usual convention: out_length = ceil(length / stride),
/// with the total padding split so the left side gets the smaller half.
ConvGeometry conv1d_geometry(const Shape &input, const Shape &kernels, std::size_t stride, Padding padding);

/// input [C_in x L] or [N x C_in x L]; kernels [C_out x C_in x K]; bias [C_out] or empty.
Tensor conv1d_forward(const Tensor &input, const Tensor &kernels, const Tensor &bias, std::size_t stride,
                      Padding padding);

/// Accumulates into whichever gradient outputs are non-null.
void conv1d_backward(const Tensor &input, const Tensor &kernels, std::size_t stride, Padding padding,
                     const Tensor &grad_out, Tensor *grad_input, Tensor *grad_kernels, Tensor *grad_bias);

/// Convolution with one filter per output position: filter j (of shape [C x K]) is
/// evaluated only at position j under same padding. input [N x C x L],
/// kernels [L x C x K], bias [L]; output [N x L].
Tensor positionwise_conv1d_forward(const Tensor &input, const Tensor &kernels, const Tensor &bias);

void positionwise_conv1d_backward(const Tensor &input, const Tensor &kernels, const Tensor &grad_out,
                                  Tensor *grad_input, Tensor *grad_kernels, Tensor *grad_bias);

/// input [n] or [N x n]; weights [m x n]; bias [m] or empty.
Tensor dense_forward(const Tensor &input, const Tensor &weights, const Tensor &bias);

void dense_backward(const Tensor &input, const Tensor &weights, const Tensor &grad_out, Tensor *grad_input,
                    Tensor *grad_weights, Tensor *grad_bias);

/// Softmax normalizes over the last axis.
Tensor apply_activation(const Tensor &input, const Activation &activation);

/// Gradient w.r.t. the activation input given its input, output and upstream gradient.
Tensor activation_backward(const Tensor &input, const Tensor &output, const Tensor &grad_out,
                           const Activation &activation);

}  // namespace advhar
