#include "advhar/ops.hpp"

#include "advhar/error.hpp"

#include <algorithm>
#include <cmath>

namespace advhar {

std::string to_string(Padding padding) { return padding == Padding::same ? "same" : "valid"; }

std::string to_string(const Activation &activation) {
    switch (activation.kind) {
        case ActivationKind::identity: return "identity";
        case ActivationKind::relu: return "relu";
        case ActivationKind::leaky_relu: return "leaky_relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::softmax: return "softmax";
    }
    return "identity";
}

Padding padding_from_string(const std::string &name) {
    if (name == "same") {
        return Padding::same;
    }
    if (name == "valid") {
        return Padding::valid;
    }
    throw ConfigError("unknown padding '" + name + "'");
}

Activation activation_from_string(const std::string &name, double slope) {
    if (name == "identity") return Activation::identity();
    if (name == "relu") return Activation::relu();
    if (name == "leaky_relu") return Activation::leaky_relu(slope);
    if (name == "tanh") return Activation::tanh();
    if (name == "softmax") return Activation::softmax();
    throw ConfigError("unknown activation '" + name + "'");
}

ConvGeometry conv1d_geometry(const Shape &input, const Shape &kernels, std::size_t stride, Padding padding) {
    ConvGeometry g;
    if (input.size() == 2) {
        g.batch = 1;
        g.in_channels = input[0];
        g.length = input[1];
    } else if (input.size() == 3) {
        g.batched = true;
        g.batch = input[0];
        g.in_channels = input[1];
        g.length = input[2];
    } else {
        throw ShapeError("conv1d input must be [C x L] or [N x C x L], got " + shape_string(input));
    }
    if (kernels.size() != 3) {
        throw ShapeError("conv1d kernels must be [C_out x C_in x K], got " + shape_string(kernels));
    }
    if (kernels[1] != g.in_channels) {
        throw ShapeError("conv1d kernels expect " + std::to_string(kernels[1]) + " input channels, input has " +
                         std::to_string(g.in_channels));
    }
    if (stride == 0) {
        throw ShapeError("conv1d stride must be >= 1");
    }
    g.out_channels = kernels[0];
    g.kernel = kernels[2];
    g.stride = stride;
    std::size_t padded = g.length;
    if (padding == Padding::same) {
        const std::size_t out = (g.length + stride - 1) / stride;
        const std::size_t needed = (out - 1) * stride + g.kernel;
        const std::size_t total = needed > g.length ? needed - g.length : 0;
        g.pad_left = total / 2;
        padded = g.length + total;
    }
    if (g.kernel > padded) {
        throw ShapeError("conv1d kernel of size " + std::to_string(g.kernel) + " exceeds padded length " +
                         std::to_string(padded));
    }
    g.out_length = (padded - g.kernel) / stride + 1;
    return g;
}

namespace {

void check_bias(const Tensor &bias, std::size_t expected, const char *what) {
    if (!bias.empty() && (bias.rank() != 1 || bias.size() != expected)) {
        throw ShapeError(std::string(what) + " bias must have " + std::to_string(expected) + " entries, got " +
                         shape_string(bias.shape()));
    }
}

// Output positions l whose tap k lands inside [0, length).
struct TapRange {
    std::size_t begin;
    std::size_t end;
};

TapRange tap_range(const ConvGeometry &g, std::size_t k) {
    // position = l * stride + k - pad_left must lie in [0, length)
    std::size_t begin = 0;
    if (k < g.pad_left) {
        begin = (g.pad_left - k + g.stride - 1) / g.stride;
    }
    std::size_t end = 0;
    if (g.length + g.pad_left > k) {
        end = (g.length + g.pad_left - k - 1) / g.stride + 1;
    }
    end = std::min(end, g.out_length);
    begin = std::min(begin, end);
    return {begin, end};
}

}  // namespace

Tensor conv1d_forward(const Tensor &input, const Tensor &kernels, const Tensor &bias, std::size_t stride,
                      Padding padding) {
    const ConvGeometry g = conv1d_geometry(input.shape(), kernels.shape(), stride, padding);
    check_bias(bias, g.out_channels, "conv1d");

    Shape out_shape = g.batched ? Shape{g.batch, g.out_channels, g.out_length} : Shape{g.out_channels, g.out_length};
    Tensor out(out_shape);
    const double *in = input.data().data();
    const double *w = kernels.data().data();
    double *o = out.data().data();

    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t co = 0; co < g.out_channels; ++co) {
            double *orow = o + (n * g.out_channels + co) * g.out_length;
            const double b = bias.empty() ? 0.0 : bias[co];
            std::fill(orow, orow + g.out_length, b);
            for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                const double *irow = in + (n * g.in_channels + ci) * g.length;
                const double *wk = w + (co * g.in_channels + ci) * g.kernel;
                for (std::size_t k = 0; k < g.kernel; ++k) {
                    const double wv = wk[k];
                    const TapRange r = tap_range(g, k);
                    if (g.stride == 1) {
                        for (std::size_t l = r.begin; l < r.end; ++l) {
                            orow[l] += wv * irow[l + k - g.pad_left];
                        }
                    } else {
                        for (std::size_t l = r.begin; l < r.end; ++l) {
                            orow[l] += wv * irow[l * g.stride + k - g.pad_left];
                        }
                    }
                }
            }
        }
    }
    return out;
}

void conv1d_backward(const Tensor &input, const Tensor &kernels, std::size_t stride, Padding padding,
                     const Tensor &grad_out, Tensor *grad_input, Tensor *grad_kernels, Tensor *grad_bias) {
    const ConvGeometry g = conv1d_geometry(input.shape(), kernels.shape(), stride, padding);
    if (grad_out.size() != g.batch * g.out_channels * g.out_length) {
        throw ShapeError("conv1d upstream gradient has wrong size");
    }
    const double *in = input.data().data();
    const double *w = kernels.data().data();
    const double *go = grad_out.data().data();

    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t co = 0; co < g.out_channels; ++co) {
            const double *grow = go + (n * g.out_channels + co) * g.out_length;
            if (grad_bias != nullptr) {
                double acc = 0.0;
                for (std::size_t l = 0; l < g.out_length; ++l) {
                    acc += grow[l];
                }
                (*grad_bias)[co] += acc;
            }
            for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                const double *irow = in + (n * g.in_channels + ci) * g.length;
                const double *wk = w + (co * g.in_channels + ci) * g.kernel;
                double *gi = grad_input != nullptr ? grad_input->data().data() + (n * g.in_channels + ci) * g.length
                                                   : nullptr;
                double *gw = grad_kernels != nullptr
                                 ? grad_kernels->data().data() + (co * g.in_channels + ci) * g.kernel
                                 : nullptr;
                for (std::size_t k = 0; k < g.kernel; ++k) {
                    const TapRange r = tap_range(g, k);
                    double acc = 0.0;
                    const double wv = wk[k];
                    for (std::size_t l = r.begin; l < r.end; ++l) {
                        const std::size_t pos = l * g.stride + k - g.pad_left;
                        acc += grow[l] * irow[pos];
                        if (gi != nullptr) {
                            gi[pos] += wv * grow[l];
                        }
                    }
                    if (gw != nullptr) {
                        gw[k] += acc;
                    }
                }
            }
        }
    }
}

namespace {

struct PositionwiseGeometry {
    std::size_t batch;
    std::size_t channels;
    std::size_t length;
    std::size_t kernel;
    std::size_t pad_left;
};

PositionwiseGeometry positionwise_geometry(const Tensor &input, const Tensor &kernels) {
    if (input.rank() != 3) {
        throw ShapeError("positionwise conv input must be [N x C x L], got " + shape_string(input.shape()));
    }
    if (kernels.rank() != 3 || kernels.dim(0) != input.dim(2) || kernels.dim(1) != input.dim(1)) {
        throw ShapeError("positionwise conv kernels " + shape_string(kernels.shape()) + " do not match input " +
                         shape_string(input.shape()));
    }
    const std::size_t k = kernels.dim(2);
    return {input.dim(0), input.dim(1), input.dim(2), k, (k - 1) / 2};
}

}  // namespace

Tensor positionwise_conv1d_forward(const Tensor &input, const Tensor &kernels, const Tensor &bias) {
    const PositionwiseGeometry g = positionwise_geometry(input, kernels);
    check_bias(bias, g.length, "positionwise conv");
    Tensor out(Shape{g.batch, g.length});
    const double *in = input.data().data();
    const double *w = kernels.data().data();
    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t j = 0; j < g.length; ++j) {
            double acc = bias.empty() ? 0.0 : bias[j];
            for (std::size_t c = 0; c < g.channels; ++c) {
                const double *irow = in + (n * g.channels + c) * g.length;
                const double *wk = w + (j * g.channels + c) * g.kernel;
                for (std::size_t k = 0; k < g.kernel; ++k) {
                    const std::ptrdiff_t pos =
                        static_cast<std::ptrdiff_t>(j + k) - static_cast<std::ptrdiff_t>(g.pad_left);
                    if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(g.length)) {
                        acc += wk[k] * irow[pos];
                    }
                }
            }
            out[n * g.length + j] = acc;
        }
    }
    return out;
}

void positionwise_conv1d_backward(const Tensor &input, const Tensor &kernels, const Tensor &grad_out,
                                  Tensor *grad_input, Tensor *grad_kernels, Tensor *grad_bias) {
    const PositionwiseGeometry g = positionwise_geometry(input, kernels);
    const double *in = input.data().data();
    const double *w = kernels.data().data();
    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t j = 0; j < g.length; ++j) {
            const double go = grad_out[n * g.length + j];
            if (grad_bias != nullptr) {
                (*grad_bias)[j] += go;
            }
            for (std::size_t c = 0; c < g.channels; ++c) {
                const std::size_t row = (n * g.channels + c) * g.length;
                const std::size_t wrow = (j * g.channels + c) * g.kernel;
                for (std::size_t k = 0; k < g.kernel; ++k) {
                    const std::ptrdiff_t pos =
                        static_cast<std::ptrdiff_t>(j + k) - static_cast<std::ptrdiff_t>(g.pad_left);
                    if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(g.length)) {
                        continue;
                    }
                    if (grad_kernels != nullptr) {
                        (*grad_kernels)[wrow + k] += go * in[row + pos];
                    }
                    if (grad_input != nullptr) {
                        (*grad_input)[row + pos] += go * w[wrow + k];
                    }
                }
            }
        }
    }
}

namespace {

struct DenseGeometry {
    std::size_t batch;
    std::size_t in;
    std::size_t out;
    bool batched;
};

DenseGeometry dense_geometry(const Tensor &input, const Tensor &weights) {
    if (weights.rank() != 2) {
        throw ShapeError("dense weights must be [m x n], got " + shape_string(weights.shape()));
    }
    DenseGeometry g{1, 0, weights.dim(0), false};
    if (input.rank() == 1) {
        g.in = input.dim(0);
    } else if (input.rank() == 2) {
        g.batched = true;
        g.batch = input.dim(0);
        g.in = input.dim(1);
    } else {
        throw ShapeError("dense input must be [n] or [N x n], got " + shape_string(input.shape()));
    }
    if (weights.dim(1) != g.in) {
        throw ShapeError("dense weights expect " + std::to_string(weights.dim(1)) + " inputs, got " +
                         std::to_string(g.in));
    }
    return g;
}

}  // namespace

Tensor dense_forward(const Tensor &input, const Tensor &weights, const Tensor &bias) {
    const DenseGeometry g = dense_geometry(input, weights);
    check_bias(bias, g.out, "dense");
    Tensor out(g.batched ? Shape{g.batch, g.out} : Shape{g.out});
    const double *x = input.data().data();
    const double *w = weights.data().data();
    for (std::size_t n = 0; n < g.batch; ++n) {
        const double *xr = x + n * g.in;
        for (std::size_t i = 0; i < g.out; ++i) {
            const double *wr = w + i * g.in;
            double acc = bias.empty() ? 0.0 : bias[i];
            for (std::size_t j = 0; j < g.in; ++j) {
                acc += wr[j] * xr[j];
            }
            out[n * g.out + i] = acc;
        }
    }
    return out;
}

void dense_backward(const Tensor &input, const Tensor &weights, const Tensor &grad_out, Tensor *grad_input,
                    Tensor *grad_weights, Tensor *grad_bias) {
    const DenseGeometry g = dense_geometry(input, weights);
    const double *x = input.data().data();
    const double *w = weights.data().data();
    for (std::size_t n = 0; n < g.batch; ++n) {
        const double *xr = x + n * g.in;
        for (std::size_t i = 0; i < g.out; ++i) {
            const double go = grad_out[n * g.out + i];
            if (grad_bias != nullptr) {
                (*grad_bias)[i] += go;
            }
            if (grad_weights != nullptr) {
                double *gw = grad_weights->data().data() + i * g.in;
                for (std::size_t j = 0; j < g.in; ++j) {
                    gw[j] += go * xr[j];
                }
            }
            if (grad_input != nullptr) {
                double *gi = grad_input->data().data() + n * g.in;
                const double *wr = w + i * g.in;
                for (std::size_t j = 0; j < g.in; ++j) {
                    gi[j] += go * wr[j];
                }
            }
        }
    }
}

Tensor apply_activation(const Tensor &input, const Activation &activation) {
    Tensor out = input;
    auto data = out.data();
    switch (activation.kind) {
        case ActivationKind::identity: break;
        case ActivationKind::relu:
            for (double &v : data) {
                v = v > 0.0 ? v : 0.0;
            }
            break;
        case ActivationKind::leaky_relu:
            for (double &v : data) {
                v = v > 0.0 ? v : activation.slope * v;
            }
            break;
        case ActivationKind::tanh:
            for (double &v : data) {
                v = std::tanh(v);
            }
            break;
        case ActivationKind::softmax: {
            if (input.rank() == 0) {
                throw ShapeError("softmax needs a vector or a batch of vectors");
            }
            const std::size_t width = input.shape().back();
            for (std::size_t start = 0; start < data.size(); start += width) {
                auto row = data.subspan(start, width);
                const double peak = *std::max_element(row.begin(), row.end());
                double total = 0.0;
                for (double &v : row) {
                    v = std::exp(v - peak);
                    total += v;
                }
                for (double &v : row) {
                    v /= total;
                }
            }
            break;
        }
    }
    return out;
}

Tensor activation_backward(const Tensor &input, const Tensor &output, const Tensor &grad_out,
                           const Activation &activation) {
    Tensor grad(input.shape());
    const std::size_t n = input.size();
    switch (activation.kind) {
        case ActivationKind::identity: grad = grad_out.reshaped(input.shape()); break;
        case ActivationKind::relu:
            for (std::size_t i = 0; i < n; ++i) {
                grad[i] = input[i] > 0.0 ? grad_out[i] : 0.0;
            }
            break;
        case ActivationKind::leaky_relu:
            for (std::size_t i = 0; i < n; ++i) {
                grad[i] = input[i] > 0.0 ? grad_out[i] : activation.slope * grad_out[i];
            }
            break;
        case ActivationKind::tanh:
            for (std::size_t i = 0; i < n; ++i) {
                grad[i] = grad_out[i] * (1.0 - output[i] * output[i]);
            }
            break;
        case ActivationKind::softmax: {
            const std::size_t width = input.shape().back();
            for (std::size_t start = 0; start < n; start += width) {
                double dot = 0.0;
                for (std::size_t i = start; i < start + width; ++i) {
                    dot += grad_out[i] * output[i];
                }
                for (std::size_t i = start; i < start + width; ++i) {
                    grad[i] = output[i] * (grad_out[i] - dot);
                }
            }
            break;
        }
    }
    return grad;
}

}  // namespace advhar
