#include "advhar/tape.hpp"

#include "advhar/error.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace advhar {

Parameter::Parameter(std::string name_, Tensor value_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

void Parameter::zero_grad() {
    if (grad.shape() != value.shape()) {
        grad = Tensor(value.shape());
    } else {
        grad.fill(0.0);
    }
}

const Tensor &Var::value() const {
    if (tape_ == nullptr) {
        throw ContractError("use of an unbound Var");
    }
    return tape_->value(*this);
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(const Var &v) const {
    if (v.tape() != this || v.id() >= nodes_.size()) {
        throw ContractError("Var does not belong to this tape");
    }
}

Var Tape::constant(Tensor value) {
    Node n;
    n.op = "constant";
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::variable(Tensor value) {
    Node n;
    n.op = "variable";
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
}

Var Tape::parameter(Parameter &parameter, bool trainable) {
    Node n;
    n.op = "parameter:" + parameter.name;
    n.value = parameter.value;
    n.requires_grad = trainable;
    n.parameter = trainable ? &parameter : nullptr;
    return push(std::move(n));
}

Var Tape::record(std::string op, std::vector<Var> inputs, ForwardFn forward, BackwardFn backward) {
    Node n;
    n.op = std::move(op);
    Inputs values;
    values.reserve(inputs.size());
    for (const Var &v : inputs) {
        check_owned(v);
        n.inputs.push_back(v.id());
        n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
        values.push_back(&nodes_[v.id()].value);
    }
    n.value = forward(values);
    n.forward = std::move(forward);
    n.backward = std::move(backward);
    return push(std::move(n));
}

const Tensor &Tape::value(const Var &v) const {
    check_owned(v);
    return nodes_[v.id()].value;
}

Tensor Tape::grad(const Var &v) const {
    check_owned(v);
    const Node &n = nodes_[v.id()];
    if (n.grad.shape() == n.value.shape() && !n.grad.empty()) {
        return n.grad;
    }
    return Tensor(n.value.shape());
}

bool Tape::requires_grad(const Var &v) const {
    check_owned(v);
    return nodes_[v.id()].requires_grad;
}

const std::string &Tape::op_name(const Var &v) const {
    check_owned(v);
    return nodes_[v.id()].op;
}

void Tape::set_value(const Var &leaf, Tensor value) {
    check_owned(leaf);
    Node &n = nodes_[leaf.id()];
    if (n.forward) {
        throw ContractError("set_value is only valid on leaves");
    }
    if (value.shape() != n.value.shape()) {
        throw ShapeError("set_value shape " + shape_string(value.shape()) + " differs from " +
                         shape_string(n.value.shape()));
    }
    n.value = std::move(value);
}

void Tape::replay() {
    for (Node &n : nodes_) {
        if (!n.forward) {
            continue;
        }
        Inputs values;
        values.reserve(n.inputs.size());
        for (std::size_t id : n.inputs) {
            values.push_back(&nodes_[id].value);
        }
        n.value = n.forward(values);
    }
}

void Tape::backward(const Var &loss) {
    check_owned(loss);
    if (nodes_[loss.id()].value.size() != 1) {
        throw ContractError("backward needs a scalar loss, got shape " +
                            shape_string(nodes_[loss.id()].value.shape()));
    }
    for (Node &n : nodes_) {
        if (n.requires_grad) {
            n.grad = Tensor(n.value.shape());
        } else {
            n.grad = Tensor();
        }
    }
    if (!nodes_[loss.id()].requires_grad) {
        return;
    }
    nodes_[loss.id()].grad.fill(1.0);

    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node &n = nodes_[i];
        if (!n.requires_grad || !n.backward) {
            continue;
        }
        Inputs values;
        GradInputs grads;
        values.reserve(n.inputs.size());
        grads.reserve(n.inputs.size());
        for (std::size_t id : n.inputs) {
            values.push_back(&nodes_[id].value);
            grads.push_back(nodes_[id].requires_grad ? &nodes_[id].grad : nullptr);
        }
        n.backward(values, n.value, n.grad, grads);
    }

    for (Node &n : nodes_) {
        if (n.parameter == nullptr) {
            continue;
        }
        Parameter &p = *n.parameter;
        if (p.grad.shape() != p.value.shape()) {
            p.grad = Tensor(p.value.shape());
        }
        for (std::size_t k = 0; k < p.grad.size(); ++k) {
            p.grad[k] += n.grad[k];
        }
    }
}

void backward(Tape &tape, const Var &loss) { tape.backward(loss); }

namespace {

Tape &tape_of(const Var &v) {
    if (v.tape() == nullptr) {
        throw ContractError("use of an unbound Var");
    }
    return *v.tape();
}

void accumulate(Tensor *dst, const Tensor &src) {
    if (dst == nullptr) {
        return;
    }
    for (std::size_t i = 0; i < src.size(); ++i) {
        (*dst)[i] += src[i];
    }
}

void require_same_size(const Var &a, const Var &b, const char *op) {
    if (a.value().size() != b.value().size()) {
        throw ShapeError(std::string(op) + ": operand shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
    }
}

}  // namespace

Var conv1d(const Var &input, const Var &kernels, const Var &bias, std::size_t stride, Padding padding) {
    return tape_of(input).record(
        "conv1d", {input, kernels, bias},
        [stride, padding](const Tape::Inputs &in) { return conv1d_forward(*in[0], *in[1], *in[2], stride, padding); },
        [stride, padding](const Tape::Inputs &in, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            conv1d_backward(*in[0], *in[1], stride, padding, g, gi[0], gi[1], gi[2]);
        });
}

Var positionwise_conv1d(const Var &input, const Var &kernels, const Var &bias) {
    return tape_of(input).record(
        "positionwise_conv1d", {input, kernels, bias},
        [](const Tape::Inputs &in) { return positionwise_conv1d_forward(*in[0], *in[1], *in[2]); },
        [](const Tape::Inputs &in, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            positionwise_conv1d_backward(*in[0], *in[1], g, gi[0], gi[1], gi[2]);
        });
}

Var dense(const Var &input, const Var &weights, const Var &bias) {
    return tape_of(input).record(
        "dense", {input, weights, bias},
        [](const Tape::Inputs &in) { return dense_forward(*in[0], *in[1], *in[2]); },
        [](const Tape::Inputs &in, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            dense_backward(*in[0], *in[1], g, gi[0], gi[1], gi[2]);
        });
}

Var activation(const Var &input, const Activation &act) {
    return tape_of(input).record(
        to_string(act), {input}, [act](const Tape::Inputs &in) { return apply_activation(*in[0], act); },
        [act](const Tape::Inputs &in, const Tensor &out, const Tensor &g, const Tape::GradInputs &gi) {
            accumulate(gi[0], activation_backward(*in[0], out, g, act));
        });
}

Var reshape(const Var &input, Shape shape) {
    if (shape_size(shape) != input.value().size()) {
        throw ShapeError("reshape from " + shape_string(input.shape()) + " to " + shape_string(shape));
    }
    return tape_of(input).record(
        "reshape", {input}, [shape](const Tape::Inputs &in) { return in[0]->reshaped(shape); },
        [](const Tape::Inputs &, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            accumulate(gi[0], g);
        });
}

Var concat_channels(const Var &a, const Var &b) {
    const Shape &sa = a.shape();
    const Shape &sb = b.shape();
    if (sa.size() != 3 || sb.size() != 3 || sa[0] != sb[0] || sa[2] != sb[2]) {
        throw ShapeError("concat_channels needs [N x C x L] operands with equal N and L, got " + shape_string(sa) +
                         " and " + shape_string(sb));
    }
    return tape_of(a).record(
        "concat_channels", {a, b},
        [](const Tape::Inputs &in) {
            const std::size_t n = in[0]->dim(0);
            const std::size_t ca = in[0]->dim(1);
            const std::size_t cb = in[1]->dim(1);
            const std::size_t len = in[0]->dim(2);
            Tensor out(Shape{n, ca + cb, len});
            for (std::size_t i = 0; i < n; ++i) {
                std::copy_n(in[0]->data().begin() + i * ca * len, ca * len, out.data().begin() + i * (ca + cb) * len);
                std::copy_n(in[1]->data().begin() + i * cb * len, cb * len,
                            out.data().begin() + (i * (ca + cb) + ca) * len);
            }
            return out;
        },
        [](const Tape::Inputs &in, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            const std::size_t n = in[0]->dim(0);
            const std::size_t ca = in[0]->dim(1);
            const std::size_t cb = in[1]->dim(1);
            const std::size_t len = in[0]->dim(2);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t base = i * (ca + cb) * len;
                if (gi[0] != nullptr) {
                    for (std::size_t k = 0; k < ca * len; ++k) {
                        (*gi[0])[i * ca * len + k] += g[base + k];
                    }
                }
                if (gi[1] != nullptr) {
                    for (std::size_t k = 0; k < cb * len; ++k) {
                        (*gi[1])[i * cb * len + k] += g[base + ca * len + k];
                    }
                }
            }
        });
}

Var add(const Var &a, const Var &b) {
    require_same_size(a, b, "add");
    return tape_of(a).record(
        "add", {a, b},
        [](const Tape::Inputs &in) {
            Tensor out = *in[0];
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] += (*in[1])[i];
            }
            return out;
        },
        [](const Tape::Inputs &, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            accumulate(gi[0], g);
            accumulate(gi[1], g);
        });
}

Var sub(const Var &a, const Var &b) {
    require_same_size(a, b, "sub");
    return tape_of(a).record(
        "sub", {a, b},
        [](const Tape::Inputs &in) {
            Tensor out = *in[0];
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] -= (*in[1])[i];
            }
            return out;
        },
        [](const Tape::Inputs &, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            accumulate(gi[0], g);
            if (gi[1] != nullptr) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    (*gi[1])[i] -= g[i];
                }
            }
        });
}

Var mul(const Var &a, const Var &b) {
    require_same_size(a, b, "mul");
    return tape_of(a).record(
        "mul", {a, b},
        [](const Tape::Inputs &in) {
            Tensor out = *in[0];
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] *= (*in[1])[i];
            }
            return out;
        },
        [](const Tape::Inputs &in, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (gi[0] != nullptr) {
                    (*gi[0])[i] += g[i] * (*in[1])[i];
                }
                if (gi[1] != nullptr) {
                    (*gi[1])[i] += g[i] * (*in[0])[i];
                }
            }
        });
}

Var add_scalar(const Var &a, double c) {
    return tape_of(a).record(
        "add_scalar", {a},
        [c](const Tape::Inputs &in) {
            Tensor out = *in[0];
            for (double &v : out.data()) {
                v += c;
            }
            return out;
        },
        [](const Tape::Inputs &, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            accumulate(gi[0], g);
        });
}

Var scale(const Var &a, double c) {
    return tape_of(a).record(
        "scale", {a},
        [c](const Tape::Inputs &in) {
            Tensor out = *in[0];
            for (double &v : out.data()) {
                v *= c;
            }
            return out;
        },
        [c](const Tape::Inputs &, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            if (gi[0] != nullptr) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    (*gi[0])[i] += c * g[i];
                }
            }
        });
}

Var square(const Var &a) { return mul(a, a); }

Var sum(const Var &a) {
    return tape_of(a).record(
        "sum", {a},
        [](const Tape::Inputs &in) {
            double total = 0.0;
            for (double v : in[0]->data()) {
                total += v;
            }
            return Tensor::scalar(total);
        },
        [](const Tape::Inputs &, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            if (gi[0] != nullptr) {
                for (double &v : gi[0]->data()) {
                    v += g.item();
                }
            }
        });
}

Var mean(const Var &a) {
    const double n = static_cast<double>(a.value().size());
    return scale(sum(a), 1.0 / n);
}

Var squared_error_to(const Var &x, double target) {
    // (target - x)^2 == (x - target)^2
    return mean(square(add_scalar(x, -target)));
}

Var nll_loss(const Var &probs, std::vector<int> labels, double floor) {
    const Shape &s = probs.shape();
    if (s.size() != 2 || s[0] != labels.size()) {
        throw ShapeError("nll_loss needs [N x C] probabilities and N labels, got " + shape_string(s) + " and " +
                         std::to_string(labels.size()) + " labels");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= s[1]) {
            throw ShapeError("nll_loss label " + std::to_string(y) + " outside [0, " + std::to_string(s[1]) + ")");
        }
    }
    return tape_of(probs).record(
        "nll_loss", {probs},
        [labels, floor](const Tape::Inputs &in) {
            const std::size_t n = in[0]->dim(0);
            const std::size_t c = in[0]->dim(1);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                total -= std::log(std::max((*in[0])[i * c + labels[i]], floor));
            }
            return Tensor::scalar(total / static_cast<double>(n));
        },
        [labels, floor](const Tape::Inputs &in, const Tensor &, const Tensor &g, const Tape::GradInputs &gi) {
            if (gi[0] == nullptr) {
                return;
            }
            const std::size_t n = in[0]->dim(0);
            const std::size_t c = in[0]->dim(1);
            for (std::size_t i = 0; i < n; ++i) {
                const double p = (*in[0])[i * c + labels[i]];
                if (p > floor) {
                    (*gi[0])[i * c + labels[i]] -= g.item() / (static_cast<double>(n) * p);
                }
            }
        });
}

}  // namespace advhar
