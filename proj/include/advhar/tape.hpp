#pragma once

#include "advhar/ops.hpp"
#include "advhar/tensor.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace advhar {

/// A trainable array and its accumulated gradient. Networks own these; a Tape only
/// borrows them for one forward/backward pass.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string name, Tensor value);

    void zero_grad();
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
  public:
    Var() = default;

    const Tensor &value() const;
    const Shape &shape() const { return value().shape(); }
    std::size_t id() const noexcept { return id_; }
    Tape *tape() const noexcept { return tape_; }

  private:
    friend class Tape;
    Var(Tape *tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape *tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Ordered record of operations. Nodes are appended in evaluation order, so the
/// record is always topologically sorted.
class Tape {
  public:
    using Inputs = std::vector<const Tensor *>;
    using GradInputs = std::vector<Tensor *>;
    using ForwardFn = std::function<Tensor(const Inputs &)>;
    /// grad_inputs[i] is null when input i does not need a gradient.
    using BackwardFn =
        std::function<void(const Inputs &inputs, const Tensor &output, const Tensor &grad_output, const GradInputs &)>;

    Tape() = default;
    Tape(const Tape &) = delete;
    Tape &operator=(const Tape &) = delete;

    Var constant(Tensor value);
    Var variable(Tensor value);
    /// Leaf bound to a parameter; when trainable, backward() adds into parameter.grad.
    Var parameter(Parameter &parameter, bool trainable = true);

    Var record(std::string op, std::vector<Var> inputs, ForwardFn forward, BackwardFn backward);

    const Tensor &value(const Var &v) const;
    /// Gradient of the last backward() target; a zero tensor when none reached v.
    Tensor grad(const Var &v) const;
    bool requires_grad(const Var &v) const;
    const std::string &op_name(const Var &v) const;

    /// Overwrite a leaf's value. Call replay() afterwards to refresh dependents.
    void set_value(const Var &leaf, Tensor value);
    /// Recompute every non-leaf node in recorded order.
    void replay();

    std::size_t size() const noexcept { return nodes_.size(); }

    /// Reverse sweep from a scalar loss.
    void backward(const Var &loss);

  private:
    struct Node {
        std::string op;
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::vector<std::size_t> inputs;
        ForwardFn forward;
        BackwardFn backward;
        Parameter *parameter = nullptr;
    };

    Var push(Node node);
    void check_owned(const Var &v) const;

    std::vector<Node> nodes_;
};

/// Free-function form of Tape::backward.
void backward(Tape &tape, const Var &loss);

// Differentiable operations. All inputs must live on the same tape.

Var conv1d(const Var &input, const Var &kernels, const Var &bias, std::size_t stride, Padding padding);
Var positionwise_conv1d(const Var &input, const Var &kernels, const Var &bias);
Var dense(const Var &input, const Var &weights, const Var &bias);
Var activation(const Var &input, const Activation &act);
Var reshape(const Var &input, Shape shape);
/// Concatenate [N x C_i x L] tensors along the channel axis.
Var concat_channels(const Var &a, const Var &b);

Var add(const Var &a, const Var &b);
Var sub(const Var &a, const Var &b);
Var mul(const Var &a, const Var &b);
Var add_scalar(const Var &a, double c);
Var scale(const Var &a, double c);
Var square(const Var &a);
Var sum(const Var &a);
Var mean(const Var &a);

/// mean_i (target - x_i)^2
Var squared_error_to(const Var &x, double target);

/// mean over rows of -log(max(probs[i, labels[i]], floor)); probs is [N x C].
Var nll_loss(const Var &probs, std::vector<int> labels, double floor = 1e-12);

}  // namespace advhar
