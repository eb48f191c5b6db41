#pragma once

#include "advhar/dataset.hpp"
#include "advhar/random.hpp"
#include "advhar/tape.hpp"
#include "advhar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

namespace advhar::testing {

/// Builds a scalar loss on a fresh tape from the leaves bound to `inputs`.
using LossFn = std::function<Var(Tape &, const std::vector<Var> &)>;

struct GradCheck {
    double worst_relative = 0.0;
    double worst_absolute = 0.0;
    std::size_t checked = 0;
    /// Elements that only agreed at a smaller step (a kink inside [x - h, x + h], or
    /// truncation error on a tiny derivative).
    std::size_t kink_retries = 0;
    bool ok = true;
};

/// Central difference of `f` in one coordinate. When it disagrees with `analytic`, the
/// step shrinks by 10x up to twice: a wrong gradient disagrees at every step, while a
/// kink crossing goes away once the interval no longer straddles it.
inline void check_element(GradCheck &out, double analytic, double &x, const std::function<double()> &f, double h,
                          double rel_tol, double abs_tol) {
    const double saved = x;
    double rel_err = 0.0;
    double abs_err = 0.0;
    for (int attempt = 0; attempt < 3; ++attempt, h /= 10.0) {
        x = saved + h;
        const double up = f();
        x = saved - h;
        const double down = f();
        x = saved;
        const double numeric = (up - down) / (2.0 * h);
        abs_err = std::abs(analytic - numeric);
        rel_err = abs_err / std::max(std::abs(analytic), std::abs(numeric));
        if (abs_err <= abs_tol || rel_err <= rel_tol) {
            if (attempt > 0) ++out.kink_retries;
            break;
        }
    }
    ++out.checked;
    out.worst_absolute = std::max(out.worst_absolute, abs_err);
    if (abs_err > abs_tol) {
        out.worst_relative = std::max(out.worst_relative, rel_err);
        if (rel_err > rel_tol) out.ok = false;
    }
}

inline double evaluate(const LossFn &fn, const std::vector<Tensor> &inputs) {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto &t : inputs) leaves.push_back(tape.constant(t));
    return fn(tape, leaves).value().item();
}

/// Reverse-mode against central differences for every element of every input. An
/// element passes when the relative error is below rel_tol or the absolute error is
/// below abs_tol (for derivatives near zero).
inline GradCheck check_gradients(const LossFn &fn, std::vector<Tensor> inputs, double h = 1e-4,
                                 double rel_tol = 1e-4, double abs_tol = 1e-6) {
    std::vector<Tensor> analytic;
    {
        Tape tape;
        std::vector<Var> leaves;
        for (const auto &t : inputs) leaves.push_back(tape.variable(t));
        Var loss = fn(tape, leaves);
        tape.backward(loss);
        for (const auto &v : leaves) analytic.push_back(tape.grad(v));
    }
    GradCheck out;
    const std::function<double()> f = [&] { return evaluate(fn, inputs); };
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (std::size_t i = 0; i < inputs[k].size(); ++i) {
            check_element(out, analytic[k][i], inputs[k][i], f, h, rel_tol, abs_tol);
        }
    }
    return out;
}

/// Same check for network parameters: `loss` records a scalar on the given tape with
/// the parameters bound trainable, so backward() deposits into Parameter::grad.
inline GradCheck check_parameter_gradients(const std::function<Var(Tape &)> &loss,
                                           const std::vector<Parameter *> &params, double h = 1e-4,
                                           double rel_tol = 1e-4, double abs_tol = 1e-6) {
    for (Parameter *p : params) p->zero_grad();
    {
        Tape tape;
        tape.backward(loss(tape));
    }
    std::vector<Tensor> analytic;
    for (Parameter *p : params) analytic.push_back(p->grad);
    const std::function<double()> f = [&] {
        Tape tape;
        return loss(tape).value().item();
    };
    GradCheck out;
    for (std::size_t k = 0; k < params.size(); ++k) {
        for (std::size_t i = 0; i < params[k]->value.size(); ++i) {
            check_element(out, analytic[k][i], params[k]->value[i], f, h, rel_tol, abs_tol);
        }
    }
    for (Parameter *p : params) p->zero_grad();
    return out;
}

inline Tensor random_tensor(RandomSource &rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (auto &v : t.data()) v = lo + (hi - lo) * rng.uniform();
    return t;
}

/// Windows of uniform noise, `counts[c]` of class c, in shuffled order.
inline DomainDataset labeled_dataset(const std::vector<std::size_t> &counts, std::size_t dim, std::uint64_t seed,
                                     const std::string &subject = "source") {
    RandomSource rng(seed);
    DomainDataset ds;
    ds.subject_id = subject;
    ds.dim = dim;
    ds.num_classes = counts.size();
    std::vector<int> labels;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        ds.class_names.push_back("class" + std::to_string(c));
        labels.insert(labels.end(), counts[c], static_cast<int>(c));
    }
    rng.shuffle(labels);
    for (int y : labels) {
        std::vector<double> w(dim);
        for (auto &v : w) v = rng.uniform() + 0.5 * y;
        ds.windows.push_back(std::move(w));
    }
    ds.labels = std::move(labels);
    return ds;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string &tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("advhar_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const noexcept { return path_; }

  private:
    std::filesystem::path path_;
};

}  // namespace advhar::testing
