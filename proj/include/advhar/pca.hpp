#pragma once

#include "advhar/dataset.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace advhar {

struct PcaModel {
    std::vector<double> mean;
    /// Orthonormal principal directions, one row per retained component.
    std::vector<std::vector<double>> components;
    /// Fraction of total variance carried by each retained component (non-increasing).
    std::vector<double> explained;

    std::size_t input_dim() const noexcept { return mean.size(); }
    std::size_t output_dim() const noexcept { return components.size(); }

    std::vector<double> project(std::span<const double> x) const;
    std::vector<double> back_project(std::span<const double> y) const;
};

/// Either an explicit output dimension or a fraction of the input dimension
/// (d' = round(fraction * d), at least 1).
struct PcaTarget {
    std::optional<std::size_t> dim;
    std::optional<double> fraction;

    static PcaTarget dimension(std::size_t d) { return {d, std::nullopt}; }
    static PcaTarget of_input(double f) { return {std::nullopt, f}; }

    std::size_t resolve(std::size_t input_dim) const;
};

/// Fits on the pooled windows of all datasets. Callers pass source-train plus
/// unlabeled target-train so both domains share one projection.
PcaModel fit_pca(const std::vector<const DomainDataset *> &datasets, const PcaTarget &target);

DomainDataset apply_pca(const PcaModel &model, const DomainDataset &dataset);

/// Mean squared reconstruction error of project-then-back-project over a dataset.
double reconstruction_error(const PcaModel &model, const DomainDataset &dataset);

}  // namespace advhar
