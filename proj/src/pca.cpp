#include "advhar/pca.hpp"

#include "advhar/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace advhar {

std::vector<double> PcaModel::project(std::span<const double> x) const {
    if (x.size() != input_dim()) {
        throw ShapeError("PCA expects dimension " + std::to_string(input_dim()) + ", got " +
                         std::to_string(x.size()));
    }
    std::vector<double> y(output_dim(), 0.0);
    for (std::size_t c = 0; c < output_dim(); ++c) {
        const auto &row = components[c];
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            acc += row[j] * (x[j] - mean[j]);
        }
        y[c] = acc;
    }
    return y;
}

std::vector<double> PcaModel::back_project(std::span<const double> y) const {
    if (y.size() != output_dim()) {
        throw ShapeError("PCA back-projection expects dimension " + std::to_string(output_dim()) + ", got " +
                         std::to_string(y.size()));
    }
    std::vector<double> x = mean;
    for (std::size_t c = 0; c < output_dim(); ++c) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] += y[c] * components[c][j];
        }
    }
    return x;
}

std::size_t PcaTarget::resolve(std::size_t input_dim) const {
    std::size_t d = 0;
    if (dim) {
        d = *dim;
    } else if (fraction) {
        if (!(*fraction > 0.0 && *fraction <= 1.0)) {
            throw ConfigError("PCA fraction must lie in (0, 1]");
        }
        d = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(*fraction * static_cast<double>(input_dim) + 0.5)));
    } else {
        throw ConfigError("PCA target needs a dimension or a fraction");
    }
    if (d < 1) {
        throw ConfigError("PCA target dimension must be >= 1");
    }
    if (d > input_dim) {
        throw ConfigError("PCA target dimension " + std::to_string(d) + " exceeds input dimension " +
                          std::to_string(input_dim));
    }
    return d;
}

PcaModel fit_pca(const std::vector<const DomainDataset *> &datasets, const PcaTarget &target) {
    if (datasets.empty()) {
        throw DataError("fit_pca needs at least one dataset");
    }
    const std::size_t d = datasets.front()->dim;
    std::size_t n = 0;
    for (const DomainDataset *ds : datasets) {
        ds->validate();
        if (ds->dim != d) {
            throw DataError("fit_pca: datasets disagree on dimension");
        }
        n += ds->size();
    }
    if (n < 2) {
        throw DataError("fit_pca needs at least 2 pooled windows, got " + std::to_string(n));
    }
    const std::size_t out_dim = target.resolve(d);

    Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::Index row = 0;
    for (const DomainDataset *ds : datasets) {
        for (const auto &w : ds->windows) {
            data.row(row++) = Eigen::Map<const Eigen::RowVectorXd>(w.data(), static_cast<Eigen::Index>(d));
        }
    }
    const Eigen::RowVectorXd mean = data.colwise().mean();
    data.rowwise() -= mean;

    // Wide data (many more dimensions than windows) goes through the Gram matrix,
    // which shares its non-zero spectrum with the covariance.
    const bool use_gram = n < d && out_dim < n;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd directions;  // columns are unit eigenvectors of the covariance
    const double denom = static_cast<double>(n - 1);
    if (use_gram) {
        const Eigen::MatrixXd gram = (data * data.transpose()) / denom;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) {
            throw DataError("PCA eigendecomposition failed");
        }
        eigenvalues = solver.eigenvalues();
        directions = data.transpose() * solver.eigenvectors();
        for (Eigen::Index c = 0; c < directions.cols(); ++c) {
            const double norm = directions.col(c).norm();
            if (norm > 0.0) {
                directions.col(c) /= norm;
            }
        }
    } else {
        const Eigen::MatrixXd cov = (data.transpose() * data) / denom;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) {
            throw DataError("PCA eigendecomposition failed");
        }
        eigenvalues = solver.eigenvalues();
        directions = solver.eigenvectors();
    }

    const double total_variance = data.squaredNorm() / denom;
    if (!(total_variance > 0.0)) {
        throw DataError("PCA input has zero variance");
    }

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    // Eigen sorts ascending; walk from the top.
    const Eigen::Index count = eigenvalues.size();
    for (std::size_t c = 0; c < out_dim; ++c) {
        const Eigen::Index idx = count - 1 - static_cast<Eigen::Index>(c);
        Eigen::VectorXd v = directions.col(idx);
        // Deterministic sign: the largest-magnitude entry is positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) {
            v = -v;
        }
        model.components.emplace_back(v.data(), v.data() + d);
        model.explained.push_back(std::max(0.0, eigenvalues(idx)) / total_variance);
    }
    return model;
}

DomainDataset apply_pca(const PcaModel &model, const DomainDataset &dataset) {
    if (dataset.dim != model.input_dim()) {
        throw DataError("PCA fitted on dimension " + std::to_string(model.input_dim()) + " applied to dimension " +
                        std::to_string(dataset.dim));
    }
    DomainDataset out;
    out.subject_id = dataset.subject_id;
    out.dim = model.output_dim();
    out.labels = dataset.labels;
    out.num_classes = dataset.num_classes;
    out.class_names = dataset.class_names;
    out.windows.reserve(dataset.size());
    for (const auto &w : dataset.windows) {
        out.windows.push_back(model.project(w));
    }
    return out;
}

double reconstruction_error(const PcaModel &model, const DomainDataset &dataset) {
    if (dataset.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto &w : dataset.windows) {
        const auto back = model.back_project(model.project(w));
        for (std::size_t j = 0; j < w.size(); ++j) {
            total += (back[j] - w[j]) * (back[j] - w[j]);
        }
    }
    return total / static_cast<double>(dataset.size());
}

}  // namespace advhar
