#pragma once

#include "advhar/recording.hpp"
#include "advhar/tensor.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace advhar {

/// Windowed samples of one subject. Target-role datasets may carry no labels.
struct DomainDataset {
    std::string subject_id;
    std::size_t dim = 0;
    std::vector<std::vector<double>> windows;
    std::optional<std::vector<int>> labels;
    std::size_t num_classes = 0;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return windows.size(); }
    bool empty() const noexcept { return windows.empty(); }
    bool labeled() const noexcept { return labels.has_value(); }

    void validate() const;
    /// Windows at the given indices as an [N x dim] tensor.
    Tensor batch(std::span<const std::size_t> indices) const;
    Tensor all_windows() const;
    /// Per-class window counts; requires labels.
    std::vector<std::size_t> class_counts() const;
    std::vector<std::size_t> indices_of_class(int label) const;
    DomainDataset without_labels() const;
};

/// round-half-up(seconds * rate)
std::size_t window_frames(double window_seconds, double sample_rate);
/// max(1, round-half-up(frames * (1 - overlap)))
std::size_t window_step(std::size_t frames, double overlap_fraction);

/// Windows start at 0, step, 2*step, ... and are flattened frame-major. The window
/// label is the majority frame label; ties go to the label seen first in the window.
/// A recording shorter than one window yields an empty dataset and a warning.
DomainDataset segment_windows(const RawRecording &recording, double window_seconds, double overlap_fraction);
DomainDataset segment_windows_frames(const RawRecording &recording, std::size_t frames, double overlap_fraction);

struct SplitSpec {
    double train = 0.6;
    double val = 0.1;
    double test = 0.3;

    void validate() const;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
};

struct DomainSplits {
    DomainDataset train;
    DomainDataset val;
    DomainDataset test;
};

/// train and val get round(fraction * n), at least one each; test gets the rest. When
/// that leaves test empty, windows are taken back from the largest of train/val.
SplitSizes split_sizes(std::size_t n, const SplitSpec &spec);

/// Contiguous time blocks: train first, then val, then test.
DomainSplits split_domain(const DomainDataset &dataset, const SplitSpec &spec);

/// Concatenates datasets that share dim and class vocabulary.
DomainDataset concatenate(const std::vector<const DomainDataset *> &parts, std::string subject_id);

}  // namespace advhar
