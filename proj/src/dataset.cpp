#include "advhar/dataset.hpp"

#include "advhar/error.hpp"
#include "advhar/log.hpp"

#include <algorithm>
#include <cmath>

namespace advhar {

void DomainDataset::validate() const {
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].size() != dim) {
            throw DataError("dataset '" + subject_id + "': window " + std::to_string(i) + " has dimension " +
                            std::to_string(windows[i].size()) + ", expected " + std::to_string(dim));
        }
    }
    if (labels) {
        if (labels->size() != windows.size()) {
            throw DataError("dataset '" + subject_id + "': label count does not match window count");
        }
        for (int y : *labels) {
            if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
                throw DataError("dataset '" + subject_id + "': label " + std::to_string(y) + " outside [0, " +
                                std::to_string(num_classes) + ")");
            }
        }
    }
}

Tensor DomainDataset::batch(std::span<const std::size_t> indices) const {
    if (indices.empty()) {
        throw ContractError("cannot build an empty batch");
    }
    Tensor out(Shape{indices.size(), dim});
    auto data = out.data();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto &w = windows.at(indices[i]);
        std::copy(w.begin(), w.end(), data.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    return out;
}

Tensor DomainDataset::all_windows() const {
    std::vector<std::size_t> idx(windows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
    }
    return batch(idx);
}

std::vector<std::size_t> DomainDataset::class_counts() const {
    if (!labels) {
        throw ContractError("dataset '" + subject_id + "' has no labels");
    }
    std::vector<std::size_t> counts(num_classes, 0);
    for (int y : *labels) {
        counts[static_cast<std::size_t>(y)] += 1;
    }
    return counts;
}

std::vector<std::size_t> DomainDataset::indices_of_class(int label) const {
    if (!labels) {
        throw ContractError("dataset '" + subject_id + "' has no labels");
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels->size(); ++i) {
        if ((*labels)[i] == label) {
            out.push_back(i);
        }
    }
    return out;
}

DomainDataset DomainDataset::without_labels() const {
    DomainDataset out = *this;
    out.labels.reset();
    return out;
}

namespace {

std::size_t round_half_up(double x) {
    // A tiny tolerance absorbs representation error such as 5 * 0.3 = 1.4999...
    return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace

std::size_t window_frames(double window_seconds, double sample_rate) {
    if (!(window_seconds > 0.0) || !(sample_rate > 0.0)) {
        throw ConfigError("window length and sample rate must be positive");
    }
    const std::size_t frames = round_half_up(window_seconds * sample_rate);
    if (frames < 1) {
        throw ConfigError("window of " + std::to_string(window_seconds) + " s at " + std::to_string(sample_rate) +
                          " Hz is shorter than one frame");
    }
    return frames;
}

std::size_t window_step(std::size_t frames, double overlap_fraction) {
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
        throw ConfigError("overlap fraction must lie in [0, 1)");
    }
    return std::max<std::size_t>(1, round_half_up(static_cast<double>(frames) * (1.0 - overlap_fraction)));
}

DomainDataset segment_windows_frames(const RawRecording &recording, std::size_t frames, double overlap_fraction) {
    recording.validate();
    if (recording.has_missing()) {
        throw DataError("recording '" + recording.subject_id + "' still has missing values; impute first");
    }
    const std::size_t step = window_step(frames, overlap_fraction);
    const std::size_t channels = recording.channel_count();

    DomainDataset out;
    out.subject_id = recording.subject_id;
    out.dim = frames * channels;
    out.num_classes = recording.class_names.size();
    out.class_names = recording.class_names;
    if (recording.labels) {
        out.labels.emplace();
    }
    if (recording.frame_count() < frames) {
        warn("recording '" + recording.subject_id + "' has " + std::to_string(recording.frame_count()) +
             " frames, shorter than one window of " + std::to_string(frames) + "; no windows produced");
        return out;
    }
    for (std::size_t start = 0; start + frames <= recording.frame_count(); start += step) {
        std::vector<double> window;
        window.reserve(out.dim);
        for (std::size_t f = start; f < start + frames; ++f) {
            window.insert(window.end(), recording.frames[f].begin(), recording.frames[f].end());
        }
        out.windows.push_back(std::move(window));
        if (recording.labels) {
            std::vector<std::size_t> votes(out.num_classes, 0);
            for (std::size_t f = start; f < start + frames; ++f) {
                votes[static_cast<std::size_t>((*recording.labels)[f])] += 1;
            }
            const std::size_t best = *std::max_element(votes.begin(), votes.end());
            int winner = -1;
            for (std::size_t f = start; f < start + frames; ++f) {
                const int y = (*recording.labels)[f];
                if (votes[static_cast<std::size_t>(y)] == best) {
                    winner = y;
                    break;
                }
            }
            out.labels->push_back(winner);
        }
    }
    return out;
}

DomainDataset segment_windows(const RawRecording &recording, double window_seconds, double overlap_fraction) {
    return segment_windows_frames(recording, window_frames(window_seconds, recording.sample_rate),
                                  overlap_fraction);
}

void SplitSpec::validate() const {
    for (double f : {train, val, test}) {
        if (!(f > 0.0 && f < 1.0)) {
            throw ConfigError("split fractions must each lie in (0, 1)");
        }
    }
    if (std::abs(train + val + test - 1.0) > 1e-12) {
        throw ConfigError("split fractions must sum to 1");
    }
}

SplitSizes split_sizes(std::size_t n, const SplitSpec &spec) {
    spec.validate();
    SplitSizes s;
    s.train = std::max<std::size_t>(1, round_half_up(spec.train * static_cast<double>(n)));
    s.val = std::max<std::size_t>(1, round_half_up(spec.val * static_cast<double>(n)));
    while (s.train + s.val >= n && (s.train > 1 || s.val > 1)) {
        if (s.train >= s.val) {
            s.train -= 1;
        } else {
            s.val -= 1;
        }
    }
    s.test = s.train + s.val < n ? n - s.train - s.val : 0;
    if (s.train + s.val > n) {
        s.val = n > s.train ? n - s.train : 0;
        s.train = std::min(s.train, n);
    }
    return s;
}

DomainSplits split_domain(const DomainDataset &dataset, const SplitSpec &spec) {
    dataset.validate();
    const SplitSizes sizes = split_sizes(dataset.size(), spec);
    const std::pair<const char *, std::size_t> parts[] = {
        {"train", sizes.train}, {"val", sizes.val}, {"test", sizes.test}};
    for (const auto &[name, count] : parts) {
        if (count == 0) {
            throw DataError("dataset '" + dataset.subject_id + "' with " + std::to_string(dataset.size()) +
                            " windows leaves the " + name + " split empty");
        }
    }
    auto slice = [&](std::size_t begin, std::size_t count) {
        DomainDataset part;
        part.subject_id = dataset.subject_id;
        part.dim = dataset.dim;
        part.num_classes = dataset.num_classes;
        part.class_names = dataset.class_names;
        part.windows.assign(dataset.windows.begin() + static_cast<std::ptrdiff_t>(begin),
                            dataset.windows.begin() + static_cast<std::ptrdiff_t>(begin + count));
        if (dataset.labels) {
            part.labels.emplace(dataset.labels->begin() + static_cast<std::ptrdiff_t>(begin),
                                dataset.labels->begin() + static_cast<std::ptrdiff_t>(begin + count));
        }
        return part;
    };
    return {slice(0, sizes.train), slice(sizes.train, sizes.val), slice(sizes.train + sizes.val, sizes.test)};
}

DomainDataset concatenate(const std::vector<const DomainDataset *> &parts, std::string subject_id) {
    if (parts.empty()) {
        throw ContractError("concatenate needs at least one dataset");
    }
    DomainDataset out;
    out.subject_id = std::move(subject_id);
    out.dim = parts.front()->dim;
    out.num_classes = parts.front()->num_classes;
    out.class_names = parts.front()->class_names;
    const bool labeled = std::all_of(parts.begin(), parts.end(), [](const auto *p) { return p->labeled(); });
    if (labeled) {
        out.labels.emplace();
    }
    for (const DomainDataset *p : parts) {
        if (p->dim != out.dim) {
            throw DataError("cannot concatenate datasets of dimension " + std::to_string(out.dim) + " and " +
                            std::to_string(p->dim));
        }
        out.windows.insert(out.windows.end(), p->windows.begin(), p->windows.end());
        if (labeled) {
            out.labels->insert(out.labels->end(), p->labels->begin(), p->labels->end());
        }
    }
    return out;
}

}  // namespace advhar
