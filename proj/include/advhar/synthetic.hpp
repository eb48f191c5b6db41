#pragma once

#include "advhar/dataset.hpp"
#include "advhar/recording.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace advhar {

/// Per-subject distortion of every frame: x -> mixing * x + offset + noise * N(0, 1).
struct SubjectShift {
    /// Square channels x channels matrix; empty means identity.
    std::vector<std::vector<double>> mixing;
    /// One entry per channel; empty means zero.
    std::vector<double> offset;
    double noise = 0.0;
};

/// Rotates consecutive channel pairs (0,1), (2,3), ... by the given angle and adds a
/// constant offset to every channel. An odd last channel is left unrotated.
SubjectShift rotation_shift(std::size_t channels, double degrees, double offset, double noise);

struct SynthSpec {
    std::size_t num_classes = 4;
    std::size_t channels = 40;
    /// Frames per window; each class has one prototype waveform of this length.
    std::size_t frames = 5;
    /// Window count per class for the source subject.
    std::vector<std::size_t> class_counts{300, 300, 300, 60};
    /// Window count per class for the target subject; empty means class_counts.
    std::vector<std::size_t> target_class_counts;
    /// Prototype amplitudes are drawn from signal_scale * [0.5, 1.5).
    double signal_scale = 0.4;
    /// Standard deviation of the class-conditional noise shared by both subjects.
    double base_noise = 0.6;
    /// Relative per-window amplitude jitter of the prototype.
    double amplitude_jitter = 0.1;
    SubjectShift source_shift;
    SubjectShift target_shift;
    std::uint64_t seed = 7;
    std::string source_subject = "source";
    std::string target_subject = "target";

    void validate() const;
    std::size_t window_dim() const noexcept { return frames * channels; }
    std::vector<std::string> class_names() const;
};

struct SyntheticPair {
    DomainDataset source;
    /// Unlabeled; ground truth lives only in target_labels.
    DomainDataset target;
    std::vector<int> target_labels;
};

/// Class prototypes plus noise form both subjects; each subject then applies its own
/// shift. Windows are emitted in a seeded random class order.
SyntheticPair generate_synthetic_pair(const SynthSpec &spec);

/// The same corpus laid out as frame-level recordings (one window = `frames`
/// consecutive frames), suitable for write_recordings. Target labels are included.
std::vector<RawRecording> synthetic_recordings(const SynthSpec &spec, double sample_rate);

}  // namespace advhar
