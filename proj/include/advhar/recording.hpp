#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace advhar {

/// Time-ordered frames of one subject. Missing readings are stored as NaN.
struct RawRecording {
    std::string subject_id;
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> frames;
    /// Per-frame class index into class_names; absent for unannotated subjects.
    std::optional<std::vector<int>> labels;
    std::vector<std::string> class_names;
    double sample_rate = 1.0;

    std::size_t channel_count() const noexcept { return channel_names.size(); }
    std::size_t frame_count() const noexcept { return frames.size(); }
    bool has_missing() const;
    void validate() const;
};

/// Column layout of the recording CSV: a header row, then one row per frame.
struct CsvSchema {
    std::string subject_column = "subject";
    std::string label_column = "label";
    /// Empty means every column other than subject and label, in file order.
    std::vector<std::string> channel_columns;
    /// Empty means the sorted set of labels seen in the file.
    std::vector<std::string> class_names;
    double sample_rate = 1.0;
};

/// One recording per subject in order of first appearance. A label cell left empty
/// marks an unannotated frame; a subject must be fully annotated or not at all.
/// The channel token NaN (any case) marks a missing reading.
std::vector<RawRecording> load_recordings(const std::filesystem::path &path, const CsvSchema &schema);
std::vector<RawRecording> parse_recordings(const std::string &csv_text, const CsvSchema &schema);

/// Writes recordings in the format load_recordings reads.
void write_recordings(const std::filesystem::path &path, const std::vector<RawRecording> &recordings);

/// Per-channel forward-fill, then back-fill for a leading gap.
RawRecording impute_missing(const RawRecording &recording);

struct NormalizationModel {
    std::vector<double> min;
    std::vector<double> max;

    void validate() const;
    std::size_t channel_count() const noexcept { return min.size(); }
    /// (v - min) / (max - min) clamped to [0, 1]; a constant channel maps to 0.5.
    double normalize(std::size_t channel, double value) const;
    double denormalize(std::size_t channel, double unit) const;
};

/// Observed per-channel extremes over all frames of the given recordings (NaN ignored).
NormalizationModel fit_minmax(const std::vector<RawRecording> &recordings);
NormalizationModel fit_minmax(const RawRecording &recording);
/// Model from declared sensor ranges, one (min, max) pair per channel.
NormalizationModel declared_minmax(const std::vector<std::pair<double, double>> &ranges);

RawRecording apply_minmax(const NormalizationModel &model, const RawRecording &recording);

}  // namespace advhar
