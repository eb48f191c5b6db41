#include "advhar/recording.hpp"

#include "advhar/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace advhar {

bool RawRecording::has_missing() const {
    for (const auto &frame : frames) {
        for (double v : frame) {
            if (std::isnan(v)) {
                return true;
            }
        }
    }
    return false;
}

void RawRecording::validate() const {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].size() != channel_names.size()) {
            throw DataError("recording '" + subject_id + "': frame " + std::to_string(i) + " has " +
                            std::to_string(frames[i].size()) + " channels, expected " +
                            std::to_string(channel_names.size()));
        }
    }
    if (labels) {
        if (labels->size() != frames.size()) {
            throw DataError("recording '" + subject_id + "': " + std::to_string(labels->size()) + " labels for " +
                            std::to_string(frames.size()) + " frames");
        }
        for (int y : *labels) {
            if (y < 0 || static_cast<std::size_t>(y) >= class_names.size()) {
                throw DataError("recording '" + subject_id + "': label index " + std::to_string(y) +
                                " outside the class vocabulary");
            }
        }
    }
    if (!(sample_rate > 0.0)) {
        throw DataError("recording '" + subject_id + "': sample rate must be positive");
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool is_missing_token(const std::string &s) {
    if (s.size() != 3) {
        return false;
    }
    return std::tolower(static_cast<unsigned char>(s[0])) == 'n' &&
           std::tolower(static_cast<unsigned char>(s[1])) == 'a' &&
           std::tolower(static_cast<unsigned char>(s[2])) == 'n';
}

std::optional<double> parse_double(const std::string &s) {
    double v = 0.0;
    const char *first = s.data();
    const char *last = s.data() + s.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::size_t column_index(const std::vector<std::string> &header, const std::string &name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw DataError("line 1: missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

struct PendingSubject {
    std::vector<std::vector<double>> frames;
    std::vector<std::string> labels;
    std::vector<std::size_t> lines;
};

}  // namespace

std::vector<RawRecording> parse_recordings(const std::string &csv_text, const CsvSchema &schema) {
    if (!(schema.sample_rate > 0.0)) {
        throw ConfigError("sample_rate must be positive");
    }
    std::istringstream in(csv_text);
    std::string line;
    std::size_t line_no = 0;

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) {
        throw DataError("recording file is empty: no header row");
    }
    for (auto &h : header) {
        h = trim(h);
    }
    const std::size_t subject_col = column_index(header, schema.subject_column);
    const std::size_t label_col = column_index(header, schema.label_column);
    std::vector<std::size_t> channel_cols;
    std::vector<std::string> channel_names;
    if (schema.channel_columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i != subject_col && i != label_col) {
                channel_cols.push_back(i);
                channel_names.push_back(header[i]);
            }
        }
    } else {
        for (const auto &name : schema.channel_columns) {
            channel_cols.push_back(column_index(header, name));
            channel_names.push_back(name);
        }
    }
    if (channel_cols.empty()) {
        throw DataError("line 1: no channel columns");
    }

    std::vector<std::string> order;
    std::map<std::string, PendingSubject> subjects;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " cells, found " + std::to_string(cells.size()));
        }
        const std::string subject = trim(cells[subject_col]);
        if (subject.empty()) {
            throw DataError("line " + std::to_string(line_no) + ": empty subject");
        }
        std::vector<double> frame;
        frame.reserve(channel_cols.size());
        for (std::size_t k = 0; k < channel_cols.size(); ++k) {
            const std::string cell = trim(cells[channel_cols[k]]);
            if (is_missing_token(cell)) {
                frame.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            const auto value = parse_double(cell);
            if (!value) {
                throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + cell + "' in column '" +
                                channel_names[k] + "'");
            }
            frame.push_back(*value);
        }
        auto [it, inserted] = subjects.try_emplace(subject);
        if (inserted) {
            order.push_back(subject);
        }
        it->second.frames.push_back(std::move(frame));
        it->second.labels.push_back(trim(cells[label_col]));
        it->second.lines.push_back(line_no);
    }
    if (order.empty()) {
        throw DataError("recording file has a header but no data rows");
    }

    std::vector<std::string> classes = schema.class_names;
    if (classes.empty()) {
        std::set<std::string> seen;
        for (const auto &[_, pending] : subjects) {
            for (const auto &label : pending.labels) {
                if (!label.empty()) {
                    seen.insert(label);
                }
            }
        }
        classes.assign(seen.begin(), seen.end());
    }
    std::map<std::string, int> class_index;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        class_index[classes[i]] = static_cast<int>(i);
    }

    std::vector<RawRecording> out;
    for (const auto &subject : order) {
        PendingSubject &pending = subjects[subject];
        RawRecording rec;
        rec.subject_id = subject;
        rec.channel_names = channel_names;
        rec.class_names = classes;
        rec.sample_rate = schema.sample_rate;
        rec.frames = std::move(pending.frames);

        const std::size_t annotated =
            static_cast<std::size_t>(std::count_if(pending.labels.begin(), pending.labels.end(),
                                                   [](const std::string &l) { return !l.empty(); }));
        if (annotated > 0 && annotated < pending.labels.size()) {
            for (std::size_t i = 0; i < pending.labels.size(); ++i) {
                if (pending.labels[i].empty()) {
                    throw DataError("line " + std::to_string(pending.lines[i]) + ": subject '" + subject +
                                    "' is annotated elsewhere but this row has no label");
                }
            }
        }
        if (annotated > 0) {
            std::vector<int> labels;
            labels.reserve(pending.labels.size());
            for (std::size_t i = 0; i < pending.labels.size(); ++i) {
                const auto it = class_index.find(pending.labels[i]);
                if (it == class_index.end()) {
                    throw DataError("line " + std::to_string(pending.lines[i]) + ": unknown label '" +
                                    pending.labels[i] + "'");
                }
                labels.push_back(it->second);
            }
            rec.labels = std::move(labels);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<RawRecording> load_recordings(const std::filesystem::path &path, const CsvSchema &schema) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw DataError("cannot open recording file '" + path.string() + "'");
    }
    std::ostringstream text;
    text << file.rdbuf();
    return parse_recordings(text.str(), schema);
}

void write_recordings(const std::filesystem::path &path, const std::vector<RawRecording> &recordings) {
    if (recordings.empty()) {
        throw DataError("nothing to write");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << "subject,label";
    for (const auto &name : recordings.front().channel_names) {
        out << ',' << name;
    }
    out << '\n';
    for (const auto &rec : recordings) {
        rec.validate();
        for (std::size_t i = 0; i < rec.frames.size(); ++i) {
            out << rec.subject_id << ',';
            if (rec.labels) {
                out << rec.class_names[static_cast<std::size_t>((*rec.labels)[i])];
            }
            for (double v : rec.frames[i]) {
                out << ',' << (std::isnan(v) ? std::string("NaN") : format_double(v));
            }
            out << '\n';
        }
    }
}

RawRecording impute_missing(const RawRecording &recording) {
    RawRecording out = recording;
    const std::size_t n = out.frames.size();
    for (std::size_t k = 0; k < out.channel_count(); ++k) {
        std::optional<std::size_t> first_present;
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isnan(out.frames[i][k])) {
                first_present = i;
                break;
            }
        }
        if (!first_present) {
            if (n == 0) {
                continue;
            }
            throw DataError("recording '" + recording.subject_id + "': channel '" + recording.channel_names[k] +
                            "' has no observed values to impute from");
        }
        for (std::size_t i = 0; i < *first_present; ++i) {
            out.frames[i][k] = out.frames[*first_present][k];
        }
        for (std::size_t i = *first_present + 1; i < n; ++i) {
            if (std::isnan(out.frames[i][k])) {
                out.frames[i][k] = out.frames[i - 1][k];
            }
        }
    }
    return out;
}

void NormalizationModel::validate() const {
    if (min.size() != max.size()) {
        throw DataError("normalization model has mismatched min/max lengths");
    }
    for (std::size_t k = 0; k < min.size(); ++k) {
        if (!std::isfinite(min[k]) || !std::isfinite(max[k]) || min[k] > max[k]) {
            throw DataError("normalization range for channel " + std::to_string(k) + " is invalid");
        }
    }
}

double NormalizationModel::normalize(std::size_t channel, double value) const {
    const double lo = min[channel];
    const double hi = max[channel];
    if (hi == lo) {
        return 0.5;
    }
    return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

double NormalizationModel::denormalize(std::size_t channel, double unit) const {
    const double lo = min[channel];
    const double hi = max[channel];
    if (hi == lo) {
        return lo;
    }
    return lo + unit * (hi - lo);
}

NormalizationModel fit_minmax(const std::vector<RawRecording> &recordings) {
    if (recordings.empty()) {
        throw DataError("fit_minmax needs at least one recording");
    }
    const std::size_t channels = recordings.front().channel_count();
    NormalizationModel model;
    model.min.assign(channels, std::numeric_limits<double>::infinity());
    model.max.assign(channels, -std::numeric_limits<double>::infinity());
    for (const auto &rec : recordings) {
        if (rec.channel_count() != channels) {
            throw DataError("fit_minmax: recordings disagree on channel count");
        }
        for (const auto &frame : rec.frames) {
            for (std::size_t k = 0; k < channels; ++k) {
                if (!std::isnan(frame[k])) {
                    model.min[k] = std::min(model.min[k], frame[k]);
                    model.max[k] = std::max(model.max[k], frame[k]);
                }
            }
        }
    }
    for (std::size_t k = 0; k < channels; ++k) {
        if (!std::isfinite(model.min[k])) {
            throw DataError("fit_minmax: channel " + std::to_string(k) + " has no observed values");
        }
    }
    return model;
}

NormalizationModel fit_minmax(const RawRecording &recording) { return fit_minmax(std::vector{recording}); }

NormalizationModel declared_minmax(const std::vector<std::pair<double, double>> &ranges) {
    NormalizationModel model;
    for (const auto &[lo, hi] : ranges) {
        model.min.push_back(lo);
        model.max.push_back(hi);
    }
    model.validate();
    return model;
}

RawRecording apply_minmax(const NormalizationModel &model, const RawRecording &recording) {
    model.validate();
    if (model.channel_count() != recording.channel_count()) {
        throw DataError("normalization model covers " + std::to_string(model.channel_count()) +
                        " channels, recording has " + std::to_string(recording.channel_count()));
    }
    RawRecording out = recording;
    for (auto &frame : out.frames) {
        for (std::size_t k = 0; k < frame.size(); ++k) {
            if (!std::isnan(frame[k])) {
                frame[k] = model.normalize(k, frame[k]);
            }
        }
    }
    return out;
}

}  // namespace advhar
