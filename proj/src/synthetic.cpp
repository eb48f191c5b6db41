#include "advhar/synthetic.hpp"

#include "advhar/error.hpp"
#include "advhar/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace advhar {

SubjectShift rotation_shift(std::size_t channels, double degrees, double offset, double noise) {
    SubjectShift shift;
    shift.mixing.assign(channels, std::vector<double>(channels, 0.0));
    const double theta = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (std::size_t k = 0; k < channels; ++k) {
        shift.mixing[k][k] = 1.0;
    }
    for (std::size_t k = 0; k + 1 < channels; k += 2) {
        shift.mixing[k][k] = c;
        shift.mixing[k][k + 1] = -s;
        shift.mixing[k + 1][k] = s;
        shift.mixing[k + 1][k + 1] = c;
    }
    shift.offset.assign(channels, offset);
    shift.noise = noise;
    return shift;
}

namespace {

void validate_shift(const SubjectShift &shift, std::size_t channels, const char *who) {
    if (!shift.mixing.empty()) {
        if (shift.mixing.size() != channels) {
            throw ConfigError(std::string(who) + " mixing matrix must be " + std::to_string(channels) + " x " +
                              std::to_string(channels));
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(channels));
        for (std::size_t i = 0; i < channels; ++i) {
            if (shift.mixing[i].size() != channels) {
                throw ConfigError(std::string(who) + " mixing matrix must be square");
            }
            for (std::size_t j = 0; j < channels; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = shift.mixing[i][j];
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
        if (!lu.isInvertible()) {
            throw ConfigError(std::string(who) + " mixing matrix is singular");
        }
    }
    if (!shift.offset.empty() && shift.offset.size() != channels) {
        throw ConfigError(std::string(who) + " offset must have one entry per channel");
    }
    if (!(shift.noise >= 0.0)) {
        throw ConfigError(std::string(who) + " noise amplitude must be non-negative");
    }
}

using Prototypes = std::vector<std::vector<double>>;  // [class][frame * channels + channel]

Prototypes make_prototypes(const SynthSpec &spec) {
    RandomSource rng(mix_seed(spec.seed, 0));
    Prototypes protos(spec.num_classes, std::vector<double>(spec.window_dim()));
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        for (std::size_t k = 0; k < spec.channels; ++k) {
            const double amplitude = spec.signal_scale * (0.5 + rng.uniform());
            const double cycles = 0.5 + 1.5 * rng.uniform();
            const double phase = 2.0 * std::numbers::pi * rng.uniform();
            for (std::size_t f = 0; f < spec.frames; ++f) {
                const double t = static_cast<double>(f) / static_cast<double>(spec.frames);
                protos[c][f * spec.channels + k] = amplitude * std::sin(2.0 * std::numbers::pi * cycles * t + phase);
            }
        }
    }
    return protos;
}

DomainDataset make_subject(const SynthSpec &spec, const Prototypes &protos, const std::vector<std::size_t> &counts,
                           const SubjectShift &shift, const std::string &subject, std::uint64_t stream) {
    RandomSource rng(mix_seed(spec.seed, stream));
    std::vector<int> order;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        order.insert(order.end(), counts[c], static_cast<int>(c));
    }
    rng.shuffle(order);

    DomainDataset ds;
    ds.subject_id = subject;
    ds.dim = spec.window_dim();
    ds.num_classes = spec.num_classes;
    ds.class_names = spec.class_names();
    ds.labels.emplace();
    ds.windows.reserve(order.size());

    std::vector<double> frame(spec.channels);
    for (int label : order) {
        const auto &proto = protos[static_cast<std::size_t>(label)];
        const double gain = 1.0 + spec.amplitude_jitter * rng.normal();
        std::vector<double> window(spec.window_dim());
        for (std::size_t f = 0; f < spec.frames; ++f) {
            for (std::size_t k = 0; k < spec.channels; ++k) {
                frame[k] = gain * proto[f * spec.channels + k] + spec.base_noise * rng.normal();
            }
            for (std::size_t k = 0; k < spec.channels; ++k) {
                double v = 0.0;
                if (shift.mixing.empty()) {
                    v = frame[k];
                } else {
                    for (std::size_t j = 0; j < spec.channels; ++j) {
                        v += shift.mixing[k][j] * frame[j];
                    }
                }
                if (!shift.offset.empty()) {
                    v += shift.offset[k];
                }
                if (shift.noise > 0.0) {
                    v += shift.noise * rng.normal();
                }
                window[f * spec.channels + k] = v;
            }
        }
        ds.windows.push_back(std::move(window));
        ds.labels->push_back(label);
    }
    return ds;
}

}  // namespace

void SynthSpec::validate() const {
    if (num_classes < 2) throw ConfigError("synthetic spec needs at least 2 classes");
    if (channels < 1 || frames < 1) throw ConfigError("synthetic spec needs channels >= 1 and frames >= 1");
    if (class_counts.size() != num_classes) {
        throw ConfigError("synthetic spec needs one source count per class");
    }
    if (!target_class_counts.empty() && target_class_counts.size() != num_classes) {
        throw ConfigError("synthetic spec needs one target count per class");
    }
    for (std::size_t c : class_counts) {
        if (c == 0) throw ConfigError("synthetic class counts must be positive");
    }
    for (std::size_t c : target_class_counts) {
        if (c == 0) throw ConfigError("synthetic class counts must be positive");
    }
    if (!(signal_scale > 0.0)) throw ConfigError("synthetic signal scale must be positive");
    if (!(base_noise >= 0.0) || !(amplitude_jitter >= 0.0)) {
        throw ConfigError("synthetic noise levels must be non-negative");
    }
    validate_shift(source_shift, channels, "source");
    validate_shift(target_shift, channels, "target");
}

std::vector<std::string> SynthSpec::class_names() const {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < num_classes; ++c) {
        names.push_back("class" + std::to_string(c));
    }
    return names;
}

SyntheticPair generate_synthetic_pair(const SynthSpec &spec) {
    spec.validate();
    const Prototypes protos = make_prototypes(spec);
    SyntheticPair pair;
    pair.source = make_subject(spec, protos, spec.class_counts, spec.source_shift, spec.source_subject, 1);
    const auto &target_counts = spec.target_class_counts.empty() ? spec.class_counts : spec.target_class_counts;
    DomainDataset target = make_subject(spec, protos, target_counts, spec.target_shift, spec.target_subject, 2);
    pair.target_labels = *target.labels;
    pair.target = target.without_labels();
    return pair;
}

std::vector<RawRecording> synthetic_recordings(const SynthSpec &spec, double sample_rate) {
    const SyntheticPair pair = generate_synthetic_pair(spec);
    std::vector<std::string> channel_names;
    for (std::size_t k = 0; k < spec.channels; ++k) {
        channel_names.push_back("ch" + std::to_string(k));
    }
    auto to_recording = [&](const DomainDataset &ds, const std::vector<int> &labels) {
        RawRecording rec;
        rec.subject_id = ds.subject_id;
        rec.channel_names = channel_names;
        rec.class_names = spec.class_names();
        rec.sample_rate = sample_rate;
        rec.labels.emplace();
        for (std::size_t i = 0; i < ds.size(); ++i) {
            for (std::size_t f = 0; f < spec.frames; ++f) {
                const auto begin = ds.windows[i].begin() + static_cast<std::ptrdiff_t>(f * spec.channels);
                rec.frames.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(spec.channels));
                rec.labels->push_back(labels[i]);
            }
        }
        return rec;
    };
    return {to_recording(pair.source, *pair.source.labels), to_recording(pair.target, pair.target_labels)};
}

}  // namespace advhar
