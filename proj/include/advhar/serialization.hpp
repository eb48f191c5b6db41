#pragma once

#include "advhar/dataset.hpp"
#include "advhar/evaluation.hpp"
#include "advhar/networks.hpp"
#include "advhar/pca.hpp"
#include "advhar/recording.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace advhar {

using Json = nlohmann::ordered_json;

// Doubles are written in shortest round-trip form, so every load reproduces the
// saved values bit for bit.

Json to_json(const GeneratorSpec &spec);
Json to_json(const DiscriminatorSpec &spec);
Json to_json(const ClassifierSpec &spec);
GeneratorSpec generator_spec_from_json(const Json &j);
DiscriminatorSpec discriminator_spec_from_json(const Json &j);
ClassifierSpec classifier_spec_from_json(const Json &j);

Json to_json(const LayerInfo &layer);

/// Spec, layer descriptors and flat parameter arrays of one network.
Json to_json(const Generator &g);
Json to_json(const Discriminator &d);
Json to_json(const Classifier &c);
Generator generator_from_json(const Json &j);
Discriminator discriminator_from_json(const Json &j);
Classifier classifier_from_json(const Json &j);

struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::uint64_t step_count = 0;
};

struct ClassifierCheckpoint {
    Classifier classifier;
    CheckpointMeta meta;
};

struct BundleCheckpoint {
    ModelBundle bundle;
    CheckpointMeta meta;
};

std::string classifier_checkpoint_text(const Classifier &c, const CheckpointMeta &meta);
std::string bundle_checkpoint_text(const ModelBundle &b, const CheckpointMeta &meta);
ClassifierCheckpoint parse_classifier_checkpoint(const std::string &text);
BundleCheckpoint parse_bundle_checkpoint(const std::string &text);

void save_classifier_checkpoint(const std::filesystem::path &path, const Classifier &c, const CheckpointMeta &meta);
void save_bundle_checkpoint(const std::filesystem::path &path, const ModelBundle &b, const CheckpointMeta &meta);
/// Accepts a classifier checkpoint or a bundle checkpoint (its classifier is taken).
ClassifierCheckpoint load_classifier_checkpoint(const std::filesystem::path &path);
BundleCheckpoint load_bundle_checkpoint(const std::filesystem::path &path);

Json to_json(const DomainDataset &ds);
DomainDataset dataset_from_json(const Json &j);
Json to_json(const NormalizationModel &m);
NormalizationModel normalization_from_json(const Json &j);
Json to_json(const PcaModel &m);
PcaModel pca_from_json(const Json &j);
Json to_json(const ClassificationReport &r);
ClassificationReport report_from_json(const Json &j);

std::string read_text(const std::filesystem::path &path);
/// Writes via a temporary file and rename.
void write_text(const std::filesystem::path &path, const std::string &text);
Json read_json(const std::filesystem::path &path);
void write_json(const std::filesystem::path &path, const Json &j);

}  // namespace advhar
