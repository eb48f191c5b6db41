#include "advhar/serialization.hpp"

#include "advhar/error.hpp"

#include <fstream>
#include <sstream>

namespace advhar {

namespace {

constexpr int kFormatVersion = 1;

template <typename T>
T get(const Json &j, const char *key, const char *what) {
    if (!j.is_object() || !j.contains(key)) {
        throw DataError(std::string(what) + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string(what) + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

Json tensor_json(const Tensor &t) {
    Json j;
    j["shape"] = t.shape();
    j["values"] = t.values();
    return j;
}

Tensor tensor_from_json(const Json &j, const char *what) {
    auto shape = get<Shape>(j, "shape", what);
    auto values = get<std::vector<double>>(j, "values", what);
    if (shape_size(shape) != values.size()) {
        throw DataError(std::string(what) + ": tensor of shape " + shape_string(shape) + " holds " +
                        std::to_string(values.size()) + " values");
    }
    return Tensor(std::move(shape), std::move(values));
}

Json stack_json(const LayerStack &stack) {
    Json layers = Json::array();
    Json params = Json::array();
    for (const auto &layer : stack.layers()) {
        layers.push_back(to_json(layer.info));
        for (const Parameter *p : {&layer.weight, &layer.bias}) {
            Json pj = tensor_json(p->value);
            pj["name"] = p->name;
            params.push_back(std::move(pj));
        }
    }
    Json j;
    j["layers"] = std::move(layers);
    j["parameters"] = std::move(params);
    return j;
}

/// The stack was rebuilt from its spec; check the stored layout matches and copy values.
void load_stack(LayerStack &stack, const Json &j, const char *what) {
    const Json &layers = j.at("layers");
    const auto expected = stack.describe();
    if (!layers.is_array() || layers.size() != expected.size()) {
        throw DataError(std::string(what) + ": architecture has " + std::to_string(expected.size()) +
                        " layers but the checkpoint lists " + std::to_string(layers.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (layers[i] != to_json(expected[i])) {
            throw DataError(std::string(what) + ": layer " + std::to_string(i) +
                            " does not match the architecture rebuilt from the spec");
        }
    }
    const Json &params = j.at("parameters");
    auto targets = stack.parameters();
    if (!params.is_array() || params.size() != targets.size()) {
        throw DataError(std::string(what) + ": expected " + std::to_string(targets.size()) + " parameter arrays");
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto name = get<std::string>(params[i], "name", what);
        if (name != targets[i]->name) {
            throw DataError(std::string(what) + ": parameter '" + name + "' where '" + targets[i]->name +
                            "' was expected");
        }
        Tensor value = tensor_from_json(params[i], what);
        if (value.shape() != targets[i]->value.shape()) {
            throw DataError(std::string(what) + ": parameter '" + name + "' has shape " +
                            shape_string(value.shape()) + ", expected " + shape_string(targets[i]->value.shape()));
        }
        targets[i]->value = std::move(value);
        targets[i]->zero_grad();
    }
}

Json meta_json(const CheckpointMeta &meta) {
    Json j;
    j["seed"] = meta.seed;
    j["step_count"] = meta.step_count;
    return j;
}

CheckpointMeta meta_from_json(const Json &j) {
    return {get<std::uint64_t>(j, "seed", "checkpoint"), get<std::uint64_t>(j, "step_count", "checkpoint")};
}

Json parse_json_text(const std::string &text, const std::string &what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw DataError(what + " is not valid JSON: " + e.what());
    }
}

void check_header(const Json &j, const std::string &kind) {
    const auto found = get<std::string>(j, "kind", "checkpoint");
    if (found != kind) {
        throw DataError("expected a " + kind + " checkpoint, found '" + found + "'");
    }
    if (get<int>(j, "format", "checkpoint") != kFormatVersion) {
        throw DataError("unsupported checkpoint format version");
    }
}

}  // namespace

Json to_json(const GeneratorSpec &s) {
    return Json{{"input_dim", s.input_dim}, {"blocks", s.blocks},           {"filters", s.filters},
                {"noise_dim", s.noise_dim}, {"input_skip", s.input_skip}, {"seed", s.seed}};
}

Json to_json(const DiscriminatorSpec &s) {
    return Json{{"input_dim", s.input_dim}, {"base_filters", s.base_filters}, {"leaky_slope", s.leaky_slope},
                {"seed", s.seed}};
}

Json to_json(const ClassifierSpec &s) {
    return Json{{"input_dim", s.input_dim}, {"base_filters", s.base_filters}, {"num_classes", s.num_classes},
                {"seed", s.seed}};
}

GeneratorSpec generator_spec_from_json(const Json &j) {
    GeneratorSpec s;
    s.input_dim = get<std::size_t>(j, "input_dim", "generator spec");
    s.blocks = get<std::size_t>(j, "blocks", "generator spec");
    s.filters = get<std::size_t>(j, "filters", "generator spec");
    s.noise_dim = get<std::size_t>(j, "noise_dim", "generator spec");
    s.input_skip = get<bool>(j, "input_skip", "generator spec");
    s.seed = get<std::uint64_t>(j, "seed", "generator spec");
    return s;
}

DiscriminatorSpec discriminator_spec_from_json(const Json &j) {
    DiscriminatorSpec s;
    s.input_dim = get<std::size_t>(j, "input_dim", "discriminator spec");
    s.base_filters = get<std::size_t>(j, "base_filters", "discriminator spec");
    s.leaky_slope = get<double>(j, "leaky_slope", "discriminator spec");
    s.seed = get<std::uint64_t>(j, "seed", "discriminator spec");
    return s;
}

ClassifierSpec classifier_spec_from_json(const Json &j) {
    ClassifierSpec s;
    s.input_dim = get<std::size_t>(j, "input_dim", "classifier spec");
    s.base_filters = get<std::size_t>(j, "base_filters", "classifier spec");
    s.num_classes = get<std::size_t>(j, "num_classes", "classifier spec");
    s.seed = get<std::uint64_t>(j, "seed", "classifier spec");
    return s;
}

Json to_json(const LayerInfo &l) {
    Json j{{"kind", to_string(l.kind)},       {"in_channels", l.in_channels},         {"filters", l.filters},
           {"kernel", l.kernel},              {"stride", l.stride},                   {"padding", to_string(l.padding)},
           {"activation", to_string(l.activation)}, {"length", l.length}};
    if (l.activation.kind == ActivationKind::leaky_relu) {
        j["slope"] = l.activation.slope;
    }
    return j;
}

Json to_json(const Generator &g) {
    Json j{{"network", "generator"}, {"spec", to_json(g.spec())}};
    j.update(stack_json(g.stack()));
    return j;
}

Json to_json(const Discriminator &d) {
    Json j{{"network", "discriminator"}, {"spec", to_json(d.spec())}};
    j.update(stack_json(d.stack()));
    return j;
}

Json to_json(const Classifier &c) {
    Json j{{"network", "classifier"}, {"spec", to_json(c.spec())}};
    j.update(stack_json(c.stack()));
    return j;
}

Generator generator_from_json(const Json &j) {
    Generator g(generator_spec_from_json(j.at("spec")));
    load_stack(g.stack(), j, "generator");
    return g;
}

Discriminator discriminator_from_json(const Json &j) {
    Discriminator d(discriminator_spec_from_json(j.at("spec")));
    load_stack(d.stack(), j, "discriminator");
    return d;
}

Classifier classifier_from_json(const Json &j) {
    Classifier c(classifier_spec_from_json(j.at("spec")));
    load_stack(c.stack(), j, "classifier");
    return c;
}

std::string classifier_checkpoint_text(const Classifier &c, const CheckpointMeta &meta) {
    Json j{{"kind", "classifier"}, {"format", kFormatVersion}};
    j.update(meta_json(meta));
    j["classifier"] = to_json(c);
    return j.dump(1) + "\n";
}

std::string bundle_checkpoint_text(const ModelBundle &b, const CheckpointMeta &meta) {
    Json j{{"kind", "bundle"}, {"format", kFormatVersion}};
    j.update(meta_json(meta));
    j["generator"] = to_json(b.generator);
    j["discriminator"] = to_json(b.discriminator);
    j["classifier"] = to_json(b.classifier);
    return j.dump(1) + "\n";
}

ClassifierCheckpoint parse_classifier_checkpoint(const std::string &text) {
    const Json j = parse_json_text(text, "checkpoint");
    const auto kind = get<std::string>(j, "kind", "checkpoint");
    if (kind != "classifier" && kind != "bundle") {
        throw DataError("expected a classifier or bundle checkpoint, found '" + kind + "'");
    }
    check_header(j, kind);
    try {
        return {classifier_from_json(j.at("classifier")), meta_from_json(j)};
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

BundleCheckpoint parse_bundle_checkpoint(const std::string &text) {
    const Json j = parse_json_text(text, "checkpoint");
    check_header(j, "bundle");
    try {
        BundleCheckpoint out;
        out.bundle.generator = generator_from_json(j.at("generator"));
        out.bundle.discriminator = discriminator_from_json(j.at("discriminator"));
        out.bundle.classifier = classifier_from_json(j.at("classifier"));
        out.meta = meta_from_json(j);
        return out;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_classifier_checkpoint(const std::filesystem::path &path, const Classifier &c, const CheckpointMeta &meta) {
    write_text(path, classifier_checkpoint_text(c, meta));
}

void save_bundle_checkpoint(const std::filesystem::path &path, const ModelBundle &b, const CheckpointMeta &meta) {
    write_text(path, bundle_checkpoint_text(b, meta));
}

ClassifierCheckpoint load_classifier_checkpoint(const std::filesystem::path &path) {
    return parse_classifier_checkpoint(read_text(path));
}

BundleCheckpoint load_bundle_checkpoint(const std::filesystem::path &path) {
    return parse_bundle_checkpoint(read_text(path));
}

Json to_json(const DomainDataset &ds) {
    Json j{{"subject_id", ds.subject_id},
           {"dim", ds.dim},
           {"num_classes", ds.num_classes},
           {"class_names", ds.class_names}};
    j["labels"] = ds.labels ? Json(*ds.labels) : Json(nullptr);
    j["windows"] = ds.windows;
    return j;
}

DomainDataset dataset_from_json(const Json &j) {
    DomainDataset ds;
    ds.subject_id = get<std::string>(j, "subject_id", "dataset");
    ds.dim = get<std::size_t>(j, "dim", "dataset");
    ds.num_classes = get<std::size_t>(j, "num_classes", "dataset");
    ds.class_names = get<std::vector<std::string>>(j, "class_names", "dataset");
    if (j.contains("labels") && !j.at("labels").is_null()) {
        ds.labels = get<std::vector<int>>(j, "labels", "dataset");
    }
    ds.windows = get<std::vector<std::vector<double>>>(j, "windows", "dataset");
    try {
        ds.validate();
    } catch (const Error &e) {
        throw DataError(std::string("dataset '") + ds.subject_id + "': " + e.what());
    }
    return ds;
}

Json to_json(const NormalizationModel &m) { return Json{{"min", m.min}, {"max", m.max}}; }

NormalizationModel normalization_from_json(const Json &j) {
    NormalizationModel m;
    m.min = get<std::vector<double>>(j, "min", "normalization model");
    m.max = get<std::vector<double>>(j, "max", "normalization model");
    m.validate();
    return m;
}

Json to_json(const PcaModel &m) {
    return Json{{"mean", m.mean}, {"components", m.components}, {"explained", m.explained}};
}

PcaModel pca_from_json(const Json &j) {
    PcaModel m;
    m.mean = get<std::vector<double>>(j, "mean", "pca model");
    m.components = get<std::vector<std::vector<double>>>(j, "components", "pca model");
    m.explained = get<std::vector<double>>(j, "explained", "pca model");
    for (const auto &row : m.components) {
        if (row.size() != m.mean.size()) {
            throw DataError("pca model: component length differs from the mean");
        }
    }
    return m;
}

Json to_json(const ClassificationReport &r) {
    Json classes = Json::array();
    for (const auto &c : r.classes) {
        classes.push_back(Json{{"class", c.name},
                               {"precision", c.precision},
                               {"recall", c.recall},
                               {"f1", c.f1},
                               {"support", c.support}});
    }
    return Json{{"classes", classes},
                {"accuracy", r.accuracy},
                {"weighted_precision", r.weighted_precision},
                {"weighted_recall", r.weighted_recall},
                {"weighted_f1", r.weighted_f1},
                {"total", r.total}};
}

ClassificationReport report_from_json(const Json &j) {
    ClassificationReport r;
    for (const Json &c : j.at("classes")) {
        r.classes.push_back({get<std::string>(c, "class", "report"), get<double>(c, "precision", "report"),
                             get<double>(c, "recall", "report"), get<double>(c, "f1", "report"),
                             get<std::size_t>(c, "support", "report")});
    }
    r.accuracy = get<double>(j, "accuracy", "report");
    r.weighted_precision = get<double>(j, "weighted_precision", "report");
    r.weighted_recall = get<double>(j, "weighted_recall", "report");
    r.weighted_f1 = get<double>(j, "weighted_f1", "report");
    r.total = get<std::size_t>(j, "total", "report");
    return r;
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + path.string());
        }
        out << text;
        if (!out) {
            throw DataError("failed writing " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Json read_json(const std::filesystem::path &path) { return parse_json_text(read_text(path), path.string()); }

void write_json(const std::filesystem::path &path, const Json &j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace advhar
