#include "support.hpp"

#include "advhar/config.hpp"
#include "advhar/error.hpp"
#include "advhar/serialization.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

using namespace advhar;
using advhar::testing::labeled_dataset;
using advhar::testing::TempDir;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

template <class Net>
bool same_parameters(const Net &a, const Net &b) {
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i]->name != pb[i]->name || pa[i]->value.shape() != pb[i]->value.shape()) return false;
        for (std::size_t k = 0; k < pa[i]->value.size(); ++k) {
            if (!same_bits(pa[i]->value[k], pb[i]->value[k])) return false;
        }
    }
    return true;
}

// awkward values: subnormals, long mantissas, negative zero
template <class Net>
void scribble(Net &net, std::uint64_t seed) {
    RandomSource rng(seed);
    for (Parameter *p : net.parameters()) {
        for (std::size_t k = 0; k < p->value.size(); ++k) p->value[k] = (rng.uniform() - 0.5) / 3.0;
    }
    auto params = net.parameters();
    params.front()->value[0] = std::numeric_limits<double>::denorm_min();
    params.front()->value[1] = -0.0;
    params.back()->value[0] = 1.0 / 3.0;
}

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("networks round-trip bit for bit") {
    Generator g(GeneratorSpec{9, 2, 3, 4, true, 1});
    Discriminator d(DiscriminatorSpec{9, 2, 0.2, 2});
    Classifier c(ClassifierSpec{9, 8, 3, 3});
    scribble(g, 4);
    scribble(d, 5);
    scribble(c, 6);

    const Generator g2 = generator_from_json(Json::parse(to_json(g).dump()));
    const Discriminator d2 = discriminator_from_json(Json::parse(to_json(d).dump()));
    const Classifier c2 = classifier_from_json(Json::parse(to_json(c).dump()));
    CHECK(same_parameters(g, g2));
    CHECK(same_parameters(d, d2));
    CHECK(same_parameters(c, c2));
    CHECK(std::signbit(g2.parameters().front()->value[1]));
    CHECK(g2.spec().noise_dim == 4);
    CHECK(d2.spec().leaky_slope == 0.2);
    CHECK(c2.spec().num_classes == 3);
    CHECK(to_json(g2).dump() == to_json(g).dump());
}

TEST_CASE("malformed network documents are rejected") {
    const Classifier c(ClassifierSpec{9, 8, 3, 3});
    Json j = to_json(c);
    Json wrong_spec = j;
    wrong_spec["spec"]["input_dim"] = 10;
    CHECK_THROWS(classifier_from_json(wrong_spec));
    CHECK_THROWS(classifier_from_json(Json::object()));
    CHECK_THROWS(generator_from_json(j));
}

TEST_CASE("checkpoints round-trip and their text is stable") {
    ModelBundle bundle(GeneratorSpec{8, 1, 2, 2, true, 1}, DiscriminatorSpec{8, 1, 0.2, 2},
                       ClassifierSpec{8, 4, 2, 3});
    scribble(bundle.classifier, 7);
    const CheckpointMeta meta{42, 1234};

    const std::string text = bundle_checkpoint_text(bundle, meta);
    const BundleCheckpoint back = parse_bundle_checkpoint(text);
    CHECK(back.meta.seed == 42);
    CHECK(back.meta.step_count == 1234);
    CHECK(same_parameters(back.bundle.classifier, bundle.classifier));
    CHECK(same_parameters(back.bundle.generator, bundle.generator));
    CHECK(bundle_checkpoint_text(back.bundle, back.meta) == text);

    const std::string ctext = classifier_checkpoint_text(bundle.classifier, meta);
    CHECK(classifier_checkpoint_text(parse_classifier_checkpoint(ctext).classifier, meta) == ctext);

    TempDir dir("ckpt");
    save_bundle_checkpoint(dir.path() / "bundle.json", bundle, meta);
    save_classifier_checkpoint(dir.path() / "classifier.json", bundle.classifier, meta);
    CHECK(read_text(dir.path() / "bundle.json") == text);
    // a bundle file also serves as a classifier checkpoint
    CHECK(same_parameters(load_classifier_checkpoint(dir.path() / "bundle.json").classifier, bundle.classifier));
    CHECK(same_parameters(load_classifier_checkpoint(dir.path() / "classifier.json").classifier, bundle.classifier));
    CHECK_THROWS(load_bundle_checkpoint(dir.path() / "classifier.json"));
    CHECK_THROWS_AS(load_classifier_checkpoint(dir.path() / "missing.json"), DataError);
    write_file(dir.path() / "junk.json", "{ not json");
    CHECK_THROWS_AS(load_classifier_checkpoint(dir.path() / "junk.json"), DataError);
}

TEST_CASE("datasets, normalization, PCA and reports round-trip") {
    DomainDataset ds = labeled_dataset({3, 4}, 5, 8);
    ds.windows[0][0] = 0.1 + 0.2;
    const DomainDataset back = dataset_from_json(Json::parse(to_json(ds).dump()));
    CHECK(back.subject_id == ds.subject_id);
    CHECK(back.labels == ds.labels);
    CHECK(back.class_names == ds.class_names);
    CHECK(back.num_classes == ds.num_classes);
    REQUIRE(back.windows.size() == ds.windows.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t k = 0; k < ds.dim; ++k) CHECK(same_bits(back.windows[i][k], ds.windows[i][k]));
    }
    const DomainDataset unlabeled = dataset_from_json(to_json(ds.without_labels()));
    CHECK_FALSE(unlabeled.labeled());

    const NormalizationModel norm{{-1.5, 0.0}, {2.0 / 3.0, 9.0}};
    const NormalizationModel norm2 = normalization_from_json(Json::parse(to_json(norm).dump()));
    CHECK(norm2.min == norm.min);
    CHECK(norm2.max == norm.max);

    const PcaModel pca = fit_pca({&ds}, PcaTarget::dimension(3));
    const PcaModel pca2 = pca_from_json(Json::parse(to_json(pca).dump()));
    CHECK(pca2.mean == pca.mean);
    CHECK(pca2.components == pca.components);
    CHECK(pca2.explained == pca.explained);

    const ClassificationReport r = report(confusion({0, 1, 1, 2}, {0, 1, 2, 2}, 3), {"a", "b", "c"});
    const ClassificationReport r2 = report_from_json(Json::parse(to_json(r).dump()));
    CHECK(r2.weighted_f1 == r.weighted_f1);
    CHECK(r2.total == r.total);
    CHECK(render_report(r2) == render_report(r));
}

TEST_CASE("write_text replaces files whole") {
    TempDir dir("write");
    const auto path = dir.path() / "nested" / "out.txt";
    write_text(path, "first\n");
    write_text(path, "second\n");
    CHECK(read_text(path) == "second\n");
    for (const auto &entry : std::filesystem::directory_iterator(path.parent_path())) {
        CHECK(entry.path().filename() == "out.txt");
    }
}

TEST_CASE("config documents round-trip") {
    const RunConfig cfg = benchmark_config();
    const Json doc = to_json(cfg);
    const RunConfig back = run_config_from_json(Json::parse(doc.dump()));
    CHECK(to_json(back) == doc);
    CHECK(back.seed == cfg.seed);
    CHECK(back.trainer.epochs == 150);
    CHECK(back.model.generator_blocks == 1);
    REQUIRE(back.preprocess.pca.has_value());
    CHECK(back.preprocess.pca->dim == std::optional<std::size_t>(50));

    // absent keys keep defaults
    const RunConfig sparse = run_config_from_json(Json::parse(R"({"cli": {"seed": 99}})"));
    CHECK(sparse.seed == 99);
    CHECK(to_json(sparse)["adversarial_trainer"] == to_json(RunConfig{})["adversarial_trainer"]);
}

TEST_CASE("unknown config keys are errors") {
    CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"cli": {"sed": 1}})")), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"extras": {}})")), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"adversarial_trainer": {"epochs": "many"}})")),
                    ConfigError);
    Json base = to_json(RunConfig{});
    CHECK_THROWS_AS(merge_config(base, Json::parse(R"({"evaluation": {"digits": 3}})")), ConfigError);
}

TEST_CASE("overrides address nested keys") {
    Json doc = to_json(RunConfig{});
    apply_override(doc, "adversarial_trainer.epochs=3");
    apply_override(doc, "adversarial_trainer.mu=0.5");
    apply_override(doc, "data_pipeline.kind=csv");
    apply_override(doc, "data_pipeline.synthetic.class_counts=[5,6]");
    CHECK(doc["adversarial_trainer"]["epochs"] == 3);
    CHECK(doc["adversarial_trainer"]["mu"] == 0.5);
    CHECK(doc["data_pipeline"]["kind"] == "csv");
    CHECK(doc["data_pipeline"]["synthetic"]["class_counts"] == Json::parse("[5,6]"));
    CHECK_THROWS_AS(apply_override(doc, "adversarial_trainer.epoch=3"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "no equals sign"), ConfigError);
}

TEST_CASE("resolution order: defaults, file, overrides") {
    TempDir dir("cfg");
    const auto file = dir.path() / "run.json";
    write_file(file, R"({"cli": {"seed": 11}, "adversarial_trainer": {"epochs": 5, "mu": 2.0}})");
    const RunConfig cfg = resolve_config(file, {"adversarial_trainer.epochs=6"});
    CHECK(cfg.seed == 11);
    CHECK(cfg.trainer.epochs == 6);
    CHECK(cfg.trainer.mu == 2.0);
    CHECK(cfg.trainer_config().seed == 11);

    const RunConfig preset = resolve_config({}, {"cli.seed=3"}, true);
    CHECK(preset.seed == 3);
    CHECK(preset.model.generator_blocks == 1);

    CHECK_THROWS_AS(resolve_config(dir.path() / "missing.json", {}), ConfigError);
    write_file(file, "{");
    CHECK_THROWS_AS(resolve_config(file, {}), ConfigError);
}

TEST_CASE("invalid settings fail validation") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.report_digits = 20;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(resolve_config({}, {"adversarial_trainer.mu=-1"}), ConfigError);
    CHECK_THROWS_AS(resolve_config({}, {"data_pipeline.split.train=0.95"}), ConfigError);
}
