#include "support.hpp"

#include "advhar/dataset.hpp"
#include "advhar/error.hpp"
#include "advhar/experiment.hpp"
#include "advhar/log.hpp"
#include "advhar/pca.hpp"
#include "advhar/recording.hpp"
#include "advhar/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

using namespace advhar;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::filesystem::path fixture() { return std::filesystem::path(ADVHAR_TEST_DATA_DIR) / "pamap_fixture.csv"; }

RawRecording single_channel(std::vector<double> values, std::vector<int> labels = {}) {
    RawRecording r;
    r.subject_id = "s";
    r.channel_names = {"a"};
    for (double v : values) r.frames.push_back({v});
    if (!labels.empty()) {
        r.labels = labels;
        int top = *std::max_element(labels.begin(), labels.end());
        for (int i = 0; i <= top; ++i) r.class_names.push_back("c" + std::to_string(i));
    }
    return r;
}

std::vector<double> column(const RawRecording &r, std::size_t c) {
    std::vector<double> out;
    for (const auto &f : r.frames) out.push_back(f[c]);
    return out;
}

bool same_with_nan(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

DomainDataset indexed_dataset(std::size_t n) {
    DomainDataset ds;
    ds.subject_id = "s";
    ds.dim = 1;
    ds.num_classes = 2;
    ds.class_names = {"a", "b"};
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        ds.windows.push_back({static_cast<double>(i)});
        labels.push_back(static_cast<int>(i % 2));
    }
    ds.labels = labels;
    return ds;
}

DomainDataset gaussian_dataset(std::size_t n, const std::vector<double> &stddev, std::uint64_t seed) {
    RandomSource rng(seed);
    DomainDataset ds;
    ds.subject_id = "g";
    ds.dim = stddev.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> w;
        for (double s : stddev) w.push_back(s * rng.normal());
        ds.windows.push_back(w);
    }
    return ds;
}

/// Captures warnings for the lifetime of the object.
struct WarningCapture {
    std::vector<std::string> messages;
    WarningSink previous;
    WarningCapture() {
        previous = set_warning_sink([this](const std::string &m) { messages.push_back(m); });
    }
    ~WarningCapture() { set_warning_sink(previous); }
};

}  // namespace

// ---- ingestion

TEST_CASE("two subjects of four frames load as two recordings") {
    const std::string csv =
        "subject,label,x,y\n"
        "a,walk,1,2\n"
        "a,walk,1.5,2\n"
        "b,sit,0,0\n"
        "a,sit,2,NaN\n"
        "b,sit,1,1\n"
        "a,walk,3,4\n"
        "b,walk,2,2\n"
        "b,walk,3,3\n";
    const auto recs = parse_recordings(csv, CsvSchema{});
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].subject_id == "a");
    CHECK(recs[0].frame_count() == 4);
    CHECK(recs[1].frame_count() == 4);
    CHECK(recs[0].class_names == std::vector<std::string>{"sit", "walk"});
    CHECK(*recs[0].labels == std::vector<int>{1, 1, 0, 1});
    CHECK(column(recs[0], 0) == std::vector<double>{1, 1.5, 2, 3});
    // missing marker keeps the frame
    CHECK(std::isnan(recs[0].frames[2][1]));
    CHECK(recs[0].has_missing());
    CHECK_FALSE(recs[1].has_missing());
}

TEST_CASE("ingestion errors") {
    CHECK_THROWS_AS(parse_recordings("", CsvSchema{}), DataError);
    CHECK_THROWS_AS(parse_recordings("subject,label,x\n", CsvSchema{}), DataError);
    CHECK_THROWS_AS(parse_recordings("subject,x\na,1\n", CsvSchema{}), DataError);
    CHECK_THROWS_AS(parse_recordings("subject,label,x\na,w,1,2\n", CsvSchema{}), DataError);
    CHECK_THROWS_AS(parse_recordings("subject,label,x\na,w,abc\n", CsvSchema{}), DataError);

    CsvSchema closed;
    closed.class_names = {"walk"};
    try {
        parse_recordings("subject,label,x\na,walk,1\na,run,2\n", closed);
        FAIL("unknown label accepted");
    } catch (const DataError &e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    // a subject is fully annotated or not at all
    CHECK_THROWS_AS(parse_recordings("subject,label,x\na,walk,1\na,,2\n", CsvSchema{}), DataError);
    CHECK_THROWS_AS(load_recordings("/nonexistent/file.csv", CsvSchema{}), DataError);
}

TEST_CASE("unannotated subjects load without labels") {
    const auto recs = parse_recordings("subject,label,x\na,walk,1\nb,,2\nb,,3\n", CsvSchema{});
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].labels.has_value());
    CHECK_FALSE(recs[1].labels.has_value());
}

TEST_CASE("explicit channel columns pick and order channels") {
    CsvSchema s;
    s.channel_columns = {"z", "x"};
    const auto recs = parse_recordings("label,x,subject,z\nw,1,a,9\n", s);
    CHECK(recs[0].channel_names == std::vector<std::string>{"z", "x"});
    CHECK(recs[0].frames[0] == std::vector<double>{9, 1});
}

TEST_CASE("the fixture round-trips through write and load") {
    CsvSchema schema;
    schema.sample_rate = 10.0;
    const auto first = load_recordings(fixture(), schema);
    REQUIRE(first.size() == 2);
    std::size_t rows = 0;
    for (const auto &r : first) rows += r.frame_count();
    CHECK(rows == 100);
    CHECK(first[0].channel_count() == 7);
    CHECK(first[0].class_names == std::vector<std::string>{"lying", "sitting", "standing", "walking"});
    CHECK(first[0].has_missing());

    advhar::testing::TempDir dir("fixture");
    write_recordings(dir.path() / "copy.csv", first);
    const auto second = load_recordings(dir.path() / "copy.csv", schema);
    REQUIRE(second.size() == first.size());
    for (std::size_t s = 0; s < first.size(); ++s) {
        CHECK(second[s].subject_id == first[s].subject_id);
        CHECK(second[s].channel_names == first[s].channel_names);
        CHECK(second[s].labels == first[s].labels);
        REQUIRE(second[s].frame_count() == first[s].frame_count());
        for (std::size_t i = 0; i < first[s].frame_count(); ++i) {
            for (std::size_t c = 0; c < first[s].channel_count(); ++c) {
                CHECK(same_with_nan(second[s].frames[i][c], first[s].frames[i][c]));
            }
        }
    }
}

// ---- imputation

TEST_CASE("imputation examples") {
    CHECK(column(impute_missing(single_channel({1, kNaN, 3})), 0) == std::vector<double>{1, 1, 3});
    CHECK(column(impute_missing(single_channel({kNaN, 2})), 0) == std::vector<double>{2, 2});
    CHECK(column(impute_missing(single_channel({kNaN, kNaN, 5, kNaN, 7, kNaN})), 0) ==
          std::vector<double>{5, 5, 5, 5, 7, 7});
    const RawRecording clean = single_channel({4, 5, 6});
    CHECK(impute_missing(clean).frames == clean.frames);
    CHECK_THROWS_AS(impute_missing(single_channel({kNaN, kNaN})), DataError);
}

TEST_CASE("imputation leaves observed values and removes every gap") {
    CsvSchema schema;
    const auto recs = load_recordings(fixture(), schema);
    for (const auto &r : recs) {
        const auto filled = impute_missing(r);
        CHECK_FALSE(filled.has_missing());
        for (std::size_t i = 0; i < r.frame_count(); ++i) {
            for (std::size_t c = 0; c < r.channel_count(); ++c) {
                if (!std::isnan(r.frames[i][c])) CHECK(filled.frames[i][c] == r.frames[i][c]);
            }
        }
    }
}

// ---- min-max

TEST_CASE("min-max examples") {
    const auto m = declared_minmax({{-2.0, 2.0}});
    CHECK(m.normalize(0, 0.0) == 0.5);
    CHECK(m.normalize(0, 2.0) == 1.0);
    CHECK(m.normalize(0, 7.0) == 1.0);
    CHECK(m.normalize(0, -9.0) == 0.0);
    const auto constant = declared_minmax({{3.0, 3.0}});
    CHECK(constant.normalize(0, 3.0) == 0.5);
    CHECK_THROWS(declared_minmax({{1.0, 0.0}}));
}

TEST_CASE("min-max output stays in the unit interval and inverts within range") {
    RandomSource rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const double lo = -10.0 + 5.0 * rng.uniform();
        const double hi = lo + 0.1 + 10.0 * rng.uniform();
        const auto m = declared_minmax({{lo, hi}});
        const double v = lo - 5.0 + (hi - lo + 10.0) * rng.uniform();
        const double u = m.normalize(0, v);
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
        const double inside = lo + (hi - lo) * rng.uniform();
        CHECK(std::abs(m.denormalize(0, m.normalize(0, inside)) - inside) < 1e-9);
    }
}

TEST_CASE("fitted min-max ignores missing readings and pools recordings") {
    const auto a = single_channel({1, kNaN, -3});
    const auto b = single_channel({10, 2});
    const auto m = fit_minmax(std::vector<RawRecording>{a, b});
    CHECK(m.min == std::vector<double>{-3});
    CHECK(m.max == std::vector<double>{10});
    const auto applied = apply_minmax(m, b);
    CHECK(applied.frames[0][0] == 1.0);
}

// ---- segmentation

TEST_CASE("eleven frames, window five, overlap 0.7 gives four windows") {
    std::vector<double> v(11);
    std::iota(v.begin(), v.end(), 0.0);
    const auto ds = segment_windows_frames(single_channel(v, std::vector<int>(11, 0)), 5, 0.7);
    CHECK(window_step(5, 0.7) == 2);
    REQUIRE(ds.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(ds.windows[i][0] == static_cast<double>(2 * i));
    CHECK(ds.dim == 5);
}

TEST_CASE("window length from seconds and sample rate") {
    CHECK(window_frames(1.0, 30.0) == 30);
    CHECK(window_frames(0.25, 10.0) == 3);  // 2.5 rounds half up
    CHECK_THROWS_AS(window_frames(0.01, 10.0), ConfigError);
    auto r = single_channel(std::vector<double>(20, 1.0), std::vector<int>(20, 0));
    r.sample_rate = 4.0;
    CHECK(segment_windows(r, 1.0, 0.5).dim == 4);
}

TEST_CASE("zero overlap tiles the recording") {
    const auto ds = segment_windows_frames(single_channel(std::vector<double>(23, 1.0), std::vector<int>(23, 0)), 5, 0.0);
    CHECK(ds.size() == 4);
}

TEST_CASE("window labels by majority, ties to the earliest label") {
    const auto maj = segment_windows_frames(single_channel({0, 0, 0, 0, 0}, {0, 0, 1, 0, 0}), 5, 0.0);
    CHECK(maj.labels->at(0) == 0);
    const auto tie = segment_windows_frames(single_channel({0, 0, 0, 0}, {2, 1, 1, 2}), 4, 0.0);
    CHECK(tie.labels->at(0) == 2);
    const auto tie2 = segment_windows_frames(single_channel({0, 0, 0, 0}, {1, 2, 2, 1}), 4, 0.0);
    CHECK(tie2.labels->at(0) == 1);
}

TEST_CASE("windows are flattened frame-major") {
    RawRecording r;
    r.subject_id = "s";
    r.channel_names = {"a", "b"};
    r.frames = {{1, 10}, {2, 20}, {3, 30}};
    const auto ds = segment_windows_frames(r, 3, 0.0);
    CHECK(ds.windows[0] == std::vector<double>{1, 10, 2, 20, 3, 30});
    CHECK_FALSE(ds.labeled());
}

TEST_CASE("a recording shorter than one window yields an empty dataset and a warning") {
    WarningCapture capture;
    const auto ds = segment_windows_frames(single_channel({1, 2, 3}, {0, 0, 0}), 5, 0.5);
    CHECK(ds.empty());
    CHECK(capture.messages.size() == 1);
}

TEST_CASE("segmentation is exhaustive and ordered") {
    RandomSource rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        const std::size_t w = 1 + rng.below(10);
        const double overlap = 0.9 * rng.uniform();
        std::vector<double> v(n);
        std::iota(v.begin(), v.end(), 0.0);
        WarningCapture quiet;
        const auto ds = segment_windows_frames(single_channel(v, std::vector<int>(n, 0)), w, overlap);
        const std::size_t step = window_step(w, overlap);
        const std::size_t expected = n < w ? 0 : (n - w) / step + 1;
        REQUIRE(ds.size() == expected);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(ds.windows[i].front() == static_cast<double>(i * step));
            CHECK(ds.windows[i].back() <= static_cast<double>(n - 1));
        }
    }
}

TEST_CASE("segmentation refuses unimputed data") {
    CHECK_THROWS_AS(segment_windows_frames(single_channel({1, kNaN, 3}), 2, 0.0), DataError);
}

// ---- splits

TEST_CASE("split size examples") {
    const auto ten = split_sizes(10, SplitSpec{});
    CHECK(ten.train == 6);
    CHECK(ten.val == 1);
    CHECK(ten.test == 3);
    const auto three = split_sizes(3, SplitSpec{});
    CHECK(three.train == 1);
    CHECK(three.val == 1);
    CHECK(three.test == 1);
    CHECK_THROWS_AS(split_domain(indexed_dataset(2), SplitSpec{}), DataError);
    CHECK_THROWS_AS(SplitSpec({0.5, 0.5, 0.1}).validate(), ConfigError);
    CHECK_THROWS_AS(SplitSpec({1.0, 0.0, 0.0}).validate(), ConfigError);
}

TEST_CASE("splits form a disjoint, exhaustive, order-preserving partition") {
    RandomSource rng(5);
    for (std::size_t n = 3; n <= 150; ++n) {
        const SplitSpec spec = n % 2 ? SplitSpec{} : SplitSpec{0.5, 0.2, 0.3};
        const auto parts = split_domain(indexed_dataset(n), spec);
        CHECK(parts.train.size() >= 1);
        CHECK(parts.val.size() >= 1);
        CHECK(parts.test.size() >= 1);
        std::vector<double> seen;
        for (const auto *p : {&parts.train, &parts.val, &parts.test}) {
            for (const auto &w : p->windows) seen.push_back(w[0]);
            CHECK(p->labels->size() == p->size());
        }
        REQUIRE(seen.size() == n);
        for (std::size_t i = 0; i < n; ++i) CHECK(seen[i] == static_cast<double>(i));
    }
}

// ---- PCA

TEST_CASE("collinear points need one component") {
    DomainDataset ds;
    ds.subject_id = "line";
    ds.dim = 2;
    for (int i = 0; i < 20; ++i) ds.windows.push_back({1.0 + 0.5 * i, 2.0 - 1.5 * i});
    const auto m = fit_pca({&ds}, PcaTarget::dimension(1));
    CHECK(m.explained[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto &w : ds.windows) {
        const auto back = m.back_project(m.project(w));
        CHECK(std::abs(back[0] - w[0]) < 1e-9);
        CHECK(std::abs(back[1] - w[1]) < 1e-9);
    }
}

TEST_CASE("full-dimension PCA is lossless") {
    const auto ds = gaussian_dataset(200, {3, 1, 0.5, 2, 0.1, 1.5}, 8);
    const auto m = fit_pca({&ds}, PcaTarget::dimension(6));
    CHECK(reconstruction_error(m, ds) < 1e-18);
    for (const auto &w : ds.windows) {
        const auto back = m.back_project(m.project(w));
        for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(back[k] - w[k]) < 1e-9);
    }
}

TEST_CASE("diag(4,1,1,1,1) puts half the variance on the first component") {
    const auto ds = gaussian_dataset(10000, {2, 1, 1, 1, 1}, 9);
    const auto m = fit_pca({&ds}, PcaTarget::dimension(5));
    CHECK(std::abs(m.explained[0] - 0.5) < 0.03);
    CHECK(std::abs(std::abs(m.components[0][0]) - 1.0) < 0.05);
}

TEST_CASE("principal directions are orthonormal and explained variance is ordered") {
    RandomSource rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> sd;
        for (int k = 0; k < 8; ++k) sd.push_back(0.1 + 3.0 * rng.uniform());
        const auto ds = gaussian_dataset(300, sd, rng.next_u64());
        const auto m = fit_pca({&ds}, PcaTarget::dimension(5));
        double total = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            total += m.explained[i];
            if (i > 0) CHECK(m.explained[i] <= m.explained[i - 1]);
            for (std::size_t j = 0; j < 5; ++j) {
                double dot = 0.0;
                for (std::size_t k = 0; k < 8; ++k) dot += m.components[i][k] * m.components[j][k];
                CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-8);
            }
        }
        CHECK(total <= 1.0 + 1e-9);
    }
}

TEST_CASE("reconstruction error does not increase with more components") {
    const auto ds = gaussian_dataset(400, {2.5, 0.3, 1.7, 1.0, 0.8, 2.0, 0.05}, 11);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t d = 1; d <= 7; ++d) {
        const double err = reconstruction_error(fit_pca({&ds}, PcaTarget::dimension(d)), ds);
        CHECK(err <= previous + 1e-12);
        previous = err;
    }
}

TEST_CASE("PCA targets and errors") {
    CHECK(PcaTarget::of_input(0.01).resolve(10000) == 100);
    CHECK(PcaTarget::of_input(0.02).resolve(200000) == 4000);
    CHECK(PcaTarget::of_input(0.001).resolve(10) == 1);
    const auto ds = gaussian_dataset(50, {1, 1, 1}, 12);
    CHECK_THROWS_AS(fit_pca({&ds}, PcaTarget::dimension(4)), ConfigError);
    DomainDataset flat;
    flat.subject_id = "flat";
    flat.dim = 3;
    flat.windows = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
    CHECK_THROWS_AS(fit_pca({&flat}, PcaTarget::dimension(1)), DataError);
    DomainDataset one = flat;
    one.windows.resize(1);
    CHECK_THROWS_AS(fit_pca({&one}, PcaTarget::dimension(1)), DataError);
}

TEST_CASE("PCA pools datasets and keeps labels through projection") {
    auto a = gaussian_dataset(100, {1, 2, 3}, 13);
    const auto b = gaussian_dataset(100, {3, 2, 1}, 14);
    a.labels = std::vector<int>(100, 1);
    a.num_classes = 2;
    a.class_names = {"x", "y"};
    const auto m = fit_pca({&a, &b}, PcaTarget::dimension(2));
    const auto projected = apply_pca(m, a);
    CHECK(projected.dim == 2);
    CHECK(projected.labels == a.labels);
    CHECK(projected.class_names == a.class_names);
}

// ---- synthetic corpus

TEST_CASE("synthetic counts follow the imbalance profile") {
    SynthSpec spec;
    spec.num_classes = 3;
    spec.class_counts = {100, 100, 10};
    const auto pair = generate_synthetic_pair(spec);
    CHECK(pair.source.class_counts() == std::vector<std::size_t>{100, 100, 10});
    CHECK_FALSE(pair.target.labeled());
    CHECK(pair.target_labels.size() == 210);
    std::vector<std::size_t> target_counts(3, 0);
    for (int y : pair.target_labels) ++target_counts[static_cast<std::size_t>(y)];
    CHECK(target_counts == std::vector<std::size_t>{100, 100, 10});
    CHECK(pair.source.dim == spec.window_dim());

    spec.target_class_counts = {5, 6, 7};
    const auto other = generate_synthetic_pair(spec);
    CHECK(other.target.size() == 18);
}

TEST_CASE("synthetic generation is bit-reproducible") {
    SynthSpec spec;
    spec.class_counts = {20, 20, 20, 5};
    spec.target_shift = rotation_shift(spec.channels, 30.0, 0.5, 0.05);
    const auto a = generate_synthetic_pair(spec);
    const auto b = generate_synthetic_pair(spec);
    CHECK(a.source.windows == b.source.windows);
    CHECK(a.target.windows == b.target.windows);
    CHECK(a.target_labels == b.target_labels);
    spec.seed = 8;
    CHECK(generate_synthetic_pair(spec).source.windows != a.source.windows);
}

TEST_CASE("without a shift both subjects share one distribution") {
    auto class_mean_gap = [](const SyntheticPair &p) {
        const std::size_t d = p.source.dim;
        double gap = 0.0;
        for (int c = 0; c < 4; ++c) {
            std::vector<double> ms(d, 0.0), mt(d, 0.0);
            std::size_t ns = 0, nt = 0;
            for (std::size_t i = 0; i < p.source.size(); ++i) {
                if (p.source.labels->at(i) != c) continue;
                for (std::size_t k = 0; k < d; ++k) ms[k] += p.source.windows[i][k];
                ++ns;
            }
            for (std::size_t i = 0; i < p.target.size(); ++i) {
                if (p.target_labels[i] != c) continue;
                for (std::size_t k = 0; k < d; ++k) mt[k] += p.target.windows[i][k];
                ++nt;
            }
            for (std::size_t k = 0; k < d; ++k) gap += std::abs(ms[k] / ns - mt[k] / nt);
        }
        return gap / (4.0 * static_cast<double>(d));
    };
    SynthSpec spec;
    spec.class_counts = {200, 200, 200, 200};
    const double unshifted = class_mean_gap(generate_synthetic_pair(spec));
    spec.target_shift = rotation_shift(spec.channels, 30.0, 0.5, 0.05);
    const double shifted = class_mean_gap(generate_synthetic_pair(spec));
    // sampling error alone: about 0.8 * 0.6 * sqrt(2 / 200) ~ 0.05
    CHECK(unshifted < 0.1);
    CHECK(shifted > 0.4);
}

TEST_CASE("rotation shift rotates channel pairs") {
    const auto s = rotation_shift(3, 90.0, 0.5, 0.0);
    REQUIRE(s.mixing.size() == 3);
    CHECK(std::abs(s.mixing[0][0]) < 1e-15);
    CHECK(std::abs(std::abs(s.mixing[0][1]) - 1.0) < 1e-15);
    CHECK(s.mixing[2][2] == 1.0);
    CHECK(s.offset == std::vector<double>{0.5, 0.5, 0.5});
}

TEST_CASE("synthetic spec validation") {
    SynthSpec spec;
    spec.class_counts = {10, 0, 10, 10};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.class_counts = {10, 10};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    SynthSpec singular;
    singular.target_shift.mixing.assign(singular.channels, std::vector<double>(singular.channels, 0.0));
    CHECK_THROWS_AS(singular.validate(), ConfigError);
}

TEST_CASE("synthetic recordings segment back into the synthetic windows") {
    SynthSpec spec;
    spec.class_counts = {6, 6, 6, 3};
    const auto recs = synthetic_recordings(spec, 5.0);
    REQUIRE(recs.size() == 2);
    CHECK(recs[1].labels.has_value());
    const auto ds = segment_windows_frames(recs[0], spec.frames, 0.0);
    const auto pair = generate_synthetic_pair(spec);
    CHECK(ds.windows == pair.source.windows);
    CHECK(ds.labels == pair.source.labels);
}

// ---- end to end preprocessing

TEST_CASE("fixture preprocessing: impute, normalize, segment, split, project") {
    CsvSchema schema;
    schema.sample_rate = 5.0;
    const auto recs = load_recordings(fixture(), schema);
    PreprocessConfig cfg;
    cfg.window_seconds = 1.0;
    cfg.normalization = NormalizationMode::fit;
    cfg.pca = PcaTarget::dimension(6);
    const auto p = prepare_recordings(recs[0], recs[1], cfg);
    // 50 frames, window 5, step 2 -> 23 windows -> 14/2/7
    CHECK(p.source.train.size() == 14);
    CHECK(p.source.val.size() == 2);
    CHECK(p.source.test.size() == 7);
    CHECK(p.dim() == 6);
    CHECK(p.num_classes() == 4);
    CHECK(p.target.test.labeled());
    REQUIRE(p.normalization.has_value());
    CHECK(p.normalization->channel_count() == 7);
    REQUIRE(p.pca.has_value());
    CHECK(p.pca->input_dim() == 35);

    cfg.normalization = NormalizationMode::declared;
    CHECK_THROWS_AS(prepare_recordings(recs[0], recs[1], cfg), ConfigError);
    cfg.declared_ranges = {{-10.0, 200.0}};
    CHECK_NOTHROW(prepare_recordings(recs[0], recs[1], cfg));
}

TEST_CASE("the PCA sees source and target training windows only") {
    SynthSpec spec;
    spec.class_counts = {30, 30, 30, 10};
    spec.target_shift = rotation_shift(spec.channels, 30.0, 0.5, 0.05);
    PreprocessConfig cfg;
    cfg.normalization = NormalizationMode::none;
    cfg.pca = PcaTarget::dimension(10);
    const auto p = prepare_synthetic(spec, cfg);

    const auto raw = generate_synthetic_pair(spec);
    DomainDataset target = raw.target;
    target.labels = raw.target_labels;
    target.num_classes = raw.source.num_classes;
    target.class_names = raw.source.class_names;
    const auto s = split_domain(raw.source, cfg.split);
    const auto t = split_domain(target, cfg.split);
    const auto unlabeled = t.train.without_labels();
    const auto expected = fit_pca({&s.train, &unlabeled}, *cfg.pca);
    CHECK(p.pca->mean == expected.mean);
    CHECK(p.pca->components == expected.components);
    CHECK(p.target.test.labels == t.test.labels);
}
