#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace advhar {

/// counts[t][p]: windows of true class t predicted as p.
struct ConfusionMatrix {
    std::vector<std::vector<std::size_t>> counts;

    std::size_t num_classes() const noexcept { return counts.size(); }
    std::size_t total() const;
    std::size_t trace() const;
};

ConfusionMatrix confusion(const std::vector<int> &truth, const std::vector<int> &predicted, std::size_t num_classes);

struct ClassMetrics {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

/// Per-class precision / recall / F1 with 0/0 taken as 0, plus accuracy and
/// support-weighted averages.
struct ClassificationReport {
    std::vector<ClassMetrics> classes;
    double accuracy = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    std::size_t total = 0;
};

ClassificationReport report(const ConfusionMatrix &matrix, const std::vector<std::string> &class_names = {});

/// Table-style text: one row per class (class, precision, recall, support, f1),
/// then Accuracy and W-Avg rows.
std::string render_report(const ClassificationReport &report, int digits = 2);

enum class RunRole { no_transfer, adapted, supervised, other };

std::string to_string(RunRole role);
RunRole run_role_from_string(const std::string &name);

struct NamedReport {
    std::string name;
    RunRole role = RunRole::other;
    ClassificationReport report;
};

struct ComparisonRow {
    std::string name;
    RunRole role = RunRole::other;
    double weighted_f1 = 0.0;
    /// reference W-F1 minus this run's W-F1; the reference is the adapted run when
    /// present, otherwise the first run.
    double delta = 0.0;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    std::string reference;
    /// no-transfer <= adapted <= supervised, over whichever of those runs are present.
    bool sandwich = true;
};

Comparison compare_runs(const std::vector<NamedReport> &reports);
std::string render_comparison_csv(const Comparison &comparison);
std::string render_comparison_text(const Comparison &comparison);

}  // namespace advhar
