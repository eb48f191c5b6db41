#include "advhar/evaluation.hpp"

#include "advhar/error.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>

namespace advhar {

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto &row : counts) {
        for (std::size_t v : row) {
            t += v;
        }
    }
    return t;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        t += counts[i][i];
    }
    return t;
}

ConfusionMatrix confusion(const std::vector<int> &truth, const std::vector<int> &predicted, std::size_t num_classes) {
    if (truth.size() != predicted.size()) {
        throw DataError("confusion: " + std::to_string(truth.size()) + " true labels but " +
                        std::to_string(predicted.size()) + " predictions");
    }
    ConfusionMatrix m;
    m.counts.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = predicted[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes ||
            static_cast<std::size_t>(p) >= num_classes) {
            throw DataError("confusion: label pair (" + std::to_string(t) + ", " + std::to_string(p) +
                            ") outside [0, " + std::to_string(num_classes) + ")");
        }
        m.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] += 1;
    }
    return m;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassificationReport report(const ConfusionMatrix &matrix, const std::vector<std::string> &class_names) {
    const std::size_t c = matrix.num_classes();
    ClassificationReport r;
    r.total = matrix.total();
    if (r.total == 0) {
        throw DataError("cannot report on an empty confusion matrix");
    }
    if (!class_names.empty() && class_names.size() != c) {
        throw ShapeError("got " + std::to_string(class_names.size()) + " class names for " + std::to_string(c) +
                         " classes");
    }
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t predicted = 0;
        std::size_t actual = 0;
        for (std::size_t j = 0; j < c; ++j) {
            predicted += matrix.counts[j][k];
            actual += matrix.counts[k][j];
        }
        const std::size_t tp = matrix.counts[k][k];
        ClassMetrics m;
        m.name = k < class_names.size() ? class_names[k] : std::to_string(k);
        m.precision = ratio(tp, predicted);
        m.recall = ratio(tp, actual);
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        m.support = actual;
        r.weighted_precision += m.precision * static_cast<double>(actual);
        r.weighted_recall += m.recall * static_cast<double>(actual);
        r.weighted_f1 += m.f1 * static_cast<double>(actual);
        r.classes.push_back(std::move(m));
    }
    const double n = static_cast<double>(r.total);
    r.weighted_precision /= n;
    r.weighted_recall /= n;
    r.weighted_f1 /= n;
    r.accuracy = ratio(matrix.trace(), r.total);
    return r;
}

std::string render_report(const ClassificationReport &r, int digits) {
    std::size_t name_width = std::string("Accuracy").size();
    for (const auto &m : r.classes) {
        name_width = std::max(name_width, m.name.size());
    }
    const int w = static_cast<int>(name_width);
    char line[512];
    std::ostringstream out;
    std::snprintf(line, sizeof(line), "%-*s %9s %9s %9s %9s\n", w, "class", "precision", "recall", "support",
                  "f1-score");
    out << line;
    for (const auto &m : r.classes) {
        std::snprintf(line, sizeof(line), "%-*s %9.*f %9.*f %9zu %9.*f\n", w, m.name.c_str(), digits, m.precision,
                      digits, m.recall, m.support, digits, m.f1);
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-*s %9.*f %9s %9zu\n", w, "Accuracy", digits, r.accuracy, "", r.total);
    out << line;
    std::snprintf(line, sizeof(line), "%-*s %9.*f %9.*f %9zu %9.*f\n", w, "W-Avg", digits, r.weighted_precision,
                  digits, r.weighted_recall, r.total, digits, r.weighted_f1);
    out << line;
    return out.str();
}

std::string to_string(RunRole role) {
    switch (role) {
        case RunRole::no_transfer: return "no_transfer";
        case RunRole::adapted: return "adapted";
        case RunRole::supervised: return "supervised";
        case RunRole::other: return "other";
    }
    return "other";
}

RunRole run_role_from_string(const std::string &name) {
    if (name == "no_transfer") return RunRole::no_transfer;
    if (name == "adapted") return RunRole::adapted;
    if (name == "supervised") return RunRole::supervised;
    return RunRole::other;
}

Comparison compare_runs(const std::vector<NamedReport> &reports) {
    if (reports.size() < 2) {
        throw DataError("compare_runs needs at least two reports");
    }
    const std::size_t total = reports.front().report.total;
    for (const auto &r : reports) {
        if (r.report.total != total) {
            throw DataError("report '" + r.name + "' covers " + std::to_string(r.report.total) +
                            " windows, expected " + std::to_string(total) + "; runs must share one test set");
        }
    }
    const auto adapted = std::find_if(reports.begin(), reports.end(),
                                      [](const NamedReport &r) { return r.role == RunRole::adapted; });
    const NamedReport &ref = adapted != reports.end() ? *adapted : reports.front();

    Comparison cmp;
    cmp.reference = ref.name;
    std::optional<double> no_transfer;
    std::optional<double> supervised;
    for (const auto &r : reports) {
        cmp.rows.push_back({r.name, r.role, r.report.weighted_f1, ref.report.weighted_f1 - r.report.weighted_f1});
        if (r.role == RunRole::no_transfer) no_transfer = r.report.weighted_f1;
        if (r.role == RunRole::supervised) supervised = r.report.weighted_f1;
    }
    if (adapted != reports.end()) {
        const double a = adapted->report.weighted_f1;
        if (no_transfer && a < *no_transfer) cmp.sandwich = false;
        if (supervised && a > *supervised) cmp.sandwich = false;
    }
    return cmp;
}

std::string render_comparison_csv(const Comparison &cmp) {
    std::ostringstream out;
    out << "run,role,weighted_f1,delta_from_" << cmp.reference << "\n";
    char line[512];
    for (const auto &row : cmp.rows) {
        std::snprintf(line, sizeof(line), "%s,%s,%.6f,%+.6f\n", row.name.c_str(), to_string(row.role).c_str(),
                      row.weighted_f1, row.delta);
        out << line;
    }
    out << "sandwich," << (cmp.sandwich ? "true" : "false") << ",,\n";
    return out.str();
}

std::string render_comparison_text(const Comparison &cmp) {
    std::ostringstream out;
    char line[512];
    std::snprintf(line, sizeof(line), "%-20s %-12s %8s %10s\n", "run", "role", "W-F1", "delta");
    out << line;
    for (const auto &row : cmp.rows) {
        std::snprintf(line, sizeof(line), "%-20s %-12s %8.4f %+10.4f\n", row.name.c_str(),
                      to_string(row.role).c_str(), row.weighted_f1, row.delta);
        out << line;
    }
    if (cmp.sandwich) {
        out << "sandwich: no_transfer <= adapted <= supervised holds\n";
    } else {
        out << "*** SANDWICH VIOLATED: adapted run falls outside [no_transfer, supervised] ***\n";
    }
    return out.str();
}

}  // namespace advhar
