#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace scdc::metrics {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int classes);
    static ConfusionMatrix from_labels(std::span<const int> truth, std::span<const int> predicted,
                                       int classes);

    void add(int truth, int predicted);
    long long at(int truth, int predicted) const;
    int classes() const { return classes_; }
    long long total() const;
    long long trace() const;

private:
    int classes_;
    std::vector<long long> counts_;
};

struct ClusteringReport {
    double nmi = 0.0;
    double cac = 0.0;
    double fmi = 0.0;
};

struct PerClass {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ClassificationReport {
    double rac = 0.0;
    double f1_macro = 0.0;
    double auroc_macro = 0.0;
    std::vector<PerClass> per_class;
    std::vector<int> auroc_skipped_classes;  // absent from the test labels
};

struct Assignment {
    std::vector<int> column_of_row;  // permutation
    double cost = 0.0;
};

/// Minimum-cost perfect assignment on a square cost matrix (row-major).
Assignment hungarian_match(std::span<const double> cost, std::size_t k);

double clustering_accuracy(std::span<const int> truth, std::span<const int> clusters);
/// Mutual information normalized by the arithmetic mean of the two entropies.
double nmi(std::span<const int> truth, std::span<const int> clusters);
double fmi(std::span<const int> truth, std::span<const int> clusters);

double accuracy(const ConfusionMatrix& cm);
std::vector<PerClass> per_class_scores(const ConfusionMatrix& cm);
double macro_f1(const ConfusionMatrix& cm);

struct AurocResult {
    double macro = 0.0;
    std::vector<double> per_class;  // NaN for skipped classes
    std::vector<int> skipped;
};

/// One-vs-rest AUROC per class from the Mann-Whitney rank statistic with
/// midranks. `probs` is [n, classes] row-major.
AurocResult macro_auroc(std::span<const int> truth, std::span<const double> probs, int classes);

/// Binary AUROC of scores for positives vs negatives (midrank ties).
double binary_auroc(std::span<const double> scores, std::span<const bool> positive);

ClusteringReport clustering_report(std::span<const int> truth, std::span<const int> clusters);
ClassificationReport classification_report(std::span<const int> truth,
                                           std::span<const double> probs, int classes);

nlohmann::json to_json(const ClusteringReport& r);
nlohmann::json to_json(const ClassificationReport& r);

/// Plain-text table with one row per metric and one column per dataset.
struct NamedReports {
    std::string dataset;
    ClassificationReport classification;
    ClusteringReport clustering;
};
void print_table(std::ostream& out, const std::vector<NamedReports>& columns);

}  // namespace scdc::metrics
