#include "scdc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace scdc::metrics {

ConfusionMatrix::ConfusionMatrix(int classes)
    : classes_(classes), counts_(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0) {
    if (classes < 1) throw std::invalid_argument("confusion matrix needs at least one class");
}

ConfusionMatrix ConfusionMatrix::from_labels(std::span<const int> truth,
                                             std::span<const int> predicted, int classes) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("label vectors differ in length");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return cm;
}

void ConfusionMatrix::add(int truth, int predicted) {
    if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_) {
        throw std::out_of_range("confusion matrix label out of range");
    }
    ++counts_[static_cast<std::size_t>(truth * classes_ + predicted)];
}

long long ConfusionMatrix::at(int truth, int predicted) const {
    return counts_.at(static_cast<std::size_t>(truth * classes_ + predicted));
}

long long ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), 0LL);
}

long long ConfusionMatrix::trace() const {
    long long t = 0;
    for (int c = 0; c < classes_; ++c) t += at(c, c);
    return t;
}

Assignment hungarian_match(std::span<const double> cost, std::size_t k) {
    if (cost.size() != k * k) throw std::invalid_argument("hungarian_match: cost matrix is not square");
    for (double v : cost) {
        if (!std::isfinite(v)) throw std::invalid_argument("hungarian_match: non-finite cost");
    }
    Assignment out;
    if (k == 0) return out;
    // Shortest augmenting path with potentials, O(k^3); 1-based internally.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
    std::vector<std::size_t> p(k + 1, 0), way(k + 1, 0);
    for (std::size_t i = 1; i <= k; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(k + 1, inf);
        std::vector<bool> used(k + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= k; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * k + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= k; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    out.column_of_row.assign(k, 0);
    for (std::size_t j = 1; j <= k; ++j) out.column_of_row[p[j] - 1] = static_cast<int>(j - 1);
    for (std::size_t i = 0; i < k; ++i) {
        out.cost += cost[i * k + static_cast<std::size_t>(out.column_of_row[i])];
    }
    return out;
}

namespace {

struct Contingency {
    std::vector<std::vector<double>> table;  // [true class][cluster]
    std::vector<double> rows, cols;
    double n = 0.0;
};

Contingency contingency(std::span<const int> truth, std::span<const int> clusters) {
    if (truth.size() != clusters.size()) throw std::invalid_argument("label vectors differ in length");
    std::map<int, std::size_t> ti, ci;
    for (int t : truth) ti.emplace(t, 0);
    for (int c : clusters) ci.emplace(c, 0);
    std::size_t k = 0;
    for (auto& [key, idx] : ti) idx = k++;
    k = 0;
    for (auto& [key, idx] : ci) idx = k++;
    Contingency c;
    c.table.assign(ti.size(), std::vector<double>(ci.size(), 0.0));
    c.rows.assign(ti.size(), 0.0);
    c.cols.assign(ci.size(), 0.0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto r = ti[truth[i]];
        const auto q = ci[clusters[i]];
        c.table[r][q] += 1.0;
        c.rows[r] += 1.0;
        c.cols[q] += 1.0;
    }
    c.n = static_cast<double>(truth.size());
    return c;
}

double entropy(const std::vector<double>& counts, double n) {
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) h -= (c / n) * std::log(c / n);
    }
    return h;
}

double pairs(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double clustering_accuracy(std::span<const int> truth, std::span<const int> clusters) {
    if (truth.empty()) return 0.0;
    const auto c = contingency(truth, clusters);
    const std::size_t k = std::max(c.rows.size(), c.cols.size());
    std::vector<double> cost(k * k, 0.0);
    for (std::size_t r = 0; r < c.rows.size(); ++r) {
        for (std::size_t q = 0; q < c.cols.size(); ++q) cost[q * k + r] = -c.table[r][q];
    }
    const auto a = hungarian_match(cost, k);
    return -a.cost / c.n;
}

double nmi(std::span<const int> truth, std::span<const int> clusters) {
    if (truth.empty()) return 0.0;
    const auto c = contingency(truth, clusters);
    double mi = 0.0;
    for (std::size_t r = 0; r < c.rows.size(); ++r) {
        for (std::size_t q = 0; q < c.cols.size(); ++q) {
            const double nij = c.table[r][q];
            if (nij > 0.0) mi += (nij / c.n) * std::log(c.n * nij / (c.rows[r] * c.cols[q]));
        }
    }
    const double denom = 0.5 * (entropy(c.rows, c.n) + entropy(c.cols, c.n));
    if (!(denom > 0.0)) return 0.0;
    return std::clamp(mi / denom, 0.0, 1.0);
}

double fmi(std::span<const int> truth, std::span<const int> clusters) {
    if (truth.empty()) return 0.0;
    const auto c = contingency(truth, clusters);
    double tp = 0.0;
    for (const auto& row : c.table) {
        for (double nij : row) tp += pairs(nij);
    }
    double same_class = 0.0, same_cluster = 0.0;
    for (double r : c.rows) same_class += pairs(r);
    for (double q : c.cols) same_cluster += pairs(q);
    if (same_class == 0.0 || same_cluster == 0.0) return 0.0;
    // same_cluster = TP + FP, same_class = TP + FN
    return tp / std::sqrt(same_cluster * same_class);
}

double accuracy(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    return total == 0 ? 0.0 : static_cast<double>(cm.trace()) / static_cast<double>(total);
}

std::vector<PerClass> per_class_scores(const ConfusionMatrix& cm) {
    const int k = cm.classes();
    std::vector<PerClass> out(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        long long tp = cm.at(c, c), predicted = 0, actual = 0;
        for (int o = 0; o < k; ++o) {
            predicted += cm.at(o, c);
            actual += cm.at(c, o);
        }
        auto& pc = out[static_cast<std::size_t>(c)];
        pc.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        pc.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
        const double denom = static_cast<double>(predicted + actual);
        pc.f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    }
    return out;
}

double macro_f1(const ConfusionMatrix& cm) {
    const auto pcs = per_class_scores(cm);
    double s = 0.0;
    for (const auto& pc : pcs) s += pc.f1;
    return s / static_cast<double>(pcs.size());
}

double binary_auroc(std::span<const double> scores, std::span<const bool> positive) {
    if (scores.size() != positive.size()) throw std::invalid_argument("binary_auroc: size mismatch");
    const auto n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
        i = j + 1;
    }
    double rank_sum = 0.0, n_pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (positive[i]) {
            rank_sum += rank[i];
            n_pos += 1.0;
        }
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

AurocResult macro_auroc(std::span<const int> truth, std::span<const double> probs, int classes) {
    const auto n = truth.size();
    const auto k = static_cast<std::size_t>(classes);
    if (probs.size() != n * k) throw std::invalid_argument("macro_auroc: probability shape mismatch");
    AurocResult out;
    out.per_class.assign(k, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> scores(n);
    std::unique_ptr<bool[]> pos(new bool[n]);
    double sum = 0.0;
    int counted = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t n_pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = probs[i * k + c];
            pos[i] = truth[i] == static_cast<int>(c);
            n_pos += pos[i] ? 1 : 0;
        }
        if (n_pos == 0 || n_pos == n) {
            out.skipped.push_back(static_cast<int>(c));
            continue;
        }
        out.per_class[c] = binary_auroc(scores, std::span<const bool>(pos.get(), n));
        sum += out.per_class[c];
        ++counted;
    }
    out.macro = counted ? sum / counted : 0.0;
    return out;
}

ClusteringReport clustering_report(std::span<const int> truth, std::span<const int> clusters) {
    return {nmi(truth, clusters), clustering_accuracy(truth, clusters), fmi(truth, clusters)};
}

ClassificationReport classification_report(std::span<const int> truth,
                                           std::span<const double> probs, int classes) {
    const auto k = static_cast<std::size_t>(classes);
    if (probs.size() != truth.size() * k) {
        throw std::invalid_argument("classification_report: probability shape mismatch");
    }
    std::vector<int> predicted(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto row = probs.subspan(i * k, k);
        predicted[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    const auto cm = ConfusionMatrix::from_labels(truth, predicted, classes);
    ClassificationReport r;
    r.rac = accuracy(cm);
    r.per_class = per_class_scores(cm);
    r.f1_macro = macro_f1(cm);
    const auto au = macro_auroc(truth, probs, classes);
    r.auroc_macro = au.macro;
    r.auroc_skipped_classes = au.skipped;
    return r;
}

nlohmann::json to_json(const ClusteringReport& r) {
    return {{"nmi", r.nmi}, {"cac", r.cac}, {"fmi", r.fmi}};
}

nlohmann::json to_json(const ClassificationReport& r) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& pc : r.per_class) {
        per.push_back({{"precision", pc.precision}, {"recall", pc.recall}, {"f1", pc.f1}});
    }
    return {{"rac", r.rac},
            {"f1_macro", r.f1_macro},
            {"auroc_macro", r.auroc_macro},
            {"per_class", per},
            {"auroc_skipped_classes", r.auroc_skipped_classes}};
}

void print_table(std::ostream& out, const std::vector<NamedReports>& columns) {
    const int name_w = 8;
    const int col_w = 14;
    out << std::left << std::setw(name_w) << "metric";
    for (const auto& c : columns) out << std::right << std::setw(col_w) << c.dataset;
    out << '\n';
    const auto row = [&](const char* name, auto get) {
        out << std::left << std::setw(name_w) << name;
        for (const auto& c : columns) {
            out << std::right << std::setw(col_w) << std::fixed << std::setprecision(4) << get(c);
        }
        out << '\n';
    };
    row("RAC", [](const NamedReports& c) { return c.classification.rac; });
    row("F1S", [](const NamedReports& c) { return c.classification.f1_macro; });
    row("AUROC", [](const NamedReports& c) { return c.classification.auroc_macro; });
    row("NMI", [](const NamedReports& c) { return c.clustering.nmi; });
    row("CAC", [](const NamedReports& c) { return c.clustering.cac; });
    row("FMI", [](const NamedReports& c) { return c.clustering.fmi; });
    out.unsetf(std::ios::fixed);
}

}  // namespace scdc::metrics
