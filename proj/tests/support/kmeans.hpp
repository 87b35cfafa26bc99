#pragma once

// Reference clustering for the desk-scale ablation: Lloyd's k-means with
// k-means++ seeding, best of several restarts by inertia.

#include <algorithm>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline std::vector<int> kmeans(const std::vector<std::vector<double>>& x, int k, std::uint64_t seed,
                               int restarts = 10, int max_iter = 300) {
    const std::size_t n = x.size(), d = x.front().size();
    auto dist2 = [&](std::size_t i, const std::vector<double>& c) {
        double s = 0;
        for (std::size_t t = 0; t < d; ++t) s += (x[i][t] - c[t]) * (x[i][t] - c[t]);
        return s;
    };
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_labels;
    for (int rep = 0; rep < restarts; ++rep) {
        std::mt19937_64 g(seed * 1000003 + static_cast<std::uint64_t>(rep));
        std::vector<std::vector<double>> centers{x[std::uniform_int_distribution<std::size_t>(0, n - 1)(g)]};
        while (static_cast<int>(centers.size()) < k) {
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) {
                double m = std::numeric_limits<double>::infinity();
                for (const auto& c : centers) m = std::min(m, dist2(i, c));
                w[i] = m;
            }
            centers.push_back(x[std::discrete_distribution<std::size_t>(w.begin(), w.end())(g)]);
        }
        std::vector<int> labels(n, -1);
        double inertia = 0;
        for (int it = 0; it < max_iter; ++it) {
            bool changed = false;
            inertia = 0;
            for (std::size_t i = 0; i < n; ++i) {
                int arg = 0;
                double m = std::numeric_limits<double>::infinity();
                for (int q = 0; q < k; ++q) {
                    const double v = dist2(i, centers[static_cast<std::size_t>(q)]);
                    if (v < m) {
                        m = v;
                        arg = q;
                    }
                }
                inertia += m;
                if (labels[i] != arg) {
                    labels[i] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
            for (int q = 0; q < k; ++q) {
                std::vector<double> sum(d, 0.0);
                int count = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (labels[i] != q) continue;
                    for (std::size_t t = 0; t < d; ++t) sum[t] += x[i][t];
                    ++count;
                }
                if (count == 0) continue;  // keep an emptied center where it was
                for (auto& v : sum) v /= count;
                centers[static_cast<std::size_t>(q)] = std::move(sum);
            }
        }
        if (inertia < best) {
            best = inertia;
            best_labels = labels;
        }
    }
    return best_labels;
}

}  // namespace oracle
