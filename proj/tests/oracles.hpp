// Test-only reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace oracles {

// Adaptive Simpson quadrature with explicit error control.
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double eps,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, eps * 0.5, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, eps * 0.5, depth - 1);
}

// Pre-splits into uniform panels so narrow peaks cannot hide from the initial
// subdivision, then refines each panel adaptively.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-10, int depth = 48, int panels = 64) {
    double total = 0.0;
    const double step = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * step;
        const double hi = i + 1 == panels ? b : lo + step;
        const double flo = f(lo);
        const double fhi = f(hi);
        const double fm = f(0.5 * (lo + hi));
        total += adaptive_simpson_rec(f, lo, hi, flo, fm, fhi, simpson(f, lo, hi, flo, fm, fhi),
                                      eps / panels, depth);
    }
    return total;
}

// Inverse-Gaussian sampling via the Michael-Schucany-Haas transform.
inline double sample_inverse_gaussian(std::mt19937_64& rng, double mu, double lambda) {
    const double v = std::normal_distribution<double>()(rng);
    const double y = v * v;
    const double x = mu + (mu * mu * y) / (2.0 * lambda) -
                     (mu / (2.0 * lambda)) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
    const double z = std::uniform_real_distribution<double>()(rng);
    return z <= mu / (mu + x) ? x : mu * mu / x;
}

// Pair-counting AUC with half credit on ties.
inline double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] <= 0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] > 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    return wins / static_cast<double>(pairs);
}

// Kolmogorov-Smirnov statistic of a sample against Uniform(0, 1).
inline double ks_uniform(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double hi = (static_cast<double>(i) + 1.0) / n - sample[i];
        const double lo = sample[i] - static_cast<double>(i) / n;
        d = std::max({d, hi, lo});
    }
    return d;
}

// Adjusted Rand index between two flat partitions.
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
    const auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ca, cb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ca[a[i]] += 1.0;
        cb[b[i]] += 1.0;
    }
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, count] : joint) sum_joint += comb2(count);
    for (const auto& [key, count] : ca) sum_a += comb2(count);
    for (const auto& [key, count] : cb) sum_b += comb2(count);
    const double total = comb2(static_cast<double>(a.size()));
    const double expected = sum_a * sum_b / total;
    const double maximum = 0.5 * (sum_a + sum_b);
    return (sum_joint - expected) / (maximum - expected);
}

// From-scratch Ward agglomeration: at every step all pairwise heights are
// recomputed directly from cluster members via
//   h(A, B) = sqrt(2 |A||B| / (|A|+|B|)) * ||centroid(A) - centroid(B)||,
// pairs tie-broken by smallest (id, id). Returns merges as (left, right,
// height) with the same node-id convention as the library.
struct WardMerge {
    std::size_t left, right;
    double height;
};

inline std::vector<WardMerge> brute_force_ward(const std::vector<std::vector<double>>& vectors) {
    struct Cluster {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < vectors.size(); ++i) active.push_back({i, {i}});
    const std::size_t dim = vectors.front().size();

    auto centroid = [&](const Cluster& c) {
        std::vector<double> mean(dim, 0.0);
        for (std::size_t m : c.members) {
            for (std::size_t d = 0; d < dim; ++d) mean[d] += vectors[m][d];
        }
        for (double& v : mean) v /= static_cast<double>(c.members.size());
        return mean;
    };

    std::vector<WardMerge> merges;
    std::size_t next_id = vectors.size();
    while (active.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const auto ci = centroid(active[i]);
                const auto cj = centroid(active[j]);
                double ss = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    ss += (ci[d] - cj[d]) * (ci[d] - cj[d]);
                }
                const double na = static_cast<double>(active[i].members.size());
                const double nb = static_cast<double>(active[j].members.size());
                const double h = std::sqrt(2.0 * na * nb / (na + nb) * ss);
                const auto key = std::minmax(active[i].id, active[j].id);
                const auto best_key = std::minmax(active[bi].id, active[bj].id);
                if (h < best || (h == best && key < best_key)) {
                    best = h;
                    bi = i;
                    bj = j;
                }
            }
        }
        Cluster merged;
        merged.id = next_id++;
        merged.members = active[bi].members;
        merged.members.insert(merged.members.end(), active[bj].members.begin(),
                              active[bj].members.end());
        merges.push_back({std::min(active[bi].id, active[bj].id),
                          std::max(active[bi].id, active[bj].id), best});
        if (bi > bj) std::swap(bi, bj);
        active.erase(active.begin() + static_cast<long>(bj));
        active.erase(active.begin() + static_cast<long>(bi));
        active.push_back(std::move(merged));
        std::sort(active.begin(), active.end(),
                  [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
    }
    return merges;
}

}  // namespace oracles
