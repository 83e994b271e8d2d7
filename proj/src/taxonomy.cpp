#include "atypia/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "atypia/errors.hpp"

namespace atypia {

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

}  // namespace

Dendrogram ward_linkage(const std::vector<std::vector<double>>& vectors) {
    const std::size_t n = vectors.size();
    if (n < 2) throw Error("TooFewVectors", "ward_linkage needs at least two vectors");
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) {
            throw Error("DimensionMismatch", "ward_linkage vectors differ in dimension");
        }
    }

    Dendrogram out;
    out.num_leaves = n;

    std::vector<std::size_t> active(n);
    std::iota(active.begin(), active.end(), std::size_t{0});
    std::vector<std::size_t> sizes(n, 1);
    std::map<std::pair<std::size_t, std::size_t>, double> dist;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[{i, j}] = euclidean(vectors[i], vectors[j]);
        }
    }
    auto d = [&dist](std::size_t a, std::size_t b) {
        return dist.at(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    };

    std::size_t next_id = n;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t a = 0; a < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double candidate = d(active[a], active[b]);
                if (candidate < best) {  // strict: smallest id pair wins ties
                    best = candidate;
                    bi = active[a];
                    bj = active[b];
                }
            }
        }

        const std::size_t merged = next_id++;
        const std::size_t ni = sizes[bi];
        const std::size_t nj = sizes[bj];
        sizes.push_back(ni + nj);
        out.merges.push_back({bi, bj, best, ni + nj});

        // Lance-Williams update for Ward with distance-valued heights.
        for (std::size_t c : active) {
            if (c == bi || c == bj) continue;
            const double nc = static_cast<double>(sizes[c]);
            const double dic = d(c, bi);
            const double djc = d(c, bj);
            const double dij = best;
            const double num = (nc + ni) * dic * dic + (nc + nj) * djc * djc - nc * dij * dij;
            const double updated = std::sqrt(std::max(0.0, num / (nc + ni + nj)));
            dist[{std::min(c, merged), std::max(c, merged)}] = updated;
        }
        std::erase_if(active, [&](std::size_t id) { return id == bi || id == bj; });
        active.push_back(merged);
        std::sort(active.begin(), active.end());
    }
    return out;
}

std::vector<int> cut_k(const Dendrogram& dendrogram, std::size_t k) {
    const std::size_t n = dendrogram.num_leaves;
    if (k < 1 || k > n) {
        throw Error("InvalidK", "cut_k requires 1 <= k <= " + std::to_string(n));
    }

    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&parent](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t t = 0; t + k < n; ++t) {
        const auto& m = dendrogram.merges[t];
        parent[find(m.left)] = n + t;
        parent[find(m.right)] = n + t;
    }

    // Canonical ids ordered by the cluster's smallest member index.
    std::map<std::size_t, int> canonical;
    std::vector<int> assignment(n, -1);
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const std::size_t root = find(leaf);
        const auto it = canonical.try_emplace(root, static_cast<int>(canonical.size())).first;
        assignment[leaf] = it->second;
    }
    return assignment;
}

std::vector<int> group_reasons(const AnnotationMatrix& matrix,
                               const std::vector<int>& image_clusters) {
    if (image_clusters.size() != matrix.image_ids.size()) {
        throw Error("DimensionMismatch", "cluster assignment does not match the matrix rows");
    }
    const int num_clusters =
        image_clusters.empty() ? 0 : *std::max_element(image_clusters.begin(), image_clusters.end()) + 1;
    const std::size_t num_reasons = matrix.reason_names.size();

    std::vector<int> grouping(num_reasons, 0);
    for (std::size_t reason = 0; reason < num_reasons; ++reason) {
        int best_cluster = 0;
        double best_mean = -1.0;
        for (int c = 0; c < num_clusters; ++c) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t img = 0; img < image_clusters.size(); ++img) {
                if (image_clusters[img] != c) continue;
                sum += matrix.values[img][reason];
                ++count;
            }
            const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
            if (mean > best_mean) {  // strict: ties keep the lower cluster id
                best_mean = mean;
                best_cluster = c;
            }
        }
        grouping[reason] = best_cluster;
    }
    return grouping;
}

namespace {

void render_node(const Dendrogram& dg, const std::vector<std::string>& names, std::size_t node,
                 int depth, std::ostringstream& os) {
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    if (node < dg.num_leaves) {
        os << indent << "- " << (node < names.size() ? names[node] : std::to_string(node))
           << '\n';
        return;
    }
    const auto& m = dg.merges[node - dg.num_leaves];
    os << indent << "+ height " << m.height << " (" << m.size << " members)\n";
    render_node(dg, names, m.left, depth + 1, os);
    render_node(dg, names, m.right, depth + 1, os);
}

}  // namespace

std::string render_dendrogram(const Dendrogram& dendrogram,
                              const std::vector<std::string>& leaf_names) {
    std::ostringstream os;
    if (dendrogram.merges.empty()) return os.str();
    render_node(dendrogram, leaf_names, dendrogram.num_leaves + dendrogram.merges.size() - 1, 0,
                os);
    return os.str();
}

std::vector<Reason> default_reason_grouping() {
    std::vector<Reason> grouping(kNumFineReasons, Reason::Object);
    for (std::size_t i = 15; i < 19; ++i) grouping[i] = Reason::Context;
    for (std::size_t i = 19; i < 21; ++i) grouping[i] = Reason::Scene;
    return grouping;
}

}  // namespace atypia
