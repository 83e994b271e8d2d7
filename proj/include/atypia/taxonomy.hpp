#pragma once

#include <string>
#include <vector>

#include "atypia/evidence.hpp"

namespace atypia {

inline constexpr std::size_t kNumFineReasons = 21;

// Mean human responses per image and fine-grained reason, entries in [0,1].
struct AnnotationMatrix {
    std::vector<std::string> image_ids;
    std::vector<std::string> reason_names;
    std::vector<std::vector<double>> values;  // image_ids.size() x reason_names.size()
};

// Merge list in the usual linkage convention: leaves are nodes 0..N-1, merge t
// creates node N+t. Heights are nondecreasing in merge order.
struct DendrogramMerge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;  // members of the merged cluster
};

struct Dendrogram {
    std::size_t num_leaves = 0;
    std::vector<DendrogramMerge> merges;  // N-1 entries
};

// Agglomerative clustering with Ward's minimum-variance criterion over
// Euclidean distances, via the Lance-Williams recurrence. Singleton pairs
// merge at their Euclidean distance; ties break toward the smallest
// (left id, right id) pair.
Dendrogram ward_linkage(const std::vector<std::vector<double>>& vectors);

// Undo the last k-1 merges; per-item cluster ids are canonicalized by each
// cluster's smallest member index.
std::vector<int> cut_k(const Dendrogram& dendrogram, std::size_t k);

// Assign each reason to the image cluster where its mean response is maximal;
// ties go to the lower cluster id.
std::vector<int> group_reasons(const AnnotationMatrix& matrix,
                               const std::vector<int>& image_clusters);

// Indented-text rendering of the merge tree, leaves labeled by name.
std::string render_dendrogram(const Dendrogram& dendrogram,
                              const std::vector<std::string>& leaf_names);

// Default partition of the 21 fine-grained reasons into the three coarse
// groups (object: 1-15, context: 16-19, scene: 20-21, one-based).
std::vector<Reason> default_reason_grouping();

}  // namespace atypia
