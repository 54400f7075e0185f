#pragma once

#include "radfit/learners.hpp"

namespace radfit {

/// Agglomerative merge history. Leaves are clusters 0..n-1; merge m creates
/// cluster n+m. Average linkage is reducible, so distances are
/// non-decreasing.
struct Dendrogram {
    struct Merge {
        int cluster_a = 0;
        int cluster_b = 0;
        double distance = 0.0;
        int size = 0;  // leaf count of the merged cluster
    };
    std::vector<Merge> merges;
};

/// Average-linkage agglomerative clustering over Euclidean distances. Ties
/// resolve to the smallest (a, b) cluster-id pair.
Dendrogram hierarchical_clustering(const Table& rows);

}  // namespace radfit
