#include "radfit/cluster.hpp"

#include <cmath>
#include <limits>

#include "radfit/errors.hpp"

namespace radfit {

Dendrogram hierarchical_clustering(const Table& rows) {
    std::size_t n = rows.size();
    if (n < 2) throw DataError("hierarchical_clustering: needs >= 2 rows");

    // Active clusters keyed by id; Lance-Williams update for average linkage.
    struct Cluster {
        int id;
        int size;
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back({static_cast<int>(i), 1});

    // dist[i][j] over active positions.
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double s = 0.0;
            for (std::size_t j = 0; j < rows[a].size(); ++j) {
                double d = rows[a][j] - rows[b][j];
                s += d * d;
            }
            dist[a][b] = dist[b][a] = std::sqrt(s);
        }
    }

    Dendrogram dendro;
    int next_id = static_cast<int>(n);
    while (active.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                double d = dist[i][j];
                int a = std::min(active[i].id, active[j].id);
                int b = std::max(active[i].id, active[j].id);
                int ba = std::min(active[bi].id, active[bj].id);
                int bb = std::max(active[bi].id, active[bj].id);
                if (d < best || (d == best && (a < ba || (a == ba && b < bb)))) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }

        int a = std::min(active[bi].id, active[bj].id);
        int b = std::max(active[bi].id, active[bj].id);
        int size = active[bi].size + active[bj].size;
        dendro.merges.push_back({a, b, best, size});

        double wi = static_cast<double>(active[bi].size) / static_cast<double>(size);
        double wj = static_cast<double>(active[bj].size) / static_cast<double>(size);
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (k == bi || k == bj) continue;
            dist[bi][k] = dist[k][bi] = wi * dist[bi][k] + wj * dist[bj][k];
        }
        active[bi] = {next_id++, size};
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        for (auto& row : dist) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
        dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return dendro;
}

}  // namespace radfit
