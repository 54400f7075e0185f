#include <cmath>

#include <doctest.h>

#include "radfit/cluster.hpp"
#include "radfit/pca.hpp"
#include "radfit/rng.hpp"

using namespace radfit;

TEST_CASE("pca of collinear 2-D data finds the line") {
    Table rows;
    for (int i = -5; i <= 5; ++i)
        rows.push_back({static_cast<double>(i), 2.0 * static_cast<double>(i)});
    PcaModel m = fit_pca(rows, 2);
    REQUIRE(m.components.size() == 2);
    // component 1 is parallel to (1, 2)/sqrt(5)
    double s5 = std::sqrt(5.0);
    CHECK(std::fabs(m.components[0][0]) == doctest::Approx(1.0 / s5).epsilon(1e-8));
    CHECK(std::fabs(m.components[0][1]) == doctest::Approx(2.0 / s5).epsilon(1e-8));
    double total = m.explained_variance[0] + m.explained_variance[1];
    CHECK(m.explained_variance[0] / total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("transforming the mean row gives zero scores") {
    Rng rng(41);
    Table rows;
    for (int i = 0; i < 20; ++i) rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    PcaModel m = fit_pca(rows, 3);
    Table scores = pca_transform(m, {m.mean});
    for (double s : scores[0]) CHECK(s == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pca components are orthonormal") {
    Rng rng(42);
    Table rows;
    for (int i = 0; i < 40; ++i) {
        Row r;
        for (int j = 0; j < 6; ++j) r.push_back(rng.normal() * (j + 1));
        rows.push_back(r);
    }
    PcaModel m = fit_pca(rows, 6);
    for (std::size_t a = 0; a < m.components.size(); ++a) {
        for (std::size_t b = 0; b < m.components.size(); ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < m.components[a].size(); ++j)
                dot += m.components[a][j] * m.components[b][j];
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("full-rank pca reconstructs the data") {
    Rng rng(43);
    Table rows;
    for (int i = 0; i < 25; ++i) rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    PcaModel m = fit_pca(rows, 3);
    Table scores = pca_transform(m, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double recon = m.mean[j];
            for (std::size_t c = 0; c < 3; ++c) recon += scores[i][c] * m.components[c][j];
            CHECK(recon == doctest::Approx(rows[i][j]).epsilon(1e-8));
        }
    }
}

TEST_CASE("two rows merge at their euclidean distance") {
    Table rows = {{0.0, 0.0}, {3.0, 4.0}};
    Dendrogram d = hierarchical_clustering(rows);
    REQUIRE(d.merges.size() == 1);
    CHECK(d.merges[0].distance == doctest::Approx(5.0));
    CHECK(d.merges[0].size == 2);
}

TEST_CASE("duplicate rows merge first at distance zero") {
    Table rows = {{1.0, 1.0}, {5.0, 5.0}, {1.0, 1.0}};
    Dendrogram d = hierarchical_clustering(rows);
    REQUIRE(d.merges.size() == 2);
    CHECK(d.merges[0].distance == 0.0);
    CHECK(d.merges[0].cluster_a == 0);
    CHECK(d.merges[0].cluster_b == 2);
}

TEST_CASE("merge distances are non-decreasing") {
    Rng rng(44);
    Table rows;
    for (int i = 0; i < 30; ++i) rows.push_back({rng.normal(), rng.normal()});
    Dendrogram d = hierarchical_clustering(rows);
    REQUIRE(d.merges.size() == 29);
    for (std::size_t i = 1; i < d.merges.size(); ++i)
        CHECK(d.merges[i].distance >= d.merges[i - 1].distance - 1e-12);
}

TEST_CASE("well-separated blobs merge last") {
    Rng rng(45);
    Table rows;
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < 10; ++i)
            rows.push_back({c * 100.0 + rng.normal(), c * 100.0 + rng.normal()});
    }
    Dendrogram d = hierarchical_clustering(rows);
    double final_merge = d.merges.back().distance;
    for (std::size_t i = 0; i + 1 < d.merges.size(); ++i)
        CHECK(final_merge > 10.0 * d.merges[i].distance);
}
