#include "radfit/pca.hpp"

#include <algorithm>
#include <cmath>

#include "radfit/errors.hpp"

namespace radfit {

namespace {

// v <- v - sum_c (v.c) c, for previously extracted orthonormal components.
void orthogonalize(Row& v, const Table& components) {
    for (const auto& c : components) {
        double dot = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) dot += v[j] * c[j];
        for (std::size_t j = 0; j < v.size(); ++j) v[j] -= dot * c[j];
    }
}

double norm(const Row& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void fix_sign(Row& v) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < v.size(); ++j) {
        if (std::fabs(v[j]) > std::fabs(v[arg])) arg = j;
    }
    if (v[arg] < 0.0) {
        for (double& x : v) x = -x;
    }
}

}  // namespace

PcaModel fit_pca(const Table& rows, std::size_t n_components) {
    if (rows.empty()) throw DataError("fit_pca: empty input");
    std::size_t n = rows.size();
    std::size_t p = rows.front().size();
    if (n_components > std::min(n, p))
        throw DomainError("fit_pca: n_components exceeds min(rows, columns)");

    PcaModel model;
    model.mean.assign(p, 0.0);
    for (const auto& r : rows) {
        if (r.size() != p) throw DataError("fit_pca: ragged rows");
        for (std::size_t j = 0; j < p; ++j) model.mean[j] += r[j];
    }
    for (double& m : model.mean) m /= static_cast<double>(n);

    Table centered(n, Row(p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) centered[i][j] = rows[i][j] - model.mean[j];

    // Covariance (divides by n; only ratios of variances matter downstream).
    Table cov(p, Row(p, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < p; ++a) {
            double ca = centered[i][a];
            if (ca == 0.0) continue;
            for (std::size_t b = a; b < p; ++b) cov[a][b] += ca * centered[i][b];
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            cov[a][b] /= static_cast<double>(n);
            cov[b][a] = cov[a][b];
        }
    }

    for (std::size_t c = 0; c < n_components; ++c) {
        // Deterministic start vector with a mild index ramp so it is never
        // orthogonal to the dominant eigenvector by symmetry.
        Row v(p);
        for (std::size_t j = 0; j < p; ++j)
            v[j] = 1.0 + 0.1 * static_cast<double>((j + c) % 7);
        orthogonalize(v, model.components);
        double nv = norm(v);
        if (nv < 1e-30) {
            v.assign(p, 0.0);
            v[c % p] = 1.0;
            orthogonalize(v, model.components);
            nv = norm(v);
        }
        for (double& x : v) x /= nv;

        double trace = 0.0;
        for (std::size_t a = 0; a < p; ++a) trace += cov[a][a];

        double lambda = 0.0;
        for (int iter = 0; iter < 2000; ++iter) {
            Row w(p, 0.0);
            for (std::size_t a = 0; a < p; ++a) {
                double s = 0.0;
                for (std::size_t b = 0; b < p; ++b) s += cov[a][b] * v[b];
                w[a] = s;
            }
            orthogonalize(w, model.components);
            double nw = norm(w);
            // below rounding noise relative to the total variance: this
            // direction carries no variance, iterating would only amplify
            // numerical residue of already-extracted components
            if (nw < 1e-12 * std::max(trace, 1e-300)) break;
            for (double& x : w) x /= nw;
            double delta = 0.0;
            for (std::size_t j = 0; j < p; ++j) delta = std::max(delta, std::fabs(w[j] - v[j]));
            // eigenvectors are sign-ambiguous per iteration
            double delta_neg = 0.0;
            for (std::size_t j = 0; j < p; ++j)
                delta_neg = std::max(delta_neg, std::fabs(w[j] + v[j]));
            v = w;
            lambda = nw;
            if (std::min(delta, delta_neg) < 1e-13) break;
        }

        // Re-orthogonalize against the extracted components; if nothing is
        // left the residual subspace has zero variance, so any unit vector
        // orthogonal to the previous components completes the basis.
        orthogonalize(v, model.components);
        double rv = norm(v);
        if (rv < 1e-8) {
            std::size_t best = 0;
            double best_norm = -1.0;
            Row best_e;
            for (std::size_t j = 0; j < p; ++j) {
                Row e(p, 0.0);
                e[j] = 1.0;
                orthogonalize(e, model.components);
                double ne = norm(e);
                if (ne > best_norm) {
                    best_norm = ne;
                    best_e = std::move(e);
                    best = j;
                }
            }
            (void)best;
            v = std::move(best_e);
            rv = best_norm;
        }
        for (double& x : v) x /= rv;

        // Rayleigh quotient as the explained variance of this component.
        double rq = 0.0;
        for (std::size_t a = 0; a < p; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < p; ++b) s += cov[a][b] * v[b];
            rq += v[a] * s;
        }
        (void)lambda;
        fix_sign(v);
        model.components.push_back(std::move(v));
        model.explained_variance.push_back(std::max(rq, 0.0));
    }
    return model;
}

Table pca_transform(const PcaModel& model, const Table& rows) {
    Table scores(rows.size(), Row(model.components.size(), 0.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != model.mean.size()) throw ContractError("pca_transform: column mismatch");
        for (std::size_t c = 0; c < model.components.size(); ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < model.mean.size(); ++j)
                s += (rows[i][j] - model.mean[j]) * model.components[c][j];
            scores[i][c] = s;
        }
    }
    return scores;
}

}  // namespace radfit
