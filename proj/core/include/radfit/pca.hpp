#pragma once

#include "radfit/learners.hpp"

namespace radfit {

/// Principal components of a centered data table. Component rows are
/// orthonormal; the largest-magnitude entry of each component is positive.
struct PcaModel {
    std::vector<double> mean;
    Table components;  // n_components x n_features
    std::vector<double> explained_variance;
};

PcaModel fit_pca(const Table& rows, std::size_t n_components);

Table pca_transform(const PcaModel& model, const Table& rows);

}  // namespace radfit
