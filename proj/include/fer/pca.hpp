#pragma once

#include <vector>

#include "fer/matrix.hpp"

namespace fer {

struct PcaModel {
    std::vector<double> mean;  // d
    Matrix components;         // k x d, orthonormal rows, descending variance
    std::vector<double> eigenvalues;  // k, descending
};

enum class PcaRoute {
    automatic,   // gram when N < d, covariance otherwise
    covariance,  // eigendecompose the d x d covariance
    gram,        // eigendecompose the N x N Gram matrix and lift
};

/// Fits the top-k principal axes of the mean-centered data. The Gram
/// route handles the wide case (N much smaller than d) without ever
/// forming the d x d covariance. Component signs are fixed so that each
/// component's largest-magnitude entry is positive.
PcaModel pca_fit(const Matrix& data, std::size_t k, PcaRoute route = PcaRoute::automatic);

/// (x - mean) * components^T, shape N x k.
Matrix pca_project(const PcaModel& model, const Matrix& x);

/// Projects, reconstructs, and returns the mean over rows of the squared
/// row reconstruction error.
double pca_reconstruction_error(const PcaModel& model, const Matrix& x);

}  // namespace fer
