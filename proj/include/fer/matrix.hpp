#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fer {

/// Dense row-major matrix of doubles. Immutable by convention once a
/// computation hands it out; cheap to move, explicit to copy.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }
    std::span<const double> row_span(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;
    std::string shape_str() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// C = A * B. Accumulates over A's columns in ascending order for every
/// output element; rows of C may be computed by parallel workers without
/// changing a single bit of the result.
Matrix matmul(const Matrix& a, const Matrix& b);

/// C = A * B^T. Same fixed accumulation order guarantees as matmul.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// C = A^T * B. Accumulates over A's rows in ascending order.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

struct SymEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // eigenvector i in column i, orthonormal
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Throws ValidationError if the input is not square or not symmetric
/// within 1e-9, NumericalError if the sweep limit is hit.
SymEigen sym_eigen(const Matrix& a);

/// Feature rows with an aligned label per row. Labels may be empty while
/// a matrix is purely geometric (e.g. straight out of the descriptor
/// stage) and get attached by the dataset pipeline.
struct FeatureMatrix {
    Matrix x;
    std::vector<int> labels;
};

}  // namespace fer
