#include "fer/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fer/errors.hpp"
#include "fer/parallel.hpp"

namespace fer {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0)
        throw ValidationError("matrix dimensions must be at least 1x1, got " + shape_str());
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) throw ValidationError("matrix literal must be non-empty");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ValidationError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

namespace {

constexpr std::size_t kSerialWork = 1 << 16;

void require_match(std::size_t a, std::size_t b, const Matrix& ma, const Matrix& mb,
                   const char* op) {
    if (a != b)
        throw ValidationError(std::string(op) + ": dimension mismatch (" + ma.shape_str() +
                              " vs " + mb.shape_str() + ")");
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_match(a.cols(), b.rows(), a, b, "matmul");
    Matrix c(a.rows(), b.cols());
    auto kernel = [&](std::size_t lo, std::size_t hi) {
        const std::size_t n = b.cols();
        for (std::size_t i = lo; i < hi; ++i) {
            double* ci = c.row(i);
            const double* ai = a.row(i);
            for (std::size_t k = 0; k < a.cols(); ++k) {
                const double aik = ai[k];
                const double* bk = b.row(k);
                for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
            }
        }
    };
    if (a.rows() * a.cols() * b.cols() < kSerialWork)
        kernel(0, a.rows());
    else
        parallel_for(a.rows(), kernel);
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require_match(a.cols(), b.cols(), a, b, "matmul_nt");
    Matrix c(a.rows(), b.rows());
    auto kernel = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double* ai = a.row(i);
            double* ci = c.row(i);
            for (std::size_t j = 0; j < b.rows(); ++j) {
                const double* bj = b.row(j);
                double acc = 0.0;
                for (std::size_t k = 0; k < a.cols(); ++k) acc += ai[k] * bj[k];
                ci[j] = acc;
            }
        }
    };
    if (a.rows() * a.cols() * b.rows() < kSerialWork)
        kernel(0, a.rows());
    else
        parallel_for(a.rows(), kernel);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require_match(a.rows(), b.rows(), a, b, "matmul_tn");
    Matrix c(a.cols(), b.cols());
    auto kernel = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* ci = c.row(i);
            for (std::size_t r = 0; r < a.rows(); ++r) {
                const double ari = a(r, i);
                const double* br = b.row(r);
                for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += ari * br[j];
            }
        }
    };
    if (a.rows() * a.cols() * b.cols() < kSerialWork)
        kernel(0, a.cols());
    else
        parallel_for(a.cols(), kernel);
    return c;
}

SymEigen sym_eigen(const Matrix& input) {
    if (input.rows() != input.cols())
        throw ValidationError("sym_eigen: matrix must be square, got " + input.shape_str());
    const std::size_t n = input.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(input(i, j) - input(j, i)) > 1e-9)
                throw ValidationError("sym_eigen: matrix is not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");

    Matrix a = input;
    Matrix v = Matrix::identity(n);

    auto off_diag_sq = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return s;
    };

    double frob = 0.0;
    for (double x : a.data()) frob += x * x;
    const double stop = std::max(frob * 1e-28, 1e-300);

    constexpr int kMaxSweeps = 64;
    int sweep = 0;
    while (off_diag_sq() > stop) {
        if (++sweep > kMaxSweeps)
            throw NumericalError("sym_eigen: Jacobi sweeps did not converge for " +
                                 input.shape_str() + " matrix");
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p), arq = a(r, q);
                        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

}  // namespace fer
