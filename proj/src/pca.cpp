#include "fer/pca.hpp"

#include <cmath>

#include "fer/autoencoder.hpp"
#include "fer/errors.hpp"

namespace fer {

namespace {

Matrix centered(const Matrix& data, const std::vector<double>& mean) {
    Matrix c(data.rows(), data.cols());
    for (std::size_t r = 0; r < data.rows(); ++r)
        for (std::size_t j = 0; j < data.cols(); ++j) c(r, j) = data(r, j) - mean[j];
    return c;
}

void fix_sign(Matrix& components) {
    for (std::size_t i = 0; i < components.rows(); ++i) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t j = 0; j < components.cols(); ++j) {
            const double a = std::abs(components(i, j));
            if (a > best) {
                best = a;
                arg = j;
            }
        }
        if (components(i, arg) < 0.0)
            for (std::size_t j = 0; j < components.cols(); ++j)
                components(i, j) = -components(i, j);
    }
}

}  // namespace

PcaModel pca_fit(const Matrix& data, std::size_t k, PcaRoute route) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n < 2) throw ValidationError("pca_fit: need at least 2 samples, got " +
                                     std::to_string(n));
    const std::size_t k_max = std::min(n - 1, d);
    if (k < 1 || k > k_max)
        throw ValidationError("pca_fit: k=" + std::to_string(k) + " out of range [1, " +
                              std::to_string(k_max) + "]");

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += data(r, j);
    for (double& m : model.mean) m /= static_cast<double>(n);

    const Matrix xc = centered(data, model.mean);
    const double inv_dof = 1.0 / static_cast<double>(n - 1);

    if (route == PcaRoute::automatic)
        route = n < d ? PcaRoute::gram : PcaRoute::covariance;

    model.components = Matrix(k, d);
    model.eigenvalues.resize(k);

    if (route == PcaRoute::covariance) {
        Matrix cov = matmul_tn(xc, xc);
        for (double& v : cov.data()) v *= inv_dof;
        const SymEigen eig = sym_eigen(cov);
        for (std::size_t i = 0; i < k; ++i) {
            model.eigenvalues[i] = eig.values[i];
            for (std::size_t j = 0; j < d; ++j) model.components(i, j) = eig.vectors(j, i);
        }
    } else {
        // Gram trick: the N x N matrix Xc Xc^T / (N-1) shares the nonzero
        // spectrum of the covariance; eigenvectors lift as Xc^T u.
        Matrix gram = matmul_nt(xc, xc);
        for (double& v : gram.data()) v *= inv_dof;
        const SymEigen eig = sym_eigen(gram);
        const double scale = eig.values.empty() ? 0.0 : std::abs(eig.values.front());
        for (std::size_t i = 0; i < k; ++i) {
            model.eigenvalues[i] = eig.values[i];
            if (eig.values[i] <= scale * 1e-12)
                throw NumericalError(
                    "pca_fit: requested component " + std::to_string(i + 1) +
                    " lies in the null space of the data (rank deficient)");
            // v = Xc^T u, normalized.
            double norm_sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double acc = 0.0;
                for (std::size_t r = 0; r < n; ++r) acc += xc(r, j) * eig.vectors(r, i);
                model.components(i, j) = acc;
                norm_sq += acc * acc;
            }
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (std::size_t j = 0; j < d; ++j) model.components(i, j) *= inv;
        }
    }

    fix_sign(model.components);
    return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& x) {
    if (x.cols() != model.mean.size())
        throw ValidationError("pca_project: input width " + std::to_string(x.cols()) +
                              " does not match model dimension " +
                              std::to_string(model.mean.size()));
    return matmul_nt(centered(x, model.mean), model.components);
}

double pca_reconstruction_error(const PcaModel& model, const Matrix& x) {
    const Matrix proj = pca_project(model, x);
    Matrix recon = matmul(proj, model.components);
    for (std::size_t r = 0; r < recon.rows(); ++r)
        for (std::size_t j = 0; j < recon.cols(); ++j) recon(r, j) += model.mean[j];
    return mean_row_sq_error(recon, x);
}

}  // namespace fer
