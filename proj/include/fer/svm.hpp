#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fer/matrix.hpp"

namespace fer {

enum class KernelKind { gaussian, linear };

struct KernelConfig {
    KernelKind kind = KernelKind::gaussian;
    double gamma = 0.0;  // <= 0 means the 1/feature_dim default at training time
    double c = 1.0;      // box constraint
    double tol = 1e-3;   // KKT tolerance
    std::size_t max_passes = 10;  // sweep-budget multiplier, see smo_train

    void validate() const;
};

/// Soft-margin binary machine in dual form. Only points with nonzero
/// alpha are retained; dual_coeffs holds alpha_i * y_i.
struct BinarySvm {
    Matrix support_vectors;
    std::vector<double> dual_coeffs;
    std::vector<std::size_t> support_indices;  // rows of the training data
    double bias = 0.0;
    KernelKind kind = KernelKind::gaussian;
    double gamma = 0.0;
    double c = 1.0;
};

struct MulticlassSvm {
    std::vector<int> classes;  // ascending
    std::vector<BinarySvm> machines;
};

/// exp(-gamma |a - b|^2).
double gaussian_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// Trains a binary soft-margin SVM by sequential minimal optimization:
/// two-variable analytic updates, second index chosen by maximal
/// |E_i - E_j|, eta guarded at 1e-12. The solver sweeps the data until a
/// full sweep changes nothing (KKT satisfied within tol) or the sweep
/// budget 100 * max_passes runs out. It is deterministic; the seed is
/// accepted for interface stability but currently unused.
BinarySvm smo_train(const Matrix& data, const std::vector<int>& labels,
                    const KernelConfig& cfg, std::uint64_t seed);

/// sum_i dual_coeffs[i] * k(sv_i, x) + bias.
double decision_value(const BinarySvm& m, std::span<const double> x);

/// 2 / |w| with w = sum_i alpha_i y_i x_i. Defined for the linear kernel
/// only; the Gaussian feature space has no explicit w.
double margin(const BinarySvm& m);

/// One-vs-all: machine m trains class m against the rest, classes in
/// ascending label order, per-machine seeds derived from the given seed.
MulticlassSvm ova_train(const Matrix& data, const std::vector<int>& labels,
                        const KernelConfig& cfg, std::uint64_t seed);

/// argmax of the machines' decision values; exact ties resolve to the
/// lowest class in the stable order.
int ova_predict(const MulticlassSvm& m, std::span<const double> x);

}  // namespace fer
