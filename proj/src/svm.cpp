#include "fer/svm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "fer/errors.hpp"
#include "fer/rng.hpp"

namespace fer {

namespace {

constexpr double kEtaGuard = 1e-12;
constexpr double kStepGuard = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double kernel_eval(KernelKind kind, double gamma, std::span<const double> a,
                   std::span<const double> b) {
    if (kind == KernelKind::linear) return dot(a, b);
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

class SmoSolver {
public:
    SmoSolver(const Matrix& x, const std::vector<int>& y, const KernelConfig& cfg,
              double gamma)
        : x_(x), y_(y), cfg_(cfg), gamma_(gamma), n_(x.rows()) {
        alpha_.assign(n_, 0.0);
        f_.assign(n_, 0.0);  // sum_j alpha_j y_j K_ij, bias excluded
        kernel_ = Matrix(n_, n_);
        for (std::size_t i = 0; i < n_; ++i) {
            kernel_(i, i) = kernel_eval(cfg.kind, gamma, x.row_span(i), x.row_span(i));
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double k = kernel_eval(cfg.kind, gamma, x.row_span(i), x.row_span(j));
                kernel_(i, j) = k;
                kernel_(j, i) = k;
            }
        }
    }

    void solve() {
        // Maximal-violating-pair selection. With the per-point bias
        // candidate g_t = y_t - f_t, optimality within tol means
        //   max over I_up of g_t  -  min over I_low of g_t  <= tol,
        // where I_up collects points whose alpha may grow along +y and
        // I_low those that may shrink. Every interior point lands in both
        // sets, so the averaged final bias sits between the two extremes
        // and all KKT conditions hold within tol at the model surface.
        const std::size_t budget = 100 * std::max<std::size_t>(cfg_.max_passes, 1) * n_;
        for (std::size_t iter = 0; iter < budget; ++iter) {
            std::size_t up = n_, low = n_;
            double m_up = 0.0, m_low = 0.0;
            for (std::size_t t = 0; t < n_; ++t) {
                const double g = y_[t] - f_[t];
                if (in_up(t) && (up == n_ || g > m_up)) {
                    up = t;
                    m_up = g;
                }
                if (in_low(t) && (low == n_ || g < m_low)) {
                    low = t;
                    m_low = g;
                }
            }
            if (up == n_ || low == n_ || m_up - m_low <= cfg_.tol) return;
            if (step(up, low)) continue;
            // The analytic update can reject a pair (flat eta direction);
            // fall back to the first pair that moves.
            bool moved = false;
            for (std::size_t t = 0; t < n_ && !moved; ++t)
                if (t != low && in_low(t)) moved = step(up, t);
            for (std::size_t t = 0; t < n_ && !moved; ++t)
                if (t != up && in_up(t)) moved = step(t, low);
            if (!moved) {
                std::cerr << "warning: SMO stalled " << m_up - m_low - cfg_.tol
                          << " above tolerance\n";
                return;
            }
        }
        std::cerr << "warning: SMO iteration budget exhausted before convergence\n";
    }

    const std::vector<double>& alpha() const { return alpha_; }

    /// Bias from the KKT equalities: averaged over unbounded support
    /// vectors, falling back to all support vectors when every alpha
    /// sits on the box boundary.
    double final_bias() const {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n_; ++i)
            if (alpha_[i] > 0.0 && alpha_[i] < cfg_.c) {
                sum += y_[i] - f_[i];
                ++count;
            }
        if (count == 0)
            for (std::size_t i = 0; i < n_; ++i)
                if (alpha_[i] > 0.0) {
                    sum += y_[i] - f_[i];
                    ++count;
                }
        return count ? sum / static_cast<double>(count) : 0.0;
    }

private:
    bool in_up(std::size_t t) const {
        return (y_[t] > 0 && alpha_[t] < cfg_.c) || (y_[t] < 0 && alpha_[t] > 0.0);
    }
    bool in_low(std::size_t t) const {
        return (y_[t] < 0 && alpha_[t] < cfg_.c) || (y_[t] > 0 && alpha_[t] > 0.0);
    }

    bool step(std::size_t i, std::size_t j) {
        if (i == j) return false;
        const double ai_old = alpha_[i], aj_old = alpha_[j];
        const int yi = y_[i], yj = y_[j];
        double lo, hi;
        if (yi != yj) {
            lo = std::max(0.0, aj_old - ai_old);
            hi = std::min(cfg_.c, cfg_.c + aj_old - ai_old);
        } else {
            lo = std::max(0.0, ai_old + aj_old - cfg_.c);
            hi = std::min(cfg_.c, ai_old + aj_old);
        }
        if (lo >= hi) return false;

        const double eta = kernel_(i, i) + kernel_(j, j) - 2.0 * kernel_(i, j);
        if (eta <= kEtaGuard) return false;

        // The update depends only on the bias-free error difference.
        const double diff = (f_[i] - y_[i]) - (f_[j] - y_[j]);
        double aj = std::clamp(aj_old + yj * diff / eta, lo, hi);
        if (std::abs(aj - aj_old) < kStepGuard) return false;
        const double ai = ai_old + yi * yj * (aj_old - aj);

        const double di = (ai - ai_old) * yi;
        const double dj = (aj - aj_old) * yj;
        for (std::size_t k = 0; k < n_; ++k) f_[k] += di * kernel_(i, k) + dj * kernel_(j, k);
        alpha_[i] = ai;
        alpha_[j] = aj;
        return true;
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    const KernelConfig& cfg_;
    const double gamma_;
    const std::size_t n_;
    Matrix kernel_;
    std::vector<double> alpha_;
    std::vector<double> f_;
    double b_ = 0.0;
};

}  // namespace

void KernelConfig::validate() const {
    if (!(c > 0.0)) throw ValidationError("svm: C must be positive");
    if (!(tol > 0.0)) throw ValidationError("svm: tol must be positive");
}

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    if (a.size() != b.size())
        throw ValidationError("gaussian_kernel: length mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    if (!(gamma > 0.0)) throw ValidationError("gaussian_kernel: gamma must be positive");
    return kernel_eval(KernelKind::gaussian, gamma, a, b);
}

BinarySvm smo_train(const Matrix& data, const std::vector<int>& labels,
                    const KernelConfig& cfg, std::uint64_t seed) {
    (void)seed;
    cfg.validate();
    if (labels.size() != data.rows())
        throw ValidationError("smo_train: " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(data.rows()) + " rows");
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y == 1)
            has_pos = true;
        else if (y == -1)
            has_neg = true;
        else
            throw ValidationError("smo_train: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw ValidationError("smo_train: both classes must be present");

    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(data.cols());

    SmoSolver solver(data, labels, cfg, gamma);
    solver.solve();

    BinarySvm model;
    model.kind = cfg.kind;
    model.gamma = gamma;
    model.c = cfg.c;
    model.bias = solver.final_bias();

    std::size_t sv_count = 0;
    for (double a : solver.alpha())
        if (a > 0.0) ++sv_count;
    if (sv_count == 0) throw NumericalError("smo_train: solver retained no support vectors");

    model.support_vectors = Matrix(sv_count, data.cols());
    model.dual_coeffs.reserve(sv_count);
    model.support_indices.reserve(sv_count);
    std::size_t row = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (solver.alpha()[i] <= 0.0) continue;
        std::copy(data.row(i), data.row(i) + data.cols(), model.support_vectors.row(row++));
        model.dual_coeffs.push_back(solver.alpha()[i] * labels[i]);
        model.support_indices.push_back(i);
    }
    return model;
}

double decision_value(const BinarySvm& m, std::span<const double> x) {
    if (x.size() != m.support_vectors.cols())
        throw ValidationError("decision_value: input width " + std::to_string(x.size()) +
                              " does not match support vector width " +
                              std::to_string(m.support_vectors.cols()));
    double s = m.bias;
    for (std::size_t i = 0; i < m.support_vectors.rows(); ++i)
        s += m.dual_coeffs[i] * kernel_eval(m.kind, m.gamma, m.support_vectors.row_span(i), x);
    return s;
}

double margin(const BinarySvm& m) {
    if (m.kind != KernelKind::linear)
        throw ValidationError("margin undefined for implicit feature space");
    std::vector<double> w(m.support_vectors.cols(), 0.0);
    for (std::size_t i = 0; i < m.support_vectors.rows(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] += m.dual_coeffs[i] * m.support_vectors(i, j);
    const double norm = std::sqrt(dot(w, w));
    if (norm == 0.0) throw NumericalError("margin: zero weight vector");
    return 2.0 / norm;
}

MulticlassSvm ova_train(const Matrix& data, const std::vector<int>& labels,
                        const KernelConfig& cfg, std::uint64_t seed) {
    if (labels.size() != data.rows())
        throw ValidationError("ova_train: " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(data.rows()) + " rows");
    const std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2)
        throw ValidationError("ova_train: need at least 2 classes, got " +
                              std::to_string(distinct.size()));

    MulticlassSvm model;
    model.classes.assign(distinct.begin(), distinct.end());
    model.machines.reserve(model.classes.size());
    std::vector<int> binary(labels.size());
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            binary[i] = labels[i] == model.classes[c] ? 1 : -1;
        model.machines.push_back(
            smo_train(data, binary, cfg, derive_seed(seed, static_cast<std::uint64_t>(c))));
    }
    return model;
}

int ova_predict(const MulticlassSvm& m, std::span<const double> x) {
    if (m.machines.empty()) throw ValidationError("ova_predict: empty model");
    int best_class = m.classes.front();
    double best_value = decision_value(m.machines.front(), x);
    for (std::size_t c = 1; c < m.machines.size(); ++c) {
        const double v = decision_value(m.machines[c], x);
        if (v > best_value) {
            best_value = v;
            best_class = m.classes[c];
        }
    }
    return best_class;
}

}  // namespace fer
