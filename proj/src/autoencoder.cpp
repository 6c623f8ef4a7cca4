#include "fer/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fer/errors.hpp"
#include "fer/rng.hpp"

namespace fer {

namespace {

constexpr double kRhoHatFloor = 1e-10;

double sigmoid_scalar(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// sigmoid(X * W^T + b), one bias per output column.
Matrix affine_sigmoid(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix z = matmul_nt(x, w);
    for (std::size_t r = 0; r < z.rows(); ++r) {
        double* row = z.row(r);
        for (std::size_t c = 0; c < z.cols(); ++c) row[c] = sigmoid_scalar(row[c] + b[c]);
    }
    return z;
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> s(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) s[c] += row[c];
    }
    return s;
}

double sum_squares(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return s;
}

void check_batch(const AeLayer& layer, const Matrix& batch) {
    if (batch.rows() == 0) throw ValidationError("autoencoder: empty batch");
    if (batch.cols() != layer.input_width())
        throw ValidationError("autoencoder: batch width " + std::to_string(batch.cols()) +
                              " does not match layer input width " +
                              std::to_string(layer.input_width()));
}

struct BatchPass {
    Matrix hidden;   // N x n
    Matrix output;   // N x m
    CostBreakdown costs;
    std::vector<double> rho_hat;       // clamped batch means
    std::vector<bool> rho_hat_interior;  // clamp inactive, derivative flows
};

BatchPass run_batch(const AeLayer& layer, const Matrix& batch, const AeHyper& h) {
    BatchPass p;
    p.hidden = affine_sigmoid(batch, layer.w_enc, layer.b_enc);
    p.output = affine_sigmoid(p.hidden, layer.w_dec, layer.b_dec);

    const auto n_samples = static_cast<double>(batch.rows());
    double recon = 0.0;
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const double* y = p.output.row(r);
        const double* x = batch.row(r);
        for (std::size_t c = 0; c < batch.cols(); ++c) {
            const double d = y[c] - x[c];
            recon += d * d;
        }
    }
    p.costs.recon = 0.5 * recon / n_samples;
    p.costs.decay = 0.5 * h.lambda * (sum_squares(layer.w_enc) + sum_squares(layer.w_dec));

    p.rho_hat = column_sums(p.hidden);
    p.rho_hat_interior.resize(p.rho_hat.size());
    double sparsity = 0.0;
    for (std::size_t j = 0; j < p.rho_hat.size(); ++j) {
        double mean = p.rho_hat[j] / n_samples;
        p.rho_hat_interior[j] = mean > kRhoHatFloor && mean < 1.0 - kRhoHatFloor;
        mean = std::clamp(mean, kRhoHatFloor, 1.0 - kRhoHatFloor);
        p.rho_hat[j] = mean;
        sparsity += kl_divergence(h.rho, mean);
    }
    p.costs.sparsity = h.beta * sparsity;
    p.costs.total = p.costs.recon + p.costs.decay + p.costs.sparsity;
    return p;
}

AeGradient backprop(const AeLayer& layer, const Matrix& batch, const AeHyper& h,
                    const BatchPass& p) {
    const std::size_t n_samples = batch.rows();
    const double inv_n = 1.0 / static_cast<double>(n_samples);

    // dJ/dZ2, with the 1/N of the reconstruction term folded in.
    Matrix d2(n_samples, batch.cols());
    for (std::size_t r = 0; r < n_samples; ++r) {
        const double* y = p.output.row(r);
        const double* x = batch.row(r);
        double* d = d2.row(r);
        for (std::size_t c = 0; c < batch.cols(); ++c)
            d[c] = inv_n * (y[c] - x[c]) * y[c] * (1.0 - y[c]);
    }

    AeGradient g;
    g.w_dec = matmul_tn(d2, p.hidden);
    for (std::size_t i = 0; i < g.w_dec.data().size(); ++i)
        g.w_dec.data()[i] += h.lambda * layer.w_dec.data()[i];
    g.b_dec = column_sums(d2);

    // Sparsity penalty enters every sample's hidden delta through the
    // batch-mean activation; the derivative is zero where the clamp hit.
    std::vector<double> sparse_term(p.rho_hat.size(), 0.0);
    for (std::size_t j = 0; j < p.rho_hat.size(); ++j)
        if (p.rho_hat_interior[j])
            sparse_term[j] = h.beta * inv_n *
                             (-h.rho / p.rho_hat[j] + (1.0 - h.rho) / (1.0 - p.rho_hat[j]));

    Matrix d1 = matmul(d2, layer.w_dec);  // N x n
    for (std::size_t r = 0; r < n_samples; ++r) {
        double* d = d1.row(r);
        const double* a = p.hidden.row(r);
        for (std::size_t j = 0; j < d1.cols(); ++j)
            d[j] = (d[j] + sparse_term[j]) * a[j] * (1.0 - a[j]);
    }

    g.w_enc = matmul_tn(d1, batch);
    for (std::size_t i = 0; i < g.w_enc.data().size(); ++i)
        g.w_enc.data()[i] += h.lambda * layer.w_enc.data()[i];
    g.b_enc = column_sums(d1);
    return g;
}

AeLayer init_layer(std::size_t input_width, std::size_t hidden_width, Rng& rng) {
    AeLayer layer;
    layer.w_enc = Matrix(hidden_width, input_width);
    layer.w_dec = Matrix(input_width, hidden_width);
    layer.b_enc.assign(hidden_width, 0.0);
    layer.b_dec.assign(input_width, 0.0);
    const double bound =
        std::sqrt(6.0 / static_cast<double>(input_width + hidden_width));
    for (double& w : layer.w_enc.data()) w = rng.uniform(-bound, bound);
    for (double& w : layer.w_dec.data()) w = rng.uniform(-bound, bound);
    return layer;
}

struct Momentum {
    Matrix w_enc, w_dec;
    std::vector<double> b_enc, b_dec;
};

void apply_update(AeLayer& layer, Momentum& vel, const AeGradient& g, const AeHyper& h) {
    auto step = [&](std::vector<double>& param, std::vector<double>& v,
                    const std::vector<double>& grad) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            v[i] = h.momentum * v[i] - h.learning_rate * grad[i];
            param[i] += v[i];
        }
    };
    step(layer.w_enc.data(), vel.w_enc.data(), g.w_enc.data());
    step(layer.w_dec.data(), vel.w_dec.data(), g.w_dec.data());
    step(layer.b_enc, vel.b_enc, g.b_enc);
    step(layer.b_dec, vel.b_dec, g.b_dec);
}

Matrix take_rows(const Matrix& data, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), data.cols());
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy(data.row(idx[r]), data.row(idx[r]) + data.cols(), out.row(r));
    return out;
}

}  // namespace

void AeHyper::validate() const {
    if (!(rho > 0.0 && rho < 1.0))
        throw ValidationError("autoencoder: rho must lie in (0, 1)");
    if (lambda < 0.0) throw ValidationError("autoencoder: lambda must be non-negative");
    if (beta < 0.0) throw ValidationError("autoencoder: beta must be non-negative");
    if (!(learning_rate > 0.0))
        throw ValidationError("autoencoder: learning_rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0)
        throw ValidationError("autoencoder: momentum must lie in [0, 1)");
    if (epochs < 1) throw ValidationError("autoencoder: epochs must be at least 1");
}

std::vector<double> sigmoid(std::span<const double> z) {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = sigmoid_scalar(z[i]);
    return out;
}

ForwardResult forward(const AeLayer& layer, std::span<const double> x) {
    if (x.size() != layer.input_width())
        throw ValidationError("forward: input width " + std::to_string(x.size()) +
                              " does not match layer input width " +
                              std::to_string(layer.input_width()));
    Matrix row(1, x.size());
    std::copy(x.begin(), x.end(), row.row(0));
    const Matrix a = affine_sigmoid(row, layer.w_enc, layer.b_enc);
    const Matrix y = affine_sigmoid(a, layer.w_dec, layer.b_dec);
    return {std::vector<double>(a.row(0), a.row(0) + a.cols()),
            std::vector<double>(y.row(0), y.row(0) + y.cols())};
}

double kl_divergence(double rho, double rho_hat) {
    if (!(rho > 0.0 && rho < 1.0))
        throw ValidationError("kl_divergence: rho must lie in (0, 1)");
    const double q = std::clamp(rho_hat, kRhoHatFloor, 1.0 - kRhoHatFloor);
    if (q == rho) return 0.0;
    return rho * std::log(rho / q) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - q));
}

CostBreakdown cost(const AeLayer& layer, const Matrix& batch, const AeHyper& h) {
    check_batch(layer, batch);
    return run_batch(layer, batch, h).costs;
}

AeGradient gradient(const AeLayer& layer, const Matrix& batch, const AeHyper& h) {
    check_batch(layer, batch);
    const BatchPass p = run_batch(layer, batch, h);
    return backprop(layer, batch, h, p);
}

TrainedLayer train_layer(const Matrix& data, std::size_t hidden_width, const AeHyper& h) {
    h.validate();
    if (data.rows() == 0) throw ValidationError("train_layer: empty dataset");
    if (hidden_width == 0) throw ValidationError("train_layer: hidden width must be positive");
    if (hidden_width >= data.cols())
        throw ValidationError("train_layer: hidden width " + std::to_string(hidden_width) +
                              " does not reduce input width " + std::to_string(data.cols()));

    Rng rng(h.seed);
    TrainedLayer result;
    result.layer = init_layer(data.cols(), hidden_width, rng);
    result.epoch_costs.reserve(h.epochs + 1);

    Momentum vel{Matrix(hidden_width, data.cols()), Matrix(data.cols(), hidden_width),
                 std::vector<double>(hidden_width, 0.0),
                 std::vector<double>(data.cols(), 0.0)};

    const std::size_t n = data.rows();
    const std::size_t batch_size =
        (h.batch_size == 0 || h.batch_size >= n) ? n : h.batch_size;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < h.epochs; ++epoch) {
        if (batch_size == n) {
            const BatchPass p = run_batch(result.layer, data, h);
            result.epoch_costs.push_back(p.costs.total);
            apply_update(result.layer, vel, backprop(result.layer, data, h, p), h);
            continue;
        }
        // Seeded Fisher-Yates reshuffle each epoch.
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(order[i], order[rng.below(i + 1)]);
        double epoch_cost = 0.0;
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t len = std::min(batch_size, n - start);
            const Matrix batch = take_rows(data, {order.data() + start, len});
            const BatchPass p = run_batch(result.layer, batch, h);
            epoch_cost += p.costs.total * static_cast<double>(len);
            apply_update(result.layer, vel, backprop(result.layer, batch, h, p), h);
        }
        result.epoch_costs.push_back(epoch_cost / static_cast<double>(n));
    }
    result.epoch_costs.push_back(run_batch(result.layer, data, h).costs.total);
    return result;
}

StackedAutoencoder train_stacked(const Matrix& data,
                                 const std::vector<std::size_t>& hidden_widths,
                                 const AeHyper& h) {
    if (hidden_widths.empty()) throw ValidationError("train_stacked: no hidden widths");
    std::size_t prev = data.cols();
    for (std::size_t w : hidden_widths) {
        if (w >= prev)
            throw ValidationError(
                "train_stacked: widths must be strictly decreasing from the input width");
        prev = w;
    }

    StackedAutoencoder stack;
    stack.widths.push_back(data.cols());
    Matrix activations = data;
    for (std::size_t i = 0; i < hidden_widths.size(); ++i) {
        AeHyper layer_h = h;
        layer_h.seed = derive_seed(h.seed, i + 1);
        TrainedLayer trained = train_layer(activations, hidden_widths[i], layer_h);
        activations = affine_sigmoid(activations, trained.layer.w_enc, trained.layer.b_enc);
        stack.layers.push_back(std::move(trained.layer));
        stack.widths.push_back(hidden_widths[i]);
    }
    return stack;
}

Matrix encode(const StackedAutoencoder& stack, const Matrix& x) {
    if (x.cols() != stack.input_width())
        throw ValidationError("encode: input width " + std::to_string(x.cols()) +
                              " does not match stack input width " +
                              std::to_string(stack.input_width()));
    Matrix a = x;
    for (const AeLayer& layer : stack.layers)
        a = affine_sigmoid(a, layer.w_enc, layer.b_enc);
    return a;
}

Matrix reconstruct(const StackedAutoencoder& stack, const Matrix& x) {
    Matrix a = encode(stack, x);
    for (auto it = stack.layers.rbegin(); it != stack.layers.rend(); ++it)
        a = affine_sigmoid(a, it->w_dec, it->b_dec);
    return a;
}

double mean_row_sq_error(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("mean_row_sq_error: shape mismatch (" + a.shape_str() + " vs " +
                              b.shape_str() + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(a.rows());
}

namespace {

// The unrolled fine-tuning network: enc_1..enc_L then dec_L..dec_1, all
// sigmoid, trained on reconstruction + decay.
struct Unrolled {
    std::vector<const Matrix*> w;
    std::vector<const std::vector<double>*> b;
};

Unrolled unroll(const StackedAutoencoder& stack) {
    Unrolled u;
    for (const AeLayer& l : stack.layers) {
        u.w.push_back(&l.w_enc);
        u.b.push_back(&l.b_enc);
    }
    for (auto it = stack.layers.rbegin(); it != stack.layers.rend(); ++it) {
        u.w.push_back(&it->w_dec);
        u.b.push_back(&it->b_dec);
    }
    return u;
}

struct MlpParams {
    std::vector<Matrix> w;
    std::vector<std::vector<double>> b;
};

struct MlpPass {
    std::vector<Matrix> activations;  // activations[0] = input, size L+1
    double recon = 0.0;
    double decay = 0.0;
};

MlpPass mlp_forward(const MlpParams& p, const Matrix& x, double lambda) {
    MlpPass pass;
    pass.activations.reserve(p.w.size() + 1);
    pass.activations.push_back(x);
    for (std::size_t l = 0; l < p.w.size(); ++l)
        pass.activations.push_back(affine_sigmoid(pass.activations.back(), p.w[l], p.b[l]));

    const Matrix& y = pass.activations.back();
    double recon = 0.0;
    for (std::size_t i = 0; i < x.data().size(); ++i) {
        const double d = y.data()[i] - x.data()[i];
        recon += d * d;
    }
    pass.recon = 0.5 * recon / static_cast<double>(x.rows());
    double decay = 0.0;
    for (const Matrix& w : p.w) decay += sum_squares(w);
    pass.decay = 0.5 * lambda * decay;
    return pass;
}

MlpParams mlp_backward(const MlpParams& p, const Matrix& x, const MlpPass& pass,
                       double lambda) {
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    const std::size_t depth = p.w.size();

    MlpParams g;
    g.w.resize(depth);
    g.b.resize(depth);

    const Matrix& y = pass.activations.back();
    Matrix delta(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.data().size(); ++i) {
        const double yi = y.data()[i];
        delta.data()[i] = inv_n * (yi - x.data()[i]) * yi * (1.0 - yi);
    }

    for (std::size_t l = depth; l-- > 0;) {
        g.w[l] = matmul_tn(delta, pass.activations[l]);
        for (std::size_t i = 0; i < g.w[l].data().size(); ++i)
            g.w[l].data()[i] += lambda * p.w[l].data()[i];
        g.b[l] = column_sums(delta);
        if (l == 0) break;
        Matrix prev = matmul(delta, p.w[l]);
        const Matrix& a = pass.activations[l];
        for (std::size_t i = 0; i < prev.data().size(); ++i) {
            const double ai = a.data()[i];
            prev.data()[i] *= ai * (1.0 - ai);
        }
        delta = std::move(prev);
    }
    return g;
}

}  // namespace

FineTuneResult fine_tune(const StackedAutoencoder& stack, const Matrix& data,
                         const AeHyper& h) {
    if (stack.layers.empty()) throw ValidationError("fine_tune: empty stack");
    if (data.cols() != stack.input_width())
        throw ValidationError("fine_tune: data width " + std::to_string(data.cols()) +
                              " does not match stack input width " +
                              std::to_string(stack.input_width()));

    FineTuneResult result;
    result.stack = stack;
    result.recon_before = mean_row_sq_error(reconstruct(stack, data), data);
    result.recon_after = result.recon_before;
    if (h.epochs == 0) return result;
    h.validate();

    const Unrolled u = unroll(stack);
    MlpParams params;
    for (std::size_t l = 0; l < u.w.size(); ++l) {
        params.w.push_back(*u.w[l]);
        params.b.push_back(*u.b[l]);
    }

    MlpParams vel;
    for (std::size_t l = 0; l < params.w.size(); ++l) {
        vel.w.emplace_back(params.w[l].rows(), params.w[l].cols());
        vel.b.emplace_back(params.b[l].size(), 0.0);
    }

    Rng rng(derive_seed(h.seed, 0xf17eULL));
    const std::size_t n = data.rows();
    const std::size_t batch_size =
        (h.batch_size == 0 || h.batch_size >= n) ? n : h.batch_size;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    MlpParams best = params;
    double best_cost = std::numeric_limits<double>::infinity();

    auto step = [&](const Matrix& batch) {
        const MlpPass pass = mlp_forward(params, batch, h.lambda);
        const MlpParams g = mlp_backward(params, batch, pass, h.lambda);
        for (std::size_t l = 0; l < params.w.size(); ++l) {
            for (std::size_t i = 0; i < params.w[l].data().size(); ++i) {
                vel.w[l].data()[i] = h.momentum * vel.w[l].data()[i] -
                                     h.learning_rate * g.w[l].data()[i];
                params.w[l].data()[i] += vel.w[l].data()[i];
            }
            for (std::size_t i = 0; i < params.b[l].size(); ++i) {
                vel.b[l][i] = h.momentum * vel.b[l][i] - h.learning_rate * g.b[l][i];
                params.b[l][i] += vel.b[l][i];
            }
        }
        return pass.recon + pass.decay;
    };

    for (std::size_t epoch = 0; epoch < h.epochs; ++epoch) {
        double epoch_cost;
        if (batch_size == n) {
            epoch_cost = step(data);
        } else {
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(order[i], order[rng.below(i + 1)]);
            epoch_cost = 0.0;
            for (std::size_t start = 0; start < n; start += batch_size) {
                const std::size_t len = std::min(batch_size, n - start);
                epoch_cost += step(take_rows(data, {order.data() + start, len})) *
                              static_cast<double>(len);
            }
            epoch_cost /= static_cast<double>(n);
        }
        if (epoch_cost < best_cost) {
            best_cost = epoch_cost;
            best = params;
        }
    }

    // Candidate selection keeps the post-condition exact: the returned
    // parameters are whichever of {initial, best epoch, final} actually
    // reconstructs the training data best.
    auto write_back = [&](const MlpParams& src, StackedAutoencoder& dst) {
        const std::size_t depth = dst.layers.size();
        for (std::size_t i = 0; i < depth; ++i) {
            dst.layers[i].w_enc = src.w[i];
            dst.layers[i].b_enc = src.b[i];
            dst.layers[depth - 1 - i].w_dec = src.w[depth + i];
            dst.layers[depth - 1 - i].b_dec = src.b[depth + i];
        }
    };

    StackedAutoencoder final_stack = stack;
    write_back(params, final_stack);
    StackedAutoencoder best_stack = stack;
    write_back(best, best_stack);

    const double final_recon = mean_row_sq_error(reconstruct(final_stack, data), data);
    const double best_recon = mean_row_sq_error(reconstruct(best_stack, data), data);

    if (final_recon <= best_recon && final_recon <= result.recon_before) {
        result.stack = std::move(final_stack);
        result.recon_after = final_recon;
    } else if (best_recon <= result.recon_before) {
        result.stack = std::move(best_stack);
        result.recon_after = best_recon;
    }
    return result;
}

}  // namespace fer
