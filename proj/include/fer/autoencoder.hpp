#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fer/matrix.hpp"

namespace fer {

/// One sparse autoencoder: sigmoid encoder from width m to width n and a
/// mirrored (untied) sigmoid decoder back to m.
struct AeLayer {
    Matrix w_enc;               // n x m
    std::vector<double> b_enc;  // n
    Matrix w_dec;               // m x n
    std::vector<double> b_dec;  // m

    std::size_t input_width() const { return w_enc.cols(); }
    std::size_t hidden_width() const { return w_enc.rows(); }
};

struct AeHyper {
    double lambda = 1e-4;        // weight decay
    double beta = 3.0;           // sparsity penalty weight
    double rho = 0.05;           // sparsity target
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 0;  // 0 = full batch
    std::size_t epochs = 400;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Encoder layers in order; widths[0] is the input width, widths.back()
/// the bottleneck. layers[i] maps widths[i] -> widths[i+1].
struct StackedAutoencoder {
    std::vector<AeLayer> layers;
    std::vector<std::size_t> widths;

    std::size_t input_width() const { return widths.front(); }
    std::size_t bottleneck_width() const { return widths.back(); }
};

/// Elementwise logistic function 1 / (1 + exp(-z)).
std::vector<double> sigmoid(std::span<const double> z);

struct ForwardResult {
    std::vector<double> hidden;          // sigmoid(W_enc x + b_enc)
    std::vector<double> reconstruction;  // sigmoid(W_dec a + b_dec)
};
ForwardResult forward(const AeLayer& layer, std::span<const double> x);

/// KL divergence between Bernoulli(rho) and Bernoulli(rho_hat); rho_hat
/// is clamped to [1e-10, 1 - 1e-10] so saturated units stay finite.
double kl_divergence(double rho, double rho_hat);

struct CostBreakdown {
    double total = 0.0;
    double recon = 0.0;     // (1/N) sum over samples of 0.5 |y - x|^2
    double decay = 0.0;     // (lambda/2) (|W_enc|^2 + |W_dec|^2)
    double sparsity = 0.0;  // beta * sum_j KL(rho || mean activation j)
};
CostBreakdown cost(const AeLayer& layer, const Matrix& batch, const AeHyper& h);

struct AeGradient {
    Matrix w_enc;
    std::vector<double> b_enc;
    Matrix w_dec;
    std::vector<double> b_dec;
};
/// Exact analytic gradient of cost().total, including the sparsity
/// term's path through the batch-mean activations.
AeGradient gradient(const AeLayer& layer, const Matrix& batch, const AeHyper& h);

struct TrainedLayer {
    AeLayer layer;
    /// Cost before each epoch's update, plus one final entry after the
    /// last update; size epochs + 1.
    std::vector<double> epoch_costs;
};
/// Trains one layer by mini-batch gradient descent with momentum from a
/// seeded uniform init in +-sqrt(6 / (m + n)).
TrainedLayer train_layer(const Matrix& data, std::size_t hidden_width, const AeHyper& h);

/// Greedy pretraining: layer 1 on the data, each further layer on the
/// previous layer's activations. Widths must be strictly decreasing and
/// start below the data width.
StackedAutoencoder train_stacked(const Matrix& data,
                                 const std::vector<std::size_t>& hidden_widths,
                                 const AeHyper& h);

struct FineTuneResult {
    StackedAutoencoder stack;
    double recon_before = 0.0;
    double recon_after = 0.0;  // never above recon_before on the training data
};
/// End-to-end backprop over the unrolled encoder/decoder chain on
/// reconstruction error plus weight decay (no sparsity term here).
/// h.epochs == 0 is a no-op.
FineTuneResult fine_tune(const StackedAutoencoder& stack, const Matrix& data,
                         const AeHyper& h);

/// Rows of x mapped through every encoder layer; output width is the
/// bottleneck width.
Matrix encode(const StackedAutoencoder& stack, const Matrix& x);

/// Full encoder then mirrored decoder pass.
Matrix reconstruct(const StackedAutoencoder& stack, const Matrix& x);

/// (1/N) sum over rows of the squared row difference. The reconstruction
/// metric shared by the autoencoder and PCA comparisons.
double mean_row_sq_error(const Matrix& a, const Matrix& b);

}  // namespace fer
