#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "fer/autoencoder.hpp"
#include "fer/errors.hpp"
#include "fer/matrix.hpp"
#include "fer/rng.hpp"

using namespace fer;

namespace {

AeLayer random_layer(std::size_t m, std::size_t n, Rng& rng, double scale = 0.8) {
    AeLayer layer;
    layer.w_enc = Matrix(n, m);
    layer.w_dec = Matrix(m, n);
    layer.b_enc.resize(n);
    layer.b_dec.resize(m);
    for (double& v : layer.w_enc.data()) v = rng.uniform(-scale, scale);
    for (double& v : layer.w_dec.data()) v = rng.uniform(-scale, scale);
    for (double& v : layer.b_enc) v = rng.uniform(-scale, scale);
    for (double& v : layer.b_dec) v = rng.uniform(-scale, scale);
    return layer;
}

Matrix random_batch(std::size_t n, std::size_t m, Rng& rng) {
    Matrix b(n, m);
    for (double& v : b.data()) v = rng.uniform(0.05, 0.95);
    return b;
}

// Independent straightforward evaluation of the three-term cost: plain
// per-sample loops, no matrix routines, written against the formula
// rather than the library internals.
double oracle_cost(const AeLayer& layer, const Matrix& batch, const AeHyper& h) {
    const std::size_t n_samples = batch.rows();
    const std::size_t m = layer.input_width();
    const std::size_t n = layer.hidden_width();

    std::vector<double> rho_hat(n, 0.0);
    double recon = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::vector<double> a(n), y(m);
        for (std::size_t j = 0; j < n; ++j) {
            double z = layer.b_enc[j];
            for (std::size_t i = 0; i < m; ++i) z += layer.w_enc(j, i) * batch(s, i);
            a[j] = 1.0 / (1.0 + std::exp(-z));
            rho_hat[j] += a[j];
        }
        for (std::size_t i = 0; i < m; ++i) {
            double z = layer.b_dec[i];
            for (std::size_t j = 0; j < n; ++j) z += layer.w_dec(i, j) * a[j];
            y[i] = 1.0 / (1.0 + std::exp(-z));
            recon += 0.5 * (y[i] - batch(s, i)) * (y[i] - batch(s, i));
        }
    }
    recon /= static_cast<double>(n_samples);

    double decay = 0.0;
    for (double w : layer.w_enc.data()) decay += w * w;
    for (double w : layer.w_dec.data()) decay += w * w;
    decay *= 0.5 * h.lambda;

    double sparsity = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double q = rho_hat[j] / static_cast<double>(n_samples);
        q = std::min(std::max(q, 1e-10), 1.0 - 1e-10);
        sparsity += h.rho * std::log(h.rho / q) +
                    (1.0 - h.rho) * std::log((1.0 - h.rho) / (1.0 - q));
    }
    sparsity *= h.beta;

    return recon + decay + sparsity;
}

// Central finite differences of cost().total with respect to every
// parameter, compared component-wise against the analytic gradient.
// The denominator guard turns the ratio into an absolute comparison for
// components below 1 in magnitude.
double max_gradient_rel_err(const AeLayer& layer, const Matrix& batch, const AeHyper& h) {
    const double step = 1e-5;
    AeLayer probe = layer;
    const AeGradient g = gradient(layer, batch, h);

    double worst = 0.0;
    auto check_block = [&](std::vector<double>& params, const std::vector<double>& grads) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + step;
            const double up = cost(probe, batch, h).total;
            params[i] = saved - step;
            const double down = cost(probe, batch, h).total;
            params[i] = saved;
            const double fd = (up - down) / (2.0 * step);
            const double denom = std::max({1.0, std::abs(fd), std::abs(grads[i])});
            worst = std::max(worst, std::abs(fd - grads[i]) / denom);
        }
    };
    check_block(probe.w_enc.data(), g.w_enc.data());
    check_block(probe.b_enc, g.b_enc);
    check_block(probe.w_dec.data(), g.w_dec.data());
    check_block(probe.b_dec, g.b_dec);
    return worst;
}

}  // namespace

TEST_SUITE_BEGIN("autoencoder");

TEST_CASE("sigmoid fixed points") {
    const std::vector<double> z = {0.0, 1.0, -3.5, 3.5};
    const auto s = sigmoid(z);
    CHECK(s[0] == 0.5);
    CHECK(s[1] == doctest::Approx(0.7310585786).epsilon(1e-9));
    CHECK(s[2] + s[3] == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : s) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("forward with zero parameters is all halves") {
    AeLayer layer;
    layer.w_enc = Matrix(2, 3);
    layer.w_dec = Matrix(3, 2);
    layer.b_enc.assign(2, 0.0);
    layer.b_dec.assign(3, 0.0);
    const auto r = forward(layer, std::vector<double>{0.2, 0.9, 0.4});
    for (double a : r.hidden) CHECK(a == 0.5);
    for (double y : r.reconstruction) CHECK(y == 0.5);
}

TEST_CASE("forward hand example") {
    AeLayer layer;
    layer.w_enc = Matrix{{1, 1}};
    layer.w_dec = Matrix(2, 1);
    layer.b_enc.assign(1, 0.0);
    layer.b_dec.assign(2, 0.0);
    const auto r = forward(layer, std::vector<double>{1.0, 0.0});
    CHECK(r.hidden[0] == doctest::Approx(0.7310585786).epsilon(1e-9));
}

TEST_CASE("forward matches a per-neuron loop oracle") {
    Rng rng(51);
    const AeLayer layer = random_layer(6, 3, rng);
    Matrix batch = random_batch(1, 6, rng);
    const auto r = forward(layer, batch.row_span(0));

    for (std::size_t j = 0; j < 3; ++j) {
        double z = layer.b_enc[j];
        for (std::size_t i = 0; i < 6; ++i) z += layer.w_enc(j, i) * batch(0, i);
        CHECK(std::abs(r.hidden[j] - 1.0 / (1.0 + std::exp(-z))) < 1e-12);
    }
    for (std::size_t i = 0; i < 6; ++i) {
        double z = layer.b_dec[i];
        for (std::size_t j = 0; j < 3; ++j) z += layer.w_dec(i, j) * r.hidden[j];
        CHECK(std::abs(r.reconstruction[i] - 1.0 / (1.0 + std::exp(-z))) < 1e-12);
    }
}

TEST_CASE("forward rejects width mismatch") {
    Rng rng(52);
    const AeLayer layer = random_layer(4, 2, rng);
    CHECK_THROWS_AS(forward(layer, std::vector<double>{0.1, 0.2, 0.3}), ValidationError);
}

TEST_CASE("kl divergence values") {
    CHECK(kl_divergence(0.05, 0.05) == 0.0);
    CHECK(kl_divergence(0.05, 0.5) == doctest::Approx(0.4946).epsilon(1e-4));
    CHECK_THROWS_AS(kl_divergence(0.0, 0.5), ValidationError);
    CHECK_THROWS_AS(kl_divergence(1.0, 0.5), ValidationError);

    Rng rng(53);
    for (int i = 0; i < 50; ++i) {
        const double rho = rng.uniform(0.01, 0.99);
        const double rho_hat = rng.uniform(0.01, 0.99);
        const double kl = kl_divergence(rho, rho_hat);
        if (std::abs(rho - rho_hat) > 1e-12)
            CHECK(kl > 0.0);
        else
            CHECK(kl >= 0.0);
    }
}

TEST_CASE("cost hand example on the zero-parameter layer") {
    AeLayer layer;
    layer.w_enc = Matrix(1, 2);
    layer.w_dec = Matrix(2, 1);
    layer.b_enc.assign(1, 0.0);
    layer.b_dec.assign(2, 0.0);

    Matrix batch(1, 2);
    batch(0, 0) = 1.0;
    batch(0, 1) = 0.0;

    AeHyper h;
    h.lambda = 0.0;
    h.beta = 1.0;
    h.rho = 0.05;

    const CostBreakdown c = cost(layer, batch, h);
    CHECK(c.recon == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(c.sparsity == doctest::Approx(0.4946).epsilon(1e-4));
    CHECK(c.total == doctest::Approx(0.7446).epsilon(1e-4));
    CHECK(c.total == c.recon + c.decay + c.sparsity);
}

TEST_CASE("constant half input reconstructs exactly with zero parameters") {
    AeLayer layer;
    layer.w_enc = Matrix(1, 3);
    layer.w_dec = Matrix(3, 1);
    layer.b_enc.assign(1, 0.0);
    layer.b_dec.assign(3, 0.0);
    Matrix batch(2, 3, 0.5);
    AeHyper h;
    h.lambda = 0.0;
    h.beta = 0.0;
    CHECK(cost(layer, batch, h).total == 0.0);
}

TEST_CASE("cost matches the independent oracle") {
    Rng rng(54);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t m = 2 + rng.below(7);
        const std::size_t n = 1 + rng.below(4);
        AeLayer layer = random_layer(m, n, rng);
        const Matrix batch = random_batch(1 + rng.below(5), m, rng);
        AeHyper h;
        h.lambda = rng.uniform(0.0, 0.01);
        h.beta = rng.uniform(0.0, 4.0);
        h.rho = rng.uniform(0.02, 0.3);

        const CostBreakdown c = cost(layer, batch, h);
        const double want = oracle_cost(layer, batch, h);
        CHECK(std::abs(c.total - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        CHECK(c.total == c.recon + c.decay + c.sparsity);
        CHECK(c.recon >= 0.0);
        CHECK(c.decay >= 0.0);
        CHECK(c.sparsity >= 0.0);
    }
}

TEST_CASE("cost rejects empty batches and width mismatches") {
    Rng rng(55);
    const AeLayer layer = random_layer(4, 2, rng);
    CHECK_THROWS_AS(cost(layer, Matrix{}, AeHyper{}), ValidationError);
    CHECK_THROWS_AS(cost(layer, Matrix(2, 5), AeHyper{}), ValidationError);
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(56);
    for (double beta : {0.0, 3.0}) {
        for (double lambda : {0.0, 1e-2}) {
            const std::size_t m = 2 + rng.below(7);   // <= 8
            const std::size_t n = 1 + rng.below(4);   // <= 4
            const AeLayer layer = random_layer(m, n, rng);
            const Matrix batch = random_batch(1 + rng.below(5), m, rng);
            AeHyper h;
            h.beta = beta;
            h.lambda = lambda;
            CHECK(max_gradient_rel_err(layer, batch, h) < 1e-6);
        }
    }
}

TEST_CASE("decay gradient is exactly lambda W when reconstruction is stationary") {
    Rng rng(57);
    AeLayer layer = random_layer(5, 3, rng);
    // Zero decoder weights cut the backpropagated path into the encoder,
    // so the encoder weight gradient reduces to the decay term alone.
    layer.w_dec = Matrix(5, 3);
    AeHyper h;
    h.beta = 0.0;
    h.lambda = 0.7;
    const Matrix batch = random_batch(3, 5, rng);
    const AeGradient g = gradient(layer, batch, h);
    for (std::size_t i = 0; i < g.w_enc.data().size(); ++i)
        CHECK(g.w_enc.data()[i] == h.lambda * layer.w_enc.data()[i]);
}

TEST_CASE("train_layer reduces the cost and is deterministic") {
    Rng rng(58);
    const Matrix data = random_batch(24, 6, rng);
    AeHyper h;
    h.epochs = 60;
    h.learning_rate = 0.5;
    h.seed = 99;
    h.beta = 0.1;

    const TrainedLayer a = train_layer(data, 3, h);
    REQUIRE(a.epoch_costs.size() == h.epochs + 1);
    CHECK(a.epoch_costs.back() < a.epoch_costs.front());

    const TrainedLayer b = train_layer(data, 3, h);
    CHECK(a.layer.w_enc.data() == b.layer.w_enc.data());
    CHECK(a.layer.w_dec.data() == b.layer.w_dec.data());
    CHECK(a.layer.b_enc == b.layer.b_enc);
    CHECK(a.layer.b_dec == b.layer.b_dec);

    CHECK_THROWS_AS(train_layer(data, 6, h), ValidationError);
}

TEST_CASE("train_layer learns a 1-d sigmoidal manifold in 2-d") {
    // Points x(t) = (sigmoid(t), sigmoid(0.8 t + 0.3)) for t on a grid.
    const std::size_t n = 48;
    Matrix data(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = -3.0 + 6.0 * static_cast<double>(i) / (n - 1);
        data(i, 0) = 1.0 / (1.0 + std::exp(-t));
        data(i, 1) = 1.0 / (1.0 + std::exp(-(0.8 * t + 0.3)));
    }
    AeHyper h;
    h.beta = 0.0;
    h.lambda = 0.0;
    h.learning_rate = 1.0;
    h.epochs = 3000;
    h.seed = 5;

    const TrainedLayer t = train_layer(data, 1, h);
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = forward(t.layer, data.row_span(i));
        for (std::size_t j = 0; j < 2; ++j)
            mse += (r.reconstruction[j] - data(i, j)) * (r.reconstruction[j] - data(i, j));
    }
    mse /= static_cast<double>(n);
    CHECK(mse < 0.01);
}

TEST_CASE("train_stacked chains layers and validates widths") {
    Rng rng(59);
    const Matrix data = random_batch(12, 10, rng);
    AeHyper h;
    h.epochs = 5;
    h.seed = 3;

    const StackedAutoencoder stack = train_stacked(data, {6, 3}, h);
    REQUIRE(stack.layers.size() == 2);
    CHECK(stack.widths == std::vector<std::size_t>{10, 6, 3});
    CHECK(stack.layers[0].input_width() == 10);
    CHECK(stack.layers[0].hidden_width() == 6);
    CHECK(stack.layers[1].input_width() == 6);
    CHECK(stack.layers[1].hidden_width() == 3);

    CHECK_THROWS_AS(train_stacked(data, {6, 6}, h), ValidationError);
    CHECK_THROWS_AS(train_stacked(data, {10}, h), ValidationError);
    CHECK_THROWS_AS(train_stacked(data, {}, h), ValidationError);
}

TEST_CASE("single-width stack equals train_layer") {
    Rng rng(60);
    const Matrix data = random_batch(10, 8, rng);
    AeHyper h;
    h.epochs = 4;
    h.seed = 11;

    const StackedAutoencoder stack = train_stacked(data, {4}, h);
    AeHyper h1 = h;
    h1.seed = derive_seed(h.seed, 1);
    const TrainedLayer single = train_layer(data, 4, h1);
    CHECK(stack.layers[0].w_enc.data() == single.layer.w_enc.data());

    // Depth-1 encode is the first half of forward.
    const Matrix enc = encode(stack, data);
    const auto f = forward(stack.layers[0], data.row_span(0));
    for (std::size_t j = 0; j < 4; ++j) CHECK(enc(0, j) == f.hidden[j]);
}

TEST_CASE("encode matches composed per-layer oracles") {
    Rng rng(61);
    const Matrix data = random_batch(6, 12, rng);
    AeHyper h;
    h.epochs = 3;
    h.seed = 21;
    const StackedAutoencoder stack = train_stacked(data, {8, 5, 2}, h);

    const Matrix enc = encode(stack, data);
    CHECK(enc.rows() == 6);
    CHECK(enc.cols() == 2);
    for (std::size_t r = 0; r < data.rows(); ++r) {
        std::vector<double> a(data.row(r), data.row(r) + data.cols());
        for (const AeLayer& layer : stack.layers) a = forward(layer, a).hidden;
        for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(enc(r, j) - a[j]) < 1e-12);
    }

    CHECK_THROWS_AS(encode(stack, Matrix(2, 5)), ValidationError);
}

TEST_CASE("fine_tune with zero epochs is the identity") {
    Rng rng(62);
    const Matrix data = random_batch(8, 6, rng);
    AeHyper h;
    h.epochs = 2;
    h.seed = 31;
    const StackedAutoencoder stack = train_stacked(data, {3}, h);

    AeHyper none = h;
    none.epochs = 0;
    const FineTuneResult r = fine_tune(stack, data, none);
    CHECK(r.stack.layers[0].w_enc.data() == stack.layers[0].w_enc.data());
    CHECK(r.stack.layers[0].w_dec.data() == stack.layers[0].w_dec.data());
    CHECK(r.recon_after == r.recon_before);
}

TEST_CASE("fine_tune never worsens training reconstruction and is deterministic") {
    Rng rng(63);
    const Matrix data = random_batch(20, 9, rng);
    AeHyper h;
    h.epochs = 40;
    h.seed = 41;
    h.beta = 0.5;
    const StackedAutoencoder stack = train_stacked(data, {5, 2}, h);

    AeHyper ft = h;
    ft.epochs = 80;
    ft.learning_rate = 0.3;
    const FineTuneResult a = fine_tune(stack, data, ft);
    CHECK(a.recon_after <= a.recon_before);
    CHECK(mean_row_sq_error(reconstruct(a.stack, data), data) ==
          doctest::Approx(a.recon_after).epsilon(1e-12));

    const FineTuneResult b = fine_tune(stack, data, ft);
    for (std::size_t l = 0; l < a.stack.layers.size(); ++l) {
        CHECK(a.stack.layers[l].w_enc.data() == b.stack.layers[l].w_enc.data());
        CHECK(a.stack.layers[l].w_dec.data() == b.stack.layers[l].w_dec.data());
    }

    CHECK_THROWS_AS(fine_tune(stack, Matrix(4, 5), ft), ValidationError);
}

TEST_SUITE_END();
