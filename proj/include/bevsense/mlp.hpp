#pragma once

// Dense feed-forward classifier: ReLU hidden layers, softmax output, mean
// cross-entropy loss, trained with mini-batch Adam.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bevsense/error.hpp"
#include "bevsense/rng.hpp"

namespace bevsense {

struct MlpHyper {
    std::vector<int> hidden_layers = {64, 32};
    double learning_rate = 1e-3;
    int epochs = 200;
    int batch_size = 16;
    std::uint64_t seed = 0;
};

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // out
};

struct MlpNetwork {
    std::vector<DenseLayer> layers;

    Eigen::Index input_size() const { return layers.front().weights.cols(); }
    Eigen::Index output_size() const { return layers.back().weights.rows(); }
};

/// He initialization: weights ~ N(0, sqrt(2 / fan_in)), biases zero.
inline MlpNetwork init_mlp(const std::vector<int>& sizes, std::uint64_t seed) {
    if (sizes.size() < 2) throw InvalidArgument("network needs input and output sizes");
    for (int s : sizes)
        if (s < 1) throw InvalidArgument("layer sizes must be >= 1");
    Rng rng(seed);
    MlpNetwork net;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer;
        layer.weights.resize(sizes[l + 1], sizes[l]);
        const double sd = std::sqrt(2.0 / sizes[l]);
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = rng.normal(0.0, sd);
        layer.bias = Eigen::VectorXd::Zero(sizes[l + 1]);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

/// Row-wise softmax probabilities for a batch (rows = samples).
inline Eigen::MatrixXd mlp_forward(const MlpNetwork& net, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        Eigen::MatrixXd z = (a * layer.weights.transpose()).rowwise() + layer.bias.transpose();
        if (l + 1 < net.layers.size()) a = z.cwiseMax(0.0);
        else a = std::move(z);
    }
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double m = a.row(i).maxCoeff();
        a.row(i) = (a.row(i).array() - m).exp();
        a.row(i) /= a.row(i).sum();
    }
    return a;
}

struct MlpGradients {
    double loss = 0.0;                // mean cross-entropy of the batch
    std::vector<DenseLayer> layers;  // same shapes as the network
};

/// Mean cross-entropy and its analytic gradients by backpropagation.
inline MlpGradients mlp_loss_gradients(const MlpNetwork& net, const Eigen::MatrixXd& x, const std::vector<int>& y) {
    if (x.rows() == 0 || static_cast<std::size_t>(x.rows()) != y.size())
        throw InvalidArgument("batch must be non-empty with one label per row");
    if (x.cols() != net.input_size()) throw InvalidArgument("batch width does not match network input");
    const std::size_t L = net.layers.size();
    std::vector<Eigen::MatrixXd> acts;  // acts[l] = input to layer l
    std::vector<Eigen::MatrixXd> pre;   // pre-activations
    acts.push_back(x);
    for (std::size_t l = 0; l < L; ++l) {
        const auto& layer = net.layers[l];
        pre.push_back((acts.back() * layer.weights.transpose()).rowwise() + layer.bias.transpose());
        if (l + 1 < L) acts.push_back(pre.back().cwiseMax(0.0));
    }
    const Eigen::MatrixXd& logits = pre.back();
    const double batch = static_cast<double>(x.rows());

    MlpGradients g;
    Eigen::MatrixXd delta(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const int target = y[static_cast<std::size_t>(i)];
        if (target < 0 || target >= logits.cols()) throw InvalidArgument("label out of range");
        const double m = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
        const double s = e.sum();
        g.loss += -(logits(i, target) - m - std::log(s));
        delta.row(i) = e / s;
        delta(i, target) -= 1.0;
    }
    g.loss /= batch;
    delta /= batch;

    g.layers.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        g.layers[l].weights = delta.transpose() * acts[l];
        g.layers[l].bias = delta.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd back = delta * net.layers[l].weights;
            delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

inline double mlp_loss(const MlpNetwork& net, const Eigen::MatrixXd& x, const std::vector<int>& y) {
    const Eigen::MatrixXd p = mlp_forward(net, x);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        loss -= std::log(std::max(p(i, y[static_cast<std::size_t>(i)]), std::numeric_limits<double>::min()));
    return loss / static_cast<double>(p.rows());
}

struct MlpTrainLog {
    std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Mini-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8) on already-standardized inputs.
inline MlpNetwork train_mlp_network(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                                    const MlpHyper& h, MlpTrainLog* log = nullptr) {
    if (x.rows() == 0) throw InvalidArgument("training set is empty");
    if (n_classes < 2) throw InvalidArgument("network classifier needs at least two classes");
    if (h.epochs < 1) throw InvalidArgument("epochs must be >= 1");
    if (h.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (!(h.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");

    std::vector<int> sizes = {static_cast<int>(x.cols())};
    sizes.insert(sizes.end(), h.hidden_layers.begin(), h.hidden_layers.end());
    sizes.push_back(n_classes);
    MlpNetwork net = init_mlp(sizes, derive_seed(h.seed, 0));

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<DenseLayer> m(net.layers.size()), v(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        m[l].weights = v[l].weights = Eigen::MatrixXd::Zero(net.layers[l].weights.rows(), net.layers[l].weights.cols());
        m[l].bias = v[l].bias = Eigen::VectorXd::Zero(net.layers[l].bias.size());
    }

    Rng order_rng(derive_seed(h.seed, 1));
    std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    long step = 0;
    for (int epoch = 0; epoch < h.epochs; ++epoch) {
        order_rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(h.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(h.batch_size));
            Eigen::MatrixXd bx(static_cast<Eigen::Index>(end - start), x.cols());
            std::vector<int> by;
            for (std::size_t i = start; i < end; ++i) {
                bx.row(static_cast<Eigen::Index>(i - start)) = x.row(static_cast<Eigen::Index>(order[i]));
                by.push_back(y[order[i]]);
            }
            const MlpGradients g = mlp_loss_gradients(net, bx, by);
            if (!std::isfinite(g.loss))
                throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batches));
            epoch_loss += g.loss;
            ++batches;
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            auto adam = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
                mom = beta1 * mom + (1.0 - beta1) * grad;
                vel = beta2 * vel + (1.0 - beta2) * grad.cwiseProduct(grad);
                param.array() -= h.learning_rate * (mom.array() / c1) / ((vel.array() / c2).sqrt() + eps);
            };
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                adam(net.layers[l].weights, m[l].weights, v[l].weights, g.layers[l].weights);
                adam(net.layers[l].bias, m[l].bias, v[l].bias, g.layers[l].bias);
            }
        }
        if (log) log->epoch_loss.push_back(epoch_loss / batches);
    }
    return net;
}

}  // namespace bevsense
