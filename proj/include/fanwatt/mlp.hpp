#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fanwatt/error.hpp"
#include "fanwatt/labeling.hpp"
#include "fanwatt/rng.hpp"
#include "fanwatt/spectral.hpp"

namespace fanwatt {

struct NetworkShape {
    int inputs = 0;   // m
    int hidden1 = 0;  // k1
    int hidden2 = 0;  // k2
    int outputs = 2;  // p
};

// k1 = round(sqrt(m*(p+2)) + 2*sqrt(p/(p+2))), k2 = round(p*sqrt(m/(p+2))),
// each floored at 1.
inline std::pair<int, int> hidden_sizes(int m, int p) {
    if (m < 1 || p < 1) {
        throw Error(ErrorFamily::invalid_input, "layer sizes must be at least 1");
    }
    double md = static_cast<double>(m);
    double pd = static_cast<double>(p);
    auto k1 = static_cast<int>(std::llround(std::sqrt(md * (pd + 2.0)) + 2.0 * std::sqrt(pd / (pd + 2.0))));
    auto k2 = static_cast<int>(std::llround(pd * std::sqrt(md / (pd + 2.0))));
    return {std::max(1, k1), std::max(1, k2)};
}

// Hyperbolic tangent sigmoid, range (-1, 1). Saturates cleanly for large
// magnitudes (exp overflow lands on the correct limit).
inline double tansig(double x) {
    return 2.0 / (1.0 + std::exp(-2.0 * x)) - 1.0;
}

inline Eigen::MatrixXd tansig(const Eigen::MatrixXd& x) {
    return x.unaryExpr([](double v) { return tansig(v); });
}

// Componentwise sign threshold applied outside the network: x >= 0 -> +1.
inline TargetCode threshold(double out1, double out2) {
    return {out1 >= 0.0 ? 1 : -1, out2 >= 0.0 ? 1 : -1};
}

// Three weight layers, tansig activation on every layer including the output.
struct NetworkWeights {
    NetworkShape shape;
    Eigen::MatrixXd w1, w2, w3;  // k1 x m, k2 x k1, p x k2
    Eigen::VectorXd b1, b2, b3;

    // Columns of `input` are samples; returns p x n outputs.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const {
        if (input.rows() != shape.inputs) {
            throw Error(ErrorFamily::dimension,
                        "feature length " + std::to_string(input.rows()) +
                            " does not match network input size " + std::to_string(shape.inputs));
        }
        Eigen::MatrixXd h1 = tansig((w1 * input).colwise() + b1);
        Eigen::MatrixXd h2 = tansig((w2 * h1).colwise() + b2);
        return tansig((w3 * h2).colwise() + b3);
    }

    bool all_finite() const {
        return w1.allFinite() && w2.allFinite() && w3.allFinite() && b1.allFinite() &&
               b2.allFinite() && b3.allFinite();
    }
};

struct TrainConfig {
    int max_epochs = 1000;
    double goal_error = 1e-4;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    double init_range = 0.5;
    // 0 = derive from hidden_sizes(); explicit values override, which small
    // synthetic problems need (the formula can produce a one-neuron second
    // layer that cannot express all four sign patterns).
    int hidden1 = 0;
    int hidden2 = 0;
};

inline NetworkWeights init_weights(const NetworkShape& shape, std::uint64_t seed,
                                   double init_range) {
    NetworkWeights net;
    net.shape = shape;
    net.w1.resize(shape.hidden1, shape.inputs);
    net.w2.resize(shape.hidden2, shape.hidden1);
    net.w3.resize(shape.outputs, shape.hidden2);
    net.b1.resize(shape.hidden1);
    net.b2.resize(shape.hidden2);
    net.b3.resize(shape.outputs);

    Rng rng(seed);
    auto fill = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                m(r, c) = rng.uniform(-init_range, init_range);
    };
    auto fill_vec = [&](Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-init_range, init_range);
    };
    fill(net.w1);
    fill_vec(net.b1);
    fill(net.w2);
    fill_vec(net.b2);
    fill(net.w3);
    fill_vec(net.b3);
    return net;
}

struct Gradients {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;
};

inline double batch_mse(const NetworkWeights& net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets) {
    Eigen::MatrixXd diff = net.forward(inputs) - targets;
    return diff.squaredNorm() / static_cast<double>(diff.size());
}

// Gradient of the mean squared error over all samples and outputs, by
// backpropagation through the three tansig layers. tansig'(x) = 1 - y^2 in
// terms of the activation y.
inline Gradients backprop(const NetworkWeights& net, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets) {
    Eigen::MatrixXd h1 = tansig((net.w1 * inputs).colwise() + net.b1);
    Eigen::MatrixXd h2 = tansig((net.w2 * h1).colwise() + net.b2);
    Eigen::MatrixXd y = tansig((net.w3 * h2).colwise() + net.b3);

    double scale = 2.0 / static_cast<double>(y.size());
    Eigen::MatrixXd delta3 = scale * (y - targets).cwiseProduct(
                                         Eigen::MatrixXd::Ones(y.rows(), y.cols()) - y.cwiseProduct(y));
    Eigen::MatrixXd delta2 = (net.w3.transpose() * delta3)
                                 .cwiseProduct(Eigen::MatrixXd::Ones(h2.rows(), h2.cols()) -
                                               h2.cwiseProduct(h2));
    Eigen::MatrixXd delta1 = (net.w2.transpose() * delta2)
                                 .cwiseProduct(Eigen::MatrixXd::Ones(h1.rows(), h1.cols()) -
                                               h1.cwiseProduct(h1));

    Gradients g;
    g.w3 = delta3 * h2.transpose();
    g.b3 = delta3.rowwise().sum();
    g.w2 = delta2 * h1.transpose();
    g.b2 = delta2.rowwise().sum();
    g.w1 = delta1 * inputs.transpose();
    g.b1 = delta1.rowwise().sum();
    return g;
}

struct TrainResult {
    NetworkWeights net;
    std::vector<double> mse_history;  // evaluated at the start of each epoch
    bool reached_goal = false;
};

// Full-batch gradient descent on the MSE. Stops when the epoch MSE reaches
// goal_error or after max_epochs updates, whichever comes first. Identical
// (inputs, targets, config) give a bit-identical result.
inline TrainResult train_network(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                                 const TrainConfig& config) {
    if (inputs.cols() == 0) {
        throw Error(ErrorFamily::empty_input, "training set is empty");
    }
    if (inputs.cols() != targets.cols()) {
        throw Error(ErrorFamily::dimension, "inputs and targets disagree on sample count");
    }

    NetworkShape shape;
    shape.inputs = static_cast<int>(inputs.rows());
    shape.outputs = static_cast<int>(targets.rows());
    auto [k1, k2] = hidden_sizes(shape.inputs, shape.outputs);
    shape.hidden1 = config.hidden1 > 0 ? config.hidden1 : k1;
    shape.hidden2 = config.hidden2 > 0 ? config.hidden2 : k2;

    TrainResult result;
    result.net = init_weights(shape, config.seed, config.init_range);
    result.mse_history.reserve(static_cast<std::size_t>(config.max_epochs));

    NetworkWeights& net = result.net;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Eigen::MatrixXd h1 = tansig((net.w1 * inputs).colwise() + net.b1);
        Eigen::MatrixXd h2 = tansig((net.w2 * h1).colwise() + net.b2);
        Eigen::MatrixXd y = tansig((net.w3 * h2).colwise() + net.b3);
        Eigen::MatrixXd diff = y - targets;

        double mse = diff.squaredNorm() / static_cast<double>(diff.size());
        if (!std::isfinite(mse)) {
            throw Error(ErrorFamily::divergence,
                        "training diverged at epoch " + std::to_string(epoch) +
                            " (non-finite loss)");
        }
        result.mse_history.push_back(mse);
        if (mse <= config.goal_error) {
            result.reached_goal = true;
            break;
        }

        double scale = 2.0 / static_cast<double>(y.size());
        Eigen::MatrixXd delta3 =
            scale * diff.cwiseProduct(Eigen::MatrixXd::Ones(y.rows(), y.cols()) -
                                      y.cwiseProduct(y));
        Eigen::MatrixXd delta2 = (net.w3.transpose() * delta3)
                                     .cwiseProduct(Eigen::MatrixXd::Ones(h2.rows(), h2.cols()) -
                                                   h2.cwiseProduct(h2));
        Eigen::MatrixXd delta1 = (net.w2.transpose() * delta2)
                                     .cwiseProduct(Eigen::MatrixXd::Ones(h1.rows(), h1.cols()) -
                                                   h1.cwiseProduct(h1));

        net.w3 -= config.learning_rate * (delta3 * h2.transpose());
        net.b3 -= config.learning_rate * delta3.rowwise().sum();
        net.w2 -= config.learning_rate * (delta2 * h1.transpose());
        net.b2 -= config.learning_rate * delta2.rowwise().sum();
        net.w1 -= config.learning_rate * (delta1 * inputs.transpose());
        net.b1 -= config.learning_rate * delta1.rowwise().sum();
    }
    if (!result.net.all_finite()) {
        throw Error(ErrorFamily::divergence, "training diverged (non-finite weights)");
    }
    return result;
}

// Everything needed to classify a raw feature vector, plus the provenance of
// how those features were produced.
struct MlpModel {
    NetworkWeights net;
    FeatureScaler scaler;
    ClassBounds bounds;
    BandSpec band;
    Approach approach = Approach::reduced;
    double segment_s = 20.0;
    int sample_rate_hz = 16000;
    // Per-class training sample counts; -1 = unknown (hand-assembled model).
    std::array<std::int64_t, 4> train_class_counts{-1, -1, -1, -1};
};

inline Eigen::MatrixXd features_to_matrix(const std::vector<FeatureVector>& features) {
    if (features.empty()) {
        throw Error(ErrorFamily::empty_input, "no feature vectors");
    }
    Eigen::MatrixXd m(features.front().values.size(), features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
        if (features[j].values.size() != static_cast<std::size_t>(m.rows())) {
            throw Error(ErrorFamily::dimension, "inconsistent feature lengths");
        }
        for (std::size_t i = 0; i < features[j].values.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[j].values[i];
        }
    }
    return m;
}

// scaler -> forward -> threshold -> class index.
inline int predict(const MlpModel& model, const std::vector<double>& raw_features) {
    std::vector<double> scaled = model.scaler.apply(raw_features);
    Eigen::MatrixXd x(scaled.size(), 1);
    for (std::size_t i = 0; i < scaled.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = scaled[i];
    Eigen::MatrixXd y = model.net.forward(x);
    return decode(threshold(y(0, 0), y(1, 0)));
}

inline int predict(const MlpModel& model, const FeatureVector& raw) {
    return predict(model, raw.values);
}

}  // namespace fanwatt
