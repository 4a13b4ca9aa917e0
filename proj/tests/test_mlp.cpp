#include <cmath>
#include <limits>
#include <vector>

#include "catch_amalgamated.hpp"
#include "fanwatt/mlp.hpp"
#include "oracles.hpp"

using namespace fanwatt;

namespace {

Eigen::MatrixXd corner_inputs() {
    Eigen::MatrixXd x(2, 4);
    x << 0.8, -0.8, 0.8, -0.8,  //
        0.8, 0.8, -0.8, -0.8;
    return x;
}

Eigen::MatrixXd corner_targets() {
    Eigen::MatrixXd t(2, 4);
    t << 1, -1, 1, -1,  //
        1, 1, -1, -1;
    return t;
}

}  // namespace

TEST_CASE("hidden layer sizes follow the geometric-pyramid rule", "[mlp]") {
    REQUIRE(hidden_sizes(36, 2) == std::pair<int, int>{13, 6});
    REQUIRE(hidden_sizes(10681, 2) == std::pair<int, int>{208, 103});
    REQUIRE(hidden_sizes(1069, 2) == std::pair<int, int>{67, 33});
    REQUIRE(hidden_sizes(4, 2) == std::pair<int, int>{5, 2});
    REQUIRE(hidden_sizes(2, 2) == std::pair<int, int>{4, 1});
    REQUIRE(hidden_sizes(1, 1).second >= 1);  // floor keeps layers non-empty
    REQUIRE_THROWS_AS(hidden_sizes(0, 2), Error);
    REQUIRE_THROWS_AS(hidden_sizes(36, 0), Error);
}

TEST_CASE("hidden sizes match an independent long-double evaluation", "[mlp]") {
    for (int m : {1, 2, 3, 5, 10, 36, 100, 500, 1069, 4096, 10681}) {
        for (int p : {1, 2, 3, 4}) {
            auto [k1, k2] = hidden_sizes(m, p);
            auto [o1, o2] = oracle::layer_sizes(m, p);
            CAPTURE(m, p);
            REQUIRE(k1 == o1);
            REQUIRE(k2 == o2);
        }
    }
}

TEST_CASE("hidden sizes grow with the input width", "[mlp]") {
    auto prev = hidden_sizes(1, 2);
    for (int m = 2; m <= 2000; m += 7) {
        auto cur = hidden_sizes(m, 2);
        REQUIRE(cur.first >= prev.first);
        REQUIRE(cur.second >= prev.second);
        prev = cur;
    }
}

TEST_CASE("tansig matches tanh and saturates", "[mlp]") {
    REQUIRE(tansig(0.0) == 0.0);
    REQUIRE(tansig(0.5) == Catch::Approx(0.46211715726000974).epsilon(1e-15));
    for (double x = -6.0; x <= 6.0; x += 0.1) {
        REQUIRE(tansig(x) == Catch::Approx(std::tanh(x)).margin(1e-15));
        REQUIRE(tansig(x) + tansig(-x) == Catch::Approx(0.0).margin(1e-15));
        REQUIRE(tansig(x) > -1.0);
        REQUIRE(tansig(x) < 1.0);
    }
    REQUIRE(tansig(30.0) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(tansig(-30.0) == Catch::Approx(-1.0).margin(1e-15));
    REQUIRE(tansig(1e308) == 1.0);   // exp underflow lands on the limit
    REQUIRE(tansig(-1e308) == -1.0);
}

TEST_CASE("threshold maps signs to the code alphabet", "[mlp]") {
    REQUIRE(threshold(0.3, 0.4) == TargetCode{1, 1});
    REQUIRE(threshold(-0.3, 0.4) == TargetCode{-1, 1});
    REQUIRE(threshold(0.3, -0.4) == TargetCode{1, -1});
    REQUIRE(threshold(-0.3, -0.4) == TargetCode{-1, -1});
    REQUIRE(threshold(0.0, 0.0) == TargetCode{1, 1});  // zero goes positive
}

TEST_CASE("forward pass matches a scalar hand computation", "[mlp]") {
    NetworkWeights net;
    net.shape = {1, 1, 1, 1};
    net.w1 = Eigen::MatrixXd::Constant(1, 1, 0.7);
    net.w2 = Eigen::MatrixXd::Constant(1, 1, -1.2);
    net.w3 = Eigen::MatrixXd::Constant(1, 1, 0.9);
    net.b1 = Eigen::VectorXd::Constant(1, 0.1);
    net.b2 = Eigen::VectorXd::Constant(1, 0.2);
    net.b3 = Eigen::VectorXd::Constant(1, -0.4);

    Eigen::MatrixXd x(1, 1);
    x << 0.3;
    double h1 = std::tanh(0.7 * 0.3 + 0.1);
    double h2 = std::tanh(-1.2 * h1 + 0.2);
    double expect = std::tanh(0.9 * h2 - 0.4);
    Eigen::MatrixXd y = net.forward(x);
    REQUIRE(y.rows() == 1);
    REQUIRE(y.cols() == 1);
    REQUIRE(y(0, 0) == Catch::Approx(expect).epsilon(1e-14));

    Eigen::MatrixXd wrong(2, 1);
    wrong << 0.3, 0.4;
    REQUIRE_THROWS_AS(net.forward(wrong), Error);
}

TEST_CASE("zero weights leave only the output bias", "[mlp]") {
    NetworkWeights net;
    net.shape = {3, 2, 2, 2};
    net.w1 = Eigen::MatrixXd::Zero(2, 3);
    net.w2 = Eigen::MatrixXd::Zero(2, 2);
    net.w3 = Eigen::MatrixXd::Zero(2, 2);
    net.b1 = Eigen::VectorXd::Zero(2);
    net.b2 = Eigen::VectorXd::Zero(2);
    net.b3 = Eigen::VectorXd(2);
    net.b3 << 0.5, -0.3;

    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
    Eigen::MatrixXd y = net.forward(x);
    for (int j = 0; j < 5; ++j) {
        REQUIRE(y(0, j) == Catch::Approx(std::tanh(0.5)).epsilon(1e-14));
        REQUIRE(y(1, j) == Catch::Approx(std::tanh(-0.3)).epsilon(1e-14));
    }
}

TEST_CASE("weight initialization is seeded and bounded", "[mlp]") {
    NetworkShape shape{5, 4, 3, 2};
    NetworkWeights a = init_weights(shape, 42, 0.5);
    NetworkWeights b = init_weights(shape, 42, 0.5);
    NetworkWeights c = init_weights(shape, 43, 0.5);

    REQUIRE(a.w1 == b.w1);
    REQUIRE(a.w2 == b.w2);
    REQUIRE(a.w3 == b.w3);
    REQUIRE(a.b1 == b.b1);
    REQUIRE(a.w1 != c.w1);

    REQUIRE(a.w1.rows() == 4);
    REQUIRE(a.w1.cols() == 5);
    REQUIRE(a.w2.rows() == 3);
    REQUIRE(a.w2.cols() == 4);
    REQUIRE(a.w3.rows() == 2);
    REQUIRE(a.w3.cols() == 3);

    auto check_range = [](const Eigen::MatrixXd& m) {
        REQUIRE(m.minCoeff() >= -0.5);
        REQUIRE(m.maxCoeff() <= 0.5);
        REQUIRE(m.cwiseAbs().maxCoeff() > 0.0);
    };
    check_range(a.w1);
    check_range(a.w2);
    check_range(a.w3);
}

TEST_CASE("batch mse matches a hand computation", "[mlp]") {
    NetworkWeights net;
    net.shape = {1, 1, 1, 2};
    net.w1 = Eigen::MatrixXd::Zero(1, 1);
    net.w2 = Eigen::MatrixXd::Zero(1, 1);
    net.w3 = Eigen::MatrixXd::Zero(2, 1);
    net.b1 = Eigen::VectorXd::Zero(1);
    net.b2 = Eigen::VectorXd::Zero(1);
    net.b3 = Eigen::VectorXd(2);
    net.b3 << 0.5, -0.5;

    Eigen::MatrixXd x(1, 2);
    x << 0.0, 1.0;
    Eigen::MatrixXd t(2, 2);
    t << 1, -1,  //
        1, 1;
    double y0 = std::tanh(0.5), y1 = std::tanh(-0.5);
    double expect = ((y0 - 1) * (y0 - 1) + (y0 + 1) * (y0 + 1) + (y1 - 1) * (y1 - 1) +
                     (y1 - 1) * (y1 - 1)) /
                    4.0;
    REQUIRE(batch_mse(net, x, t) == Catch::Approx(expect).epsilon(1e-14));
}

TEST_CASE("backprop gradients match central finite differences", "[mlp]") {
    NetworkShape shape{3, 4, 3, 2};
    NetworkWeights net = init_weights(shape, 11, 0.5);

    Rng rng(99);
    Eigen::MatrixXd x(3, 5);
    Eigen::MatrixXd t(2, 5);
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 3; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
        t(0, j) = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        t(1, j) = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    }

    Gradients g = backprop(net, x, t);
    const double h = 1e-5;
    double worst_rel = 0.0;
    auto check = [&](auto& param, const Eigen::MatrixXd& grad) {
        for (Eigen::Index r = 0; r < param.rows(); ++r) {
            for (Eigen::Index c = 0; c < param.cols(); ++c) {
                double saved = param(r, c);
                param(r, c) = saved + h;
                double up = batch_mse(net, x, t);
                param(r, c) = saved - h;
                double down = batch_mse(net, x, t);
                param(r, c) = saved;
                double numeric = (up - down) / (2.0 * h);
                double analytic = grad(r, c);
                double denom = std::max(std::abs(numeric), std::abs(analytic));
                bool close = std::abs(analytic - numeric) < 1e-7 ||
                             std::abs(analytic - numeric) / denom < 1e-4;
                if (denom > 0.0) {
                    worst_rel = std::max(worst_rel, std::abs(analytic - numeric) / denom);
                }
                CAPTURE(r, c, analytic, numeric);
                REQUIRE(close);
            }
        }
    };
    check(net.w1, g.w1);
    check(net.w2, g.w2);
    check(net.w3, g.w3);
    check(net.b1, g.b1);
    check(net.b2, g.b2);
    check(net.b3, g.b3);
    INFO("worst relative gradient error " << worst_rel);
    REQUIRE(worst_rel < 1e-4);
}

TEST_CASE("zero learning rate leaves the initialization untouched", "[mlp]") {
    TrainConfig cfg;
    cfg.max_epochs = 25;
    cfg.goal_error = 0.0;
    cfg.learning_rate = 0.0;
    cfg.seed = 5;
    cfg.hidden1 = 4;
    cfg.hidden2 = 3;

    TrainResult r = train_network(corner_inputs(), corner_targets(), cfg);
    NetworkWeights fresh = init_weights({2, 4, 3, 2}, 5, 0.5);
    REQUIRE(r.net.w1 == fresh.w1);
    REQUIRE(r.net.w2 == fresh.w2);
    REQUIRE(r.net.w3 == fresh.w3);
    REQUIRE(r.net.b3 == fresh.b3);
    REQUIRE(r.mse_history.size() == 25);
    REQUIRE(r.mse_history.front() == r.mse_history.back());
    REQUIRE_FALSE(r.reached_goal);
}

TEST_CASE("gradient descent reduces the loss", "[mlp]") {
    TrainConfig cfg;
    cfg.max_epochs = 200;
    cfg.goal_error = 1e-12;
    cfg.learning_rate = 0.05;
    cfg.seed = 5;
    cfg.hidden1 = 4;
    cfg.hidden2 = 3;

    TrainResult r = train_network(corner_inputs(), corner_targets(), cfg);
    REQUIRE(r.mse_history.back() < r.mse_history.front());
}

TEST_CASE("training is deterministic for a fixed seed", "[mlp]") {
    TrainConfig cfg;
    cfg.max_epochs = 50;
    cfg.learning_rate = 0.1;
    cfg.seed = 12;
    cfg.hidden1 = 5;
    cfg.hidden2 = 3;
    TrainResult a = train_network(corner_inputs(), corner_targets(), cfg);
    TrainResult b = train_network(corner_inputs(), corner_targets(), cfg);
    REQUIRE(a.net.w1 == b.net.w1);
    REQUIRE(a.net.w3 == b.net.w3);
    REQUIRE(a.mse_history == b.mse_history);
}

TEST_CASE("saturating activations keep the loss finite at absurd rates", "[mlp]") {
    TrainConfig cfg;
    cfg.max_epochs = 50;
    cfg.learning_rate = 1e300;
    cfg.seed = 3;
    cfg.hidden1 = 4;
    cfg.hidden2 = 4;
    TrainResult r = train_network(corner_inputs(), corner_targets(), cfg);
    REQUIRE(r.net.all_finite());
    for (double m : r.mse_history) REQUIRE(std::isfinite(m));
}

TEST_CASE("non-finite loss aborts and names the epoch", "[mlp]") {
    Eigen::MatrixXd x = corner_inputs();
    x(0, 0) = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.max_epochs = 10;
    cfg.seed = 3;
    try {
        train_network(x, corner_targets(), cfg);
        FAIL("expected divergence error");
    } catch (const Error& e) {
        REQUIRE(e.family() == ErrorFamily::divergence);
        REQUIRE(std::string(e.what()).find("epoch 1") != std::string::npos);
    }
}

TEST_CASE("training rejects empty and mismatched batches", "[mlp]") {
    TrainConfig cfg;
    Eigen::MatrixXd empty(2, 0);
    REQUIRE_THROWS_AS(train_network(empty, empty, cfg), Error);
    Eigen::MatrixXd x(2, 3);
    x.setZero();
    Eigen::MatrixXd t(2, 2);
    t.setZero();
    REQUIRE_THROWS_AS(train_network(x, t, cfg), Error);
}

TEST_CASE("a small network learns all four corner classes", "[mlp]") {
    TrainConfig cfg;
    cfg.max_epochs = 5000;
    cfg.goal_error = 1e-3;
    cfg.learning_rate = 0.5;
    cfg.seed = 7;
    cfg.hidden1 = 6;
    cfg.hidden2 = 4;

    Eigen::MatrixXd x = corner_inputs();
    TrainResult r = train_network(x, corner_targets(), cfg);
    REQUIRE(r.reached_goal);
    REQUIRE(r.mse_history.size() < 5000);
    REQUIRE(r.mse_history.back() <= 1e-3);

    Eigen::MatrixXd y = r.net.forward(x);
    for (int j = 0; j < 4; ++j) {
        REQUIRE(decode(threshold(y(0, j), y(1, j))) == j + 1);
    }
}

TEST_CASE("feature matrices are column-per-sample", "[mlp]") {
    std::vector<FeatureVector> feats(3);
    feats[0].values = {1.0, 2.0};
    feats[1].values = {3.0, 4.0};
    feats[2].values = {5.0, 6.0};
    Eigen::MatrixXd m = features_to_matrix(feats);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    REQUIRE(m(0, 1) == 3.0);
    REQUIRE(m(1, 2) == 6.0);

    feats[1].values = {3.0};
    REQUIRE_THROWS_AS(features_to_matrix(feats), Error);
    REQUIRE_THROWS_AS(features_to_matrix({}), Error);
}

TEST_CASE("predict runs scaler, network, and decoder in sequence", "[mlp]") {
    MlpModel model;
    model.net.shape = {2, 2, 2, 2};
    model.net.w1 = Eigen::MatrixXd::Zero(2, 2);
    model.net.w2 = Eigen::MatrixXd::Zero(2, 2);
    model.net.w3 = Eigen::MatrixXd::Zero(2, 2);
    model.net.b1 = Eigen::VectorXd::Zero(2);
    model.net.b2 = Eigen::VectorXd::Zero(2);
    model.net.b3 = Eigen::VectorXd(2);
    model.net.b3 << 0.5, -0.5;  // fixed code (1,-1) -> class 3
    model.scaler.min = {0.0, 0.0};
    model.scaler.max = {1.0, 1.0};

    REQUIRE(predict(model, std::vector<double>{0.2, 0.9}) == 3);
    REQUIRE_THROWS_AS(predict(model, std::vector<double>{0.2}), Error);
}
