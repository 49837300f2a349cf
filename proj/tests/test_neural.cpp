// Neural engine: initialization, forward/penultimate structure, exact
// gradients, training behavior, last-layer retraining, persistence.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "funcdist/error.hpp"
#include "funcdist/neural.hpp"
#include "funcdist/rng.hpp"

using namespace funcdist;
using neural::Architecture;
using neural::TrainConfig;
using neural::WeightSet;

namespace {

// Random regression sample with a mild nonlinearity.
void make_sample(int n, int d, std::uint64_t seed, Eigen::MatrixXd& X,
                 Eigen::VectorXd& y) {
    Rng r(seed);
    X.resize(n, d);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = r.uniform(-1.0, 1.0);
        y(i) = std::sin(X(i, 0)) + 0.5 * X(i, d - 1) + 0.05 * r.normal();
    }
}

}  // namespace

TEST_CASE("architecture validation") {
    auto arch = [](std::vector<int> sizes) { return Architecture{std::move(sizes)}; };
    CHECK_NOTHROW(arch({8, 16, 16, 1}).validate());
    CHECK_NOTHROW(arch({3, 2, 1}).validate());
    CHECK_THROWS_AS(arch({8, 1}).validate(), Error);      // no hidden layer
    CHECK_THROWS_AS(arch({8, 0, 1}).validate(), Error);   // empty layer
    CHECK_THROWS_AS(arch({8, 16, 2}).validate(), Error);  // non-scalar output
    CHECK_THROWS_AS(arch({8}).validate(), Error);
}

TEST_CASE("init_network: shapes, bounds, zero biases, determinism") {
    const Architecture arch{{8, 16, 16, 1}};
    const WeightSet ws = neural::init_network(arch, 31);
    REQUIRE(ws.num_layers() == 3);
    for (int l = 0; l < ws.num_layers(); ++l) {
        CHECK(ws.W[l].rows() == arch.sizes[l + 1]);
        CHECK(ws.W[l].cols() == arch.sizes[l]);
        CHECK(ws.b[l].size() == arch.sizes[l + 1]);
        CHECK(ws.b[l].isZero(0.0));
        const double bound = 1.0 / std::sqrt(static_cast<double>(arch.sizes[l]));
        CHECK(ws.W[l].cwiseAbs().maxCoeff() <= bound);
        CHECK(ws.W[l].cwiseAbs().maxCoeff() > 0.0);
    }
    CHECK(ws.same_values(neural::init_network(arch, 31)));
    CHECK_FALSE(ws.same_values(neural::init_network(arch, 32)));
}

TEST_CASE("forward is exactly output_layer after penultimate") {
    const Architecture arch{{8, 16, 16, 1}};
    const WeightSet ws = neural::init_network(arch, 7);
    Rng r(8);
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd x(8);
        for (int j = 0; j < 8; ++j) x(j) = r.normal(0.0, 2.0);
        const Eigen::VectorXd h = neural::penultimate(ws, x);
        CHECK(neural::forward(ws, x) == neural::output_layer(ws, h));
        CHECK((h.array() >= 0.0).all());  // ReLU features
    }
}

TEST_CASE("single-hidden-layer forward matches a hand computation") {
    Architecture arch{{2, 2, 1}};
    WeightSet ws = neural::init_network(arch, 1);
    ws.W[0] << 1.0, -2.0, 0.5, 0.25;
    ws.b[0] << 0.1, -0.2;
    ws.W[1] << 3.0, -1.0;
    ws.b[1] << 0.05;
    Eigen::VectorXd x(2);
    x << 0.4, 0.3;
    // h = relu([0.4-0.6+0.1, 0.2+0.075-0.2]) = [0, 0.075]
    // out = 3*0 - 1*0.075 + 0.05 = -0.025
    CHECK(neural::forward(ws, x) == doctest::Approx(-0.025).epsilon(1e-12));
}

TEST_CASE("backprop gradient matches central finite differences") {
    const Architecture arch{{4, 6, 5, 1}};
    WeightSet ws = neural::init_network(arch, 99);
    // Shift biases away from zero so ReLU kinks are not on the boundary.
    for (auto& b : ws.b) b.setConstant(0.05);

    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    make_sample(40, 4, 5, X, y);

    const neural::Gradients g = neural::gradient(ws, X, y);
    const double h = 1e-5;
    double max_rel = 0.0;
    for (int l = 0; l < ws.num_layers(); ++l) {
        for (int i = 0; i < ws.W[l].rows(); ++i)
            for (int j = 0; j < ws.W[l].cols(); ++j) {
                WeightSet p = ws, m = ws;
                p.W[l](i, j) += h;
                m.W[l](i, j) -= h;
                const double fd = (neural::mse(p, X, y) - neural::mse(m, X, y)) / (2 * h);
                const double rel =
                    std::abs(fd - g.W[l](i, j)) / std::max(1e-8, std::abs(fd));
                max_rel = std::max(max_rel, rel);
            }
        for (int i = 0; i < ws.b[l].size(); ++i) {
            WeightSet p = ws, m = ws;
            p.b[l](i) += h;
            m.b[l](i) -= h;
            const double fd = (neural::mse(p, X, y) - neural::mse(m, X, y)) / (2 * h);
            const double rel = std::abs(fd - g.b[l](i)) / std::max(1e-8, std::abs(fd));
            max_rel = std::max(max_rel, rel);
        }
    }
    CHECK(max_rel < 1e-4);
}

TEST_CASE("training recovers an affine target") {
    Rng r(17);
    const int n = 400;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = r.uniform(-1.0, 1.0);
        y(i) = 0.7 * X(i, 0) - 0.4 * X(i, 1) + 0.2;  // noiseless affine
    }
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.epochs = 1500;
    const auto res = neural::train(X, y, Architecture{{3, 16, 1}}, cfg);
    CHECK(res.rmse < 0.05);
    CHECK(res.rmse == neural::rmse(res.weights, X, y));
    CHECK(res.best_epoch <= res.epochs_run);
}

TEST_CASE("training is bitwise deterministic for identical inputs") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    make_sample(120, 8, 21, X, y);
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.epochs = 60;
    const auto a = neural::train(X, y, Architecture::default_arch(), cfg);
    const auto b = neural::train(X, y, Architecture::default_arch(), cfg);
    CHECK(a.weights.same_values(b.weights));
    CHECK(a.rmse == b.rmse);
    CHECK(a.best_epoch == b.best_epoch);
    CHECK(a.epochs_run == b.epochs_run);
}

TEST_CASE("training depends on rows only through the visit order") {
    // Feeding a permuted sample together with the inverse visit order makes
    // every gradient step arithmetically identical; only the full-sample
    // RMSE (summed in storage order) may differ in the last bits.
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    make_sample(100, 8, 33, X, y);
    const int n = 100;

    std::vector<int> ident(n);
    for (int i = 0; i < n; ++i) ident[i] = i;

    std::vector<int> perm = ident;
    Rng(55).shuffle(perm);
    Eigen::MatrixXd Xp(n, 8);
    Eigen::VectorXd yp(n);
    for (int i = 0; i < n; ++i) {
        Xp.row(i) = X.row(perm[i]);
        yp(i) = y(perm[i]);
    }
    // Visiting permuted row j recovers original row perm[j]: order[k] with
    // Xp means original index perm[order[k]], so order = perm^{-1} replays
    // the identity visit sequence.
    std::vector<int> inv(n);
    for (int i = 0; i < n; ++i) inv[perm[i]] = i;
    std::vector<int> order(n);
    for (int k = 0; k < n; ++k) order[k] = inv[k];

    TrainConfig cfg;
    cfg.seed = 9;
    cfg.epochs = 50;
    cfg.batch_size = 100;  // single full batch: no reshuffling across epochs
    const auto base = neural::train(X, y, Architecture::default_arch(), cfg, ident);
    const auto permuted = neural::train(Xp, yp, Architecture::default_arch(), cfg, order);
    CHECK(permuted.best_epoch == base.best_epoch);
    CHECK(permuted.rmse ==
          doctest::Approx(base.rmse).epsilon(1e-12));
    // Same candidate at the same epoch: weights agree bitwise.
    CHECK(permuted.weights.same_values(base.weights));
}

TEST_CASE("train_last_layer freezes hidden layers and never scores worse") {
    Eigen::MatrixXd Xs, Xt;
    Eigen::VectorXd ys, yt;
    make_sample(150, 8, 41, Xs, ys);
    make_sample(130, 8, 42, Xt, yt);

    TrainConfig cfg;
    cfg.seed = 11;
    cfg.epochs = 120;
    const auto source = neural::train(Xs, ys, Architecture::default_arch(), cfg);

    const auto tf = neural::train_last_layer(source.weights, Xt, yt, cfg);
    const int L = source.weights.num_layers();
    for (int l = 0; l + 1 < L; ++l) {
        CHECK(tf.weights.W[l] == source.weights.W[l]);
        CHECK(tf.weights.b[l] == source.weights.b[l]);
    }
    CHECK(tf.rmse <= neural::rmse(source.weights, Xt, yt));
    CHECK(tf.rmse == neural::rmse(tf.weights, Xt, yt));
}

TEST_CASE("rmse agrees across worker counts bitwise") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    make_sample(5000, 8, 61, X, y);
    const WeightSet ws = neural::init_network(Architecture::default_arch(), 2);
    const double serial = neural::rmse(ws, X, y, 1);
    for (int w : {2, 3, 8}) CHECK(neural::rmse(ws, X, y, w) == serial);
    CHECK(serial == std::sqrt(neural::mse(ws, X, y)));
}

TEST_CASE("weights survive a JSON file round trip bit-exactly") {
    const WeightSet ws = neural::init_network(Architecture{{8, 5, 3, 1}}, 77);
    const auto path =
        (std::filesystem::temp_directory_path() / "funcdist_ws_roundtrip.json").string();
    neural::save_weights(ws, path);
    const WeightSet back = neural::load_weights(path);
    CHECK(back.arch == ws.arch);
    CHECK(back.seed == ws.seed);
    CHECK(back.same_values(ws));
    std::filesystem::remove(path);
}

TEST_CASE("malformed weight JSON is rejected") {
    using nlohmann::json;
    json good = neural::to_json(neural::init_network(Architecture{{2, 2, 1}}, 1));

    json wrong_shape = good;
    wrong_shape["layers"][0]["w"][0].push_back(1.0);  // extra column entry
    CHECK_THROWS_AS((void)neural::weightset_from_json(wrong_shape), Error);

    json missing = good;
    missing.erase("layers");
    CHECK_THROWS_AS((void)neural::weightset_from_json(missing), Error);

    json bad_value = good;
    bad_value["layers"][0]["w"][0][0] = "oops";
    CHECK_THROWS_AS((void)neural::weightset_from_json(bad_value), Error);
}

TEST_CASE("divergence is reported as an estimation failure") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    make_sample(64, 8, 71, X, y);
    TrainConfig cfg;
    cfg.seed = 1;
    cfg.epochs = 50;
    // Adam-normalized steps of this size overflow the forward pass at once.
    cfg.learning_rate = 1e150;
    try {
        (void)neural::train(X, y, Architecture::default_arch(), cfg);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Estimation);
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("train validates inputs") {
    TrainConfig cfg;
    cfg.seed = 1;
    Eigen::MatrixXd X(4, 8);
    X.setZero();
    Eigen::VectorXd y(3);  // length mismatch
    y.setZero();
    CHECK_THROWS_AS((void)neural::train(X, y, Architecture::default_arch(), cfg), Error);

    Eigen::MatrixXd empty(0, 8);
    Eigen::VectorXd ey(0);
    CHECK_THROWS_AS((void)neural::train(empty, ey, Architecture::default_arch(), cfg),
                    Error);

    TrainConfig bad = cfg;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}
