#include "funcdist/neural.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "funcdist/error.hpp"
#include "funcdist/numio.hpp"
#include "funcdist/parallel.hpp"
#include "funcdist/rng.hpp"

namespace funcdist::neural {

// ---------------------------------------------------------------- types

void Architecture::validate() const {
    if (sizes.size() < 3)
        fail_validation("architecture needs at least one hidden layer");
    for (int s : sizes)
        if (s < 1) fail_validation("architecture layer sizes must be >= 1");
    if (sizes.back() != 1)
        fail_validation("architecture output layer must have size 1");
}

void WeightSet::validate() const {
    arch.validate();
    const int L = arch.num_layers();
    if (static_cast<int>(W.size()) != L || static_cast<int>(b.size()) != L)
        fail_validation("weight set layer count does not match architecture");
    for (int l = 0; l < L; ++l) {
        if (W[l].rows() != arch.sizes[l + 1] || W[l].cols() != arch.sizes[l])
            fail_validation("weight matrix shape mismatch at layer " + std::to_string(l));
        if (b[l].size() != arch.sizes[l + 1])
            fail_validation("bias shape mismatch at layer " + std::to_string(l));
        if (!W[l].allFinite() || !b[l].allFinite())
            fail_validation("non-finite weight at layer " + std::to_string(l));
    }
}

bool WeightSet::same_values(const WeightSet& other) const {
    if (arch != other.arch) return false;
    for (int l = 0; l < num_layers(); ++l) {
        if ((W[l].array() != other.W[l].array()).any()) return false;
        if ((b[l].array() != other.b[l].array()).any()) return false;
    }
    return true;
}

void TrainConfig::validate() const {
    if (epochs < 1) fail_validation("train config: epochs must be >= 1");
    if (batch_size < 0) fail_validation("train config: batch_size must be >= 0");
    if (!(learning_rate > 0)) fail_validation("train config: learning_rate must be > 0");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
        fail_validation("train config: adam betas must lie in [0, 1)");
    if (!(adam_eps > 0)) fail_validation("train config: adam_eps must be > 0");
    if (patience < 0) fail_validation("train config: patience must be >= 0");
}

// ------------------------------------------------------------- forward

WeightSet init_network(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    Rng rng(child_seed(seed, "neural/init"));
    WeightSet ws;
    ws.arch = arch;
    ws.seed = seed;
    const int L = arch.num_layers();
    ws.W.resize(L);
    ws.b.resize(L);
    for (int l = 0; l < L; ++l) {
        const int fan_in = arch.sizes[l];
        const int fan_out = arch.sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        ws.W[l].resize(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c)
                ws.W[l](r, c) = rng.uniform(-scale, scale);
        ws.b[l] = Eigen::VectorXd::Zero(fan_out);
    }
    return ws;
}

Eigen::VectorXd penultimate(const WeightSet& ws, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const int L = ws.num_layers();
    Eigen::VectorXd h = x;
    for (int l = 0; l + 1 < L; ++l)
        h = ((ws.W[l] * h + ws.b[l]).array().max(0.0)).matrix();
    return h;
}

double output_layer(const WeightSet& ws, const Eigen::Ref<const Eigen::VectorXd>& h) {
    const int L = ws.num_layers();
    return (ws.W[L - 1] * h + ws.b[L - 1])(0);
}

double forward(const WeightSet& ws, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return output_layer(ws, penultimate(ws, x));
}

double mse(const WeightSet& ws, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           int workers) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (n == 0) fail_validation("mse: empty sample");
    if (X.rows() != y.size()) fail_validation("mse: X and y row counts differ");
    double sse = transform_reduce(n, workers, [&](std::size_t i) {
        const double r = forward(ws, X.row(static_cast<Eigen::Index>(i)).transpose()) -
                         y(static_cast<Eigen::Index>(i));
        return r * r;
    });
    return sse / static_cast<double>(n);
}

double rmse(const WeightSet& ws, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
            int workers) {
    return std::sqrt(mse(ws, X, y, workers));
}

// ------------------------------------------------------------ backprop

Gradients gradient(const WeightSet& ws, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const int L = ws.num_layers();
    const Eigen::Index m = X.rows();
    if (m == 0) fail_validation("gradient: empty sample");
    if (X.rows() != y.size()) fail_validation("gradient: X and y row counts differ");

    // Columns = samples.
    std::vector<Eigen::MatrixXd> A(L);  // post-activation inputs to layer l
    Eigen::MatrixXd cur = X.transpose();
    for (int l = 0; l + 1 < L; ++l) {
        A[l] = std::move(cur);
        cur = (((ws.W[l] * A[l]).colwise() + ws.b[l]).array().max(0.0)).matrix();
    }
    A[L - 1] = std::move(cur);
    Eigen::MatrixXd yhat = (ws.W[L - 1] * A[L - 1]).colwise() + ws.b[L - 1];  // 1 x m

    Gradients g;
    g.W.resize(L);
    g.b.resize(L);

    // d(MSE)/d(yhat) = 2 (yhat - y) / m.
    Eigen::MatrixXd delta = (yhat.row(0).transpose() - y).transpose() * (2.0 / double(m));
    for (int l = L - 1; l >= 0; --l) {
        g.W[l].noalias() = delta * A[l].transpose();
        g.b[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd da = ws.W[l].transpose() * delta;
            // ReLU mask: derivative 0 at exactly 0.
            delta = (da.array() * (A[l].array() > 0.0).cast<double>()).matrix();
        }
    }
    return g;
}

// ------------------------------------------------------------ training

namespace {

struct Adam {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    long long t = 0;

    explicit Adam(const WeightSet& ws) {
        for (const auto& w : ws.W) {
            mW.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
            vW.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        }
        for (const auto& bias : ws.b) {
            mb.push_back(Eigen::VectorXd::Zero(bias.size()));
            vb.push_back(Eigen::VectorXd::Zero(bias.size()));
        }
    }

    void step(WeightSet& ws, const Gradients& g, const TrainConfig& cfg) {
        ++t;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        for (int l = 0; l < ws.num_layers(); ++l) {
            mW[l] = cfg.beta1 * mW[l] + (1.0 - cfg.beta1) * g.W[l];
            vW[l] = (cfg.beta2 * vW[l].array() +
                     (1.0 - cfg.beta2) * g.W[l].array().square()).matrix();
            ws.W[l].array() -= cfg.learning_rate * (mW[l].array() / bc1) /
                               ((vW[l].array() / bc2).sqrt() + cfg.adam_eps);
            mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * g.b[l];
            vb[l] = (cfg.beta2 * vb[l].array() +
                     (1.0 - cfg.beta2) * g.b[l].array().square()).matrix();
            ws.b[l].array() -= cfg.learning_rate * (mb[l].array() / bc1) /
                               ((vb[l].array() / bc2).sqrt() + cfg.adam_eps);
        }
    }
};

int resolve_batch(const TrainConfig& cfg, Eigen::Index n) {
    int batch = cfg.batch_size;
    if (batch == 0) batch = n < 256 ? static_cast<int>(n) : 128;
    if (batch > n) batch = static_cast<int>(n);
    return batch;
}

}  // namespace

TrainResult train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Architecture& arch, const TrainConfig& cfg) {
    std::vector<int> order(static_cast<std::size_t>(X.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    return train(X, y, arch, cfg, std::move(order));
}

TrainResult train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Architecture& arch, const TrainConfig& cfg,
                  std::vector<int> order) {
    arch.validate();
    cfg.validate();
    const Eigen::Index n = X.rows();
    if (n < 1) fail_validation("train: empty sample");
    if (X.cols() != arch.input_dim())
        fail_validation("train: feature count does not match architecture input");
    if (y.size() != n) fail_validation("train: X and y row counts differ");
    if (order.size() != static_cast<std::size_t>(n))
        fail_validation("train: row order length mismatch");

    WeightSet ws = init_network(arch, cfg.seed);
    Adam adam(ws);
    Rng shuffler(child_seed(cfg.seed, "neural/shuffle"));
    const int batch = resolve_batch(cfg, n);

    TrainResult best;
    best.weights = ws;
    best.rmse = rmse(ws, X, y);
    best.best_epoch = 0;

    Eigen::MatrixXd bx;
    Eigen::VectorXd by;
    int stall = 0;
    int epoch = 0;
    for (epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (batch < n) shuffler.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index m = std::min<Eigen::Index>(batch, n - start);
            bx.resize(m, X.cols());
            by.resize(m);
            for (Eigen::Index r = 0; r < m; ++r) {
                bx.row(r) = X.row(order[static_cast<std::size_t>(start + r)]);
                by(r) = y(order[static_cast<std::size_t>(start + r)]);
            }
            Gradients g = gradient(ws, bx, by);
            adam.step(ws, g, cfg);
        }
        const double r = rmse(ws, X, y);
        if (!std::isfinite(r))
            fail_estimation("training diverged at epoch " + std::to_string(epoch));
        if (r < best.rmse) {
            best.rmse = r;
            best.weights = ws;
            best.best_epoch = epoch;
            stall = 0;
        } else if (++stall > cfg.patience) {
            break;
        }
    }
    best.epochs_run = std::min(epoch, cfg.epochs);
    return best;
}

TrainResult train_last_layer(const WeightSet& frozen, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y, const TrainConfig& cfg) {
    frozen.validate();
    cfg.validate();
    const Eigen::Index n = X.rows();
    if (n < 1) fail_validation("train_last_layer: empty sample");
    if (X.cols() != frozen.arch.input_dim())
        fail_validation("train_last_layer: feature count does not match architecture input");
    if (y.size() != n) fail_validation("train_last_layer: X and y row counts differ");

    const int L = frozen.num_layers();
    const int h = frozen.arch.sizes[L - 1];

    // Earlier layers are fixed, so penultimate activations are computed once.
    // Evaluating through these cached columns with output_layer() is bitwise
    // identical to forward() on the original rows.
    Eigen::MatrixXd H(h, n);
    for (Eigen::Index i = 0; i < n; ++i)
        H.col(i) = penultimate(frozen, X.row(i).transpose());

    WeightSet ws = frozen;
    auto eval_rmse = [&](const WeightSet& cand) {
        double sse = transform_reduce_serial(static_cast<std::size_t>(n), [&](std::size_t i) {
            const double r =
                output_layer(cand, H.col(static_cast<Eigen::Index>(i))) -
                y(static_cast<Eigen::Index>(i));
            return r * r;
        });
        return std::sqrt(sse / static_cast<double>(n));
    };

    TrainResult best;
    best.weights = ws;
    best.rmse = eval_rmse(ws);
    best.best_epoch = 0;

    // Adam state only for the output layer.
    Eigen::MatrixXd mW = Eigen::MatrixXd::Zero(1, h), vW = Eigen::MatrixXd::Zero(1, h);
    double mb = 0, vb = 0;
    long long t = 0;

    std::vector<int> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng shuffler(child_seed(cfg.seed, "neural/shuffle"));
    const int batch = resolve_batch(cfg, n);

    int stall = 0;
    int epoch = 0;
    for (epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (batch < n) shuffler.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index m = std::min<Eigen::Index>(batch, n - start);
            Eigen::MatrixXd hb(h, m);
            Eigen::VectorXd yb(m);
            for (Eigen::Index c = 0; c < m; ++c) {
                hb.col(c) = H.col(order[static_cast<std::size_t>(start + c)]);
                yb(c) = y(order[static_cast<std::size_t>(start + c)]);
            }
            Eigen::RowVectorXd yhat = (ws.W[L - 1] * hb).row(0);
            yhat.array() += ws.b[L - 1](0);
            Eigen::RowVectorXd delta = (yhat.transpose() - yb).transpose() * (2.0 / double(m));
            Eigen::MatrixXd gW = delta * hb.transpose();
            double gb = delta.sum();

            ++t;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
            mW = cfg.beta1 * mW + (1.0 - cfg.beta1) * gW;
            vW = (cfg.beta2 * vW.array() + (1.0 - cfg.beta2) * gW.array().square()).matrix();
            ws.W[L - 1].array() -= cfg.learning_rate * (mW.array() / bc1) /
                                   ((vW.array() / bc2).sqrt() + cfg.adam_eps);
            mb = cfg.beta1 * mb + (1.0 - cfg.beta1) * gb;
            vb = cfg.beta2 * vb + (1.0 - cfg.beta2) * gb * gb;
            ws.b[L - 1](0) -= cfg.learning_rate * (mb / bc1) /
                              (std::sqrt(vb / bc2) + cfg.adam_eps);
        }
        const double r = eval_rmse(ws);
        if (!std::isfinite(r))
            fail_estimation("last-layer training diverged at epoch " + std::to_string(epoch));
        if (r < best.rmse) {
            best.rmse = r;
            best.weights = ws;
            best.best_epoch = epoch;
            stall = 0;
        } else if (++stall > cfg.patience) {
            break;
        }
    }
    best.epochs_run = std::min(epoch, cfg.epochs);
    return best;
}

// --------------------------------------------------------- persistence

nlohmann::json to_json(const WeightSet& ws) {
    nlohmann::json j;
    j["layer_sizes"] = ws.arch.sizes;
    j["seed"] = ws.seed;
    nlohmann::json layers = nlohmann::json::array();
    for (int l = 0; l < ws.num_layers(); ++l) {
        nlohmann::json wl = nlohmann::json::array();
        for (Eigen::Index r = 0; r < ws.W[l].rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < ws.W[l].cols(); ++c) row.push_back(ws.W[l](r, c));
            wl.push_back(std::move(row));
        }
        nlohmann::json bl = nlohmann::json::array();
        for (Eigen::Index r = 0; r < ws.b[l].size(); ++r) bl.push_back(ws.b[l](r));
        layers.push_back({{"w", std::move(wl)}, {"b", std::move(bl)}});
    }
    j["layers"] = std::move(layers);
    return j;
}

WeightSet weightset_from_json(const nlohmann::json& j) try {
    WeightSet ws;
    ws.arch.sizes = j.at("layer_sizes").get<std::vector<int>>();
    ws.seed = j.at("seed").get<std::uint64_t>();
    const auto& layers = j.at("layers");
    const int L = ws.arch.num_layers();
    if (static_cast<int>(layers.size()) != L)
        fail_validation("weight file: layer count does not match layer_sizes");
    ws.W.resize(L);
    ws.b.resize(L);
    for (int l = 0; l < L; ++l) {
        const auto& wl = layers[l].at("w");
        const auto& bl = layers[l].at("b");
        const int rows = ws.arch.sizes[l + 1];
        const int cols = ws.arch.sizes[l];
        if (static_cast<int>(wl.size()) != rows)
            fail_validation("weight file: row count mismatch at layer " + std::to_string(l));
        ws.W[l].resize(rows, cols);
        for (int r = 0; r < rows; ++r) {
            if (static_cast<int>(wl[r].size()) != cols)
                fail_validation("weight file: column count mismatch at layer " +
                                std::to_string(l));
            for (int c = 0; c < cols; ++c) ws.W[l](r, c) = wl[r][c].get<double>();
        }
        if (static_cast<int>(bl.size()) != rows)
            fail_validation("weight file: bias size mismatch at layer " + std::to_string(l));
        ws.b[l].resize(rows);
        for (int r = 0; r < rows; ++r) ws.b[l](r) = bl[r].get<double>();
    }
    ws.validate();
    return ws;
} catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("weight file: malformed structure: ") + e.what());
}

void save_weights(const WeightSet& ws, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot write '" + path + "'");
    out << to_json(ws).dump(2) << "\n";
    if (!out) fail_io("write failed for '" + path + "'");
}

WeightSet load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail_validation("weight file '" + path + "': " + e.what());
    }
    return weightset_from_json(j);
}

}  // namespace funcdist::neural
