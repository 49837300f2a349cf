#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace funcdist::neural {

// Fully-connected net, ReLU hidden layers, identity output, scalar target.
struct Architecture {
    std::vector<int> sizes;  // {in, hidden..., 1}

    int input_dim() const { return sizes.front(); }
    int output_dim() const { return sizes.back(); }
    int num_layers() const { return static_cast<int>(sizes.size()) - 1; }

    // At least one hidden layer, every size >= 1, scalar output.
    void validate() const;

    static Architecture default_arch() { return {{8, 16, 16, 1}}; }

    bool operator==(const Architecture&) const = default;
};

struct WeightSet {
    Architecture arch;
    std::uint64_t seed = 0;
    std::vector<Eigen::MatrixXd> W;  // W[l]: sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> b;  // b[l]: sizes[l+1]

    int num_layers() const { return static_cast<int>(W.size()); }
    void validate() const;  // shape match + all entries finite

    // Bitwise equality of every weight and bias.
    bool same_values(const WeightSet& other) const;
};

struct TrainConfig {
    std::uint64_t seed = 0;
    int epochs = 2000;
    int batch_size = 0;  // 0 = auto: full batch when n < 256, else 128
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 200;  // early stop on full-sample RMSE stalls

    void validate() const;
};

struct TrainResult {
    WeightSet weights;   // best-so-far by full-sample RMSE
    double rmse = 0.0;   // RMSE of those weights on the training sample
    int best_epoch = 0;  // 0 = initial weights
    int epochs_run = 0;
};

// Uniform(-s, s) with s = 1/sqrt(fan_in); biases zero. Deterministic in
// (arch, seed).
WeightSet init_network(const Architecture& arch, std::uint64_t seed);

// Single-row paths. forward() is literally the output layer applied to
// penultimate(), so cached-feature evaluation is bitwise identical to a
// full forward pass; the transfer-dominance guarantee relies on this.
Eigen::VectorXd penultimate(const WeightSet& ws, const Eigen::Ref<const Eigen::VectorXd>& x);
double output_layer(const WeightSet& ws, const Eigen::Ref<const Eigen::VectorXd>& h);
double forward(const WeightSet& ws, const Eigen::Ref<const Eigen::VectorXd>& x);

// Full-sample losses over X (rows = samples) via the deterministic chunked
// reduction; identical bytes for any worker count.
double mse(const WeightSet& ws, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           int workers = 1);
double rmse(const WeightSet& ws, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
            int workers = 1);

struct Gradients {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
};

// Exact backprop gradient of the mean squared error over the given rows
// (same minimizer as the RMSE objective).
Gradients gradient(const WeightSet& ws, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

TrainResult train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Architecture& arch, const TrainConfig& cfg);

// Same, but training visits rows through the given initial order (shuffled
// in place across epochs). Training depends on the data only through the
// visited row sequence, which this makes explicit and testable.
TrainResult train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Architecture& arch, const TrainConfig& cfg,
                  std::vector<int> initial_order);

// Retrains only the output layer (W, b of the last affine map), initialized
// at frozen's own output layer; earlier layers are copied bitwise. The
// best-so-far candidate set includes the initial point, so the result never
// scores worse than frozen on (X, y).
TrainResult train_last_layer(const WeightSet& frozen, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y, const TrainConfig& cfg);

// JSON persistence: layer-major nested arrays plus architecture and seed.
// Values survive the round trip bit-exactly.
nlohmann::json to_json(const WeightSet& ws);
WeightSet weightset_from_json(const nlohmann::json& j);
void save_weights(const WeightSet& ws, const std::string& path);
WeightSet load_weights(const std::string& path);

}  // namespace funcdist::neural
