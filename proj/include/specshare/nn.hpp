#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "specshare/channel.hpp"

namespace specshare::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { linear, relu, tanh, sign_ste };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Affine layer followed by an activation. A sign_ste layer is parameter-free: it has empty
// weights and maps its input elementwise to {-1, +1}, passing gradients straight through.
struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::linear;
  Eigen::Index width = 0;  // output width; equals input width for sign_ste

  bool has_parameters() const { return activation != Activation::sign_ste; }
  Eigen::Index in_dim() const { return has_parameters() ? weights.cols() : width; }
  Eigen::Index out_dim() const { return width; }
};

struct Network {
  std::vector<DenseLayer> layers;

  Eigen::Index in_dim() const;
  Eigen::Index out_dim() const;
  std::size_t parameter_count() const;
  bool operator==(const Network& other) const;
};

struct LayerSpec {
  Eigen::Index width;
  Activation activation;
};

// Fan-balanced uniform init, +-sqrt(6 / (fan_in + fan_out)); zero biases.
Network make_network(Eigen::Index in_dim, const std::vector<LayerSpec>& layers, Rng& rng);

// Columns are samples. inputs[i] feeds layer i; outputs[i] leaves it.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> outputs;

  const Matrix& result() const { return outputs.back(); }
};

ForwardCache forward(const Network& net, const Matrix& input);
Vector predict(const Network& net, const Vector& input);

// Same shapes as the network parameters; entries for sign_ste layers are empty.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;
  Matrix input;  // d loss / d network input, one column per sample

  static Gradients zeros_like(const Network& net);
};

// Reverse-mode pass. output_gradient has the shape of cache.result().
Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& output_gradient);

double tanh_act(double x);  // 2 / (1 + e^{-2x}) - 1
double relu_act(double x);
double sign_act(double x);  // sign(0) = +1

struct HuberResult {
  double loss;
  double gradient;  // d loss / d prediction
};

HuberResult huber(double prediction, double target, double delta = 1.0);

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double decay = 0.9;
  double epsilon = 1e-7;
};

struct RmsPropState {
  RmsPropConfig config;
  std::vector<Matrix> weight_accumulators;
  std::vector<Vector> bias_accumulators;

  static RmsPropState for_network(const Network& net, RmsPropConfig config = {});
};

// acc <- decay * acc + (1 - decay) g^2;  param <- param - lr * g / sqrt(acc + eps).
void rmsprop_step(Network& net, const Gradients& grads, RmsPropState& state);

// Text format:
//   specshare-net 1
//   <layer count>
//   per layer: <activation> <out> <in>, then the row-major weights line and the bias line
//   (both omitted for sign_ste). Values use 17 significant digits.
void save_network(const Network& net, std::ostream& out);
Network load_network(std::istream& in);
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace specshare::nn
