#include "specshare/nn.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace specshare::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sign_ste: return "sign_ste";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "linear") return Activation::linear;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sign_ste") return Activation::sign_ste;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Eigen::Index Network::in_dim() const {
  if (layers.empty()) throw std::logic_error("empty network");
  return layers.front().in_dim();
}

Eigen::Index Network::out_dim() const {
  if (layers.empty()) throw std::logic_error("empty network");
  return layers.back().out_dim();
}

std::size_t Network::parameter_count() const {
  std::size_t count = 0;
  for (const auto& l : layers) count += l.weights.size() + l.bias.size();
  return count;
}

bool Network::operator==(const Network& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& a = layers[i];
    const auto& b = other.layers[i];
    if (a.activation != b.activation || a.width != b.width) return false;
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols()) return false;
    if (a.weights != b.weights || a.bias != b.bias) return false;
  }
  return true;
}

Network make_network(Eigen::Index in_dim, const std::vector<LayerSpec>& specs, Rng& rng) {
  Network net;
  Eigen::Index fan_in = in_dim;
  for (const auto& spec : specs) {
    DenseLayer layer;
    layer.activation = spec.activation;
    if (spec.activation == Activation::sign_ste) {
      layer.width = fan_in;
    } else {
      layer.width = spec.width;
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + spec.width));
      std::uniform_real_distribution<double> init(-limit, limit);
      layer.weights.resize(spec.width, fan_in);
      // Row-major fill so the draw order does not depend on Eigen's storage order.
      for (Eigen::Index r = 0; r < spec.width; ++r)
        for (Eigen::Index c = 0; c < fan_in; ++c) layer.weights(r, c) = init(rng);
      layer.bias = Vector::Zero(spec.width);
    }
    fan_in = layer.width;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

double tanh_act(double x) { return 2.0 / (1.0 + std::exp(-2.0 * x)) - 1.0; }
double relu_act(double x) { return x > 0.0 ? x : 0.0; }
double sign_act(double x) { return x >= 0.0 ? 1.0 : -1.0; }

namespace {

Matrix activate(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::linear: return z;
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.unaryExpr([](double v) { return tanh_act(v); });
    case Activation::sign_ste: return z.unaryExpr([](double v) { return sign_act(v); });
  }
  return z;
}

}  // namespace

ForwardCache forward(const Network& net, const Matrix& input) {
  if (net.layers.empty()) throw std::invalid_argument("forward: empty network");
  if (input.rows() != net.in_dim()) {
    throw std::invalid_argument("forward: input has " + std::to_string(input.rows()) +
                                " rows, network expects " + std::to_string(net.in_dim()));
  }
  ForwardCache cache;
  cache.inputs.reserve(net.layers.size());
  cache.outputs.reserve(net.layers.size());
  const Matrix* x = &input;
  for (const auto& layer : net.layers) {
    cache.inputs.push_back(*x);
    if (layer.has_parameters()) {
      Matrix z = layer.weights * *x;
      z.colwise() += layer.bias;
      cache.outputs.push_back(activate(layer.activation, z));
    } else {
      cache.outputs.push_back(activate(layer.activation, *x));
    }
    x = &cache.outputs.back();
  }
  return cache;
}

Vector predict(const Network& net, const Vector& input) {
  return forward(net, Matrix(input)).result().col(0);
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (const auto& l : net.layers) {
    g.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& output_gradient) {
  if (cache.outputs.size() != net.layers.size()) {
    throw std::invalid_argument("backward: cache does not match network");
  }
  if (output_gradient.rows() != cache.result().rows() || output_gradient.cols() != cache.result().cols()) {
    throw std::invalid_argument("backward: output gradient shape mismatch");
  }
  Gradients g;
  g.weights.resize(net.layers.size());
  g.bias.resize(net.layers.size());
  Matrix delta = output_gradient;
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const auto& layer = net.layers[i];
    const Matrix& y = cache.outputs[i];
    switch (layer.activation) {
      case Activation::linear:
      case Activation::sign_ste:  // straight-through: identity in the backward pass
        break;
      case Activation::relu:
        delta = (y.array() > 0.0).select(delta.array(), 0.0).matrix();
        break;
      case Activation::tanh:
        delta.array() *= 1.0 - y.array().square();
        break;
    }
    if (layer.has_parameters()) {
      g.weights[i].noalias() = delta * cache.inputs[i].transpose();
      g.bias[i] = delta.rowwise().sum();
      delta = layer.weights.transpose() * delta;
    }
  }
  g.input = std::move(delta);
  return g;
}

HuberResult huber(double prediction, double target, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("huber: delta must be positive");
  const double e = prediction - target;
  const double abs_e = std::abs(e);
  if (abs_e <= delta) return {0.5 * e * e, e};
  return {delta * (abs_e - 0.5 * delta), e > 0.0 ? delta : -delta};
}

RmsPropState RmsPropState::for_network(const Network& net, RmsPropConfig config) {
  RmsPropState s;
  s.config = config;
  for (const auto& l : net.layers) {
    s.weight_accumulators.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    s.bias_accumulators.push_back(Vector::Zero(l.bias.size()));
  }
  return s;
}

void rmsprop_step(Network& net, const Gradients& grads, RmsPropState& state) {
  if (grads.weights.size() != net.layers.size() || state.weight_accumulators.size() != net.layers.size()) {
    throw std::invalid_argument("rmsprop_step: gradient/state shape mismatch");
  }
  const auto& c = state.config;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    auto& layer = net.layers[i];
    if (!layer.has_parameters()) continue;
    auto& wacc = state.weight_accumulators[i];
    auto& bacc = state.bias_accumulators[i];
    const auto& gw = grads.weights[i];
    const auto& gb = grads.bias[i];
    if (gw.rows() != layer.weights.rows() || gw.cols() != layer.weights.cols() ||
        gb.size() != layer.bias.size()) {
      throw std::invalid_argument("rmsprop_step: gradient shape mismatch at layer " + std::to_string(i));
    }
    wacc.array() = c.decay * wacc.array() + (1.0 - c.decay) * gw.array().square();
    bacc.array() = c.decay * bacc.array() + (1.0 - c.decay) * gb.array().square();
    layer.weights.array() -= c.learning_rate * gw.array() / (wacc.array() + c.epsilon).sqrt();
    layer.bias.array() -= c.learning_rate * gb.array() / (bacc.array() + c.epsilon).sqrt();
  }
}

void save_network(const Network& net, std::ostream& out) {
  out << "specshare-net 1\n" << net.layers.size() << '\n';
  out << std::setprecision(17);
  for (const auto& l : net.layers) {
    out << to_string(l.activation) << ' ' << l.out_dim() << ' ' << l.in_dim() << '\n';
    if (!l.has_parameters()) continue;
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
        out << (r + c == 0 ? "" : " ") << l.weights(r, c);
    out << '\n';
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out << (r == 0 ? "" : " ") << l.bias(r);
    out << '\n';
  }
}

Network load_network(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version) || magic != "specshare-net" || version != 1) {
    throw std::runtime_error("load_network: bad header");
  }
  if (!(in >> count)) throw std::runtime_error("load_network: missing layer count");
  Network net;
  for (std::size_t i = 0; i < count; ++i) {
    std::string act;
    Eigen::Index out_dim = 0, in_dim = 0;
    if (!(in >> act >> out_dim >> in_dim)) throw std::runtime_error("load_network: truncated layer header");
    DenseLayer l;
    l.activation = activation_from_string(act);
    l.width = out_dim;
    if (l.has_parameters()) {
      l.weights.resize(out_dim, in_dim);
      l.bias.resize(out_dim);
      for (Eigen::Index r = 0; r < out_dim; ++r)
        for (Eigen::Index c = 0; c < in_dim; ++c)
          if (!(in >> l.weights(r, c))) throw std::runtime_error("load_network: truncated weights");
      for (Eigen::Index r = 0; r < out_dim; ++r)
        if (!(in >> l.bias(r))) throw std::runtime_error("load_network: truncated bias");
    } else if (in_dim != out_dim) {
      throw std::runtime_error("load_network: sign_ste layer must preserve width");
    }
    if (!net.layers.empty() && net.layers.back().out_dim() != l.in_dim()) {
      throw std::runtime_error("load_network: layer " + std::to_string(i) + " shape mismatch");
    }
    net.layers.push_back(std::move(l));
  }
  return net;
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_network(net, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load_network(in);
}

}  // namespace specshare::nn
