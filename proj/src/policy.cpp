#include "specshare/policy.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace specshare {

namespace fs = std::filesystem;

std::string to_string(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::none: return "none";
    case FeedbackMode::real: return "real";
    case FeedbackMode::binary: return "binary";
  }
  return "unknown";
}

FeedbackMode feedback_mode_from_string(const std::string& name) {
  if (name == "none") return FeedbackMode::none;
  if (name == "real") return FeedbackMode::real;
  if (name == "binary") return FeedbackMode::binary;
  throw std::invalid_argument("unknown feedback mode '" + name + "'");
}

int PolicyShape::feedback_width() const {
  switch (mode) {
    case FeedbackMode::none: return 0;
    case FeedbackMode::real: return feedback_count;
    case FeedbackMode::binary: return feedback_count * bits_per_value;
  }
  return 0;
}

void PolicyShape::validate() const {
  if (num_pairs < 1 || num_channels < 1) throw std::invalid_argument("policy needs K, N >= 1");
  if (mode == FeedbackMode::none) return;
  if (feedback_count < 1) throw std::invalid_argument("feedback_count must be >= 1 with feedback enabled");
  if (mode == FeedbackMode::binary && bits_per_value < 1)
    throw std::invalid_argument("binary feedback needs bits_per_value >= 1");
  for (int w : encoder_hidden)
    if (w < 1) throw std::invalid_argument("encoder hidden widths must be positive");
  for (int w : qnet_hidden)
    if (w < 1) throw std::invalid_argument("qnet hidden widths must be positive");
}

nn::Network make_encoder(const PolicyShape& shape, Rng& rng) {
  std::vector<nn::LayerSpec> layers;
  for (int w : shape.encoder_hidden) layers.push_back({w, nn::Activation::relu});
  layers.push_back({shape.feedback_count, nn::Activation::linear});
  if (shape.mode == FeedbackMode::binary) {
    layers.push_back({shape.feedback_width(), nn::Activation::tanh});
    layers.push_back({shape.feedback_width(), nn::Activation::sign_ste});
  }
  return nn::make_network(shape.observation_width(), layers, rng);
}

nn::Network make_qnet(const PolicyShape& shape, Rng& rng) {
  std::vector<nn::LayerSpec> layers;
  for (int w : shape.qnet_hidden) layers.push_back({w, nn::Activation::relu});
  layers.push_back({static_cast<Eigen::Index>(shape.num_actions()), nn::Activation::linear});
  return nn::make_network(static_cast<Eigen::Index>(shape.num_pairs) * shape.feedback_width(), layers, rng);
}

CompositeNet make_composite(const PolicyShape& shape, Rng& rng) {
  shape.validate();
  if (shape.mode == FeedbackMode::none) {
    throw std::invalid_argument("no network is built for feedback mode 'none'");
  }
  CompositeNet net;
  net.shape = shape;
  for (int k = 0; k < shape.num_pairs; ++k) net.encoders.push_back(make_encoder(shape, rng));
  net.qnet = make_qnet(shape, rng);
  sync_target(net);
  return net;
}

FeedbackVector encode(const nn::Network& encoder, const std::vector<double>& features) {
  const Eigen::Map<const nn::Vector> x(features.data(), static_cast<Eigen::Index>(features.size()));
  return nn::predict(encoder, x);
}

FeedbackVector encode(const nn::Network& encoder, const Observation& observation) {
  return encode(encoder, observation.features());
}

nn::Vector q_values(const nn::Network& qnet, const std::vector<FeedbackVector>& feedbacks) {
  Eigen::Index width = 0;
  for (const auto& f : feedbacks) width += f.size();
  if (width != qnet.in_dim()) {
    throw std::invalid_argument("q_values: concatenated feedback width " + std::to_string(width) +
                                " != qnet input " + std::to_string(qnet.in_dim()));
  }
  nn::Vector state(width);
  Eigen::Index offset = 0;
  for (const auto& f : feedbacks) {
    state.segment(offset, f.size()) = f;
    offset += f.size();
  }
  return nn::predict(qnet, state);
}

std::vector<FeedbackVector> feedback(const CompositeNet& net, const std::vector<Observation>& observations) {
  if (observations.size() != net.encoders.size()) {
    throw std::invalid_argument("expected one observation per D2D pair");
  }
  std::vector<FeedbackVector> out;
  out.reserve(observations.size());
  for (std::size_t k = 0; k < observations.size(); ++k) {
    if (static_cast<int>(observations[k].size()) != net.shape.observation_width()) {
      throw std::invalid_argument("observation width mismatch");
    }
    out.push_back(encode(net.encoders[k], observations[k]));
  }
  return out;
}

std::size_t argmax(const nn::Vector& values) {
  if (values.size() == 0) throw std::invalid_argument("argmax of empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

std::size_t greedy_action(const CompositeNet& net, const std::vector<Observation>& observations) {
  return argmax(q_values(net.qnet, feedback(net, observations)));
}

void sync_target(CompositeNet& net) {
  net.target_encoders = net.encoders;
  net.target_qnet = net.qnet;
}

CompositeCache composite_forward(const std::vector<nn::Network>& encoders, const nn::Network& qnet,
                                 const std::vector<nn::Matrix>& obs) {
  if (obs.size() != encoders.size()) throw std::invalid_argument("composite_forward: one batch per encoder");
  CompositeCache cache;
  cache.encoders.reserve(encoders.size());
  Eigen::Index width = 0;
  for (std::size_t k = 0; k < encoders.size(); ++k) {
    cache.encoders.push_back(nn::forward(encoders[k], obs[k]));
    width += cache.encoders.back().result().rows();
  }
  const Eigen::Index batch = obs.empty() ? 0 : obs.front().cols();
  nn::Matrix state(width, batch);
  Eigen::Index offset = 0;
  for (const auto& c : cache.encoders) {
    state.middleRows(offset, c.result().rows()) = c.result();
    offset += c.result().rows();
  }
  cache.qnet = nn::forward(qnet, state);
  return cache;
}

CompositeGradients composite_backward(const CompositeNet& net, const CompositeCache& cache,
                                      const nn::Matrix& q_gradient) {
  CompositeGradients g;
  g.qnet = nn::backward(net.qnet, cache.qnet, q_gradient);
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < net.encoders.size(); ++k) {
    const Eigen::Index rows = cache.encoders[k].result().rows();
    g.encoders.push_back(nn::backward(net.encoders[k], cache.encoders[k], g.qnet.input.middleRows(offset, rows)));
    offset += rows;
  }
  return g;
}

void save_composite(const CompositeNet& net, const std::string& directory) {
  fs::create_directories(directory);
  const auto& s = net.shape;
  nlohmann::json manifest = {
      {"format", "specshare-checkpoint"},
      {"version", 1},
      {"num_pairs", s.num_pairs},
      {"num_channels", s.num_channels},
      {"mode", to_string(s.mode)},
      {"feedback_count", s.feedback_count},
      {"bits_per_value", s.bits_per_value},
      {"feedback_width", s.feedback_width()},
      {"encoder_hidden", s.encoder_hidden},
      {"qnet_hidden", s.qnet_hidden},
  };
  std::vector<std::string> encoders, targets;
  for (int k = 0; k < s.num_pairs; ++k) {
    encoders.push_back("encoder_" + std::to_string(k) + ".net");
    targets.push_back("target_encoder_" + std::to_string(k) + ".net");
    nn::save_network(net.encoders[k], (fs::path(directory) / encoders.back()).string());
    nn::save_network(net.target_encoders[k], (fs::path(directory) / targets.back()).string());
  }
  nn::save_network(net.qnet, (fs::path(directory) / "qnet.net").string());
  nn::save_network(net.target_qnet, (fs::path(directory) / "target_qnet.net").string());
  manifest["encoders"] = encoders;
  manifest["target_encoders"] = targets;
  manifest["qnet"] = "qnet.net";
  manifest["target_qnet"] = "target_qnet.net";
  const auto path = fs::path(directory) / "manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
}

CompositeNet load_composite(const std::string& directory) {
  const auto path = fs::path(directory) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const auto m = nlohmann::json::parse(in);
  if (m.value("format", "") != "specshare-checkpoint") throw std::runtime_error(path.string() + ": not a checkpoint");
  CompositeNet net;
  auto& s = net.shape;
  s.num_pairs = m.at("num_pairs").get<int>();
  s.num_channels = m.at("num_channels").get<int>();
  s.mode = feedback_mode_from_string(m.at("mode").get<std::string>());
  s.feedback_count = m.at("feedback_count").get<int>();
  s.bits_per_value = m.at("bits_per_value").get<int>();
  s.encoder_hidden = m.at("encoder_hidden").get<std::vector<int>>();
  s.qnet_hidden = m.at("qnet_hidden").get<std::vector<int>>();
  s.validate();
  const fs::path dir(directory);
  for (const auto& name : m.at("encoders")) net.encoders.push_back(nn::load_network((dir / name.get<std::string>()).string()));
  for (const auto& name : m.at("target_encoders"))
    net.target_encoders.push_back(nn::load_network((dir / name.get<std::string>()).string()));
  net.qnet = nn::load_network((dir / m.at("qnet").get<std::string>()).string());
  net.target_qnet = nn::load_network((dir / m.at("target_qnet").get<std::string>()).string());
  if (static_cast<int>(net.encoders.size()) != s.num_pairs || net.target_encoders.size() != net.encoders.size() ||
      net.qnet.in_dim() != static_cast<Eigen::Index>(s.num_pairs) * s.feedback_width() ||
      net.qnet.out_dim() != static_cast<Eigen::Index>(s.num_actions())) {
    throw std::runtime_error(path.string() + ": network shapes disagree with manifest");
  }
  return net;
}

}  // namespace specshare
