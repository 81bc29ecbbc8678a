#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "specshare/action_codec.hpp"
#include "specshare/env.hpp"
#include "specshare/nn.hpp"

namespace specshare {

enum class FeedbackMode { none, real, binary };

std::string to_string(FeedbackMode mode);
FeedbackMode feedback_mode_from_string(const std::string& name);

// Widths of the composite network. The binary head ends in a pre-binary tanh layer whose
// width is the per-link bit budget feedback_count * bits_per_value, followed by sign_ste.
struct PolicyShape {
  int num_pairs = 4;
  int num_channels = 4;
  FeedbackMode mode = FeedbackMode::real;
  int feedback_count = 3;  // N_k, real values produced by the encoder head
  int bits_per_value = 0;  // N_b, binary mode only
  std::vector<int> encoder_hidden{16, 32, 16};
  std::vector<int> qnet_hidden{1200, 800, 600};

  int observation_width() const { return 2 * num_channels + 1; }
  int feedback_width() const;
  std::size_t num_actions() const { return num_joint_actions(num_pairs, num_channels); }
  void validate() const;
  bool operator==(const PolicyShape&) const = default;
};

using FeedbackVector = nn::Vector;

nn::Network make_encoder(const PolicyShape& shape, Rng& rng);
nn::Network make_qnet(const PolicyShape& shape, Rng& rng);

// K encoders and the BS Q-network, plus a frozen target copy of both.
struct CompositeNet {
  PolicyShape shape;
  std::vector<nn::Network> encoders;
  nn::Network qnet;
  std::vector<nn::Network> target_encoders;
  nn::Network target_qnet;
};

// Target starts synchronized with the online networks.
CompositeNet make_composite(const PolicyShape& shape, Rng& rng);

FeedbackVector encode(const nn::Network& encoder, const Observation& observation);
FeedbackVector encode(const nn::Network& encoder, const std::vector<double>& features);

nn::Vector q_values(const nn::Network& qnet, const std::vector<FeedbackVector>& feedbacks);

// Online encoders' feedback for every link.
std::vector<FeedbackVector> feedback(const CompositeNet& net, const std::vector<Observation>& observations);

// First maximum wins.
std::size_t argmax(const nn::Vector& values);

std::size_t greedy_action(const CompositeNet& net, const std::vector<Observation>& observations);

void sync_target(CompositeNet& net);

// Batched pass through encoders and qnet. obs[k] holds link k's features, one column per
// sample.
struct CompositeCache {
  std::vector<nn::ForwardCache> encoders;
  nn::ForwardCache qnet;

  const nn::Matrix& q() const { return qnet.result(); }
};

CompositeCache composite_forward(const std::vector<nn::Network>& encoders, const nn::Network& qnet,
                                 const std::vector<nn::Matrix>& obs);

struct CompositeGradients {
  std::vector<nn::Gradients> encoders;
  nn::Gradients qnet;
};

// Back-propagates dLoss/dQ through the qnet and every encoder (straight-through at sign layers).
CompositeGradients composite_backward(const CompositeNet& net, const CompositeCache& cache,
                                      const nn::Matrix& q_gradient);

// Checkpoint directory: manifest.json plus one nn text file per network.
void save_composite(const CompositeNet& net, const std::string& directory);
CompositeNet load_composite(const std::string& directory);

}  // namespace specshare
