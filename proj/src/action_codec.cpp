#include "specshare/action_codec.hpp"

#include <stdexcept>
#include <string>

namespace specshare {

std::size_t num_joint_actions(int num_pairs, int num_channels) {
  std::size_t count = 1;
  for (int k = 0; k < num_pairs; ++k) count *= static_cast<std::size_t>(num_channels);
  return count;
}

Allocation action_decode(std::size_t index, int num_pairs, int num_channels) {
  if (index >= num_joint_actions(num_pairs, num_channels)) {
    throw std::out_of_range("action index " + std::to_string(index) + " out of range");
  }
  std::vector<int> channels(num_pairs);
  for (int k = 0; k < num_pairs; ++k) {
    channels[k] = static_cast<int>(index % num_channels);
    index /= num_channels;
  }
  return Allocation(std::move(channels), num_channels);
}

std::size_t action_encode(const Allocation& allocation) {
  std::size_t index = 0;
  for (int k = allocation.num_pairs() - 1; k >= 0; --k) {
    index = index * allocation.num_channels() + allocation.channel(k);
  }
  return index;
}

}  // namespace specshare
