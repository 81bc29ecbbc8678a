#pragma once

#include <cstddef>

#include "specshare/env.hpp"

namespace specshare {

// Joint action index <-> allocation. Base-N positional code, least-significant digit
// first: digit k is the channel of D2D pair k.
std::size_t num_joint_actions(int num_pairs, int num_channels);
Allocation action_decode(std::size_t index, int num_pairs, int num_channels);
std::size_t action_encode(const Allocation& allocation);

}  // namespace specshare
