#pragma once

#include <cstddef>

#include "gbrbm/model.hpp"
#include "gbrbm/rng.hpp"

namespace gbrbm {

/// Current configuration of one block-Gibbs chain.
struct ChainState {
    Vector visible;
    Vector hidden;
    std::size_t step_count = 0;
};

/// h_j ~ Bernoulli(p(h_j = 1 | v)), drawn in order j = 0..n-1.
Vector sample_hidden(const RbmParams& params, const Vector& v, RngStream& rng);
/// v_i ~ Normal(b_i + sum_j w_ij h_j, exp(z_i)), drawn in order i = 0..m-1.
Vector sample_visible(const RbmParams& params, const Vector& h, RngStream& rng);

/// Advance `state` by k (hidden, visible) transition pairs in place.
void gibbs_advance(const RbmParams& params, ChainState& state, std::size_t k, RngStream& rng);
/// Chain started at `init_v` after k transition pairs; step_count == k.
ChainState gibbs_chain(const RbmParams& params, const Vector& init_v, std::size_t k, RngStream& rng);

}  // namespace gbrbm
