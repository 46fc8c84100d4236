#pragma once

#include <cstddef>
#include <vector>

#include "msmr/numeric/tape.hpp"

namespace msmr::numeric {

/// Weights of one post-norm transformer encoder block over [n x c] tokens.
/// Projections are [c x c], the feed-forward layers [c x h] and [h x c].
struct AttentionWeights {
  Var wq, bq, wk, bk, wv, bv, wo, bo;
  Var ln1_gain, ln1_bias;
  Var ff1_w, ff1_b, ff2_w, ff2_b;
  Var ln2_gain, ln2_bias;
};

/// Multi-head scaled dot-product self-attention followed by a feed-forward
/// layer, each wrapped in a residual connection and a layer norm. No
/// positional encoding is added, so the block is equivariant to row
/// permutations. When `attention_out` is set it receives the per-head
/// [n x n] attention matrices.
Var attention_block(Var x, const AttentionWeights& w, std::size_t heads,
                    std::vector<Tensor>* attention_out = nullptr);

}  // namespace msmr::numeric
