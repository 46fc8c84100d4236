#include "msmr/numeric/attention.hpp"

#include <cmath>
#include <string>

#include "msmr/error.hpp"
#include "msmr/numeric/ops.hpp"

namespace msmr::numeric {

namespace {
Var linear(Var x, Var w, Var b) { return add_row_bias(matmul(x, w), b); }
}  // namespace

Var attention_block(Var x, const AttentionWeights& w, std::size_t heads,
                    std::vector<Tensor>* attention_out) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2) throw ShapeError("attention_block expects [n x c], got " + to_string(xv.shape()));
  const std::size_t c = xv.cols();
  if (heads == 0 || c % heads != 0)
    throw ConfigError("attention channels " + std::to_string(c) + " not divisible by " +
                      std::to_string(heads) + " heads");
  const std::size_t d = c / heads;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  Var q = linear(x, w.wq, w.bq);
  Var k = linear(x, w.wk, w.bk);
  Var v = linear(x, w.wv, w.bv);

  std::vector<Var> head_out;
  head_out.reserve(heads);
  if (attention_out) attention_out->clear();
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = slice_cols(q, h * d, d);
    Var kh = slice_cols(k, h * d, d);
    Var vh = slice_cols(v, h * d, d);
    Var weights = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt_d));
    if (attention_out) attention_out->push_back(weights.value().reshaped(weights.shape()));
    head_out.push_back(matmul_sorted(weights, vh));
  }
  Var attended = linear(concat_cols(head_out), w.wo, w.bo);
  Var x1 = layer_norm(add(x, attended), w.ln1_gain, w.ln1_bias);
  Var ff = linear(elu(linear(x1, w.ff1_w, w.ff1_b)), w.ff2_w, w.ff2_b);
  return layer_norm(add(x1, ff), w.ln2_gain, w.ln2_bias);
}

}  // namespace msmr::numeric
