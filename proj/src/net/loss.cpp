#include "msmr/net/loss.hpp"

#include <cmath>

#include "msmr/error.hpp"

namespace msmr::net {

using numeric::Tensor;
using numeric::Var;

Var l1_vertex_loss(Var pred, const Tensor& gt) {
  const Tensor& p = pred.value();
  if (p.shape() != gt.shape() || p.rank() != 2 || p.cols() != 3)
    throw ShapeError("l1 loss needs matching [M x 3] arrays, got " + numeric::to_string(p.shape()) + " and " +
                     numeric::to_string(gt.shape()));
  const double m = static_cast<double>(p.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - gt[i]);
  std::vector<double> sign(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - gt[i];
    sign[i] = (d > 0.0) - (d < 0.0);
  }
  return pred.tape->record(Tensor::scalar(total / m), {pred},
                           [pred, sign = std::move(sign), m](numeric::Tape& t, std::span<const double> g) {
                             auto gp = t.grad_buffer(pred);
                             for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[0] * sign[i] / m;
                           });
}

}  // namespace msmr::net
