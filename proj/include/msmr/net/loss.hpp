#pragma once

#include "msmr/numeric/tape.hpp"

namespace msmr::net {

/// (1/M) * sum_j |pred_j - gt_j|_1 over [M x 3] vertex arrays. The gradient
/// uses sign(pred - gt), which is 0 at a zero residual.
numeric::Var l1_vertex_loss(numeric::Var pred, const numeric::Tensor& gt);

}  // namespace msmr::net
