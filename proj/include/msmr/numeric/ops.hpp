#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "msmr/numeric/sparse.hpp"
#include "msmr/numeric/tape.hpp"

// Differentiable operations on tape variables. Matrices are rank-2 tensors
// in row-major order; "rows" are graph nodes or tokens and "columns" are
// channels throughout.
namespace msmr::numeric {

/// [m x k] * [k x n] -> [m x n]
Var matmul(Var a, Var b);
/// matmul whose inner sums add their terms in ascending order, so the result
/// does not depend on how the inner axis is ordered. Used where the inner
/// axis indexes tokens that may be permuted.
Var matmul_sorted(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
/// Adds a length-c vector to every row of an [n x c] matrix.
Var add_row_bias(Var x, Var bias);
Var reshape(Var x, Shape shape);

/// Exponential linear unit: x for x > 0, alpha * (exp(x) - 1) otherwise.
Var elu(Var x, double alpha = 1.0);

/// Standardizes each row of x over its channels, then applies gain and bias.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

/// Row softmax; the normalizer is summed in ascending order so each row's
/// result is independent of column order.
Var softmax_rows(Var x);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
Var concat_cols(std::span<const Var> parts);

/// Flat gather: out[i] = x[index[i]], or 0 where index[i] < 0.
/// The backward pass scatter-adds into x.
using GatherIndex = std::shared_ptr<const std::vector<std::ptrdiff_t>>;
Var gather(Var x, GatherIndex index, Shape out_shape);

/// Row gather for an [n x c] matrix with a table of `width` row ids per output
/// row (negative ids give zero rows): out is [table.size()/width x width*c].
GatherIndex row_gather_index(std::span<const std::ptrdiff_t> table, std::size_t width,
                             std::size_t rows, std::size_t channels);

/// m * x for a sparse m. The matrix must outlive the tape.
Var sparse_matmul(const CsrMatrix& m, Var x);

/// [n x c] -> [1 x c]
Var mean_rows(Var x);
/// Sum of all elements -> [1]
Var sum(Var x);
/// Weighted sum of all elements -> [1]; weights must match x's size.
Var dot_constant(Var x, std::span<const double> weights);

}  // namespace msmr::numeric
