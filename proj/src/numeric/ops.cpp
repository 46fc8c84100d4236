#include "msmr/numeric/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msmr/error.hpp"

namespace msmr::numeric {

namespace {

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2)
    throw ShapeError(std::string(op) + " expects a matrix, got shape " + to_string(t.shape()));
}

std::size_t vector_length(const Tensor& t) {
  if (t.rank() == 1) return t.dim(0);
  if (t.rank() == 2 && t.dim(0) == 1) return t.dim(1);
  throw ShapeError("expected a vector, got shape " + to_string(t.shape()));
}

Tape& tape_of(Var v) {
  if (!v.tape) throw Error("unbound variable");
  return *v.tape;
}

// c[m x n] += a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c[m x k] += g[m x n] * b[k x n]^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double* gi = g + i * n;
      const double* bp = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
      c[i * k + p] += acc;
    }
}

// c[k x n] += a[m x k]^T * g[m x n]
void gemm_tn(const double* a, const double* g, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * gi[j];
    }
  }
}

double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace

Var matmul_sorted(Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul_sorted");
  require_rank2(bv, "matmul_sorted");
  if (av.cols() != bv.rows())
    throw ShapeError("matmul dimension mismatch: " + to_string(av.shape()) + " x " +
                     to_string(bv.shape()));
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out({m, n});
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t p = 0; p < k; ++p) terms[p] = av(i, p) * bv(p, j);
      out(i, j) = sorted_sum(terms);
    }
  return tape.record(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, std::span<const double> g) {
    if (auto ga = t.grad_buffer(a); !ga.empty())
      gemm_nt(g.data(), t.value(b).values().data(), ga.data(), m, n, k);
    if (auto gb = t.grad_buffer(b); !gb.empty())
      gemm_tn(t.value(a).values().data(), g.data(), gb.data(), m, k, n);
  });
}

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  if (av.cols() != bv.rows())
    throw ShapeError("matmul dimension mismatch: " + to_string(av.shape()) + " x " +
                     to_string(bv.shape()));
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out({m, n});
  gemm_nn(av.values().data(), bv.values().data(), out.values().data(), m, k, n);
  return tape.record(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, std::span<const double> g) {
    if (auto ga = t.grad_buffer(a); !ga.empty())
      gemm_nt(g.data(), t.value(b).values().data(), ga.data(), m, n, k);
    if (auto gb = t.grad_buffer(b); !gb.empty())
      gemm_tn(t.value(a).values().data(), g.data(), gb.data(), m, k, n);
  });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  require_rank2(av, "transpose");
  const std::size_t m = av.rows(), n = av.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(j, i) = av(i, j);
  return tape_of(a).record(std::move(out), {a}, [a, m, n](Tape& t, std::span<const double> g) {
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  });
}

namespace {
Var add_scaled(Var a, Var b, double sign, const char* op) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape())
    throw ShapeError(std::string(op) + " shape mismatch: " + to_string(av.shape()) + " vs " +
                     to_string(bv.shape()));
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + sign * bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [a, b, sign](Tape& t, std::span<const double> g) {
    if (auto ga = t.grad_buffer(a); !ga.empty())
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (auto gb = t.grad_buffer(b); !gb.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign * g[i];
  });
}
}  // namespace

Var add(Var a, Var b) { return add_scaled(a, b, 1.0, "add"); }
Var sub(Var a, Var b) { return add_scaled(a, b, -1.0, "sub"); }

Var scale(Var a, double factor) {
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * av[i];
  return tape_of(a).record(std::move(out), {a}, [a, factor](Tape& t, std::span<const double> g) {
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var add_row_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  require_rank2(xv, "add_row_bias");
  const std::size_t n = xv.rows(), c = xv.cols();
  if (vector_length(bias.value()) != c)
    throw ShapeError("bias " + to_string(bias.shape()) + " does not match " + to_string(xv.shape()));
  const Tensor& bv = bias.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) = xv(i, j) + bv[j];
  return tape_of(x).record(std::move(out), {x, bias}, [x, bias, n, c](Tape& t, std::span<const double> g) {
    if (auto gx = t.grad_buffer(x); !gx.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    if (auto gb = t.grad_buffer(bias); !gb.empty())
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
  });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return tape_of(x).record(std::move(out), {x}, [x](Tape& t, std::span<const double> g) {
    auto gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var elu(Var x, double alpha) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = xv[i] > 0.0 ? xv[i] : alpha * std::expm1(xv[i]);
  return tape_of(x).record(std::move(out), {x}, [x, alpha](Tape& t, std::span<const double> g) {
    const Tensor& in = t.value(x);
    auto gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      gx[i] += g[i] * (in[i] > 0.0 ? 1.0 : alpha * std::exp(in[i]));
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  if (!(eps > 0.0)) throw ConfigError("layer_norm eps must be positive");
  const Tensor& xv = x.value();
  require_rank2(xv, "layer_norm");
  const std::size_t n = xv.rows(), c = xv.cols();
  if (c == 0) throw ShapeError("layer_norm over an empty channel axis");
  if (vector_length(gain.value()) != c || vector_length(bias.value()) != c)
    throw ShapeError("layer_norm affine parameters do not match " + to_string(xv.shape()));
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();

  Tensor out(xv.shape());
  std::vector<double> xhat(n * c), inv_std(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += xv(i, j);
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (xv(i, j) - mu) * (xv(i, j) - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (xv(i, j) - mu) * inv_std[i];
      out(i, j) = gv[j] * xhat[i * c + j] + bv[j];
    }
  }
  return tape_of(x).record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, n, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Tape& t, std::span<const double> g) {
        const Tensor& gv = t.value(gain);
        if (auto gg = t.grad_buffer(gain); !gg.empty())
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) gg[j] += g[i * c + j] * xhat[i * c + j];
        if (auto gb = t.grad_buffer(bias); !gb.empty())
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
        auto gx = t.grad_buffer(x);
        if (gx.empty()) return;
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t i = 0; i < n; ++i) {
          double mean_d = 0.0, mean_dx = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            const double d = g[i * c + j] * gv[j];
            mean_d += d;
            mean_dx += d * xhat[i * c + j];
          }
          mean_d *= inv_c;
          mean_dx *= inv_c;
          for (std::size_t j = 0; j < c; ++j) {
            const double d = g[i * c + j] * gv[j];
            gx[i * c + j] += inv_std[i] * (d - mean_d - xhat[i * c + j] * mean_dx);
          }
        }
      });
}

Var softmax_rows(Var x) {
  const Tensor& xv = x.value();
  require_rank2(xv, "softmax_rows");
  const std::size_t n = xv.rows(), c = xv.cols();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) {
    double mx = xv(i, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, xv(i, j));
    std::vector<double> terms(c);
    for (std::size_t j = 0; j < c; ++j) terms[j] = out(i, j) = std::exp(xv(i, j) - mx);
    const double z = sorted_sum(terms);
    for (std::size_t j = 0; j < c; ++j) out(i, j) /= z;
  }
  Tensor y = out.reshaped(out.shape());
  return tape_of(x).record(std::move(out), {x}, [x, n, c, y = std::move(y)](Tape& t, std::span<const double> g) {
    auto gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y(i, j);
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += y(i, j) * (g[i * c + j] - dot);
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  require_rank2(xv, "slice_cols");
  const std::size_t n = xv.rows(), c = xv.cols();
  if (count == 0 || begin + count > c)
    throw ShapeError("column slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + to_string(xv.shape()));
  Tensor out({n, count});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = xv(i, begin + j);
  return tape_of(x).record(std::move(out), {x}, [x, n, c, begin, count](Tape& t, std::span<const double> g) {
    auto gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < count; ++j) gx[i * c + begin + j] += g[i * count + j];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  const std::size_t n = parts[0].value().rows();
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_rank2(p.value(), "concat_cols");
    if (p.value().rows() != n) throw ShapeError("concat_cols row count mismatch");
    total += p.value().cols();
  }
  Tensor out({n, total});
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < pv.cols(); ++j) out(i, off + j) = pv(i, j);
    off += pv.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  Tape& tape = tape_of(parts[0]);
  return tape.record(std::move(out), parts, [inputs, n, total](Tape& t, std::span<const double> g) {
    std::size_t off = 0;
    for (const Var& p : inputs) {
      const std::size_t w = t.value(p).cols();
      if (auto gp = t.grad_buffer(p); !gp.empty())
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < w; ++j) gp[i * w + j] += g[i * total + off + j];
      off += w;
    }
  });
}

Var gather(Var x, GatherIndex index, Shape out_shape) {
  const Tensor& xv = x.value();
  if (!index || element_count(out_shape) != index->size())
    throw ShapeError("gather index does not fill shape " + to_string(out_shape));
  Tensor out(std::move(out_shape));
  const auto& idx = *index;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0) continue;
    if (static_cast<std::size_t>(idx[i]) >= xv.size())
      throw ShapeError("gather index " + std::to_string(idx[i]) + " outside source of " +
                       std::to_string(xv.size()) + " values");
    out[i] = xv[static_cast<std::size_t>(idx[i])];
  }
  return tape_of(x).record(std::move(out), {x}, [x, index](Tape& t, std::span<const double> g) {
    auto gx = t.grad_buffer(x);
    const auto& idx = *index;
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (idx[i] >= 0) gx[static_cast<std::size_t>(idx[i])] += g[i];
  });
}

GatherIndex row_gather_index(std::span<const std::ptrdiff_t> table, std::size_t width,
                             std::size_t rows, std::size_t channels) {
  if (width == 0 || table.size() % width != 0)
    throw ShapeError("row gather table size is not a multiple of its width");
  auto idx = std::make_shared<std::vector<std::ptrdiff_t>>();
  idx->reserve(table.size() * channels);
  for (std::ptrdiff_t r : table) {
    if (r >= static_cast<std::ptrdiff_t>(rows))
      throw ShapeError("row gather id " + std::to_string(r) + " outside " + std::to_string(rows) +
                       " rows");
    for (std::size_t c = 0; c < channels; ++c)
      idx->push_back(r < 0 ? -1 : r * static_cast<std::ptrdiff_t>(channels) + static_cast<std::ptrdiff_t>(c));
  }
  return idx;
}

Var sparse_matmul(const CsrMatrix& m, Var x) {
  const Tensor& xv = x.value();
  require_rank2(xv, "sparse_matmul");
  if (xv.rows() != m.cols())
    throw ShapeError("sparse_matmul dimension mismatch: " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " x " + to_string(xv.shape()));
  const std::size_t k = xv.cols();
  Tensor out({m.rows(), k});
  m.apply(xv.values(), k, out.values());
  const CsrMatrix* mp = &m;
  return tape_of(x).record(std::move(out), {x}, [x, mp, k](Tape& t, std::span<const double> g) {
    mp->apply_transposed_add(g, k, t.grad_buffer(x));
  });
}

Var mean_rows(Var x) {
  const Tensor& xv = x.value();
  require_rank2(xv, "mean_rows");
  const std::size_t n = xv.rows(), c = xv.cols();
  Tensor out({1, c});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += xv(i, j);
  for (std::size_t j = 0; j < c; ++j) out[j] /= static_cast<double>(n);
  return tape_of(x).record(std::move(out), {x}, [x, n, c](Tape& t, std::span<const double> g) {
    auto gx = t.grad_buffer(x);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j] * inv;
  });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double s = 0.0;
  for (double v : xv.values()) s += v;
  return tape_of(x).record(Tensor::scalar(s), {x}, [x](Tape& t, std::span<const double> g) {
    auto gx = t.grad_buffer(x);
    for (double& v : gx) v += g[0];
  });
}

Var dot_constant(Var x, std::span<const double> weights) {
  const Tensor& xv = x.value();
  if (weights.size() != xv.size()) throw ShapeError("dot_constant weight count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i] * weights[i];
  std::vector<double> w(weights.begin(), weights.end());
  return tape_of(x).record(Tensor::scalar(s), {x}, [x, w = std::move(w)](Tape& t, std::span<const double> g) {
    auto gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0] * w[i];
  });
}

}  // namespace msmr::numeric
