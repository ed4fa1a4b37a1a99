#include "replume/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "replume/errors.hpp"

#ifdef REPLUME_USE_OPENBLAS
#include <cblas.h>
extern "C" void openblas_set_num_threads(int);
#endif

namespace replume::ops {

namespace {

using detail::ensure_grad;
using detail::TensorImpl;
using Impl = std::shared_ptr<detail::TensorImpl>;

bool track(const Tape* tape, std::initializer_list<const Tensor*> inputs) {
  if (tape == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// C[m x n] (+)= op(A) * op(B) with row-major storage.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta,
          float* c, std::size_t ldc) {
#ifdef REPLUME_USE_OPENBLAS
  // One BLAS thread: keeps results bitwise reproducible run to run and avoids
  // oversubscription when the sweep runs combinations in parallel.
  static const bool pinned = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)pinned;
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
              static_cast<int>(k), 1.0f, a, static_cast<int>(lda), b, static_cast<int>(ldb),
              beta, c, static_cast<int>(ldc));
#else
  if (beta == 0.0f) {
    for (std::size_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, 0.0f);
  }
  auto at_a = [&](std::size_t i, std::size_t p) { return trans_a ? a[p * lda + i] : a[i * lda + p]; };
  auto at_b = [&](std::size_t p, std::size_t j) { return trans_b ? b[j * ldb + p] : b[p * ldb + j]; };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const float av = at_a(i, p);
      if (av == 0.0f) continue;
      float* crow = c + i * ldc;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * at_b(p, j);
    }
  }
#endif
}

constexpr float kRoot2OverPi = 0.7978845608028654f;
constexpr float kGeluCubic = 0.044715f;

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " differ");
  }
}

}  // namespace

Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul needs rank-2 tensors, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: inner dimensions disagree: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::zeros({m, n});
  gemm(false, false, m, n, k, a.data().data(), k, b.data().data(), n, 0.0f, out.data().data(), n);
  if (track(tape, {&a, &b})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), bi = b.impl(), oi = out.impl();
    tape->record({{ai, bi},
                  oi,
                  [ai, bi, oi, m, k, n] {
                    if (ai->requires_grad) {
                      ensure_grad(*ai);  // dA += dC * B^T
                      gemm(false, true, m, k, n, oi->grad.data(), n, bi->data.data(), n, 1.0f,
                           ai->grad.data(), k);
                    }
                    if (bi->requires_grad) {
                      ensure_grad(*bi);  // dB += A^T * dC
                      gemm(true, false, k, n, m, ai->data.data(), k, oi->grad.data(), n, 1.0f,
                           bi->grad.data(), n);
                    }
                  }});
  }
  return out;
}

Tensor transpose(Tape* tape, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose needs a rank-2 tensor, got " + shape_str(a.shape()));
  const std::size_t r = a.dim(0), c = a.dim(1);
  Tensor out = Tensor::zeros({c, r});
  const float* src = a.data().data();
  float* dst = out.data().data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) dst[j * r + i] = src[i * c + j];
  }
  if (track(tape, {&a})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), oi = out.impl();
    tape->record({{ai},
                  oi,
                  [ai, oi, r, c] {
                    if (!ai->requires_grad) return;
                    ensure_grad(*ai);
                    for (std::size_t j = 0; j < c; ++j) {
                      for (std::size_t i = 0; i < r; ++i) {
                        ai->grad[i * c + j] += oi->grad[j * r + i];
                      }
                    }
                  }});
  }
  return out;
}

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.size();
  const float* pa = a.data().data();
  const float* pb = b.data().data();
  float* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
  if (track(tape, {&a, &b})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), bi = b.impl(), oi = out.impl();
    tape->record({{ai, bi},
                  oi,
                  [ai, bi, oi, n] {
                    for (const Impl& in : {ai, bi}) {
                      if (!in->requires_grad) continue;
                      ensure_grad(*in);
                      for (std::size_t i = 0; i < n; ++i) in->grad[i] += oi->grad[i];
                    }
                  }});
  }
  return out;
}

Tensor add_rowvec(Tape* tape, const Tensor& a, const Tensor& v) {
  if (v.rank() != 1) throw ShapeError("add_rowvec: vector must be rank 1, got " + shape_str(v.shape()));
  const std::size_t n = v.dim(0);
  if (a.shape().back() != n) {
    throw ShapeError("add_rowvec: last dimension of " + shape_str(a.shape()) +
                     " does not match vector " + shape_str(v.shape()));
  }
  const std::size_t rows = a.size() / n;
  Tensor out = Tensor::zeros(a.shape());
  const float* pa = a.data().data();
  const float* pv = v.data().data();
  float* po = out.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) po[r * n + j] = pa[r * n + j] + pv[j];
  }
  if (track(tape, {&a, &v})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), vi = v.impl(), oi = out.impl();
    tape->record({{ai, vi},
                  oi,
                  [ai, vi, oi, rows, n] {
                    if (ai->requires_grad) {
                      ensure_grad(*ai);
                      for (std::size_t i = 0; i < rows * n; ++i) ai->grad[i] += oi->grad[i];
                    }
                    if (vi->requires_grad) {
                      ensure_grad(*vi);
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t j = 0; j < n; ++j) vi->grad[j] += oi->grad[r * n + j];
                      }
                    }
                  }});
  }
  return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.size();
  const float* pa = a.data().data();
  const float* pb = b.data().data();
  float* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
  if (track(tape, {&a, &b})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), bi = b.impl(), oi = out.impl();
    tape->record({{ai, bi},
                  oi,
                  [ai, bi, oi, n] {
                    if (ai->requires_grad) {
                      ensure_grad(*ai);
                      for (std::size_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i] * bi->data[i];
                    }
                    if (bi->requires_grad) {
                      ensure_grad(*bi);
                      for (std::size_t i = 0; i < n; ++i) bi->grad[i] += oi->grad[i] * ai->data[i];
                    }
                  }});
  }
  return out;
}

Tensor scale(Tape* tape, const Tensor& a, float factor) {
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.size();
  const float* pa = a.data().data();
  float* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * factor;
  if (track(tape, {&a})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), oi = out.impl();
    tape->record({{ai},
                  oi,
                  [ai, oi, n, factor] {
                    if (!ai->requires_grad) return;
                    ensure_grad(*ai);
                    for (std::size_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i] * factor;
                  }});
  }
  return out;
}

Tensor gelu(Tape* tape, const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.size();
  const float* pa = a.data().data();
  float* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const float x = pa[i];
    const float t = std::tanh(kRoot2OverPi * (x + kGeluCubic * x * x * x));
    po[i] = 0.5f * x * (1.0f + t);
  }
  if (track(tape, {&a})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), oi = out.impl();
    tape->record({{ai},
                  oi,
                  [ai, oi, n] {
                    if (!ai->requires_grad) return;
                    ensure_grad(*ai);
                    for (std::size_t i = 0; i < n; ++i) {
                      const float x = ai->data[i];
                      const float u = kRoot2OverPi * (x + kGeluCubic * x * x * x);
                      const float t = std::tanh(u);
                      const float du = kRoot2OverPi * (1.0f + 3.0f * kGeluCubic * x * x);
                      const float dydx = 0.5f * (1.0f + t) + 0.5f * x * (1.0f - t * t) * du;
                      ai->grad[i] += oi->grad[i] * dydx;
                    }
                  }});
  }
  return out;
}

Tensor softmax(Tape* tape, const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ShapeError("softmax axis " + std::to_string(axis) + " out of range for " +
                     shape_str(x.shape()));
  }
  for (float v : x.data()) {
    if (!std::isfinite(v)) throw NumericError("softmax input contains NaN or infinity");
  }
  const Shape& shape = x.shape();
  const std::size_t n = shape[axis];
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
  const std::size_t outer = x.size() / (n * inner);

  Tensor out = Tensor::zeros(shape);
  const float* px = x.data().data();
  float* po = out.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * n * inner + i;
      float maxv = px[base];
      for (std::size_t j = 1; j < n; ++j) maxv = std::max(maxv, px[base + j * inner]);
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const float e = std::exp(px[base + j * inner] - maxv);
        po[base + j * inner] = e;
        denom += e;
      }
      const float inv = static_cast<float>(1.0 / denom);
      for (std::size_t j = 0; j < n; ++j) po[base + j * inner] *= inv;
    }
  }
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl(), oi = out.impl();
    tape->record({{xi},
                  oi,
                  [xi, oi, outer, n, inner] {
                    if (!xi->requires_grad) return;
                    ensure_grad(*xi);
                    for (std::size_t o = 0; o < outer; ++o) {
                      for (std::size_t i = 0; i < inner; ++i) {
                        const std::size_t base = o * n * inner + i;
                        double dot = 0.0;
                        for (std::size_t j = 0; j < n; ++j) {
                          const std::size_t k = base + j * inner;
                          dot += static_cast<double>(oi->grad[k]) * oi->data[k];
                        }
                        for (std::size_t j = 0; j < n; ++j) {
                          const std::size_t k = base + j * inner;
                          xi->grad[k] += oi->data[k] * (oi->grad[k] - static_cast<float>(dot));
                        }
                      }
                    }
                  }});
  }
  return out;
}

Tensor layer_norm(Tape* tape, const Tensor& x, const Tensor& gain, const Tensor& bias,
                  float eps) {
  if (gain.rank() != 1 || bias.rank() != 1) {
    throw ShapeError("layer_norm: gain/bias must be rank 1");
  }
  const std::size_t d = x.shape().back();
  if (gain.dim(0) != d || bias.dim(0) != d) {
    throw ShapeError("layer_norm: gain " + shape_str(gain.shape()) + " / bias " +
                     shape_str(bias.shape()) + " do not match last dimension of " +
                     shape_str(x.shape()));
  }
  if (eps <= 0.0f) throw NumericError("layer_norm: eps must be positive");
  const std::size_t rows = x.size() / d;

  Tensor out = Tensor::zeros(x.shape());
  std::vector<float> normalized(x.size());
  std::vector<float> rstd(rows);
  const float* px = x.data().data();
  const float* pg = gain.data().data();
  const float* pb = bias.data().data();
  float* po = out.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = px + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const float r_std = static_cast<float>(1.0 / std::sqrt(var + eps));
    rstd[r] = r_std;
    for (std::size_t j = 0; j < d; ++j) {
      const float xhat = (row[j] - static_cast<float>(mean)) * r_std;
      normalized[r * d + j] = xhat;
      po[r * d + j] = pg[j] * xhat + pb[j];
    }
  }
  if (track(tape, {&x, &gain, &bias})) {
    out.set_requires_grad(true);
    Impl xi = x.impl(), gi = gain.impl(), bi = bias.impl(), oi = out.impl();
    tape->record(
        {{xi, gi, bi},
         oi,
         [xi, gi, bi, oi, rows, d, normalized = std::move(normalized), rstd = std::move(rstd)] {
           for (std::size_t r = 0; r < rows; ++r) {
             const float* dy = oi->grad.data() + r * d;
             const float* xhat = normalized.data() + r * d;
             if (gi->requires_grad) {
               ensure_grad(*gi);
               for (std::size_t j = 0; j < d; ++j) gi->grad[j] += dy[j] * xhat[j];
             }
             if (bi->requires_grad) {
               ensure_grad(*bi);
               for (std::size_t j = 0; j < d; ++j) bi->grad[j] += dy[j];
             }
             if (xi->requires_grad) {
               ensure_grad(*xi);
               double mean_dyg = 0.0, mean_dyg_xhat = 0.0;
               for (std::size_t j = 0; j < d; ++j) {
                 const double dyg = static_cast<double>(dy[j]) * gi->data[j];
                 mean_dyg += dyg;
                 mean_dyg_xhat += dyg * xhat[j];
               }
               mean_dyg /= static_cast<double>(d);
               mean_dyg_xhat /= static_cast<double>(d);
               for (std::size_t j = 0; j < d; ++j) {
                 const double dyg = static_cast<double>(dy[j]) * gi->data[j];
                 xi->grad[r * d + j] += static_cast<float>(
                     rstd[r] * (dyg - mean_dyg - xhat[j] * mean_dyg_xhat));
               }
             }
           }
         }});
  }
  return out;
}

Tensor gather_rows(Tape* tape, const Tensor& table, std::vector<std::size_t> rows) {
  if (table.rank() != 2) {
    throw ShapeError("gather_rows needs a rank-2 table, got " + shape_str(table.shape()));
  }
  if (rows.empty()) throw ShapeError("gather_rows: empty row list");
  const std::size_t r_count = table.dim(0), d = table.dim(1);
  for (std::size_t id : rows) {
    if (id >= r_count) {
      throw IndexError("gather_rows: row id " + std::to_string(id) + " out of range for table " +
                       shape_str(table.shape()));
    }
  }
  Tensor out = Tensor::zeros({rows.size(), d});
  const float* pt = table.data().data();
  float* po = out.data().data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(pt + rows[i] * d, pt + (rows[i] + 1) * d, po + i * d);
  }
  if (track(tape, {&table})) {
    out.set_requires_grad(true);
    Impl ti = table.impl(), oi = out.impl();
    tape->record({{ti},
                  oi,
                  [ti, oi, d, rows = std::move(rows)] {
                    if (!ti->requires_grad) return;
                    ensure_grad(*ti);
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                      for (std::size_t j = 0; j < d; ++j) {
                        ti->grad[rows[i] * d + j] += oi->grad[i * d + j];
                      }
                    }
                  }});
  }
  return out;
}

Tensor concat_rows(Tape* tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no parts");
  const std::size_t cols = parts[0].rank() == 2 ? parts[0].dim(1) : 0;
  std::size_t total_rows = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != 2 || p.dim(1) != cols) {
      throw ShapeError("concat_rows: part shape " + shape_str(p.shape()) +
                       " incompatible with column count " + std::to_string(cols));
    }
    total_rows += p.dim(0);
  }
  Tensor out = Tensor::zeros({total_rows, cols});
  float* po = out.data().data();
  std::size_t row = 0;
  bool needs_grad = false;
  std::vector<Impl> impls;
  impls.reserve(parts.size());
  for (const Tensor& p : parts) {
    std::copy(p.data().begin(), p.data().end(), po + row * cols);
    row += p.dim(0);
    needs_grad = needs_grad || p.requires_grad();
    impls.push_back(p.impl());
  }
  if (tape != nullptr && needs_grad) {
    out.set_requires_grad(true);
    Impl oi = out.impl();
    tape->record({impls,
                  oi,
                  [impls, oi, cols] {
                    std::size_t row = 0;
                    for (const Impl& in : impls) {
                      const std::size_t r = in->shape[0];
                      if (in->requires_grad) {
                        ensure_grad(*in);
                        for (std::size_t i = 0; i < r * cols; ++i) {
                          in->grad[i] += oi->grad[row * cols + i];
                        }
                      }
                      row += r;
                    }
                  }});
  }
  return out;
}

Tensor slice_cols(Tape* tape, const Tensor& a, std::size_t col0, std::size_t ncols) {
  if (a.rank() != 2) throw ShapeError("slice_cols needs a rank-2 tensor, got " + shape_str(a.shape()));
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  if (ncols == 0 || col0 + ncols > cols) {
    throw ShapeError("slice_cols: columns [" + std::to_string(col0) + ", " +
                     std::to_string(col0 + ncols) + ") out of range for " + shape_str(a.shape()));
  }
  Tensor out = Tensor::zeros({rows, ncols});
  const float* pa = a.data().data();
  float* po = out.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(pa + r * cols + col0, pa + r * cols + col0 + ncols, po + r * ncols);
  }
  if (track(tape, {&a})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), oi = out.impl();
    tape->record({{ai},
                  oi,
                  [ai, oi, rows, cols, col0, ncols] {
                    if (!ai->requires_grad) return;
                    ensure_grad(*ai);
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t j = 0; j < ncols; ++j) {
                        ai->grad[r * cols + col0 + j] += oi->grad[r * ncols + j];
                      }
                    }
                  }});
  }
  return out;
}

Tensor concat_cols(Tape* tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no parts");
  const std::size_t rows = parts[0].rank() == 2 ? parts[0].dim(0) : 0;
  std::size_t total_cols = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != 2 || p.dim(0) != rows) {
      throw ShapeError("concat_cols: part shape " + shape_str(p.shape()) +
                       " incompatible with row count " + std::to_string(rows));
    }
    total_cols += p.dim(1);
  }
  Tensor out = Tensor::zeros({rows, total_cols});
  float* po = out.data().data();
  std::size_t col = 0;
  bool needs_grad = false;
  std::vector<Impl> impls;
  impls.reserve(parts.size());
  for (const Tensor& p : parts) {
    const std::size_t pc = p.dim(1);
    const float* pp = p.data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(pp + r * pc, pp + (r + 1) * pc, po + r * total_cols + col);
    }
    col += pc;
    needs_grad = needs_grad || p.requires_grad();
    impls.push_back(p.impl());
  }
  if (tape != nullptr && needs_grad) {
    out.set_requires_grad(true);
    Impl oi = out.impl();
    tape->record({impls,
                  oi,
                  [impls, oi, rows, total_cols] {
                    std::size_t col = 0;
                    for (const Impl& in : impls) {
                      const std::size_t pc = in->shape[1];
                      if (in->requires_grad) {
                        ensure_grad(*in);
                        for (std::size_t r = 0; r < rows; ++r) {
                          for (std::size_t j = 0; j < pc; ++j) {
                            in->grad[r * pc + j] += oi->grad[r * total_cols + col + j];
                          }
                        }
                      }
                      col += pc;
                    }
                  }});
  }
  return out;
}

Tensor dropout(Tape* tape, const Tensor& a, float rate, std::mt19937_64& rng) {
  if (rate < 0.0f || rate >= 1.0f) {
    throw NumericError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (rate == 0.0f) return a;
  const std::size_t n = a.size();
  std::vector<float> mask(n);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  const float keep_scale = 1.0f / (1.0f - rate);
  for (std::size_t i = 0; i < n; ++i) mask[i] = unit(rng) < rate ? 0.0f : keep_scale;

  Tensor out = Tensor::zeros(a.shape());
  const float* pa = a.data().data();
  float* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * mask[i];
  if (track(tape, {&a})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), oi = out.impl();
    tape->record({{ai},
                  oi,
                  [ai, oi, n, mask = std::move(mask)] {
                    if (!ai->requires_grad) return;
                    ensure_grad(*ai);
                    for (std::size_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i] * mask[i];
                  }});
  }
  return out;
}

Tensor sum(Tape* tape, const Tensor& a) {
  double total = 0.0;
  for (float v : a.data()) total += v;
  Tensor out = Tensor::scalar(static_cast<float>(total));
  if (track(tape, {&a})) {
    out.set_requires_grad(true);
    Impl ai = a.impl(), oi = out.impl();
    tape->record({{ai},
                  oi,
                  [ai, oi] {
                    if (!ai->requires_grad) return;
                    ensure_grad(*ai);
                    const float g = oi->grad[0];
                    for (float& v : ai->grad) v += g;
                  }});
  }
  return out;
}

Tensor weighted_cross_entropy(Tape* tape, const Tensor& logits,
                              std::span<const std::size_t> targets, const Tensor& weights) {
  if (logits.rank() != 2) {
    throw ShapeError("weighted_cross_entropy: logits must be rank 2, got " +
                     shape_str(logits.shape()));
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (targets.size() != batch) {
    throw ShapeError("weighted_cross_entropy: " + std::to_string(targets.size()) +
                     " targets for batch of " + std::to_string(batch));
  }
  if (weights.rank() != 1 || weights.dim(0) != classes) {
    throw ShapeError("weighted_cross_entropy: weights " + shape_str(weights.shape()) +
                     " do not match " + std::to_string(classes) + " classes");
  }
  for (std::size_t i = 0; i < batch; ++i) {
    if (targets[i] >= classes) {
      throw LabelError("weighted_cross_entropy: target " + std::to_string(targets[i]) +
                       " at row " + std::to_string(i) + " out of range for " +
                       std::to_string(classes) + " classes");
    }
  }
  for (float w : weights.data()) {
    if (!(w > 0.0f)) throw NumericError("weighted_cross_entropy: weights must be positive");
  }

  const float* pl = logits.data().data();
  const float* pw = weights.data().data();
  std::vector<float> lse(batch);
  double weight_sum = 0.0;
  double loss_acc = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const float* row = pl + i * classes;
    float maxv = row[0];
    for (std::size_t j = 1; j < classes; ++j) maxv = std::max(maxv, row[j]);
    double expsum = 0.0;
    for (std::size_t j = 0; j < classes; ++j) expsum += std::exp(static_cast<double>(row[j]) - maxv);
    const double row_lse = maxv + std::log(expsum);
    lse[i] = static_cast<float>(row_lse);
    const double w = pw[targets[i]];
    loss_acc += w * (row_lse - row[targets[i]]);
    weight_sum += w;
  }
  Tensor out = Tensor::scalar(static_cast<float>(loss_acc / weight_sum));
  if (track(tape, {&logits})) {
    out.set_requires_grad(true);
    Impl li = logits.impl(), oi = out.impl();
    std::vector<std::size_t> tgt(targets.begin(), targets.end());
    std::vector<float> w(weights.data().begin(), weights.data().end());
    tape->record(
        {{li},
         oi,
         [li, oi, batch, classes, tgt = std::move(tgt), w = std::move(w), lse = std::move(lse),
          weight_sum] {
           if (!li->requires_grad) return;
           ensure_grad(*li);
           const float g = oi->grad[0];
           for (std::size_t i = 0; i < batch; ++i) {
             const float* row = li->data.data() + i * classes;
             const float coeff = g * static_cast<float>(w[tgt[i]] / weight_sum);
             for (std::size_t j = 0; j < classes; ++j) {
               const float p = std::exp(row[j] - lse[i]);
               const float indicator = (j == tgt[i]) ? 1.0f : 0.0f;
               li->grad[i * classes + j] += coeff * (p - indicator);
             }
           }
         }});
  }
  return out;
}

}  // namespace replume::ops
