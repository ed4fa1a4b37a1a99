#pragma once

#include <random>
#include <span>
#include <vector>

#include "replume/tape.hpp"
#include "replume/tensor.hpp"

namespace replume::ops {

// Every op takes the tape first; pass nullptr for a plain (non-recorded)
// forward pass. An op records a backward rule only when a tape is given and
// some input requires a gradient; the output's requires_grad is set
// accordingly so downstream ops keep recording.

// [m x k] * [k x n] -> [m x n]. Throws ShapeError naming both shapes on an
// inner-dimension mismatch.
Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b);

// 2-d transpose (copying).
Tensor transpose(Tape* tape, const Tensor& a);

// Elementwise sum of two tensors with identical shapes.
Tensor add(Tape* tape, const Tensor& a, const Tensor& b);

// Adds a length-n vector to every row of a [... x n] tensor (bias add).
Tensor add_rowvec(Tape* tape, const Tensor& a, const Tensor& v);

// Elementwise product of two tensors with identical shapes.
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b);

Tensor scale(Tape* tape, const Tensor& a, float factor);

// Gaussian-error linear unit, tanh approximation:
//   gelu(x) = 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
// The approximation differs from exact erf GELU by less than 1e-3 everywhere.
Tensor gelu(Tape* tape, const Tensor& a);

// Softmax along `axis`, computed with max subtraction. Throws NumericError if
// the input contains NaN or infinity.
Tensor softmax(Tape* tape, const Tensor& x, std::size_t axis);

// Normalizes each length-d row (last axis) to zero mean / unit variance
// (biased variance, eps inside the square root), then applies gain and bias.
Tensor layer_norm(Tape* tape, const Tensor& x, const Tensor& gain, const Tensor& bias,
                  float eps);

// out[i] = table[rows[i]] for a [R x d] table; duplicate rows accumulate
// gradient. Throws IndexError on an out-of-range row id.
Tensor gather_rows(Tape* tape, const Tensor& table, std::vector<std::size_t> rows);

// Stacks 2-d blocks with equal column counts along axis 0.
Tensor concat_rows(Tape* tape, std::span<const Tensor> parts);

// Copies columns [col0, col0 + ncols) of a 2-d tensor.
Tensor slice_cols(Tape* tape, const Tensor& a, std::size_t col0, std::size_t ncols);

// Concatenates 2-d blocks with equal row counts along axis 1.
Tensor concat_cols(Tape* tape, std::span<const Tensor> parts);

// Inverted dropout: keeps each element with probability 1-rate and rescales by
// 1/(1-rate). rate == 0 returns the input unchanged. Callers gate this on
// training mode; evaluation never calls it.
Tensor dropout(Tape* tape, const Tensor& a, float rate, std::mt19937_64& rng);

// Sum of all elements, as a scalar tensor.
Tensor sum(Tape* tape, const Tensor& a);

// Class-weighted cross entropy from logits:
//   loss = sum_i w[t_i] * (-log softmax(logits_i)[t_i]) / sum_i w[t_i].
// Normalizing by the sum of the applied weights (not the batch size) keeps the
// expected per-class gradient magnitude balanced. Differentiable with respect
// to the logits; the weights are treated as constants. Throws LabelError on an
// out-of-range target.
Tensor weighted_cross_entropy(Tape* tape, const Tensor& logits,
                              std::span<const std::size_t> targets, const Tensor& weights);

}  // namespace replume::ops
