#pragma once

#include <functional>

#include "replume/tape.hpp"
#include "replume/tensor.hpp"

namespace replume {

// Independent gradient oracle. `f` must build a scalar loss from `x` (and
// whatever else it closes over); it receives a tape for the single analytic
// pass and nullptr for the plain forward evaluations.
//
// Returns max over coordinates of
//   |analytic - central_difference| / max(1, |analytic|)
// with the differencing arithmetic done in 64-bit using the actually
// representable perturbed values, so float32 rounding of x +/- step does not
// pollute the estimate. Only forward values feed the difference quotient; the
// analytic path under test is never consulted for it.
double finite_difference_check(const std::function<Tensor(Tape*)>& f, Tensor x, double step);

}  // namespace replume
