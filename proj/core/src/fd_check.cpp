#include "replume/fd_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "replume/errors.hpp"

namespace replume {

double finite_difference_check(const std::function<Tensor(Tape*)>& f, Tensor x, double step) {
  if (!(step > 0.0)) throw NumericError("finite_difference_check: step must be positive");
  x.set_requires_grad(true);
  x.zero_grad();

  Tape tape;
  Tensor loss = f(&tape);
  if (loss.size() != 1) {
    throw ShapeError("finite_difference_check: f must be scalar-valued, got " +
                     shape_str(loss.shape()));
  }
  backward(loss, tape);
  const std::vector<float> analytic(x.grad().begin(), x.grad().end());
  tape.clear();

  double worst = 0.0;
  std::span<float> values = x.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float original = values[i];
    const float plus = static_cast<float>(static_cast<double>(original) + step);
    const float minus = static_cast<float>(static_cast<double>(original) - step);

    values[i] = plus;
    const double f_plus = static_cast<double>(f(nullptr).item());
    values[i] = minus;
    const double f_minus = static_cast<double>(f(nullptr).item());
    values[i] = original;

    const double denom = static_cast<double>(plus) - static_cast<double>(minus);
    const double estimate = (f_plus - f_minus) / denom;
    const double a = static_cast<double>(analytic[i]);
    const double err = std::abs(a - estimate) / std::max(1.0, std::abs(a));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace replume
