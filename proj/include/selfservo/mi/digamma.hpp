#pragma once

#include <cmath>
#include <stdexcept>

namespace selfservo::mi {

/// Digamma psi(x) for x > 0. The recurrence psi(x) = psi(x+1) - 1/x shifts
/// the argument above 10, where the asymptotic series in 1/x^2 converges
/// fast; absolute error stays below 1e-12 down to x = 1e-3.
template <typename Scalar>
Scalar digamma(Scalar x) {
  if (!(x > Scalar(0))) {
    throw std::domain_error("digamma: argument must be positive");
  }
  Scalar acc(0);
  while (x < Scalar(10)) {
    acc -= Scalar(1) / x;
    x += Scalar(1);
  }
  const Scalar inv = Scalar(1) / x;
  const Scalar inv2 = inv * inv;
  // ln x - 1/(2x) - sum_{n>=1} B_{2n} / (2n x^{2n})
  const Scalar tail =
      inv2 * (Scalar(1) / Scalar(12) -
      inv2 * (Scalar(1) / Scalar(120) -
      inv2 * (Scalar(1) / Scalar(252) -
      inv2 * (Scalar(1) / Scalar(240) -
      inv2 * (Scalar(1) / Scalar(132))))));
  return acc + std::log(x) - inv / Scalar(2) - tail;
}

}  // namespace selfservo::mi
