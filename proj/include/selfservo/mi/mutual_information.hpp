#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "selfservo/mi/digamma.hpp"
#include "selfservo/random.hpp"

namespace selfservo::mi {

/// Paired samples for mutual-information estimation, one sample per column.
/// x holds the displacement-like variable (the side that receives noise);
/// y holds the control-like variable, which is never perturbed.
template <typename Scalar>
struct SampleSet {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix x;  // dx x N
  Matrix y;  // dy x N
  Eigen::Index size() const { return x.cols(); }
};

using SampleSetd = SampleSet<double>;

struct MiConfig {
  int k = 3;                    // nearest-neighbor count
  double noise_variance = 0.0;  // squared pixels, applied to x samples
  std::uint64_t rng_seed = 0;
};

/// Adds i.i.d. zero-mean Gaussian noise of the given variance to every
/// coordinate of every x sample; y passes through untouched. The draw for
/// entry (i, j) depends only on (seed, i, j), so sweeping the variance at a
/// fixed seed rescales one shared noise field.
template <typename Scalar>
SampleSet<Scalar> add_gaussian_noise(SampleSet<Scalar> samples, Scalar variance,
                                     std::uint64_t seed) {
  if (!(variance >= Scalar(0))) {
    throw std::invalid_argument("add_gaussian_noise: variance must be >= 0");
  }
  if (variance == Scalar(0)) return samples;
  const Scalar sigma = std::sqrt(variance);
  for (Eigen::Index j = 0; j < samples.x.cols(); ++j) {
    for (Eigen::Index i = 0; i < samples.x.rows(); ++i) {
      const std::uint64_t h =
          rng::mix(seed, rng::stream::kMiNoise, static_cast<std::uint64_t>(i),
                   static_cast<std::uint64_t>(j));
      samples.x(i, j) += sigma * static_cast<Scalar>(rng::normal(h));
    }
  }
  return samples;
}

namespace detail {

// Scales each coordinate (row) to unit standard deviation. Rows that are
// degenerate relative to the largest one are left alone so they stay
// negligible under the max-norm instead of being blown up to noise.
template <typename Matrix>
void standardize_rows(Matrix& m) {
  using Scalar = typename Matrix::Scalar;
  const Eigen::Index n = m.cols();
  if (n < 2) return;
  std::vector<Scalar> sd(static_cast<std::size_t>(m.rows()));
  Scalar sd_max(0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Scalar mean = m.row(i).mean();
    sd[static_cast<std::size_t>(i)] =
        std::sqrt((m.row(i).array() - mean).square().mean());
    sd_max = std::max(sd_max, sd[static_cast<std::size_t>(i)]);
  }
  if (sd_max <= Scalar(0)) return;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Scalar s = sd[static_cast<std::size_t>(i)];
    if (s > Scalar(1e-9) * sd_max) m.row(i) /= s;
  }
}

}  // namespace detail

/// KSG mutual-information estimate (variant 1) in nats:
///   I = psi(k) + psi(N) - < psi(n_x + 1) + psi(n_y + 1) >,
/// with max-norm balls in the joint space and strict-inequality marginal
/// counts. Coordinates of both marginals are standardized internally so the
/// joint max-norm treats them on a common scale. When noise_variance > 0 the
/// configured Gaussian noise is applied to x before the search; at zero
/// variance a deterministic sub-resolution jitter (1e-10 of a unit) breaks
/// exact ties from quantized data. The raw value may be slightly negative.
template <typename Scalar>
Scalar ksg_mi(const SampleSet<Scalar>& samples, const MiConfig& config = MiConfig{}) {
  using Matrix = typename SampleSet<Scalar>::Matrix;
  const Eigen::Index n = samples.size();
  if (samples.y.cols() != n) {
    throw std::invalid_argument("ksg_mi: x and y sample counts differ");
  }
  if (config.k < 1) throw std::invalid_argument("ksg_mi: k must be positive");
  if (n <= config.k) {
    throw std::invalid_argument("ksg_mi: need N > k samples");
  }
  if (!samples.x.allFinite() || !samples.y.allFinite()) {
    throw std::invalid_argument("ksg_mi: samples must be finite");
  }

  Matrix x;
  Matrix y = samples.y;
  if (config.noise_variance > 0) {
    x = add_gaussian_noise(samples, static_cast<Scalar>(config.noise_variance),
                           config.rng_seed)
            .x;
  } else {
    x = samples.x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const std::uint64_t h = rng::mix(config.rng_seed, rng::stream::kMiJitter,
                                         static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(j));
        x(i, j) += Scalar(1e-10) * Scalar(2.0 * rng::u01(h) - 1.0);
      }
    }
  }
  detail::standardize_rows(x);
  detail::standardize_rows(y);

  const int k = config.k;
  const auto nn = static_cast<std::size_t>(n);
  std::vector<Scalar> dxm(nn), dym(nn), joint(nn), scratch(nn);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar dx = (x.col(i) - x.col(j)).template lpNorm<Eigen::Infinity>();
      const Scalar dy = (y.col(i) - y.col(j)).template lpNorm<Eigen::Infinity>();
      dxm[static_cast<std::size_t>(j)] = dx;
      dym[static_cast<std::size_t>(j)] = dy;
      joint[static_cast<std::size_t>(j)] = std::max(dx, dy);
    }
    joint[static_cast<std::size_t>(i)] = std::numeric_limits<Scalar>::infinity();
    scratch = joint;
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
    const Scalar eps = scratch[static_cast<std::size_t>(k - 1)];

    long nx = -1, ny = -1;  // self has zero marginal distance; discount it
    for (std::size_t j = 0; j < nn; ++j) {
      if (dxm[j] < eps) ++nx;
      if (dym[j] < eps) ++ny;
    }
    acc += digamma<double>(static_cast<double>(nx + 1)) +
           digamma<double>(static_cast<double>(ny + 1));
  }
  return static_cast<Scalar>(digamma<double>(k) + digamma<double>(static_cast<double>(n)) -
                             acc / static_cast<double>(n));
}

}  // namespace selfservo::mi
