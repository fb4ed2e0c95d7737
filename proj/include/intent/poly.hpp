#pragma once

#include <Eigen/Core>
#include <array>
#include <span>

#include "intent/predictor.hpp"
#include "intent/trajectory.hpp"

namespace intent {

inline constexpr int kDefaultPolyDegree = 8;

/// Per-channel least-squares polynomial over a history window.
///
/// Time is normalised so the history spans tau in [-1, 0] (tau = 0 at the
/// newest sample, one step = 1 / (history_len - 1)). Coefficients are in the
/// Chebyshev basis of x = 2 tau + 1, which keeps the design matrix well
/// conditioned; evaluation works for any tau, including tau > 0.
struct PolyFit {
  int degree = kDefaultPolyDegree;
  std::size_t history_len = 0;
  std::array<Eigen::VectorXd, kChannels> coeffs;

  /// Value of `channel` at `offset` steps from the newest history sample
  /// (negative: inside the history, positive: extrapolated).
  double value_at_step(std::size_t channel, double offset) const;
};

/// Least squares by column-pivoted Householder QR. Throws kNumeric on a
/// non-finite history or a rank-deficient design.
PolyFit fit_poly(std::span<const TrajectorySample> history, int degree = kDefaultPolyDegree);

/// The fitted polynomials at steps +1 .. +horizon, in physical units. The
/// history is assumed to have been sampled at `rate_hz`.
Forecast extrapolate(const PolyFit& fit, std::size_t horizon, double rate_hz);

/// Chebyshev T_0..T_degree at x, by recurrence.
void chebyshev_basis(double x, std::span<double> out);

}  // namespace intent
