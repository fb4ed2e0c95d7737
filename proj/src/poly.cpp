#include "intent/poly.hpp"

#include <Eigen/QR>
#include <cmath>
#include <vector>

#include "intent/error.hpp"

namespace intent {

namespace {

double step_to_x(double offset, std::size_t history_len) {
  const double tau = offset / static_cast<double>(history_len - 1);
  return 2.0 * tau + 1.0;
}

// Clenshaw summation of sum_m c_m T_m(x).
double clenshaw(const Eigen::VectorXd& c, double x) {
  double b1 = 0.0;
  double b2 = 0.0;
  for (Eigen::Index m = c.size() - 1; m >= 1; --m) {
    const double b0 = 2.0 * x * b1 - b2 + c(m);
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c(0);
}

}  // namespace

void chebyshev_basis(double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = x;
  for (std::size_t m = 2; m < out.size(); ++m) out[m] = 2.0 * x * out[m - 1] - out[m - 2];
}

double PolyFit::value_at_step(std::size_t channel, double offset) const {
  return clenshaw(coeffs[channel], step_to_x(offset, history_len));
}

PolyFit fit_poly(std::span<const TrajectorySample> history, int degree) {
  if (degree < 0) fail(ErrorKind::kConfig, "polynomial degree must be non-negative");
  const auto n = static_cast<Eigen::Index>(history.size());
  const Eigen::Index terms = degree + 1;
  if (n < 2 || terms > n) {
    fail(ErrorKind::kConfig, "degree " + std::to_string(degree) + " needs more than " +
                                 std::to_string(history.size()) + " history samples");
  }

  Eigen::MatrixXd design(n, terms);
  Eigen::MatrixXd values(n, static_cast<Eigen::Index>(kChannels));
  std::vector<double> row(static_cast<std::size_t>(terms));
  for (Eigen::Index i = 0; i < n; ++i) {
    chebyshev_basis(step_to_x(static_cast<double>(i - (n - 1)), history.size()), row);
    for (Eigen::Index m = 0; m < terms; ++m) design(i, m) = row[static_cast<std::size_t>(m)];
    const TrajectorySample& s = history[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < kChannels; ++c) values(i, static_cast<Eigen::Index>(c)) = s[c];
  }
  if (!values.allFinite()) fail(ErrorKind::kNumeric, "cannot fit a polynomial to a non-finite history");

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < terms) {
    fail(ErrorKind::kNumeric, "rank-deficient polynomial design (rank " + std::to_string(qr.rank()) + " < " +
                                  std::to_string(terms) + ")");
  }
  const Eigen::MatrixXd solution = qr.solve(values);

  PolyFit fit;
  fit.degree = degree;
  fit.history_len = history.size();
  for (std::size_t c = 0; c < kChannels; ++c) fit.coeffs[c] = solution.col(static_cast<Eigen::Index>(c));
  return fit;
}

Forecast extrapolate(const PolyFit& fit, std::size_t horizon, double rate_hz) {
  if (horizon < 1) fail(ErrorKind::kConfig, "horizon must be at least 1");
  if (!(rate_hz > 0.0)) fail(ErrorKind::kConfig, "sample rate must be positive");
  if (fit.history_len < 2) fail(ErrorKind::kConfig, "invalid polynomial fit");
  Forecast f;
  f.steps.resize(horizon);
  for (std::size_t s = 0; s < horizon; ++s) {
    for (std::size_t c = 0; c < kChannels; ++c) f.steps[s][c] = fit.value_at_step(c, static_cast<double>(s + 1));
  }
  return f;
}

}  // namespace intent
