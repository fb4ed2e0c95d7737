#include "intent/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "intent/error.hpp"

namespace intent {

namespace {

constexpr double kVelocityTolerance = 1e-9;
constexpr std::size_t kMinTrialSamples = kHistoryLength + 50;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::kConfig, std::string(what) + " must be positive");
  }
}

TrajectorySample to_sample(const PlanState& s) {
  return {s.velocity.x(), s.velocity.y(), s.velocity.z(),
          s.acceleration.x(), s.acceleration.y(), s.acceleration.z()};
}

}  // namespace

MotionPlan::MotionPlan(std::vector<PlanSegment> segments) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const bool at_start = pieces_.empty();
    const Eigen::Vector3d v_in = at_start ? Eigen::Vector3d::Zero() : end_velocity(pieces_.back());
    auto require_rest_entry = [&](const char* what) {
      if (!at_start && v_in.norm() > kVelocityTolerance) {
        fail(ErrorKind::kConfig, "discontinuous plan: segment " + std::to_string(i) + " (" + what +
                                     ") starts at rest but the previous segment ends moving");
      }
    };

    if (const auto* rest = std::get_if<RestPhase>(&segments[i])) {
      require_positive(rest->duration, "rest duration");
      require_rest_entry("rest");
      append(Piece::Kind::kRest, rest->duration, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero());
    } else if (const auto* mj = std::get_if<MinJerkSegment>(&segments[i])) {
      require_positive(mj->duration, "min-jerk duration");
      require_rest_entry("min-jerk");
      append(Piece::Kind::kMinJerk, mj->duration, Eigen::Vector3d::Zero(), mj->displacement);
    } else {
      const auto& cv = std::get<ConstVelPhase>(segments[i]);
      require_positive(cv.duration, "constant-velocity duration");
      if (!(cv.blend_time >= 0.0) || !std::isfinite(cv.blend_time)) {
        fail(ErrorKind::kConfig, "blend time must be non-negative");
      }
      if (cv.blend_time > 0.0) {
        append(Piece::Kind::kRamp, cv.blend_time, v_in, cv.velocity);
      } else if (!at_start && (v_in - cv.velocity).norm() > kVelocityTolerance) {
        fail(ErrorKind::kConfig, "discontinuous plan: segment " + std::to_string(i) +
                                     " changes velocity with no blend");
      }
      append(Piece::Kind::kCruise, cv.duration, cv.velocity, cv.velocity);
      const bool next_blends_in = i + 1 < segments.size() &&
                                  std::holds_alternative<ConstVelPhase>(segments[i + 1]) &&
                                  std::get<ConstVelPhase>(segments[i + 1]).blend_time > 0.0;
      if (cv.blend_time > 0.0 && !next_blends_in) {
        append(Piece::Kind::kRamp, cv.blend_time, cv.velocity, Eigen::Vector3d::Zero());
      }
    }
  }
  if (pieces_.empty()) fail(ErrorKind::kConfig, "empty plan");
}

void MotionPlan::append(Piece::Kind kind, double length, const Eigen::Vector3d& v0,
                        const Eigen::Vector3d& v1) {
  Piece piece{kind, duration_, length, Eigen::Vector3d::Zero(), v0, v1};
  if (!pieces_.empty()) piece.origin = evaluate_piece(pieces_.back(), duration_).position;
  pieces_.push_back(piece);
  duration_ += length;
}

Eigen::Vector3d MotionPlan::end_velocity(const Piece& piece) {
  switch (piece.kind) {
    case Piece::Kind::kRamp: return piece.v1;
    case Piece::Kind::kCruise: return piece.v0;
    default: return Eigen::Vector3d::Zero();
  }
}

PlanState MotionPlan::evaluate_piece(const Piece& piece, double t) const {
  const double u = std::clamp(t - piece.start, 0.0, piece.length);
  PlanState s;
  switch (piece.kind) {
    case Piece::Kind::kRest:
      s.position = piece.origin;
      break;
    case Piece::Kind::kMinJerk: {
      const double tau = u / piece.length;
      const double T = piece.length;
      const double tau2 = tau * tau;
      const double tau3 = tau2 * tau;
      s.position = piece.origin + piece.v1 * (tau3 * (10.0 - 15.0 * tau + 6.0 * tau2));
      s.velocity = piece.v1 * ((30.0 * tau2 - 60.0 * tau3 + 30.0 * tau2 * tau2) / T);
      s.acceleration = piece.v1 * ((60.0 * tau - 180.0 * tau2 + 120.0 * tau3) / (T * T));
      break;
    }
    case Piece::Kind::kRamp: {
      const Eigen::Vector3d a = (piece.v1 - piece.v0) / piece.length;
      s.position = piece.origin + piece.v0 * u + 0.5 * a * u * u;
      s.velocity = piece.v0 + a * u;
      s.acceleration = a;
      break;
    }
    case Piece::Kind::kCruise:
      s.position = piece.origin + piece.v0 * u;
      s.velocity = piece.v0;
      break;
  }
  return s;
}

PlanState MotionPlan::evaluate(double t) const {
  if (t >= duration_) {
    const Piece& last = pieces_.back();
    PlanState end = evaluate_piece(last, duration_);
    end.position += end.velocity * (t - duration_);
    end.acceleration.setZero();
    return end;
  }
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double value, const Piece& p) { return value < p.start; });
  if (it != pieces_.begin()) --it;
  return evaluate_piece(*it, t);
}

double MotionPlan::peak_speed(double rate_hz) const {
  double peak = 0.0;
  const auto n = static_cast<std::size_t>(std::ceil(duration_ * rate_hz));
  for (std::size_t i = 0; i <= n; ++i) {
    peak = std::max(peak, evaluate(static_cast<double>(i) / rate_hz).velocity.norm());
  }
  return peak;
}

NoiseSpec NoiseSpec::standard(std::uint64_t seed) {
  return NoiseSpec{{0.01, 0.01, 0.01, 0.1, 0.1, 0.1}, seed};
}

bool NoiseSpec::is_zero() const {
  return std::all_of(std.begin(), std.end(), [](double s) { return s == 0.0; });
}

void add_noise(std::vector<TrajectorySample>& samples, const NoiseSpec& noise, std::uint64_t stream) {
  for (double s : noise.std) {
    if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorKind::kConfig, "noise std must be non-negative");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (TrajectorySample& sample : samples) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double z = gauss(rng);
      if (noise.std[c] > 0.0) sample[c] += noise.std[c] * z;
    }
  }
}

Trial gen_min_jerk(const MinJerkSegment& segment, double rate_hz) {
  require_positive(segment.duration, "min-jerk duration");
  require_positive(rate_hz, "sample rate");
  if (segment.duration * rate_hz < 2.0) {
    fail(ErrorKind::kConfig, "min-jerk segment must span at least 2 sample periods");
  }
  const auto intervals = static_cast<std::size_t>(std::lround(segment.duration * rate_hz));
  const MotionPlan plan({segment});
  Trial trial;
  trial.sample_rate_hz = rate_hz;
  trial.samples.reserve(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(intervals);
    trial.samples.push_back(to_sample(plan.evaluate(tau * segment.duration)));
  }
  return trial;
}

Trial gen_trial(const std::vector<PlanSegment>& segments, double rate_hz, const std::optional<NoiseSpec>& noise) {
  require_positive(rate_hz, "sample rate");
  const MotionPlan plan(segments);
  const auto n = static_cast<std::size_t>(std::lround(plan.duration() * rate_hz));
  if (n < kMinTrialSamples) {
    fail(ErrorKind::kConfig, "plan of " + std::to_string(plan.duration()) +
                                 " s is too short for one 150+50 step window");
  }
  Trial trial;
  trial.sample_rate_hz = rate_hz;
  trial.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    trial.samples.push_back(to_sample(plan.evaluate(static_cast<double>(i) / rate_hz)));
  }
  if (noise) add_noise(trial.samples, *noise);
  return trial;
}

Trial simulate_dyad(const std::vector<PlanSegment>& leader_plan, const FollowerImpedance& follower,
                    double rate_hz, int substeps) {
  require_positive(follower.mass, "follower mass");
  if (!(follower.damping >= 0.0) || !(follower.stiffness >= 0.0)) {
    fail(ErrorKind::kConfig, "follower damping and stiffness must be non-negative");
  }
  require_positive(rate_hz, "sample rate");
  if (substeps < 1) fail(ErrorKind::kConfig, "substeps must be at least 1");

  const MotionPlan plan(leader_plan);
  const auto n = static_cast<std::size_t>(std::lround(plan.duration() * rate_hz));
  if (n < 2) fail(ErrorKind::kConfig, "plan too short to sample");

  const double inv_m = 1.0 / follower.mass;
  auto accel = [&](const Eigen::Vector3d& x, const Eigen::Vector3d& v, double t) -> Eigen::Vector3d {
    const PlanState leader = plan.evaluate(t);
    return -inv_m * (follower.damping * (v - leader.velocity) + follower.stiffness * (x - leader.position));
  };

  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  const double dt = 1.0 / rate_hz;
  const double h = dt / substeps;

  Trial trial;
  trial.sample_rate_hz = rate_hz;
  trial.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const Eigen::Vector3d a = accel(x, v, t);
    trial.samples.push_back({v.x(), v.y(), v.z(), a.x(), a.y(), a.z()});
    for (int s = 0; s < substeps; ++s) {
      v += h * accel(x, v, t + s * h);
      x += h * v;
    }
  }
  return trial;
}

}  // namespace intent
