#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "intent/trajectory.hpp"

namespace intent {

/// Point-to-point quintic x(s) = D (10 s^3 - 15 s^4 + 6 s^5), s = t / duration.
/// Starts and ends at rest.
struct MinJerkSegment {
  Eigen::Vector3d displacement = Eigen::Vector3d::Zero();
  double duration = 1.0;
};

/// Constant-velocity plateau. With blend_time > 0 the velocity ramps linearly
/// (constant acceleration) from the incoming velocity into the plateau, and
/// back to rest afterwards unless another constant-velocity phase follows.
struct ConstVelPhase {
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double duration = 1.0;
  double blend_time = 0.0;
};

struct RestPhase {
  double duration = 1.0;
};

using PlanSegment = std::variant<MinJerkSegment, ConstVelPhase, RestPhase>;

struct PlanState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d acceleration = Eigen::Vector3d::Zero();
};

/// A validated, continuous-velocity sequence of segments that can be
/// evaluated at any time. Positions start at the origin.
class MotionPlan {
 public:
  /// Throws kConfig "discontinuous plan" when two neighbouring segments meet
  /// at different velocities with no blend between them.
  explicit MotionPlan(std::vector<PlanSegment> segments);

  double duration() const { return duration_; }
  PlanState evaluate(double t) const;
  double peak_speed(double rate_hz) const;

 private:
  // Phase with a closed-form profile over [start, start + length).
  struct Piece {
    enum class Kind { kMinJerk, kRamp, kCruise, kRest } kind;
    double start = 0.0;
    double length = 0.0;
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Vector3d v0 = Eigen::Vector3d::Zero();
    Eigen::Vector3d v1 = Eigen::Vector3d::Zero();  // ramp end velocity; displacement for min-jerk
  };
  PlanState evaluate_piece(const Piece& piece, double t) const;
  static Eigen::Vector3d end_velocity(const Piece& piece);
  void append(Piece::Kind kind, double length, const Eigen::Vector3d& v0, const Eigen::Vector3d& v1);

  std::vector<Piece> pieces_;
  double duration_ = 0.0;
};

/// Per-channel white Gaussian noise.
struct NoiseSpec {
  std::array<double, kChannels> std{0, 0, 0, 0, 0, 0};
  std::uint64_t seed = 0;

  /// 0.01 m/s on velocity channels and 0.1 m/s^2 on acceleration channels.
  static NoiseSpec standard(std::uint64_t seed);
  bool is_zero() const;
};

/// Adds noise in place. `stream` separates independent noise streams drawn
/// from the same seed (e.g. one per trial).
void add_noise(std::vector<TrajectorySample>& samples, const NoiseSpec& noise, std::uint64_t stream = 0);

/// Object/follower coupled to the leader's hand through
///   m a + b (v - v_leader) + k (x - x_leader) = 0.
struct FollowerImpedance {
  double mass = 8.0;
  double damping = 60.0;
  double stiffness = 100.0;
};

/// Analytic min-jerk samples at N = round(duration * rate) + 1 evenly spaced
/// instants including both endpoints.
Trial gen_min_jerk(const MinJerkSegment& segment, double rate_hz);

/// Plan velocity and acceleration sampled at t = i / rate for
/// i < round(duration * rate), with optional additive noise.
Trial gen_trial(const std::vector<PlanSegment>& segments, double rate_hz,
                const std::optional<NoiseSpec>& noise = std::nullopt);

/// Object trajectory when the leader's hand follows `leader_plan` and the
/// object responds through the follower impedance. Semi-implicit Euler with
/// `substeps` integration steps per output sample.
Trial simulate_dyad(const std::vector<PlanSegment>& leader_plan, const FollowerImpedance& follower,
                    double rate_hz, int substeps = 10);

/// Named leader plan used as a corpus task.
struct TaskSpec {
  std::string name;
  std::vector<PlanSegment> segments;
};

/// Multiplicative jitter half-widths (0.2 means factors in [0.8, 1.2]).
struct JitterSpec {
  double duration = 0.2;
  double displacement = 0.05;
  double impedance = 0.2;
  double repetition = 0.05;  // extra per-repetition, per-segment jitter
};

struct CorpusConfig {
  int dyads = 20;
  int repetitions = 3;
  std::uint64_t seed = 2017;
  double rate_hz = kNominalRateHz;
  std::vector<TaskSpec> tasks;
  FollowerImpedance follower;
  JitterSpec jitter;
  std::optional<NoiseSpec> noise;  // seed field ignored; per-trial seeds derive from `seed`
};

/// Twelve translation tasks: lateral, forward/backward, diagonal, corridor,
/// stop-and-go, hallway turn, lift-over and out-and-back moves.
std::vector<TaskSpec> default_tasks();

/// 20 dyads x 12 tasks x 3 repetitions, mild sensor noise.
CorpusConfig default_corpus_config();

/// JSON corpus config; omitted keys keep their defaults. "tasks" may be the
/// string "default" or an explicit list.
CorpusConfig parse_corpus_config(const std::string& json_text);
CorpusConfig load_corpus_config(const std::string& path);
std::string corpus_config_to_json(const CorpusConfig& config);

/// Parses a segment list in the corpus config JSON syntax.
std::vector<PlanSegment> parse_plan_json(const std::string& json_text);

/// Dyad ids are 1..dyads; trial ids are task * repetitions + repetition + 1.
/// Throws kConfig naming the trial when one is too short for a window.
std::vector<Trial> make_corpus(const CorpusConfig& config);

/// The follower a given dyad of the corpus is simulated with.
FollowerImpedance dyad_follower(const CorpusConfig& config, std::int64_t dyad_id);

}  // namespace intent
