#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace intent {

inline constexpr std::size_t kChannels = 6;
inline constexpr std::size_t kVelocityChannels = 3;
inline constexpr std::size_t kHistoryLength = 150;
inline constexpr double kNominalRateHz = 200.0;

/// One sample of object motion: translational velocity [m/s] and
/// acceleration [m/s^2]. Channel order is vx, vy, vz, ax, ay, az.
struct TrajectorySample {
  double vx = 0.0;
  double vy = 0.0;
  double vz = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;

  double& operator[](std::size_t channel);
  double operator[](std::size_t channel) const;

  bool is_finite() const;
  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

/// One dyad performing one task once, sampled uniformly.
struct Trial {
  std::int64_t dyad_id = 0;
  std::int64_t trial_id = 0;
  double sample_rate_hz = kNominalRateHz;
  std::vector<TrajectorySample> samples;

  double dt() const { return 1.0 / sample_rate_hz; }
};

/// Throws kData if the trial is empty, has a non-positive rate, or holds a
/// non-finite value.
void check_trial(const Trial& trial);

/// A history slice and its ground-truth continuation. Views into the trial
/// it was cut from; must not outlive it.
struct Window {
  std::span<const TrajectorySample> history;
  std::span<const TrajectorySample> future;
};

/// Per-channel affine normalisation to zero mean and unit deviation.
struct ChannelScaler {
  std::array<double, kChannels> mean{0, 0, 0, 0, 0, 0};
  std::array<double, kChannels> std{1, 1, 1, 1, 1, 1};

  TrajectorySample scale(const TrajectorySample& s) const;
  TrajectorySample unscale(const TrajectorySample& s) const;
  double scale(double x, std::size_t channel) const { return (x - mean[channel]) / std[channel]; }
  double unscale(double x, std::size_t channel) const { return x * std[channel] + mean[channel]; }

  bool valid() const;
  friend bool operator==(const ChannelScaler&, const ChannelScaler&) = default;
};

/// Channels whose pooled deviation falls below this get std = 1.
inline constexpr double kDegenerateStd = 1e-9;

/// Pooled mean and population deviation over every sample of every trial.
ChannelScaler fit_scaler(std::span<const Trial> trials);

/// All stride-1 windows, chronological. Empty if the trial is too short.
std::vector<Window> make_windows(const Trial& trial, std::size_t history_len,
                                 std::size_t future_len);

/// Number of windows make_windows would return, without building them.
std::size_t window_count(std::size_t n_samples, std::size_t history_len, std::size_t future_len);

struct DatasetSplit {
  std::set<std::int64_t> train_dyads;
  std::set<std::int64_t> validation_dyads;
};

/// Random assignment of whole dyads to train/validation. The train share is
/// round(fraction * n_dyads) clamped so both sides get at least one dyad.
DatasetSplit split_by_dyad(std::span<const Trial> trials, double train_fraction,
                           std::uint64_t seed);

/// Trials whose dyad is in `dyads`, in input order.
std::vector<Trial> select_dyads(std::span<const Trial> trials, const std::set<std::int64_t>& dyads);

std::set<std::int64_t> dyad_ids(std::span<const Trial> trials);

// Trajectory CSV: dyad_id,trial_id,t,vx,vy,vz,ax,ay,az

/// Rows are grouped by (dyad_id, trial_id); time must increase strictly within a
/// trial. The sample rate is recovered from the median time step. Any
/// failure names the offending line.
std::vector<Trial> read_trajectory_csv(std::istream& in);
std::vector<Trial> load_trajectory_csv(const std::string& path);

/// Doubles are written in shortest round-trip form, so reading back is exact.
void write_trajectory_csv(std::ostream& out, std::span<const Trial> trials);
void save_trajectory_csv(const std::string& path, std::span<const Trial> trials);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace intent
