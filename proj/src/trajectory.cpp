#include "intent/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "intent/error.hpp"

namespace intent {

namespace {

constexpr std::array<double TrajectorySample::*, kChannels> kMembers = {
    &TrajectorySample::vx, &TrajectorySample::vy, &TrajectorySample::vz,
    &TrajectorySample::ax, &TrajectorySample::ay, &TrajectorySample::az};

}  // namespace

double& TrajectorySample::operator[](std::size_t channel) { return this->*kMembers[channel]; }
double TrajectorySample::operator[](std::size_t channel) const { return this->*kMembers[channel]; }

bool TrajectorySample::is_finite() const {
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!std::isfinite((*this)[c])) return false;
  }
  return true;
}

void check_trial(const Trial& trial) {
  const std::string label =
      "trial (dyad " + std::to_string(trial.dyad_id) + ", trial " + std::to_string(trial.trial_id) + ")";
  if (trial.samples.empty()) fail(ErrorKind::kData, label + " has no samples");
  if (!(trial.sample_rate_hz > 0.0) || !std::isfinite(trial.sample_rate_hz)) {
    fail(ErrorKind::kData, label + " has a non-positive sample rate");
  }
  for (std::size_t i = 0; i < trial.samples.size(); ++i) {
    if (!trial.samples[i].is_finite()) {
      fail(ErrorKind::kData, label + " has a non-finite value at sample " + std::to_string(i));
    }
  }
}

TrajectorySample ChannelScaler::scale(const TrajectorySample& s) const {
  TrajectorySample out;
  for (std::size_t c = 0; c < kChannels; ++c) out[c] = (s[c] - mean[c]) / std[c];
  return out;
}

TrajectorySample ChannelScaler::unscale(const TrajectorySample& s) const {
  TrajectorySample out;
  for (std::size_t c = 0; c < kChannels; ++c) out[c] = s[c] * std[c] + mean[c];
  return out;
}

bool ChannelScaler::valid() const {
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!std::isfinite(mean[c]) || !std::isfinite(std[c]) || !(std[c] > 0.0)) return false;
  }
  return true;
}

ChannelScaler fit_scaler(std::span<const Trial> trials) {
  // Welford accumulation, one pass over the pooled samples.
  std::size_t n = 0;
  std::array<double, kChannels> mean{};
  std::array<double, kChannels> m2{};
  for (const Trial& trial : trials) {
    for (const TrajectorySample& s : trial.samples) {
      ++n;
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t c = 0; c < kChannels; ++c) {
        const double delta = s[c] - mean[c];
        mean[c] += delta * inv_n;
        m2[c] += delta * (s[c] - mean[c]);
      }
    }
  }
  if (n == 0) fail(ErrorKind::kData, "no samples");
  if (n < 2) fail(ErrorKind::kData, "no samples: at least 2 are needed to fit a scaler");

  ChannelScaler scaler;
  for (std::size_t c = 0; c < kChannels; ++c) {
    scaler.mean[c] = mean[c];
    const double sd = std::sqrt(m2[c] / static_cast<double>(n));
    scaler.std[c] = sd < kDegenerateStd ? 1.0 : sd;
  }
  return scaler;
}

std::size_t window_count(std::size_t n_samples, std::size_t history_len, std::size_t future_len) {
  const std::size_t span = history_len + future_len;
  return n_samples >= span ? n_samples - span + 1 : 0;
}

std::vector<Window> make_windows(const Trial& trial, std::size_t history_len, std::size_t future_len) {
  const std::size_t count = window_count(trial.samples.size(), history_len, future_len);
  std::vector<Window> windows;
  windows.reserve(count);
  const std::span<const TrajectorySample> all(trial.samples);
  for (std::size_t start = 0; start < count; ++start) {
    windows.push_back({all.subspan(start, history_len), all.subspan(start + history_len, future_len)});
  }
  return windows;
}

std::set<std::int64_t> dyad_ids(std::span<const Trial> trials) {
  std::set<std::int64_t> ids;
  for (const Trial& t : trials) ids.insert(t.dyad_id);
  return ids;
}

DatasetSplit split_by_dyad(std::span<const Trial> trials, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::kConfig, "cannot split: train fraction must lie in (0, 1)");
  }
  const std::set<std::int64_t> ids = dyad_ids(trials);
  if (ids.size() < 2) {
    fail(ErrorKind::kData, "cannot split: need at least 2 dyads, found " + std::to_string(ids.size()));
  }
  std::vector<std::int64_t> order(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }

  const auto n = static_cast<long>(order.size());
  const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);

  DatasetSplit split;
  split.train_dyads.insert(order.begin(), order.begin() + n_train);
  split.validation_dyads.insert(order.begin() + n_train, order.end());
  return split;
}

std::vector<Trial> select_dyads(std::span<const Trial> trials, const std::set<std::int64_t>& dyads) {
  std::vector<Trial> out;
  for (const Trial& t : trials) {
    if (dyads.contains(t.dyad_id)) out.push_back(t);
  }
  return out;
}

}  // namespace intent
