#include "intent/eval.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "intent/error.hpp"
#include "parallel.hpp"

namespace intent {

namespace {

constexpr std::size_t kChunk = 64;
constexpr const char* kReportHeader =
    "predictor,dataset,step,mse_vx,mse_vy,mse_vz,mse_v_mean,mse_ax,mse_ay,mse_az,n_windows";

struct Chunk {
  std::vector<Window> windows;
  std::vector<std::array<double, kChannels>> sums;
};

}  // namespace

std::vector<Forecast> NnPredictor::predict(std::span<const Window> windows, std::size_t horizon) const {
  std::vector<std::span<const TrajectorySample>> histories;
  histories.reserve(windows.size());
  for (const Window& w : windows) histories.push_back(w.history);
  return rollout_batch(model_, histories, horizon);
}

std::vector<Forecast> PolyPredictor::predict(std::span<const Window> windows, std::size_t horizon) const {
  std::vector<Forecast> out;
  out.reserve(windows.size());
  for (const Window& w : windows) out.push_back(extrapolate(fit_poly(w.history, degree_), horizon, rate_hz_));
  return out;
}

double HorizonReport::mse_v_mean(std::size_t step) const {
  const auto& m = per_step_mse.at(step - 1);
  return (m[0] + m[1] + m[2]) / 3.0;
}

double HorizonReport::mean_v_over(std::size_t first, std::size_t last) const {
  double sum = 0.0;
  for (std::size_t s = first; s <= last; ++s) sum += mse_v_mean(s);
  return sum / static_cast<double>(last - first + 1);
}

HorizonReport evaluate(const Predictor& predictor, std::span<const Trial> trials, const EvalOptions& options) {
  if (options.horizon < 1) fail(ErrorKind::kConfig, "horizon must be at least 1");
  if (options.stride < 1) fail(ErrorKind::kConfig, "window stride must be at least 1");

  // Noisy copies must outlive the windows that view them.
  std::vector<std::vector<TrajectorySample>> noisy(trials.size());
  std::vector<Window> all;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& trial = trials[i];
    std::span<const TrajectorySample> source(trial.samples);
    if (options.noise) {
      noisy[i] = trial.samples;
      const std::uint64_t stream = static_cast<std::uint64_t>(trial.dyad_id) << 32 ^
                                   static_cast<std::uint64_t>(trial.trial_id);
      add_noise(noisy[i], *options.noise, stream);
      source = noisy[i];
    }
    const std::size_t count = window_count(trial.samples.size(), kHistoryLength, options.horizon);
    for (std::size_t start = 0; start < count; start += options.stride) {
      all.push_back({source.subspan(start, kHistoryLength),
                     std::span<const TrajectorySample>(trial.samples).subspan(start + kHistoryLength, options.horizon)});
    }
  }
  if (all.empty()) fail(ErrorKind::kData, "no usable windows for horizon " + std::to_string(options.horizon));

  const std::size_t n_chunks = (all.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<std::array<double, kChannels>>> partial(n_chunks);
  detail::parallel_for(n_chunks, options.threads, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(all.size(), begin + kChunk);
    const std::span<const Window> windows(all.data() + begin, end - begin);
    const std::vector<Forecast> forecasts = predictor.predict(windows, options.horizon);
    if (forecasts.size() != windows.size()) fail(ErrorKind::kConfig, "predictor returned the wrong number of forecasts");
    auto& sums = partial[c];
    sums.assign(options.horizon, {});
    for (std::size_t w = 0; w < windows.size(); ++w) {
      if (forecasts[w].steps.size() != options.horizon) fail(ErrorKind::kConfig, "forecast has the wrong horizon");
      for (std::size_t s = 0; s < options.horizon; ++s) {
        for (std::size_t ch = 0; ch < kChannels; ++ch) {
          const double e = forecasts[w].steps[s][ch] - windows[w].future[s][ch];
          sums[s][ch] += e * e;
        }
      }
    }
  });

  HorizonReport report;
  report.predictor_id = predictor.id();
  report.dataset_id = options.dataset_id;
  report.n_windows = all.size();
  report.per_step_mse.assign(options.horizon, {});
  for (const auto& sums : partial) {
    for (std::size_t s = 0; s < options.horizon; ++s) {
      for (std::size_t ch = 0; ch < kChannels; ++ch) report.per_step_mse[s][ch] += sums[s][ch];
    }
  }
  const double inv = 1.0 / static_cast<double>(all.size());
  for (auto& row : report.per_step_mse) {
    for (double& v : row) {
      v *= inv;
      if (!std::isfinite(v)) fail(ErrorKind::kNumeric, "non-finite error in evaluation of " + report.predictor_id);
    }
  }
  return report;
}

ComparisonTable compare(std::span<const HorizonReport> reports) {
  if (reports.empty()) fail(ErrorKind::kConfig, "nothing to compare");
  const std::size_t horizon = reports.front().horizon();
  ComparisonTable table;
  for (const HorizonReport& r : reports) {
    if (r.horizon() != horizon) {
      fail(ErrorKind::kConfig, "mismatched horizons: " + std::to_string(r.horizon()) + " vs " + std::to_string(horizon));
    }
    table.labels.push_back(r.predictor_id + ":" + r.dataset_id);
    std::vector<double> mse(horizon);
    for (std::size_t s = 1; s <= horizon; ++s) mse[s - 1] = r.mse_v_mean(s);
    table.mse_v.push_back(std::move(mse));
  }
  for (const auto& m : table.mse_v) {
    std::vector<double> ratio(horizon);
    for (std::size_t s = 0; s < horizon; ++s) ratio[s] = m[s] / table.mse_v.front()[s];
    table.ratio.push_back(std::move(ratio));
  }

  std::optional<std::size_t> nn;
  std::optional<std::size_t> poly;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!nn && reports[i].predictor_id.rfind("nn", 0) == 0) nn = i;
    if (!poly && reports[i].predictor_id.rfind("poly", 0) == 0) poly = i;
  }
  if (nn && poly) {
    for (std::size_t s = 0; s < horizon; ++s) {
      if (table.mse_v[*nn][s] < table.mse_v[*poly][s]) {
        table.crossover_step = s + 1;
        break;
      }
    }
  }
  return table;
}

OverlayTrace overlay(const Predictor& predictor, const Trial& trial, double anchor_period_s, std::size_t horizon) {
  if (!(anchor_period_s * trial.sample_rate_hz >= 1.0)) {
    fail(ErrorKind::kConfig, "invalid anchor period: shorter than one sample");
  }
  if (horizon < 1) fail(ErrorKind::kConfig, "horizon must be at least 1");
  const auto spacing = static_cast<std::size_t>(std::lround(anchor_period_s * trial.sample_rate_hz));
  const std::span<const TrajectorySample> samples(trial.samples);

  std::vector<Window> windows;
  std::vector<std::size_t> starts;
  for (std::size_t a = kHistoryLength; a + horizon <= samples.size(); a += spacing) {
    windows.push_back({samples.subspan(a - kHistoryLength, kHistoryLength), samples.subspan(a, horizon)});
    starts.push_back(a);
  }
  if (windows.empty()) fail(ErrorKind::kData, "trial too short for one anchored forecast");

  std::vector<Forecast> forecasts = predictor.predict(windows, horizon);
  OverlayTrace trace;
  trace.dyad_id = trial.dyad_id;
  trace.trial_id = trial.trial_id;
  trace.sample_rate_hz = trial.sample_rate_hz;
  trace.actual = trial.samples;
  for (std::size_t i = 0; i < windows.size(); ++i) trace.segments.push_back({starts[i], std::move(forecasts[i])});
  return trace;
}

std::vector<std::vector<PlanSegment>> default_robot_plans() {
  auto v = [](double x, double y, double z) { return Eigen::Vector3d(x, y, z); };
  return {
      {RestPhase{0.8}, MinJerkSegment{v(1.6, 0.4, 0.0), 2.6}, RestPhase{0.8}},
      {RestPhase{0.8}, MinJerkSegment{v(-0.9, -0.9, 0.0), 2.2}, RestPhase{0.8}},
      {RestPhase{0.8}, ConstVelPhase{v(0.6, 0.3, 0.0), 2.2, 0.7}, RestPhase{0.8}},
      {RestPhase{0.8}, MinJerkSegment{v(0.0, 1.0, 0.0), 1.8}, RestPhase{0.3}, MinJerkSegment{v(0.8, 0.0, 0.0), 1.8},
       RestPhase{0.8}},
      {RestPhase{0.8}, MinJerkSegment{v(0.0, -1.3, 0.1), 2.4}, RestPhase{0.8}},
  };
}

FollowerImpedance default_robot_follower() { return FollowerImpedance{14.0, 110.0, 40.0}; }

HorizonReport robot_in_loop_eval(const MlpModel& model, const FollowerImpedance& follower,
                                 std::span<const std::vector<PlanSegment>> plans, const EvalOptions& options,
                                 double rate_hz) {
  std::vector<Trial> trials;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    Trial t = simulate_dyad(plans[i], follower, rate_hz);
    t.dyad_id = 0;
    t.trial_id = static_cast<std::int64_t>(i + 1);
    trials.push_back(std::move(t));
  }
  EvalOptions opts = options;
  opts.dataset_id = "robot-sim";
  return evaluate(NnPredictor(model), trials, opts);
}

void write_report_csv(std::ostream& out, std::span<const HorizonReport> reports) {
  out << kReportHeader << '\n';
  for (const HorizonReport& r : reports) {
    for (std::size_t s = 1; s <= r.horizon(); ++s) {
      const auto& m = r.per_step_mse[s - 1];
      out << r.predictor_id << ',' << r.dataset_id << ',' << s << ',' << format_double(m[0]) << ','
          << format_double(m[1]) << ',' << format_double(m[2]) << ',' << format_double(r.mse_v_mean(s)) << ','
          << format_double(m[3]) << ',' << format_double(m[4]) << ',' << format_double(m[5]) << ',' << r.n_windows
          << '\n';
    }
  }
}

void save_report_csv(const std::string& path, std::span<const HorizonReport> reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  write_report_csv(out, reports);
  if (!out) fail(ErrorKind::kIo, "failed writing '" + path + "'");
}

std::vector<HorizonReport> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) fail(ErrorKind::kFormat, "not a report CSV (bad header)");
  std::vector<HorizonReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 11) fail(ErrorKind::kFormat, "report CSV line " + std::to_string(line_no) + ": expected 11 fields");
    auto num = [&](const std::string& s) {
      double v = 0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        fail(ErrorKind::kFormat, "report CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
      return v;
    };
    const auto step = static_cast<std::size_t>(num(f[2]));
    if (reports.empty() || reports.back().predictor_id != f[0] || reports.back().dataset_id != f[1] || step == 1) {
      reports.push_back({f[0], f[1], static_cast<std::size_t>(num(f[10])), {}});
    }
    HorizonReport& r = reports.back();
    if (step != r.per_step_mse.size() + 1) {
      fail(ErrorKind::kFormat, "report CSV line " + std::to_string(line_no) + ": steps out of order");
    }
    r.per_step_mse.push_back({num(f[3]), num(f[4]), num(f[5]), num(f[7]), num(f[8]), num(f[9])});
  }
  return reports;
}

std::vector<HorizonReport> load_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open report '" + path + "'");
  return read_report_csv(in);
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << "step";
  for (const auto& l : table.labels) out << ',' << l;
  for (std::size_t i = 1; i < table.labels.size(); ++i) out << ",ratio " << table.labels[i] << " / " << table.labels[0];
  out << '\n';
  for (std::size_t s = 0; s < table.horizon(); ++s) {
    out << s + 1;
    for (const auto& m : table.mse_v) out << ',' << format_double(m[s]);
    for (std::size_t i = 1; i < table.ratio.size(); ++i) out << ',' << format_double(table.ratio[i][s]);
    out << '\n';
  }
}

void write_overlay_csv(std::ostream& out, const OverlayTrace& trace) {
  out << "trial_id,series,segment,t,vx,vy,vz\n";
  const double dt = 1.0 / trace.sample_rate_hz;
  for (std::size_t i = 0; i < trace.actual.size(); ++i) {
    const auto& s = trace.actual[i];
    out << trace.trial_id << ",actual,-1," << format_double(static_cast<double>(i) * dt) << ',' << format_double(s.vx)
        << ',' << format_double(s.vy) << ',' << format_double(s.vz) << '\n';
  }
  for (std::size_t g = 0; g < trace.segments.size(); ++g) {
    const auto& seg = trace.segments[g];
    for (std::size_t j = 0; j < seg.forecast.steps.size(); ++j) {
      const auto& s = seg.forecast.steps[j];
      out << trace.trial_id << ",forecast," << g << ','
          << format_double(static_cast<double>(seg.start_index + j) * dt) << ',' << format_double(s.vx) << ','
          << format_double(s.vy) << ',' << format_double(s.vz) << '\n';
    }
  }
}

}  // namespace intent
