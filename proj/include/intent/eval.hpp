#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "intent/mlp.hpp"
#include "intent/poly.hpp"
#include "intent/predictor.hpp"
#include "intent/synthetic.hpp"
#include "intent/trajectory.hpp"

namespace intent {

/// Anything that maps windows to forecasts. Implementations must only look
/// at Window::history; the future is there for test oracles.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string id() const = 0;
  virtual std::vector<Forecast> predict(std::span<const Window> windows, std::size_t horizon) const = 0;
};

class NnPredictor final : public Predictor {
 public:
  explicit NnPredictor(const MlpModel& model, std::string id = "nn") : model_(model), id_(std::move(id)) {}
  std::string id() const override { return id_; }
  std::vector<Forecast> predict(std::span<const Window> windows, std::size_t horizon) const override;

 private:
  const MlpModel& model_;
  std::string id_;
};

class PolyPredictor final : public Predictor {
 public:
  explicit PolyPredictor(int degree = kDefaultPolyDegree, double rate_hz = kNominalRateHz)
      : degree_(degree), rate_hz_(rate_hz) {}
  std::string id() const override { return "poly-" + std::to_string(degree_); }
  std::vector<Forecast> predict(std::span<const Window> windows, std::size_t horizon) const override;

 private:
  int degree_;
  double rate_hz_;
};

/// Per-step-ahead squared error averaged over windows. Velocity MSE in
/// (m/s)^2, acceleration MSE in (m/s^2)^2; the aggregate velocity figure is
/// the mean over the three velocity channels.
struct HorizonReport {
  std::string predictor_id;
  std::string dataset_id;
  std::size_t n_windows = 0;
  std::vector<std::array<double, kChannels>> per_step_mse;  // index 0 is step 1

  std::size_t horizon() const { return per_step_mse.size(); }
  double mse_v_mean(std::size_t step) const;  // 1-based step
  /// Mean of mse_v_mean over steps first..last (1-based, inclusive).
  double mean_v_over(std::size_t first, std::size_t last) const;
};

struct EvalOptions {
  std::size_t horizon = kMaxHorizon;
  std::size_t stride = 1;  // evaluate every stride-th window
  std::optional<NoiseSpec> noise;
  std::string dataset_id = "validation";
  std::size_t threads = 0;  // 0: hardware concurrency
};

/// Scores the predictor on every stride-th window of every trial. Noise, if
/// given, corrupts the histories only; errors are measured against the clean
/// future. Results do not depend on the thread count.
HorizonReport evaluate(const Predictor& predictor, std::span<const Trial> trials, const EvalOptions& options);

struct ComparisonTable {
  std::vector<std::string> labels;           // predictor:dataset per report
  std::vector<std::vector<double>> mse_v;    // [report][step-1]
  std::vector<std::vector<double>> ratio;    // [report][step-1], report / first report
  std::optional<std::size_t> crossover_step; // first step where nn MSE < poly MSE
  std::size_t horizon() const { return mse_v.empty() ? 0 : mse_v.front().size(); }
};

/// Throws kConfig when the reports' horizons differ.
ComparisonTable compare(std::span<const HorizonReport> reports);

struct OverlaySegment {
  std::size_t start_index = 0;  // trial sample index of the first forecast step
  Forecast forecast;
};

struct OverlayTrace {
  std::int64_t dyad_id = 0;
  std::int64_t trial_id = 0;
  double sample_rate_hz = kNominalRateHz;
  std::vector<TrajectorySample> actual;
  std::vector<OverlaySegment> segments;
};

/// One forecast every anchor period, the first as soon as a full history
/// exists. Throws kConfig "invalid anchor period" for periods shorter than a
/// sample and kData if not even one anchored forecast fits.
OverlayTrace overlay(const Predictor& predictor, const Trial& trial, double anchor_period_s = 1.0,
                     std::size_t horizon = 50);

/// Leader plans distinct from the corpus tasks.
std::vector<std::vector<PlanSegment>> default_robot_plans();

/// A follower well outside the corpus jitter range.
FollowerImpedance default_robot_follower();

/// Simulates each plan with the given follower and scores the network on the
/// resulting object trajectories (dataset "robot-sim").
HorizonReport robot_in_loop_eval(const MlpModel& model, const FollowerImpedance& follower,
                                 std::span<const std::vector<PlanSegment>> plans, const EvalOptions& options,
                                 double rate_hz = kNominalRateHz);

// Report CSV:
//   predictor,dataset,step,mse_vx,mse_vy,mse_vz,mse_v_mean,mse_ax,mse_ay,mse_az,n_windows
void write_report_csv(std::ostream& out, std::span<const HorizonReport> reports);
void save_report_csv(const std::string& path, std::span<const HorizonReport> reports);
std::vector<HorizonReport> read_report_csv(std::istream& in);
std::vector<HorizonReport> load_report_csv(const std::string& path);

// Comparison CSV: step, one mse_v_mean column per report, then one ratio
// column per report after the first.
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

// Overlay CSV: trial_id,series,segment,t,vx,vy,vz with series actual|forecast.
// Actual rows carry segment -1.
void write_overlay_csv(std::ostream& out, const OverlayTrace& trace);

}  // namespace intent
