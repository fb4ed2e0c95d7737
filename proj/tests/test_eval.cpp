#include <cmath>
#include <sstream>

#include "doctest.h"
#include "intent/error.hpp"
#include "intent/eval.hpp"
#include "intent/pipeline.hpp"
#include "support/generators.hpp"

using namespace intent;
using intent::testing::Gen;

namespace {

// Peeks at the future: zero error by construction.
class Oracle final : public Predictor {
 public:
  std::string id() const override { return "oracle"; }
  std::vector<Forecast> predict(std::span<const Window> windows, std::size_t horizon) const override {
    std::vector<Forecast> out;
    for (const Window& w : windows) out.push_back({{w.future.begin(), w.future.begin() + static_cast<long>(horizon)}});
    return out;
  }
};

class Zero final : public Predictor {
 public:
  std::string id() const override { return "zero"; }
  std::vector<Forecast> predict(std::span<const Window> windows, std::size_t horizon) const override {
    return std::vector<Forecast>(windows.size(), Forecast{std::vector<TrajectorySample>(horizon)});
  }
};

// Repeats the last history sample.
class Hold final : public Predictor {
 public:
  std::string id() const override { return "hold"; }
  std::vector<Forecast> predict(std::span<const Window> windows, std::size_t horizon) const override {
    std::vector<Forecast> out;
    for (const Window& w : windows) out.push_back({std::vector<TrajectorySample>(horizon, w.history.back())});
    return out;
  }
};

HorizonReport fake_report(const std::string& id, std::size_t horizon, double base) {
  HorizonReport r;
  r.predictor_id = id;
  r.dataset_id = "validation";
  r.n_windows = 3;
  for (std::size_t s = 0; s < horizon; ++s) {
    const double v = base * static_cast<double>(s + 1);
    r.per_step_mse.push_back({v, v, v, 2 * v, 2 * v, 2 * v});
  }
  return r;
}

}  // namespace

TEST_CASE("oracle predictor scores zero") {
  Gen g(1);
  const auto trials = g.trials(2, 2, 250, 400);
  EvalOptions o;
  o.horizon = 50;
  const HorizonReport r = evaluate(Oracle(), trials, o);
  for (std::size_t s = 1; s <= 50; ++s) CHECK(r.mse_v_mean(s) == 0.0);
}

TEST_CASE("zero predictor on white noise scores the variance") {
  Gen g(2);
  std::vector<Trial> trials(4);
  for (auto& t : trials) {
    t.dyad_id = 1;
    t.samples.resize(2000);
    for (auto& s : t.samples) s = g.sample(0.3);
  }
  EvalOptions o;
  o.horizon = 10;
  const HorizonReport r = evaluate(Zero(), trials, o);
  for (std::size_t s = 1; s <= 10; ++s) {
    CHECK(r.mse_v_mean(s) == doctest::Approx(0.09).epsilon(0.05));
    CHECK(r.per_step_mse[s - 1][4] == doctest::Approx(0.09).epsilon(0.05));
  }
}

TEST_CASE("hold predictor on a ramp scores the squared step offset") {
  Trial t;
  t.dyad_id = 1;
  for (int i = 0; i < 300; ++i) t.samples.push_back({0.01 * i, 0, 0, 0, 0, 0});
  EvalOptions o;
  o.horizon = 20;
  const std::vector<Trial> v{t};
  const HorizonReport r = evaluate(Hold(), v, o);
  for (std::size_t s = 1; s <= 20; ++s) {
    CHECK(r.per_step_mse[s - 1][0] == doctest::Approx(1e-4 * static_cast<double>(s * s)).epsilon(1e-9));
    CHECK(r.mse_v_mean(s) == doctest::Approx(1e-4 * static_cast<double>(s * s) / 3.0).epsilon(1e-9));
  }
}

TEST_CASE("window bookkeeping honours horizon and stride") {
  Gen g(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto trials = g.trials(g.integer(1, 3), g.integer(1, 3), 200, 420);
    EvalOptions o;
    o.horizon = static_cast<std::size_t>(g.integer(1, 50));
    o.stride = static_cast<std::size_t>(g.integer(1, 30));
    std::size_t want = 0;
    for (const auto& t : trials) {
      const std::size_t n = window_count(t.samples.size(), kHistoryLength, o.horizon);
      want += (n + o.stride - 1) / o.stride;
    }
    CHECK(evaluate(Hold(), trials, o).n_windows == want);
  }
  const auto short_trials = g.trials(1, 1, 160, 160);
  EvalOptions o;
  o.horizon = 50;
  CHECK_THROWS_AS(evaluate(Hold(), short_trials, o), Error);
}

TEST_CASE("results are independent of the thread count") {
  Gen g(4);
  const auto trials = g.trials(3, 2, 300, 500);
  EvalOptions o;
  o.horizon = 30;
  o.threads = 1;
  const HorizonReport one = evaluate(PolyPredictor(4), trials, o);
  o.threads = 4;
  const HorizonReport four = evaluate(PolyPredictor(4), trials, o);
  CHECK(one.per_step_mse == four.per_step_mse);
}

TEST_CASE("noise corrupts histories deterministically and leaves targets clean") {
  Gen g(5);
  const auto trials = g.trials(2, 1, 300, 300);
  EvalOptions o;
  o.horizon = 5;
  o.noise = NoiseSpec::standard(404);
  const HorizonReport a = evaluate(Hold(), trials, o);
  const HorizonReport b = evaluate(Hold(), trials, o);
  CHECK(a.per_step_mse == b.per_step_mse);
  CHECK(evaluate(Oracle(), trials, o).mse_v_mean(1) == 0.0);
  o.noise = NoiseSpec::standard(405);
  CHECK(evaluate(Hold(), trials, o).per_step_mse != a.per_step_mse);
  o.noise.reset();
  CHECK(evaluate(Hold(), trials, o).mse_v_mean(1) < a.mse_v_mean(1));
}

TEST_CASE("polynomial baseline is worse with noisy histories") {
  Gen g(6);
  const auto trials = g.trials(2, 1, 400, 400);
  EvalOptions o;
  o.horizon = 100;
  o.stride = 10;
  const HorizonReport clean = evaluate(PolyPredictor(), trials, o);
  o.noise = NoiseSpec::standard(1);
  const HorizonReport noisy = evaluate(PolyPredictor(), trials, o);
  CHECK(noisy.mse_v_mean(100) > clean.mse_v_mean(100));
}

TEST_CASE("comparison of identical reports gives unit ratios") {
  const std::vector<HorizonReport> reports{fake_report("nn", 10, 1.0), fake_report("nn", 10, 1.0)};
  const ComparisonTable t = compare(reports);
  CHECK(t.horizon() == 10);
  for (double r : t.ratio[1]) CHECK(r == 1.0);
  CHECK_FALSE(t.crossover_step.has_value());
}

TEST_CASE("comparison finds the crossover and ratios") {
  std::vector<HorizonReport> reports{fake_report("poly-8", 10, 1.0), fake_report("nn", 10, 1.0)};
  // nn is worse until step 4, then better.
  for (std::size_t s = 0; s < 10; ++s) {
    const double v = s < 3 ? 10.0 : 0.5;
    reports[1].per_step_mse[s] = {v, v, v, v, v, v};
  }
  const ComparisonTable t = compare(reports);
  REQUIRE(t.crossover_step.has_value());
  CHECK(*t.crossover_step == 4);
  CHECK(t.ratio[1][0] == doctest::Approx(10.0));
  CHECK(t.ratio[1][9] == doctest::Approx(0.05));
  std::stringstream ss;
  write_comparison_csv(ss, t);
  std::string header;
  std::getline(ss, header);
  CHECK(header.find("step") == 0);
  int rows = 0;
  for (std::string line; std::getline(ss, line);) ++rows;
  CHECK(rows == 10);
}

TEST_CASE("comparison rejects mismatched horizons") {
  const std::vector<HorizonReport> reports{fake_report("nn", 10, 1.0), fake_report("poly-8", 20, 1.0)};
  try {
    compare(reports);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    CHECK(std::string(e.what()).find("mismatched horizons") != std::string::npos);
  }
}

TEST_CASE("overlay of a 10 s trial at 1 s anchors has ten segments") {
  Gen g(7);
  // 150 history samples, then 10 anchors one second apart, the last needing 50 more.
  const Trial t = g.trial(1, 1, 150 + 9 * 200 + 50);
  const OverlayTrace tr = overlay(Hold(), t, 1.0, 50);
  REQUIRE(tr.segments.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(tr.segments[i].start_index == 150 + 200 * i);
    CHECK(tr.segments[i].forecast.horizon() == 50);
  }
  CHECK(tr.actual.size() == t.samples.size());
}

TEST_CASE("overlay of the oracle coincides with the trial") {
  Gen g(8);
  const Trial t = g.trial(2, 3, 900);
  const OverlayTrace tr = overlay(Oracle(), t, 0.5, 40);
  for (const auto& seg : tr.segments)
    for (std::size_t s = 0; s < 40; ++s) CHECK(seg.forecast.steps[s] == t.samples[seg.start_index + s]);
  std::stringstream ss;
  write_overlay_csv(ss, tr);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "trial_id,series,segment,t,vx,vy,vz");
  std::size_t actual_rows = 0;
  std::size_t forecast_rows = 0;
  for (std::string line; std::getline(ss, line);) {
    if (line.find(",actual,-1,") != std::string::npos) ++actual_rows;
    if (line.find(",forecast,") != std::string::npos) ++forecast_rows;
  }
  CHECK(actual_rows == 900);
  CHECK(forecast_rows == tr.segments.size() * 40);
}

TEST_CASE("overlay argument errors") {
  Gen g(9);
  const Trial t = g.trial(1, 1, 400);
  try {
    overlay(Hold(), t, 0.001, 50);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("invalid anchor period") != std::string::npos);
  }
  const Trial short_trial = g.trial(1, 1, 180);
  CHECK_THROWS_AS(overlay(Hold(), short_trial, 1.0, 50), Error);
}

TEST_CASE("robot surrogate: a motionless plan gives near-zero error for a hold model") {
  // Identity-on-last-sample network in scaled space.
  MlpModel m = init_mlp({900, 6}, Activation::kIdentity, 1);
  m.weights[0].setZero();
  for (Eigen::Index c = 0; c < 6; ++c) m.weights[0](c, 894 + c) = 1.0;
  const std::vector<std::vector<PlanSegment>> plans{{RestPhase{2.0}}};
  EvalOptions o;
  o.horizon = 50;
  const HorizonReport r = robot_in_loop_eval(m, default_robot_follower(), plans, o);
  CHECK(r.dataset_id == "robot-sim");
  CHECK(r.mse_v_mean(50) < 1e-20);
}

TEST_CASE("robot surrogate scores are finite for a stiffer, heavier follower") {
  MlpModel m = init_mlp(default_layer_dims(), Activation::kTanh, 2);
  EvalOptions o;
  o.horizon = 50;
  o.stride = 20;
  FollowerImpedance f = default_robot_follower();
  f.damping *= 2.0;
  const auto plans = default_robot_plans();
  const HorizonReport r = robot_in_loop_eval(m, f, plans, o);
  for (std::size_t s = 1; s <= 50; ++s) CHECK(std::isfinite(r.mse_v_mean(s)));
  CHECK(r.n_windows > 0);
}

TEST_CASE("robot follower lies outside the corpus jitter range") {
  const CorpusConfig c = default_corpus_config();
  const FollowerImpedance r = default_robot_follower();
  const double hi = 1.0 + c.jitter.impedance;
  CHECK((r.mass > c.follower.mass * hi || r.damping > c.follower.damping * hi ||
         r.stiffness < c.follower.stiffness * (2.0 - hi)));
}

TEST_CASE("report CSV round trip is exact") {
  Gen g(10);
  std::vector<HorizonReport> reports{fake_report("nn", 7, 0.1), fake_report("poly-8", 7, 0.3)};
  reports[1].dataset_id = "noisy";
  reports[0].per_step_mse[3][2] = g.uniform(0, 1);
  std::stringstream ss;
  write_report_csv(ss, reports);
  const auto back = read_report_csv(ss);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].predictor_id == reports[i].predictor_id);
    CHECK(back[i].dataset_id == reports[i].dataset_id);
    CHECK(back[i].n_windows == reports[i].n_windows);
    CHECK(back[i].per_step_mse == reports[i].per_step_mse);
  }
}

TEST_CASE("report CSV errors") {
  std::stringstream bad("nope\n");
  CHECK_THROWS_AS(read_report_csv(bad), Error);
  std::stringstream short_line(
      "predictor,dataset,step,mse_vx,mse_vy,mse_vz,mse_v_mean,mse_ax,mse_ay,mse_az,n_windows\nnn,v,1,0\n");
  try {
    read_report_csv(short_line);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kFormat);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("shipped run config spells out the run-all defaults") {
  const RunConfig shipped = load_run_config(std::string(INTENT_SOURCE_DIR) + "/configs/run_default.json");
  const RunConfig defaults = default_run_config();
  CHECK(train_config_to_json(shipped.train) == train_config_to_json(defaults.train));
  CHECK(shipped.split_seed == defaults.split_seed);
  CHECK(shipped.train_fraction == defaults.train_fraction);
  CHECK(shipped.eval_stride == defaults.eval_stride);
  CHECK(shipped.eval_noise.std == defaults.eval_noise.std);
  CHECK(shipped.eval_noise.seed == defaults.eval_noise.seed);
  CHECK(shipped.robot_follower.mass == defaults.robot_follower.mass);
  CHECK(shipped.robot_follower.damping == defaults.robot_follower.damping);
  CHECK(shipped.robot_follower.stiffness == defaults.robot_follower.stiffness);
}
