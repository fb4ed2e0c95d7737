// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "intent/error.hpp"
#include "intent/eval.hpp"
#include "intent/mlp.hpp"
#include "intent/pipeline.hpp"
#include "intent/poly.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace intent;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void gradient_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240501);
  std::normal_distribution<double> normal;
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int networks = 24;
  std::size_t checked = 0;
  std::size_t bad = 0;
  double worst = 0;
  for (int n = 0; n < networks; ++n) {
    std::vector<Eigen::Index> dims{pick(2, 12)};
    for (int h = pick(1, 3); h > 0; --h) dims.push_back(pick(2, 10));
    dims.push_back(pick(1, 6));
    MlpModel m = init_mlp(dims, Activation::kTanh, rng());
    for (auto& b : m.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.3 * normal(rng);
    TrainBatch batch;
    const Eigen::Index cols = pick(1, 8);
    batch.inputs = Eigen::MatrixXd::NullaryExpr(dims.front(), cols, [&] { return normal(rng); });
    batch.targets = Eigen::MatrixXd::NullaryExpr(dims.back(), cols, [&] { return normal(rng); });
    const LossGradients lg = loss_and_gradients(m, batch);
    const double h = 1e-5;
    auto probe = [&](double& p, double analytic) {
      const double saved = p;
      p = saved + h;
      const double up = loss_and_gradients(m, batch).loss;
      p = saved - h;
      const double down = loss_and_gradients(m, batch).loss;
      p = saved;
      const double fd = (up - down) / (2 * h);
      const double err = std::abs(fd - analytic);
      const double tol = std::max(1e-4 * std::abs(fd), 1e-6);
      worst = std::max(worst, err / tol);
      ++checked;
      if (err > tol) ++bad;
    };
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
      for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) probe(m.weights[l].data()[i], lg.gradients.weights[l].data()[i]);
      for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) probe(m.biases[l].data()[i], lg.gradients.biases[l].data()[i]);
    }
  }
  const double secs = seconds_since(t0);
  verdict(1, bad == 0 && secs < 60.0,
          std::to_string(networks) + " networks, " + std::to_string(checked) + " components, " +
              std::to_string(bad) + " outside tolerance, worst error/tolerance " + num(worst) + ", " + num(secs) + " s");
}

void polynomial_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::size_t bad = 0;
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int degree = static_cast<int>(rng() % 9);
    std::array<std::vector<double>, kChannels> c;
    for (auto& v : c)
      for (int i = 0; i <= degree; ++i) v.push_back(coef(rng));
    // Polynomial in u = step / 149 with u = 0 at the newest history sample.
    auto value = [&](std::size_t ch, double step) {
      const double u = step / 149.0;
      double acc = 0;
      for (std::size_t i = c[ch].size(); i-- > 0;) acc = acc * u + c[ch][i];
      return acc;
    };
    std::vector<TrajectorySample> history(kHistoryLength);
    for (std::size_t i = 0; i < kHistoryLength; ++i)
      for (std::size_t ch = 0; ch < kChannels; ++ch) history[i][ch] = value(ch, static_cast<double>(i) - 149.0);
    const Forecast f = extrapolate(fit_poly(history, kDefaultPolyDegree), kMaxHorizon, kNominalRateHz);
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      double scale = 0;
      for (int s = -149; s <= 100; ++s) scale = std::max(scale, std::abs(value(ch, s)));
      for (std::size_t s = 0; s < kMaxHorizon; ++s) {
        const double rel = std::abs(f.steps[s][ch] - value(ch, static_cast<double>(s + 1))) / scale;
        worst = std::max(worst, rel);
        if (rel > 1e-8) ++bad;
      }
    }
  }
  const double secs = seconds_since(t0);
  verdict(2, bad == 0 && secs < 10.0,
          "100 polynomials, worst relative error " + num(worst) + ", " + std::to_string(bad) +
              " values outside 1e-8, " + num(secs) + " s");
}

// File contents with the wall-clock fields of JSON reports removed.
std::string comparable_contents(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (p.extension() == ".json") {
    nlohmann::json j = nlohmann::json::parse(bytes);
    if (j.contains("stages"))
      for (auto& s : j["stages"]) s.erase("wall_time_s");
    return j.dump();
  }
  return bytes;
}

bool all_finite(const HorizonReport& r) {
  for (const auto& row : r.per_step_mse)
    for (double v : row)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
  fs::create_directories(work);

  gradient_check();
  polynomial_oracle();

  const RunConfig config = default_run_config();
  RunAllResult run;
  double run_secs = 0;
  try {
    const auto t0 = Clock::now();
    run = run_all((work / "run1").string(), config);
    run_secs = seconds_since(t0);
  } catch (const std::exception& e) {
    std::cout << "run-all failed: " << e.what() << std::endl;
    for (int id = 3; id <= 10; ++id) verdict(id, false, "run-all did not complete");
    return 1;
  }
  std::cout << "run-all completed in " << num(run_secs) << " s" << std::endl;

  // 3: headline number.
  const double val50 = run.nn_validation.mse_v_mean(50);
  verdict(3, val50 <= 0.02 && run_secs <= 7200.0,
          "validation velocity MSE at step 50 = " + num(val50) + " (m/s)^2 (bound 0.02), run-all " + num(run_secs) +
              " s");

  // 4: validation / train ratio.
  {
    double lo = 1e300;
    double hi = 0;
    std::size_t worst_step = 0;
    bool ok = true;
    for (std::size_t s = 1; s <= 50; ++s) {
      const double r = run.nn_validation.mse_v_mean(s) / run.nn_train.mse_v_mean(s);
      if (r < lo) lo = r;
      if (r > hi) {
        hi = r;
        worst_step = s;
      }
      if (!(r >= 0.8 && r <= 1.25)) ok = false;
    }
    verdict(4, ok,
            "validation/train ratio over steps 1-50 in [" + num(lo) + ", " + num(hi) + "], maximum at step " +
                std::to_string(worst_step) + " (bound [0.8, 1.25])");
  }

  // 5: degradation shape.
  {
    const HorizonReport& v = run.nn_validation;
    const double early = v.mean_v_over(1, 50);
    bool ok = true;
    std::size_t first_bad = 0;
    for (std::size_t s = 51; s <= 100; ++s) {
      if (!(v.mse_v_mean(s) > early)) {
        ok = false;
        if (first_bad == 0) first_bad = s;
      }
    }
    const double factor = v.mse_v_mean(100) / early;
    ok = ok && factor >= 2.0;
    verdict(5, ok,
            "mean MSE steps 1-50 = " + num(early) + ", step 100 = " + num(v.mse_v_mean(100)) + " (" + num(factor) +
                "x)" + (first_bad ? ", step " + std::to_string(first_bad) + " not above the early mean" : ""));
  }

  // 6: noise robustness.
  {
    const double poly_noisy = run.poly_noisy.mse_v_mean(100);
    const double nn_noisy = run.nn_noisy.mse_v_mean(100);
    const double poly_clean = run.poly_validation.mse_v_mean(100);
    const double nn_factor = run.nn_noisy.mse_v_mean(50) / run.nn_validation.mse_v_mean(50);
    const double poly_factor = poly_noisy / poly_clean;
    verdict(6, poly_noisy > nn_noisy && poly_factor >= 10.0 && nn_factor <= 3.0,
            "noisy step 100: poly " + num(poly_noisy) + " vs nn " + num(nn_noisy) + "; poly noise factor " +
                num(poly_factor) + " (>= 10); nn noise factor at step 50 " + num(nn_factor) + " (<= 3)");
  }

  // 7: curriculum benefit, no divergence.
  {
    const double curriculum = run.nn_validation.mse_v_mean(50);
    const double base = run.base_validation.mse_v_mean(50);
    const bool finite = all_finite(run.nn_validation);
    verdict(7, curriculum <= base && finite,
            "step 50: curriculum " + num(curriculum) + " vs stage-0 " + num(base) + "; " +
                std::to_string(run.nn_validation.n_windows) + " validation rollouts, " +
                (finite ? "0 diverged" : "non-finite errors"));
  }

  // 8: robot-in-the-loop surrogate.
  {
    const FollowerImpedance f = config.robot_follower;
    const double robot50 = run.robot.mse_v_mean(50);
    const double ratio = robot50 / val50;
    verdict(8, all_finite(run.robot) && ratio <= 4.0,
            "follower m=" + num(f.mass) + " b=" + num(f.damping) + " k=" + num(f.stiffness) + ", " +
                std::to_string(run.robot.n_windows) + " rollouts, step-50 MSE " + num(robot50) + " = " + num(ratio) +
                "x validation (bound 4)");
  }

  // 9: determinism.
  try {
    run_all((work / "run2").string(), config);
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (const auto& entry : fs::directory_iterator(work / "run1")) {
      const fs::path other = work / "run2" / entry.path().filename();
      ++compared;
      if (!fs::exists(other) || comparable_contents(entry.path()) != comparable_contents(other)) {
        differing.push_back(entry.path().filename().string());
      }
    }
    std::string detail = std::to_string(compared) + " files compared, " + std::to_string(differing.size()) + " differ";
    for (const auto& d : differing) detail += " " + d;
    verdict(9, differing.empty() && compared > 0, detail);
  } catch (const std::exception& e) {
    verdict(9, false, std::string("second run failed: ") + e.what());
  }

  // 10: acceleration channels.
  if (run.ablation_validation) {
    const double vel_only = run.ablation_validation->mse_v_mean(50);
    verdict(10, vel_only >= val50,
            "step 50: velocity-only " + num(vel_only) + " vs full " + num(val50) + ", ratio " + num(vel_only / val50));
  } else {
    verdict(10, false, "ablation was not run");
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
