#include <cmath>
#include <sstream>

#include "doctest.h"
#include "intent/error.hpp"
#include "intent/synthetic.hpp"
#include "support/generators.hpp"

using namespace intent;
using intent::testing::Gen;

namespace {

Eigen::Vector3d vec(double x, double y, double z) { return Eigen::Vector3d(x, y, z); }

// Closed-form quintic velocity and acceleration for a unit-normalised time s.
double mj_vel(double d, double T, double s) { return d / T * (30 * s * s - 60 * s * s * s + 30 * s * s * s * s); }
double mj_acc(double d, double T, double s) { return d / (T * T) * (60 * s - 180 * s * s + 120 * s * s * s); }

double peak_plan_speed(const std::vector<PlanSegment>& plan, double rate) {
  const MotionPlan p(plan);
  double peak = 0.0;
  for (double t = 0; t <= p.duration(); t += 1.0 / rate) peak = std::max(peak, p.evaluate(t).velocity.norm());
  return peak;
}

}  // namespace

TEST_CASE("min-jerk: endpoints at rest and peak speed 1.875 D / T") {
  const Trial t = gen_min_jerk({vec(1.0, 0.0, 0.0), 2.0}, 200.0);
  REQUIRE(t.samples.size() == 401);
  CHECK(t.samples.front().vx == doctest::Approx(0.0));
  CHECK(t.samples.front().ax == doctest::Approx(0.0));
  CHECK(std::abs(t.samples.back().vx) < 1e-12);
  CHECK(std::abs(t.samples.back().ax) < 1e-12);
  // Mid-point speed 1.875 * 1 / 2.
  CHECK(t.samples[200].vx == doctest::Approx(0.9375).epsilon(1e-12));
  CHECK(std::abs(t.samples[200].ax) < 1e-12);
  double peak = 0.0;
  for (const auto& s : t.samples) peak = std::max(peak, s.vx);
  CHECK(peak == doctest::Approx(0.9375).epsilon(1e-12));
}

TEST_CASE("min-jerk matches the quintic oracle for random segments") {
  Gen g(11);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Vector3d d = vec(g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-0.5, 0.5));
    const double T = g.uniform(0.2, 4.0);
    const Trial t = gen_min_jerk({d, T}, 200.0);
    const std::size_t intervals = t.samples.size() - 1;
    for (std::size_t i = 0; i <= intervals; i += 7) {
      const double s = static_cast<double>(i) / static_cast<double>(intervals);
      for (int c = 0; c < 3; ++c) {
        CHECK(t.samples[i][c] == doctest::Approx(mj_vel(d[c], T, s)).epsilon(1e-9).scale(1.0));
        CHECK(t.samples[i][3 + c] == doctest::Approx(mj_acc(d[c], T, s)).epsilon(1e-9).scale(1.0));
      }
    }
    CHECK(t.samples.front().is_finite());
    for (int c = 0; c < 6; ++c) {
      CHECK(std::abs(t.samples.front()[c]) < 1e-12);
      CHECK(std::abs(t.samples.back()[c]) < 1e-9);
    }
  }
}

TEST_CASE("min-jerk rejects degenerate durations") {
  CHECK_THROWS_AS(gen_min_jerk({vec(1, 0, 0), 0.0}, 200.0), Error);
  CHECK_THROWS_AS(gen_min_jerk({vec(1, 0, 0), 0.005}, 200.0), Error);
}

TEST_CASE("rest + min-jerk + rest gives 800 samples matching the analytic profile") {
  const std::vector<PlanSegment> plan{RestPhase{1.0}, MinJerkSegment{vec(1, 0, 0), 2.0}, RestPhase{1.0}};
  const Trial t = gen_trial(plan, 200.0);
  REQUIRE(t.samples.size() == 800);
  for (std::size_t i = 0; i < 800; ++i) {
    const double time = static_cast<double>(i) / 200.0;
    double v = 0.0;
    double a = 0.0;
    if (time > 1.0 && time < 3.0) {
      v = mj_vel(1.0, 2.0, (time - 1.0) / 2.0);
      a = mj_acc(1.0, 2.0, (time - 1.0) / 2.0);
    }
    CHECK(std::abs(t.samples[i].vx - v) < 1e-9);
    CHECK(std::abs(t.samples[i].ax - a) < 1e-9);
    CHECK(t.samples[i].vy == 0.0);
  }
}

TEST_CASE("zero-std noise and repeated noise are deterministic") {
  const std::vector<PlanSegment> plan{RestPhase{0.5}, MinJerkSegment{vec(0.5, 0.2, 0), 1.0}, RestPhase{0.5}};
  const Trial clean = gen_trial(plan, 200.0);
  const Trial zero = gen_trial(plan, 200.0, NoiseSpec{{0, 0, 0, 0, 0, 0}, 99});
  CHECK(zero.samples == clean.samples);
  const Trial a = gen_trial(plan, 200.0, NoiseSpec::standard(3));
  const Trial b = gen_trial(plan, 200.0, NoiseSpec::standard(3));
  const Trial c = gen_trial(plan, 200.0, NoiseSpec::standard(4));
  CHECK(a.samples == b.samples);
  CHECK(!(a.samples == c.samples));
  CHECK(!(a.samples == clean.samples));
}

TEST_CASE("noise has the requested per-channel deviation") {
  std::vector<TrajectorySample> s(20000);
  add_noise(s, NoiseSpec{{0.01, 0.02, 0.0, 0.1, 0.2, 0.3}, 5});
  const double want[6] = {0.01, 0.02, 0.0, 0.1, 0.2, 0.3};
  for (std::size_t c = 0; c < 6; ++c) {
    double ss = 0;
    for (const auto& x : s) ss += x[c] * x[c];
    const double sd = std::sqrt(ss / static_cast<double>(s.size()));
    CHECK(sd == doctest::Approx(want[c]).epsilon(0.03));
  }
}

TEST_CASE("too-short plans are rejected") {
  CHECK_THROWS_AS(gen_trial({RestPhase{0.5}}, 200.0), Error);
}

TEST_CASE("velocity jump without blend is a discontinuous plan") {
  try {
    MotionPlan p({ConstVelPhase{vec(0.5, 0, 0), 1.0, 0.0}, ConstVelPhase{vec(0.0, 0.5, 0), 1.0, 0.0}});
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    CHECK(std::string(e.what()).find("discontinuous plan") != std::string::npos);
  }
}

TEST_CASE("blended constant-velocity phases are continuous") {
  const std::vector<PlanSegment> plan{RestPhase{0.5}, ConstVelPhase{vec(0.6, 0, 0), 1.5, 0.4},
                                      ConstVelPhase{vec(0.0, 0.5, 0), 1.0, 0.4}, RestPhase{0.5}};
  const Trial t = gen_trial(plan, 200.0);
  for (std::size_t i = 1; i < t.samples.size(); ++i) {
    for (int c = 0; c < 3; ++c) CHECK(std::abs(t.samples[i][c] - t.samples[i - 1][c]) < 0.01);
  }
  CHECK(std::abs(t.samples.back().vx) < 1e-12);
  CHECK(std::abs(t.samples.back().vy) < 1e-12);
}

TEST_CASE("follower with k = 0 reduces to a first-order lag on the leader velocity") {
  // m dv/dt = b (vL - v): a step in vL decays with time constant m / b.
  const double m = 2.0;
  const double b = 20.0;
  const std::vector<PlanSegment> plan{ConstVelPhase{vec(1.0, 0, 0), 2.0, 0.0}};
  const Trial t = simulate_dyad(plan, {m, b, 0.0}, 200.0, 50);
  double worst = 0.0;
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    const double time = static_cast<double>(i) / 200.0;
    const double oracle = 1.0 - std::exp(-b / m * time);
    worst = std::max(worst, std::abs(t.samples[i].vx - oracle));
  }
  CHECK(worst < 5e-3);
}

TEST_CASE("halving the integration step changes the trajectory by less than 1e-3") {
  const std::vector<PlanSegment> plan{RestPhase{0.5}, MinJerkSegment{vec(1.0, -0.5, 0.1), 1.8}, RestPhase{0.7}};
  const FollowerImpedance f{8.0, 60.0, 100.0};
  const Trial coarse = simulate_dyad(plan, f, 200.0, 10);
  const Trial fine = simulate_dyad(plan, f, 200.0, 20);
  REQUIRE(coarse.samples.size() == fine.samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < coarse.samples.size(); ++i) {
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(coarse.samples[i][c] - fine.samples[i][c]));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("bounded plans give bounded object motion") {
  Gen g(21);
  for (int rep = 0; rep < 20; ++rep) {
    const std::vector<PlanSegment> plan{
        RestPhase{g.uniform(0.2, 1.0)},
        MinJerkSegment{vec(g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-0.3, 0.3)), g.uniform(0.8, 3.0)},
        ConstVelPhase{vec(g.uniform(-1, 1), g.uniform(-1, 1), 0.0), g.uniform(0.5, 2.0), g.uniform(0.1, 0.5)},
        RestPhase{g.uniform(0.2, 1.0)}};
    const FollowerImpedance f{g.uniform(1.0, 30.0), g.uniform(1.0, 200.0), g.uniform(0.0, 300.0)};
    const Trial t = simulate_dyad(plan, f, 200.0);
    const double limit = 10.0 * peak_plan_speed(plan, 200.0);
    for (const auto& s : t.samples) {
      CHECK(s.is_finite());
      CHECK(std::sqrt(s.vx * s.vx + s.vy * s.vy + s.vz * s.vz) <= limit);
    }
  }
}

TEST_CASE("default corpus has 720 trials of 20 dyads") {
  const CorpusConfig config = default_corpus_config();
  CHECK(config.dyads == 20);
  CHECK(config.repetitions == 3);
  CHECK(config.tasks.size() == 12);
  const auto corpus = make_corpus(config);
  CHECK(corpus.size() == 720);
  CHECK(dyad_ids(corpus).size() == 20);
  double peak = 0.0;
  for (const auto& t : corpus) {
    CHECK(t.samples.size() >= 200);
    for (const auto& s : t.samples) peak = std::max(peak, std::hypot(s.vx, s.vy, s.vz));
  }
  // Peak speeds of order 1 m/s.
  CHECK(peak > 0.5);
  CHECK(peak < 2.5);
}

TEST_CASE("corpus generation is deterministic and dyads differ") {
  CorpusConfig config = default_corpus_config();
  config.dyads = 3;
  config.repetitions = 1;
  const auto a = make_corpus(config);
  const auto b = make_corpus(config);
  std::stringstream sa;
  std::stringstream sb;
  write_trajectory_csv(sa, a);
  write_trajectory_csv(sb, b);
  CHECK(sa.str() == sb.str());
  const FollowerImpedance f1 = dyad_follower(config, 1);
  const FollowerImpedance f2 = dyad_follower(config, 2);
  CHECK(f1.stiffness != f2.stiffness);
  CHECK(a[0].samples != a[12].samples);  // same task, different dyad
}

TEST_CASE("a one-dyad corpus cannot be split downstream") {
  CorpusConfig config = default_corpus_config();
  config.dyads = 1;
  config.repetitions = 1;
  const auto corpus = make_corpus(config);
  try {
    split_by_dyad(corpus, 0.75, 1);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("cannot split") != std::string::npos);
  }
}

TEST_CASE("corpus config round trips through JSON") {
  CorpusConfig config = default_corpus_config();
  config.dyads = 4;
  config.seed = 77;
  config.follower.damping = 55.0;
  const CorpusConfig back = parse_corpus_config(corpus_config_to_json(config));
  CHECK(back.dyads == 4);
  CHECK(back.seed == 77);
  CHECK(back.follower.damping == 55.0);
  CHECK(back.tasks.size() == config.tasks.size());
  CHECK(back.noise.has_value() == config.noise.has_value());
}

TEST_CASE("a too-short task names the trial") {
  const std::string json = R"({"dyads": 2, "repetitions": 1, "tasks": [
      {"name": "blip", "segments": [{"type": "rest", "duration": 0.4}]}]})";
  try {
    make_corpus(parse_corpus_config(json));
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    CHECK(std::string(e.what()).find("blip") != std::string::npos);
  }
}

TEST_CASE("bad corpus config is a config error") {
  CHECK_THROWS_AS(parse_corpus_config("{\"dyads\": \"many\"}"), Error);
  CHECK_THROWS_AS(parse_corpus_config("not json"), Error);
  CHECK_THROWS_AS(parse_corpus_config(R"({"tasks": [{"name": "x", "segments": [{"type": "spin"}]}]})"), Error);
}

TEST_CASE("differentiating plan positions reproduces velocities to second order") {
  const MotionPlan plan({RestPhase{0.3}, MinJerkSegment{vec(1.2, -0.4, 0.2), 1.6}, ConstVelPhase{vec(0.4, 0.2, 0), 1.0, 0.3},
                         RestPhase{0.3}});
  auto worst_error = [&](double h) {
    double worst = 0.0;
    for (double t = 0.4; t < 1.8; t += 0.01) {
      const Eigen::Vector3d fd = (plan.evaluate(t + h).position - plan.evaluate(t - h).position) / (2 * h);
      worst = std::max(worst, (fd - plan.evaluate(t).velocity).norm());
    }
    return worst;
  };
  const double e1 = worst_error(0.005);
  const double e2 = worst_error(0.0025);
  CHECK(e1 < 1e-3);
  // Halving the step divides the error by about four.
  CHECK(e2 < e1 / 3.0);
}
