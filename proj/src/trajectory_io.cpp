#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

#include "intent/error.hpp"
#include "intent/trajectory.hpp"

namespace intent {

namespace {

constexpr std::string_view kHeader = "dyad_id,trial_id,t,vx,vy,vz,ax,ay,az";

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
  fail(ErrorKind::kData, "trajectory CSV line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    row_error(line, std::string("cannot parse ") + name + " from '" + std::string(field) + "'");
  }
  return value;
}

// Rate from the median step, snapped to an integer when within round-off.
double estimate_rate(const std::vector<double>& times) {
  if (times.size() < 2) return kNominalRateHz;
  std::vector<double> steps(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) steps[i - 1] = times[i] - times[i - 1];
  std::nth_element(steps.begin(), steps.begin() + steps.size() / 2, steps.end());
  const double rate = 1.0 / steps[steps.size() / 2];
  const double snapped = std::round(rate);
  return std::abs(rate - snapped) <= 1e-6 * snapped ? snapped : rate;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<Trial> read_trajectory_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail(ErrorKind::kData, "trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    row_error(line_no, "expected header '" + std::string(kHeader) + "'");
  }

  std::vector<Trial> trials;
  std::vector<double> times;
  std::map<std::pair<std::int64_t, std::int64_t>, bool> seen;

  auto finish_trial = [&]() {
    if (trials.empty()) return;
    trials.back().sample_rate_hz = estimate_rate(times);
    times.clear();
  };

  std::array<std::string_view, 9> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::string_view rest(line);
    std::size_t n_fields = 0;
    while (true) {
      const std::size_t comma = rest.find(',');
      if (n_fields == fields.size()) row_error(line_no, "too many fields");
      fields[n_fields++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (n_fields != fields.size()) row_error(line_no, "expected 9 fields");

    const auto dyad = parse_field<std::int64_t>(fields[0], line_no, "dyad_id");
    const auto trial_id = parse_field<std::int64_t>(fields[1], line_no, "trial_id");
    const auto t = parse_field<double>(fields[2], line_no, "t");
    TrajectorySample s;
    for (std::size_t c = 0; c < kChannels; ++c) {
      s[c] = parse_field<double>(fields[3 + c], line_no, "channel value");
    }
    if (!std::isfinite(t) || !s.is_finite()) row_error(line_no, "non-finite value");

    const bool continues =
        !trials.empty() && trials.back().dyad_id == dyad && trials.back().trial_id == trial_id;
    if (!continues) {
      if (seen.contains({dyad, trial_id})) {
        row_error(line_no, "rows of (dyad " + std::to_string(dyad) + ", trial " +
                               std::to_string(trial_id) + ") are not contiguous");
      }
      finish_trial();
      seen[{dyad, trial_id}] = true;
      trials.push_back(Trial{dyad, trial_id, kNominalRateHz, {}});
    } else if (!(t > times.back())) {
      row_error(line_no, "time is not strictly increasing");
    }
    times.push_back(t);
    trials.back().samples.push_back(s);
  }
  finish_trial();
  return trials;
}

std::vector<Trial> load_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  return read_trajectory_csv(in);
}

void write_trajectory_csv(std::ostream& out, std::span<const Trial> trials) {
  out << kHeader << '\n';
  std::string row;
  for (const Trial& trial : trials) {
    const std::string prefix = std::to_string(trial.dyad_id) + ',' + std::to_string(trial.trial_id) + ',';
    for (std::size_t i = 0; i < trial.samples.size(); ++i) {
      row = prefix;
      row += format_double(static_cast<double>(i) / trial.sample_rate_hz);
      for (std::size_t c = 0; c < kChannels; ++c) {
        row += ',';
        row += format_double(trial.samples[i][c]);
      }
      row += '\n';
      out << row;
    }
  }
}

void save_trajectory_csv(const std::string& path, std::span<const Trial> trials) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  write_trajectory_csv(out, trials);
  out.flush();
  if (!out) fail(ErrorKind::kIo, "failed writing '" + path + "'");
}

}  // namespace intent
