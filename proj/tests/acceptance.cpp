// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cli.hpp"
#include "support/scenarios.hpp"
#include "uwbloc/geometry.hpp"
#include "uwbloc/ranging.hpp"
#include "uwbloc/simulation.hpp"
#include "uwbloc/tracking.hpp"

namespace {

using namespace uwbloc;
namespace fs = std::filesystem;

struct Verdict {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double budget_s;
  std::function<Verdict()> check;
};

Verdict frontal_sensitivity() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> half(0.2, 2.0);
  std::uniform_real_distribution<double> factor(2.0, 60.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = half(rng);
    double r = 2.0 * x * factor(rng);
    if (r <= 2.0 * x) r = 2.0 * x * 1.01;
    const auto layout = geometry::AnchorLayout::with_baseline(2.0 * x);
    const geometry::RangePair rp{r, r};
    const double h = 1e-5 * r;
    using geometry::Perturbation;
    const double dx = (geometry::perturbed_triangulate(layout, rp, h, Perturbation::WorstCaseX).x_k -
                       geometry::perturbed_triangulate(layout, rp, -h, Perturbation::WorstCaseX).x_k) /
                      (2.0 * h);
    const double dy = (geometry::perturbed_triangulate(layout, rp, h, Perturbation::WorstCaseY).y_k -
                       geometry::perturbed_triangulate(layout, rp, -h, Perturbation::WorstCaseY).y_k) /
                      (2.0 * h);
    const auto s = geometry::sensitivity_frontal(layout, r);
    worst = std::max({worst, std::abs(dx - s.dx_de) / std::abs(s.dx_de),
                      std::abs(dy - s.dy_de) / std::abs(s.dy_de)});
  }
  return {worst <= 1e-6, fmt::format("max relative error {:.3g}", worst)};
}

struct ProfileShape {
  double r2 = 0.0;
  double slope = 0.0;
  double slope_err = 0.0;
  double y_lo = INFINITY;
  double y_hi = 0.0;
  double at50 = 0.0;

  bool ok() const {
    return r2 >= 0.98 && slope_err <= 0.10 && y_lo >= 0.8 && y_hi <= 1.3 && at50 >= 0.85 &&
           at50 <= 1.15;
  }
};

ProfileShape profile_shape(std::uint64_t seed) {
  const geometry::AnchorLayout layout;
  const ranging::NoiseModel noise;
  const auto profile =
      ranging::error_profile(layout, ranging::kDefaultProfileGrid, 200, noise, seed);
  const auto& rows = profile.rows;
  const double n = static_cast<double>(rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& row : rows) {
    sx += row.distance;
    sy += row.std_x;
    sxx += row.distance * row.distance;
    sxy += row.distance * row.std_x;
  }
  ProfileShape shape;
  shape.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - shape.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (const auto& row : rows) {
    const double fit = intercept + shape.slope * row.distance;
    ss_res += (row.std_x - fit) * (row.std_x - fit);
    ss_tot += (row.std_x - sy / n) * (row.std_x - sy / n);
    shape.y_lo = std::min(shape.y_lo, row.std_y / noise.sigma_e);
    shape.y_hi = std::max(shape.y_hi, row.std_y / noise.sigma_e);
  }
  shape.r2 = 1.0 - ss_res / ss_tot;
  const double expected = noise.sigma_e / layout.half_baseline;
  shape.slope_err = std::abs(shape.slope - expected) / expected;
  shape.at50 = intercept + shape.slope * 50.0;
  return shape;
}

Verdict error_profile_shape() {
  const auto s = profile_shape(1);
  // Context only: how often the same check holds over other seeds.
  int passing = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) passing += profile_shape(seed).ok() ? 1 : 0;
  return {s.ok(), fmt::format("seed 1: R2={:.4f} slope={:.5f} (off {:.1f}%) "
                              "std_y/sigma in [{:.3f},{:.3f}] std_x@50m={:.3f}; "
                              "seeds 1-200 meeting all bounds: {}/200",
                              s.r2, s.slope, 100.0 * s.slope_err, s.y_lo, s.y_hi, s.at50,
                              passing)};
}

Verdict side_separation() {
  const geometry::AnchorLayout layout;
  int failures = 0;
  std::string first;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    tracking::SideTestConfig config;
    config.seed = seed;
    for (const auto& row : tracking::side_test(layout, config)) {
      if (!row.separated || !row.correctly_classified()) {
        if (failures++ == 0) first = fmt::format(" first: seed {} at {} m", seed, row.distance);
      }
    }
  }
  return {failures == 0, fmt::format("{} failing rows over 100 seeds x 3 distances{}", failures,
                                     first)};
}

Verdict round_trip() {
  const geometry::AnchorLayout layout;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> xs(-60.0, 60.0);
  std::uniform_real_distribution<double> ys(0.05, 60.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const geometry::Point truth{xs(rng), ys(rng)};
    const auto rp = geometry::ranges_to(layout, truth);
    const auto p = geometry::triangulate(layout, rp);
    const auto back = geometry::ranges_to(layout, {p.x_k, p.y_k});
    worst = std::max({worst, std::abs(back.r1 - rp.r1) / rp.r1, std::abs(back.r2 - rp.r2) / rp.r2});
  }
  return {worst <= 1e-9, fmt::format("max relative range error {:.3g}", worst)};
}

Verdict protocol_suite() {
  const auto suite = testing::protocol_suite();
  std::size_t violations = 0;
  std::string first;
  for (const auto& [name, sc] : suite) {
    const auto report = testing::check_invariants(sc, vptl::run_scenario(sc));
    if (!report.ok() && first.empty()) first = fmt::format(" first: {}: {}", name, report.violations[0]);
    violations += report.violations.size();
  }
  const auto sc = testing::pedestrian_outside_coverage();
  const auto runs = testing::pedestrian_phase_runs(vptl::run_scenario(sc));
  const long want = sc.timing.ticks(sc.timing.pedestrian_phase_fixed);
  const bool fixed_ok = runs.size() == 1 && runs[0] == want;
  return {suite.size() >= 20 && violations == 0 && fixed_ok,
          fmt::format("{} scenarios, {} violations, untrackable phase {} ticks (want {}){}",
                      suite.size(), violations, runs.empty() ? 0L : runs[0], want, first)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "uwbloc_acceptance";
  fs::create_directories(dir);
  const std::string scenario = (fs::path(UWBLOC_SCENARIO_DIR) / "rush.json").string();
  struct Job {
    std::string name;
    std::vector<std::string> args;  // "{out}" is replaced by the output path
  };
  const std::vector<Job> jobs{
      {"error-profile", {"error-profile", "--seed", "5", "--output", "{out}"}},
      {"side-test", {"side-test", "--seed", "5", "--output", "{out}"}},
      {"vptl-sim", {"vptl-sim", scenario, "--seed", "5", "--output", "{out}"}},
  };
  std::vector<std::string> differing;
  for (const auto& job : jobs) {
    std::string outputs[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path file = dir / fmt::format("{}_{}.out", job.name, k);
      auto args = job.args;
      for (auto& a : args) {
        if (a == "{out}") a = file.string();
      }
      std::ostringstream out, err;
      if (cli::run(args, out, err) != 0) {
        return {false, fmt::format("{} failed: {}", job.name, err.str())};
      }
      outputs[k] = slurp(file) + out.str();
    }
    if (outputs[0] != outputs[1] || outputs[0].empty()) differing.push_back(job.name);
  }
  fs::remove_all(dir);
  return {differing.empty(),
          differing.empty() ? "all outputs byte-identical"
                            : fmt::format("differs: {}", fmt::join(differing, ", "))};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "frontal sensitivity vs finite differences", 1.0, frontal_sensitivity},
      {2, "error-profile shape", 5.0, error_profile_shape},
      {3, "side-test separation, 100 seeds", 10.0, side_separation},
      {4, "triangulation round-trip, 10000 pairs", 1.0, round_trip},
      {5, "protocol safety and liveness", 30.0, protocol_suite},
      {6, "determinism of CLI outputs", 30.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = v.ok && in_time;
    failed += pass ? 0 : 1;
    fmt::print("{} [{}] {}: {} ({:.3f} s{})\n", pass ? "PASS" : "FAIL", c.number, c.name, v.detail,
               secs, in_time ? "" : fmt::format(", over {} s budget", c.budget_s));
  }
  return failed == 0 ? 0 : 1;
}
