#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "uwbloc/error.hpp"
#include "uwbloc/geometry.hpp"
#include "uwbloc/ranging.hpp"
#include "uwbloc/scenario_io.hpp"
#include "uwbloc/simulation.hpp"
#include "uwbloc/tracking.hpp"

namespace uwbloc::cli {
namespace {

constexpr int kDomainError = 2;
constexpr int kIoError = 1;

/// Renders into memory first so a failed run never leaves a partial file.
void write_output(const std::string& path, std::ostream& out,
                  const std::function<void(std::ostream&)>& render) {
  std::ostringstream buffer;
  render(buffer);
  if (path.empty() || path == "-") {
    out << buffer.str();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file << buffer.str();
  file.close();
  if (!file) throw Error(ErrorCode::Io, fmt::format("cannot write {}", path));
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

struct Options {
  double r1 = 0.0;
  double r2 = 0.0;
  double baseline = 1.85;
  double sigma_e = ranging::NoiseModel{}.sigma_e;
  std::uint64_t seed = 1;
  std::size_t n = 200;
  std::vector<double> distances;
  std::string mode = "DS";
  std::string output;
  // coverage-map
  double extent = 60.0;
  double step = 1.0;
  double front_range = geometry::AnchorLayout{}.front_range;
  double front_halfangle = geometry::AnchorLayout{}.front_halfangle;
  double side_range = geometry::AnchorLayout{}.side_range;
  // side-test
  double lateral = 5.0;
  double min_confidence = tracking::kDefaultMinConfidence;
  std::string report;
  // vptl-sim
  std::string scenario;
  std::string timeline;
  std::optional<std::uint64_t> seed_override;
};

geometry::AnchorLayout layout_from(const Options& o) {
  auto layout = geometry::AnchorLayout::with_baseline(o.baseline);
  layout.front_range = o.front_range;
  layout.front_halfangle = o.front_halfangle;
  layout.side_range = o.side_range;
  layout.occlusion_start = std::max(layout.occlusion_start, layout.front_halfangle);
  return layout;
}

ranging::NoiseModel noise_from(const Options& o) {
  ranging::NoiseModel noise;
  noise.sigma_e = o.sigma_e;
  noise.validate();
  return noise;
}

int cmd_triangulate(const Options& o, std::ostream& out) {
  const auto layout = geometry::AnchorLayout::with_baseline(o.baseline);
  const auto p = geometry::triangulate(layout, {o.r1, o.r2});
  out << fmt::format("x_k={:.6f} y_k={:.6f}\n", p.x_k, p.y_k);
  return 0;
}

int cmd_error_profile(const Options& o, std::ostream& out) {
  require(o.n >= 1, "--n must be at least 1");
  const auto layout = layout_from(o);
  layout.validate();
  const auto& grid = o.distances.empty() ? ranging::kDefaultProfileGrid : o.distances;
  const auto profile = ranging::error_profile(layout, grid, o.n, noise_from(o), o.seed,
                                              ranging::parse_ranging_mode(o.mode));
  write_output(o.output, out, [&](std::ostream& s) { ranging::write_csv(s, profile); });
  return 0;
}

int cmd_coverage_map(const Options& o, std::ostream& out) {
  require(o.step > 0.0 && o.extent > 0.0, "--step and --extent must be positive");
  const auto layout = layout_from(o);
  layout.validate();
  const auto cells = static_cast<long>(std::floor(o.extent / o.step + 1e-9));
  write_output(o.output, out, [&](std::ostream& s) {
    s << "x,y,status\n";
    for (long iy = -cells; iy <= cells; ++iy) {
      for (long ix = -cells; ix <= cells; ++ix) {
        const geometry::Point p{static_cast<double>(ix) * o.step,
                                static_cast<double>(iy) * o.step};
        s << fmt::format("{:.6g},{:.6g},{}\n", p.x, p.y,
                         geometry::to_string(geometry::coverage(layout, p)));
      }
    }
  });
  return 0;
}

int cmd_side_test(const Options& o, std::ostream& out) {
  require(o.n >= 2, "--n must be at least 2");
  const auto layout = layout_from(o);
  layout.validate();
  tracking::SideTestConfig config;
  config.lateral = o.lateral;
  if (!o.distances.empty()) config.distances = o.distances;
  config.n = o.n;
  config.noise = noise_from(o);
  config.seed = o.seed;
  config.min_confidence = o.min_confidence;
  config.mode = ranging::parse_ranging_mode(o.mode);
  const auto rows = tracking::side_test(layout, config);

  if (!o.output.empty()) {
    write_output(o.output, out, [&](std::ostream& s) { tracking::write_scatter_csv(s, rows); });
  }
  write_output(o.report, out, [&](std::ostream& s) { tracking::write_side_report(s, rows); });
  return 0;
}

int cmd_vptl_sim(const Options& o, std::ostream& out) {
  auto scenario = vptl::load_scenario(o.scenario);
  if (o.seed_override) scenario.seed = *o.seed_override;
  const auto result = vptl::run_scenario(scenario);
  write_output(o.output, out, [&](std::ostream& s) { result.write_log(s); });
  if (!o.timeline.empty()) {
    write_output(o.timeline, out, [&](std::ostream& s) { result.write_timeline(s); });
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-anchor UWB localization and virtual pedestrian traffic light tools"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Options o;

  auto* tri = app.add_subcommand("triangulate", "Locate a tag from its two anchor ranges");
  tri->add_option("--r1", o.r1, "Range to the left anchor [m]")->required();
  tri->add_option("--r2", o.r2, "Range to the right anchor [m]")->required();
  tri->add_option("--baseline", o.baseline, "Anchor separation [m]");

  auto add_noise = [&](CLI::App* cmd) {
    cmd->add_option("--baseline", o.baseline, "Anchor separation [m]");
    cmd->add_option("--sigma-e", o.sigma_e, "Ranging error std [m]");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--n", o.n, "Measurements per location");
    cmd->add_option("--mode", o.mode, "Ranging mode (SS, DS, AA)");
  };

  auto* profile = app.add_subcommand("error-profile", "Std of x and y versus distance");
  add_noise(profile);
  profile->add_option("--distances", o.distances, "Forward distances [m]")->delimiter(',');
  profile->add_option("--output", o.output, "CSV path (stdout if omitted)");

  auto* cover = app.add_subcommand("coverage-map", "Rasterize the anchor coverage model");
  cover->add_option("--baseline", o.baseline, "Anchor separation [m]");
  cover->add_option("--extent", o.extent, "Half-width of the square grid [m]");
  cover->add_option("--step", o.step, "Grid spacing [m]");
  cover->add_option("--front-range", o.front_range, "Front coverage range [m]");
  cover->add_option("--front-halfangle", o.front_halfangle, "Front half-angle [deg]");
  cover->add_option("--side-range", o.side_range, "Side coverage range [m]");
  cover->add_option("--output", o.output, "CSV path (stdout if omitted)");

  auto* side = app.add_subcommand("side-test", "Left/right separation experiment");
  add_noise(side);
  side->add_option("--lateral", o.lateral, "Lateral offset of each tag [m]");
  side->add_option("--distance,--distances", o.distances, "Forward distances [m]")
      ->delimiter(',');
  side->add_option("--min-confidence", o.min_confidence, "Side test confidence");
  side->add_option("--output", o.output, "Scatter CSV path");
  side->add_option("--report", o.report, "Report path (stdout if omitted)");

  auto* sim = app.add_subcommand("vptl-sim", "Run an intersection scenario");
  sim->add_option("scenario,--scenario", o.scenario, "Scenario JSON file")->required();
  sim->add_option("--output", o.output, "Event log path (stdout if omitted)");
  sim->add_option("--timeline", o.timeline, "Phase timeline CSV path");
  sim->add_option("--seed", o.seed_override, "Override the scenario seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*tri) return cmd_triangulate(o, out);
    if (*profile) return cmd_error_profile(o, out);
    if (*cover) return cmd_coverage_map(o, out);
    if (*side) return cmd_side_test(o, out);
    if (*sim) return cmd_vptl_sim(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Io ? kIoError : kDomainError;
  }
  return kDomainError;
}

}  // namespace uwbloc::cli
