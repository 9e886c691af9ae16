#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "support/scenarios.hpp"
#include "uwbloc/error.hpp"
#include "uwbloc/simulation.hpp"

namespace {

using namespace uwbloc::vptl;
namespace ts = uwbloc::testing;

std::size_t count_named(const SimulationResult& r, const std::string& name) {
  return static_cast<std::size_t>(std::count_if(
      r.events.begin(), r.events.end(), [&](const LogEvent& e) { return e.name == name; }));
}

std::string log_of(const SimulationResult& r) {
  std::ostringstream os;
  r.write_log(os);
  return os.str();
}

TEST(Simulation, EmptyScenarioOnlyHasMarkers) {
  const auto r = run_scenario(ts::empty_scenario());
  ASSERT_EQ(r.events.size(), 2u);
  EXPECT_EQ(r.events.front().kind, EventKind::SimStart);
  EXPECT_EQ(r.events.back().kind, EventKind::SimEnd);
  EXPECT_TRUE(r.messages.empty());
  EXPECT_TRUE(r.timeline.empty());
}

TEST(Simulation, TwoOrthogonalVehicles) {
  const auto sc = ts::two_orthogonal_vehicles();
  const auto r = run_scenario(sc);
  EXPECT_EQ(count_named(r, "elect"), 1u);
  EXPECT_GE(count_named(r, "phase"), 1u);
  EXPECT_EQ(count_named(r, "release"), 1u);
  for (const auto& v : r.vehicles) EXPECT_TRUE(v.cross_time.has_value()) << v.id;
  const auto report = ts::check_invariants(sc, r);
  EXPECT_TRUE(report.ok()) << report.violations.front();
}

TEST(Simulation, VehicleAndPedestrianGetsPedestrianPhase) {
  const auto sc = ts::vehicle_and_pedestrian();
  const auto r = run_scenario(sc);
  const bool vptl_handover = std::any_of(r.messages.begin(), r.messages.end(), [](auto& m) {
    const auto* h = std::get_if<Handover>(&m.message);
    return h != nullptr && h->to_role == Role::VptlLeader;
  });
  EXPECT_TRUE(vptl_handover);
  const bool active = std::any_of(r.timeline.begin(), r.timeline.end(), [](auto& row) {
    return row.phase.pedestrian == PedestrianSignal::Active;
  });
  EXPECT_TRUE(active);
  EXPECT_EQ(count_named(r, "pedestrian_crossed"), 1u);
  ASSERT_EQ(r.pedestrians.size(), 1u);
  EXPECT_TRUE(r.pedestrians[0].done_time.has_value());
  const auto report = ts::check_invariants(sc, r);
  EXPECT_TRUE(report.ok()) << report.violations.front();
}

TEST(Simulation, UntrackablePedestrianGetsFixedPhase) {
  const auto sc = ts::pedestrian_outside_coverage();
  const auto r = run_scenario(sc);
  EXPECT_GE(count_named(r, "pedestrian_untrackable"), 1u);
  const auto runs = ts::pedestrian_phase_runs(r);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0], sc.timing.ticks(sc.timing.pedestrian_phase_fixed));
}

TEST(Simulation, DeterministicLogs) {
  const auto sc = ts::rush_hour();
  EXPECT_EQ(log_of(run_scenario(sc)), log_of(run_scenario(sc)));
}

TEST(Simulation, InvariantsHoldAcrossSuite) {
  const auto suite = ts::protocol_suite();
  ASSERT_GE(suite.size(), 20u);
  for (const auto& [name, sc] : suite) {
    const auto r = run_scenario(sc);
    const auto report = ts::check_invariants(sc, r);
    EXPECT_TRUE(report.ok()) << name << ": " << report.violations.front();
    for (int n : r.leaders_per_tick) ASSERT_LE(n, 1) << name;
  }
}

TEST(Simulation, TimelineCsvHeader) {
  const auto r = run_scenario(ts::two_orthogonal_vehicles());
  std::ostringstream os;
  r.write_timeline(os);
  EXPECT_EQ(os.str().rfind("t,ns,ew,pedestrian\n", 0), 0u);
}

TEST(Simulation, InvalidScenarioRejected) {
  auto sc = ts::two_orthogonal_vehicles();
  sc.vehicles[1].id = sc.vehicles[0].id;
  EXPECT_THROW(run_scenario(sc), uwbloc::Error);
  sc = ts::two_orthogonal_vehicles();
  sc.timing.tick = 0.0;
  EXPECT_THROW(run_scenario(sc), uwbloc::Error);
}

}  // namespace
