#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "uwbloc/error.hpp"
#include "uwbloc/vptl.hpp"

namespace {

using namespace uwbloc::vptl;
using uwbloc::Error;
using uwbloc::ErrorCode;

VehicleAgent car(int id, Direction d, double dist, double speed = 10.0) {
  VehicleAgent v;
  v.id = id;
  v.direction = d;
  v.distance_to_stopline = dist;
  v.speed = speed;
  return v;
}

PedestrianAgent walker(int id, Point at) {
  PedestrianAgent p;
  p.id = id;
  p.tag_id = id;
  p.position = at;
  return p;
}

TEST(Frames, HeadingsAndPositions) {
  const IntersectionGeometry g;
  const auto v = car(1, Direction::South, 20.0);
  const Point pos = vehicle_position(g, v);
  EXPECT_DOUBLE_EQ(pos.x, 1.75);
  EXPECT_DOUBLE_EQ(pos.y, -30.0);
  const Point ahead = to_vehicle_frame(g, v, {1.75, 0.0});
  EXPECT_NEAR(ahead.x, 0.0, 1e-12);
  EXPECT_NEAR(ahead.y, 30.0, 1e-12);
  const Point right = to_vehicle_frame(g, v, {5.75, -30.0});
  EXPECT_NEAR(right.x, 4.0, 1e-12);
  EXPECT_NEAR(right.y, 0.0, 1e-12);

  for (auto d : {Direction::North, Direction::South, Direction::East, Direction::West}) {
    const Point h = heading(d);
    const Point r = right_of(d);
    EXPECT_DOUBLE_EQ(h.x * r.x + h.y * r.y, 0.0);
    EXPECT_EQ(orthogonal(orthogonal(axis_of(d))), axis_of(d));
    EXPECT_EQ(parse_direction(to_string(d)), d);
  }
}

TEST(PhaseState, Safety) {
  EXPECT_TRUE(PhaseState{}.safe());
  EXPECT_TRUE(PhaseState::serving(Axis::NS).safe());
  EXPECT_TRUE(PhaseState::pedestrian_phase().safe());
  EXPECT_FALSE((PhaseState{Signal::Green, Signal::Green, PedestrianSignal::Inactive}.safe()));
  EXPECT_FALSE((PhaseState{Signal::Green, Signal::Red, PedestrianSignal::Active}.safe()));
  EXPECT_EQ(PhaseState::serving(Axis::EW).signal_for(Axis::EW), Signal::Green);
}

TEST(SenseConflict, OrthogonalVehicles) {
  World w;
  w.vehicles = {car(1, Direction::North, 40), car(2, Direction::East, 30)};
  const auto r = sense_conflict(w);
  EXPECT_TRUE(r.vehicle_vehicle);
  EXPECT_FALSE(r.vehicle_pedestrian);
  EXPECT_EQ(r.candidates.size(), 2u);
}

TEST(SenseConflict, SameAxisIsNoConflict) {
  World w;
  w.vehicles = {car(1, Direction::North, 40), car(2, Direction::South, 30)};
  const auto r = sense_conflict(w);
  EXPECT_FALSE(r.any());
  EXPECT_TRUE(r.candidates.empty());
}

TEST(SenseConflict, OutOfRangeAndPassedVehiclesIgnored) {
  World w;
  w.comm_range = 100;
  w.vehicles = {car(1, Direction::North, 40), car(2, Direction::East, 95),
                car(3, Direction::West, -2)};
  EXPECT_FALSE(sense_conflict(w).any());
}

TEST(SenseConflict, WaitingPedestrianWithinDetectionRange) {
  World w;
  w.vehicles = {car(1, Direction::South, 20)};
  w.pedestrians = {walker(5, {0.0, 12.0}), walker(6, {0.0, 200.0})};
  const auto r = sense_conflict(w);
  EXPECT_TRUE(r.vehicle_pedestrian);
  ASSERT_EQ(r.waiting_pedestrians.size(), 1u);
  EXPECT_EQ(r.waiting_pedestrians[0], 5);

  w.pedestrians[0].intent = Intent::Crossing;
  EXPECT_FALSE(sense_conflict(w).any());
}

TEST(Election, LowestIdAmongNearest) {
  const std::vector<Candidate> c{{7, 12.0}, {3, 12.0}, {12, 30.0}};
  EXPECT_EQ(select_leader(c), 3);
  const std::vector<Candidate> nearer{{7, 12.0}, {3, 12.5}, {12, 30.0}};
  EXPECT_EQ(select_leader(nearer), 7);
  const std::vector<Candidate> single{{42, 3.0}};
  EXPECT_EQ(select_leader(single), 42);
  try {
    select_leader(std::vector<Candidate>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCandidates);
  }
  EXPECT_THROW(elect_leader(ConflictReport{}), Error);
}

TEST(Election, IndependentOfOrder) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> dist(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Candidate> c;
    for (int id = 1; id <= 6; ++id) c.push_back({id * 3 % 17, 5.0 * dist(rng)});
    // Brute force: minimum over (distance, id).
    const auto best = *std::min_element(c.begin(), c.end(), [](auto& a, auto& b) {
      return std::pair(a.distance_to_stopline, a.id) < std::pair(b.distance_to_stopline, b.id);
    });
    std::sort(c.begin(), c.end(), [](auto& a, auto& b) { return a.id < b.id; });
    do {
      ASSERT_EQ(select_leader(c), best.id);
    } while (std::next_permutation(c.begin(), c.end(),
                                   [](auto& a, auto& b) { return a.id < b.id; }));
  }
}

TEST(PlanGreen, ClampsToTimingBounds) {
  World w;
  ProtocolTiming t;
  w.vehicles = {car(1, Direction::North, 0), car(2, Direction::East, 100)};
  EXPECT_DOUBLE_EQ(plan_green(w, Axis::EW, t), 12.0);
  w.vehicles[1].distance_to_stopline = 10;
  EXPECT_DOUBLE_EQ(plan_green(w, Axis::EW, t), 5.0);
  w.vehicles[1].distance_to_stopline = 290;
  EXPECT_DOUBLE_EQ(plan_green(w, Axis::EW, t), 30.0);
}

struct LeaderFixture : ::testing::Test {
  World world;
  ProtocolTiming timing;

  void SetUp() override {
    world.vehicles = {car(1, Direction::North, 0), car(2, Direction::East, 0)};
    world.vehicles[0].role = Role::VtlLeader;
  }
};

TEST_F(LeaderFixture, ServesOrthogonalAxisThenHandsOver) {
  auto state = start_vtl_leadership(1, world, timing);
  EXPECT_DOUBLE_EQ(state.phase_duration, timing.phase_min);
  for (int t = 0; t < 50; ++t) {
    world.tick_index = t;
    const auto out = leader_step(state, world, timing);
    EXPECT_EQ(out.broadcast.phase, PhaseState::serving(Axis::EW));
    EXPECT_FALSE(out.control.has_value());
  }
  world.tick_index = 50;
  const auto out = leader_step(state, world, timing);
  EXPECT_EQ(out.broadcast.phase, PhaseState::serving(Axis::NS));
  ASSERT_TRUE(out.control.has_value());
  const auto* h = std::get_if<Handover>(&*out.control);
  ASSERT_NE(h, nullptr);
  EXPECT_EQ(h->from_id, 1);
  EXPECT_EQ(h->to_id, 2);
  EXPECT_EQ(h->to_role, Role::VtlLeader);
}

TEST_F(LeaderFixture, ReleasesWithOwnLaneGreen) {
  auto state = start_vtl_leadership(1, world, timing);
  world.vehicles[1].distance_to_stopline = -5;  // served vehicle has cleared
  world.tick_index = 50;
  const auto out = leader_step(state, world, timing);
  EXPECT_EQ(out.broadcast.phase, PhaseState::serving(Axis::NS));
  ASSERT_TRUE(out.control.has_value());
  EXPECT_TRUE(std::holds_alternative<Release>(*out.control));
}

TEST_F(LeaderFixture, PendingPedestrianStartsPedestrianPhase) {
  auto state = start_vtl_leadership(1, world, timing);
  world.pedestrians = {walker(9, {-1.75, -20.0})};
  world.tick_index = 50;
  const auto out = leader_step(state, world, timing);
  EXPECT_EQ(out.broadcast.phase, PhaseState::pedestrian_phase());
  const auto* h = std::get_if<Handover>(&*out.control);
  ASSERT_NE(h, nullptr);
  EXPECT_EQ(h->to_role, Role::VptlLeader);
  EXPECT_EQ(h->from_id, h->to_id);
  EXPECT_EQ(state.role, Role::VptlLeader);
  EXPECT_EQ(state.active_ticks, 1);
}

TEST_F(LeaderFixture, RoleIsChecked) {
  auto state = start_vtl_leadership(1, world, timing);
  world.vehicles[0].role = Role::Normal;
  try {
    leader_step(state, world, timing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotLeader);
  }
  EXPECT_THROW(vptl_leader_step(state, world, timing, {}, 1), Error);
  EXPECT_THROW(start_vtl_leadership(77, world, timing), Error);
}

struct VptlFixture : ::testing::Test {
  World world;
  ProtocolTiming timing;
  TrackingParams params;
  LeaderState state;

  void SetUp() override {
    world.vehicles = {car(1, Direction::South, 0), car(2, Direction::East, 0)};
    world.vehicles[0].role = Role::VptlLeader;
    state.leader_id = 1;
    state.role = Role::VptlLeader;
    state.own_axis = Axis::NS;
    state.active_ticks = 1;
  }
};

TEST_F(VptlFixture, NoPedestriansEndsImmediately) {
  const auto out = vptl_leader_step(state, world, timing, params, 1);
  ASSERT_TRUE(out.control.has_value());
  const auto* h = std::get_if<Handover>(&*out.control);
  ASSERT_NE(h, nullptr);
  EXPECT_EQ(h->to_id, 2);
  EXPECT_EQ(out.broadcast.phase, PhaseState::serving(Axis::NS));
}

TEST_F(VptlFixture, UntrackablePedestrianPinsFixedDuration) {
  // 10.25 m right and 2 m ahead of the leader: occlusion band.
  world.pedestrians = {walker(4, {12.0, -8.0})};
  std::int64_t broadcasts = 1;  // the handover tick already showed the phase
  int untrackable = 0;
  for (int t = 1; t < 1000; ++t) {
    world.tick_index = t;
    const auto out = vptl_leader_step(state, world, timing, params, 3);
    for (const auto& n : out.notes) {
      if (n.kind == PedestrianNote::Kind::Untrackable) ++untrackable;
    }
    if (out.control) break;
    EXPECT_EQ(out.broadcast.phase, PhaseState::pedestrian_phase());
    ++broadcasts;
  }
  EXPECT_TRUE(state.fixed_mode);
  EXPECT_EQ(untrackable, 1);
  EXPECT_EQ(broadcasts, timing.ticks(timing.pedestrian_phase_fixed));
}

TEST_F(VptlFixture, TrackedCrossingEndsPhaseEarly) {
  // Walks across the leader's path 15 m ahead, left to right.
  world.pedestrians = {walker(4, {-4.0 + 1.75, 5.0})};
  world.pedestrians[0].intent = Intent::Crossing;
  bool crossed = false;
  int t = 1;
  for (; t < 400; ++t) {
    world.tick_index = t;
    world.pedestrians[0].position.x = std::min(-4.0 + 0.12 * t, 4.0) + 1.75;
    const auto out = vptl_leader_step(state, world, timing, params, 5);
    for (const auto& n : out.notes) {
      if (n.kind == PedestrianNote::Kind::Crossed) {
        crossed = true;
        ASSERT_TRUE(n.event.has_value());
        EXPECT_EQ(n.event->from, uwbloc::tracking::SideLabel::Left);
        EXPECT_EQ(n.event->to, uwbloc::tracking::SideLabel::Right);
      }
    }
    if (out.control) break;
  }
  EXPECT_TRUE(crossed);
  EXPECT_FALSE(state.fixed_mode);
  EXPECT_LT(t, timing.ticks(timing.phase_max));
  EXPECT_TRUE(state.served.contains(4));
}

TEST(Messages, KindsAndDescriptions) {
  EXPECT_EQ(message_kind(Message{Elect{3}}), "elect");
  EXPECT_EQ(message_kind(Message{Release{3}}), "release");
  EXPECT_EQ(message_kind(Message{Handover{1, 2, Role::VtlLeader}}), "handover");
  EXPECT_FALSE(describe(Message{PhaseBroadcast{}}).empty());
}

}  // namespace
