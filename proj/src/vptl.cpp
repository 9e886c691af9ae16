#include "uwbloc/vptl.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "uwbloc/error.hpp"

namespace uwbloc::vptl {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::North: return "North";
    case Direction::South: return "South";
    case Direction::East: return "East";
    case Direction::West: return "West";
  }
  return "North";
}

std::string_view to_string(Axis a) { return a == Axis::NS ? "NS" : "EW"; }
std::string_view to_string(Signal s) { return s == Signal::Red ? "Red" : "Green"; }
std::string_view to_string(PedestrianSignal s) {
  return s == PedestrianSignal::Active ? "Active" : "Inactive";
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Normal: return "Normal";
    case Role::VtlLeader: return "VtlLeader";
    case Role::VptlLeader: return "VptlLeader";
  }
  return "Normal";
}

std::string_view to_string(Intent i) {
  switch (i) {
    case Intent::WaitingToCross: return "WaitingToCross";
    case Intent::Crossing: return "Crossing";
    case Intent::Done: return "Done";
  }
  return "Done";
}

Direction parse_direction(std::string_view text) {
  if (text == "North") return Direction::North;
  if (text == "South") return Direction::South;
  if (text == "East") return Direction::East;
  if (text == "West") return Direction::West;
  throw Error(ErrorCode::ConfigError, fmt::format("unknown approach direction '{}'", text));
}

Axis axis_of(Direction d) {
  return d == Direction::North || d == Direction::South ? Axis::NS : Axis::EW;
}

Axis orthogonal(Axis a) { return a == Axis::NS ? Axis::EW : Axis::NS; }

bool PhaseState::safe() const {
  if (ns == Signal::Green && ew == Signal::Green) return false;
  if (pedestrian == PedestrianSignal::Active && (ns != Signal::Red || ew != Signal::Red)) {
    return false;
  }
  return true;
}

PhaseState PhaseState::serving(Axis green_axis) {
  PhaseState p;
  p.ns = green_axis == Axis::NS ? Signal::Green : Signal::Red;
  p.ew = green_axis == Axis::EW ? Signal::Green : Signal::Red;
  return p;
}

PhaseState PhaseState::pedestrian_phase() {
  return {Signal::Red, Signal::Red, PedestrianSignal::Active};
}

Point heading(Direction d) {
  switch (d) {
    case Direction::North: return {0.0, -1.0};
    case Direction::South: return {0.0, 1.0};
    case Direction::East: return {-1.0, 0.0};
    case Direction::West: return {1.0, 0.0};
  }
  return {0.0, 1.0};
}

Point right_of(Direction d) {
  const Point h = heading(d);
  return {h.y, -h.x};
}

Point vehicle_position(const IntersectionGeometry& g, const VehicleAgent& v) {
  const Point h = heading(v.direction);
  const Point r = right_of(v.direction);
  const double back = g.stopline_offset + v.distance_to_stopline;
  return {-h.x * back + r.x * g.lane_offset, -h.y * back + r.y * g.lane_offset};
}

Point to_vehicle_frame(const IntersectionGeometry& g, const VehicleAgent& v, Point world) {
  const Point origin = vehicle_position(g, v);
  const Point h = heading(v.direction);
  const Point r = right_of(v.direction);
  const double dx = world.x - origin.x;
  const double dy = world.y - origin.y;
  return {dx * r.x + dy * r.y, dx * h.x + dy * h.y};
}

std::string_view message_kind(const Message& m) {
  struct Visitor {
    std::string_view operator()(const Detect&) const { return "detect"; }
    std::string_view operator()(const Elect&) const { return "elect"; }
    std::string_view operator()(const PhaseBroadcast&) const { return "phase"; }
    std::string_view operator()(const Handover&) const { return "handover"; }
    std::string_view operator()(const Release&) const { return "release"; }
  };
  return std::visit(Visitor{}, m);
}

std::string describe(const Message& m) {
  struct Visitor {
    std::string operator()(const Detect& d) const {
      return fmt::format("sender={} dir={} x={:.3f} y={:.3f}", d.sender, to_string(d.direction),
                         d.position.x, d.position.y);
    }
    std::string operator()(const Elect& e) const { return fmt::format("leader={}", e.leader_id); }
    std::string operator()(const PhaseBroadcast& b) const {
      return fmt::format("sender={} ns={} ew={} pedestrian={} remaining={:.3f}", b.sender,
                         to_string(b.phase.ns), to_string(b.phase.ew),
                         to_string(b.phase.pedestrian), b.remaining);
    }
    std::string operator()(const Handover& h) const {
      return fmt::format("from={} to={} role={}", h.from_id, h.to_id, to_string(h.to_role));
    }
    std::string operator()(const Release& r) const {
      return fmt::format("leader={}", r.leader_id);
    }
  };
  return std::visit(Visitor{}, m);
}

std::int64_t ProtocolTiming::ticks(double seconds) const {
  return static_cast<std::int64_t>(std::llround(seconds / tick));
}

const VehicleAgent* World::find_vehicle(int id) const {
  auto it = std::lower_bound(vehicles.begin(), vehicles.end(), id,
                             [](const VehicleAgent& v, int key) { return v.id < key; });
  return it != vehicles.end() && it->id == id ? &*it : nullptr;
}

bool World::in_comm_range(const VehicleAgent& v) const {
  return v.approaching() && v.distance_to_stopline + geometry.stopline_offset <= comm_range;
}

ConflictReport sense_conflict(const World& world) {
  ConflictReport report;
  bool ns = false;
  bool ew = false;
  std::vector<Candidate> in_range;
  for (const auto& v : world.vehicles) {
    if (!world.in_comm_range(v)) continue;
    in_range.push_back({v.id, v.distance_to_stopline});
    (axis_of(v.direction) == Axis::NS ? ns : ew) = true;
  }
  report.vehicle_vehicle = ns && ew;

  for (const auto& p : world.pedestrians) {
    if (p.intent != Intent::WaitingToCross) continue;
    const bool detected = std::any_of(in_range.begin(), in_range.end(), [&](const Candidate& c) {
      const VehicleAgent* v = world.find_vehicle(c.id);
      return geometry::distance(vehicle_position(world.geometry, *v), p.position) <=
             world.detection_range;
    });
    if (detected) report.waiting_pedestrians.push_back(p.id);
  }
  report.vehicle_pedestrian = !report.waiting_pedestrians.empty();

  if (report.any()) report.candidates = std::move(in_range);
  return report;
}

int select_leader(std::span<const Candidate> candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCode::NoCandidates, "no vehicle can take the leader role");
  }
  constexpr double kTie = 1e-6;  // meters
  double nearest = candidates.front().distance_to_stopline;
  for (const auto& c : candidates) nearest = std::min(nearest, c.distance_to_stopline);
  int best = 0;
  bool found = false;
  for (const auto& c : candidates) {
    if (c.distance_to_stopline <= nearest + kTie && (!found || c.id < best)) {
      best = c.id;
      found = true;
    }
  }
  return best;
}

int elect_leader(const ConflictReport& report) {
  if (!report.any()) {
    throw Error(ErrorCode::NoCandidates, "election requested without a conflict");
  }
  return select_leader(report.candidates);
}

std::vector<Candidate> candidates_on(const World& world, Axis axis) {
  std::vector<Candidate> out;
  for (const auto& v : world.vehicles) {
    if (axis_of(v.direction) == axis && world.in_comm_range(v)) {
      out.push_back({v.id, v.distance_to_stopline});
    }
  }
  return out;
}

double plan_green(const World& world, Axis served, const ProtocolTiming& timing) {
  double needed = 0.0;
  for (const auto& v : world.vehicles) {
    if (axis_of(v.direction) != served || !world.in_comm_range(v) || v.speed <= 0.0) continue;
    needed = std::max(needed, v.distance_to_stopline / v.speed + timing.clearance);
  }
  return std::clamp(needed, timing.phase_min, timing.phase_max);
}

LeaderState start_vtl_leadership(int leader_id, const World& world,
                                 const ProtocolTiming& timing, std::set<int> served) {
  const VehicleAgent* leader = world.find_vehicle(leader_id);
  if (leader == nullptr) {
    throw Error(ErrorCode::NotLeader, fmt::format("vehicle {} is not present", leader_id));
  }
  LeaderState state;
  state.leader_id = leader_id;
  state.role = Role::VtlLeader;
  state.own_axis = axis_of(leader->direction);
  state.phase_start_tick = world.tick_index;
  state.phase_duration = plan_green(world, orthogonal(state.own_axis), timing);
  state.served = std::move(served);
  return state;
}

namespace {

const VehicleAgent& require_role(const LeaderState& state, const World& world, Role role) {
  const VehicleAgent* v = world.find_vehicle(state.leader_id);
  if (v == nullptr || v->role != role || state.role != role) {
    throw Error(ErrorCode::NotLeader,
                fmt::format("vehicle {} does not hold the {} role", state.leader_id,
                            to_string(role)));
  }
  return *v;
}

/// Ends the current leadership the VTL way: pass it to the nearest vehicle
/// waiting on the red axis, or give the leader's own lane green and release.
StepOutput finish_leadership(const LeaderState& state, const World& world) {
  StepOutput out;
  out.broadcast.sender = state.leader_id;
  const Axis red_axis = orthogonal(state.own_axis);
  const auto waiting = candidates_on(world, red_axis);
  out.broadcast.phase = PhaseState::serving(state.own_axis);
  if (waiting.empty()) {
    out.control = Release{state.leader_id};
  } else {
    out.control = Handover{state.leader_id, select_leader(waiting), Role::VtlLeader};
  }
  return out;
}

}  // namespace

StepOutput leader_step(LeaderState& state, const World& world, const ProtocolTiming& timing) {
  require_role(state, world, Role::VtlLeader);

  constexpr double kEps = 1e-9;
  const Axis served = orthogonal(state.own_axis);
  const double elapsed =
      static_cast<double>(world.tick_index - state.phase_start_tick) * timing.tick;
  const bool served_empty = candidates_on(world, served).empty();
  const bool due = elapsed >= state.phase_duration - kEps ||
                   (served_empty && elapsed >= timing.phase_min - kEps);

  StepOutput out;
  out.broadcast.sender = state.leader_id;
  if (!due) {
    out.broadcast.phase = PhaseState::serving(served);
    out.broadcast.remaining = state.phase_duration - elapsed;
    return out;
  }

  if (sense_conflict(world).vehicle_pedestrian) {
    // The outgoing VTL leader serves the pedestrian phase itself.
    state.role = Role::VptlLeader;
    state.phase_start_tick = world.tick_index;
    state.active_ticks = 1;
    state.fixed_mode = false;
    state.tracks.clear();
    out.broadcast.phase = PhaseState::pedestrian_phase();
    out.broadcast.remaining = timing.pedestrian_phase_fixed;
    out.control = Handover{state.leader_id, state.leader_id, Role::VptlLeader};
    return out;
  }

  if (served_empty) {
    out.broadcast.phase = PhaseState::serving(state.own_axis);
    out.control = Release{state.leader_id};
    return out;
  }

  // Orthogonal demand persists: the nearest served vehicle takes over and
  // the old leader's lane gets green.
  out.broadcast.phase = PhaseState::serving(state.own_axis);
  out.control = Handover{state.leader_id, select_leader(candidates_on(world, served)),
                         Role::VtlLeader};
  return out;
}

StepOutput vptl_leader_step(LeaderState& state, const World& world,
                            const ProtocolTiming& timing, const TrackingParams& params,
                            std::uint64_t seed) {
  const VehicleAgent& leader = require_role(state, world, Role::VptlLeader);

  StepOutput out;
  for (const auto& p : world.pedestrians) {
    if (p.intent == Intent::Done || state.served.contains(p.id)) continue;
    if (!state.tracks.contains(p.id)) state.tracks.emplace(p.id, PedestrianTrack(params));
  }

  for (auto& [id, track] : state.tracks) {
    if (track.crossed) continue;
    auto it = std::find_if(world.pedestrians.begin(), world.pedestrians.end(),
                           [id](const PedestrianAgent& p) { return p.id == id; });
    if (it == world.pedestrians.end()) continue;

    const Point local = to_vehicle_frame(world.geometry, leader, it->position);
    const auto status = geometry::coverage(leader.layout, local);
    if (status != geometry::CoverageStatus::BothAnchors) {
      state.fixed_mode = true;
      if (!track.untrackable_noted) {
        track.untrackable_noted = true;
        out.notes.push_back({PedestrianNote::Kind::Untrackable, id, status, std::nullopt});
      }
      continue;
    }
    if (local.y == 0.0) continue;  // on the baseline: no usable fix this tick

    const auto stream_seed = ranging::mix_seed(
        seed, static_cast<std::uint64_t>(world.tick_index) * 1000003ULL +
                  static_cast<std::uint64_t>(it->tag_id));
    const auto batch = ranging::simulate_batch(leader.layout, local, params.noise,
                                               params.samples_per_tick, stream_seed, params.mode);
    tracking::LocalizedBatch fixes;
    try {
      fixes = tracking::localize_batch(leader.layout, batch);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyResult) throw;
      continue;
    }
    for (const auto& fix : fixes.points) {
      track.estimates.push_back(fix);
      if (auto event = track.detector.push(fix)) {
        track.crossed = true;
        out.notes.push_back({PedestrianNote::Kind::Crossed, id, status, event});
        break;
      }
    }
  }

  const bool all_crossed = std::all_of(state.tracks.begin(), state.tracks.end(),
                                       [](const auto& kv) { return kv.second.crossed; });
  const std::int64_t fixed_ticks = timing.ticks(timing.pedestrian_phase_fixed);
  const std::int64_t cap_ticks =
      timing.ticks(std::max(timing.pedestrian_phase_fixed, timing.phase_max));

  bool done = false;
  if (state.tracks.empty()) {
    done = true;
  } else if (state.fixed_mode) {
    done = state.active_ticks >= fixed_ticks;
  } else {
    done = all_crossed || state.active_ticks >= cap_ticks;
  }

  if (!done) {
    ++state.active_ticks;
    out.broadcast.sender = state.leader_id;
    out.broadcast.phase = PhaseState::pedestrian_phase();
    const std::int64_t limit = state.fixed_mode ? fixed_ticks : cap_ticks;
    out.broadcast.remaining = static_cast<double>(limit - state.active_ticks) * timing.tick;
    return out;
  }

  for (const auto& [id, track] : state.tracks) {
    if (track.crossed) state.served.insert(id);
  }
  StepOutput finish = finish_leadership(state, world);
  finish.notes = std::move(out.notes);
  return finish;
}

}  // namespace uwbloc::vptl
