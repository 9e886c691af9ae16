#include "uwbloc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "uwbloc/error.hpp"

namespace uwbloc::vptl {
namespace {

void config_check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

struct VehicleSim {
  VehicleAgent agent;
  std::optional<PhaseState> received;
  bool detect_sent = false;
  double current_stop = 0.0;
  std::size_t outcome = 0;
};

struct PedestrianSim {
  PedestrianAgent agent;
  PedestrianSpec spec;
  std::optional<PhaseState> received;
  std::size_t outcome = 0;
};

class Simulator {
 public:
  explicit Simulator(const IntersectionScenario& scenario) : sc_(scenario) {}

  SimulationResult run();

 private:
  double time_of(std::int64_t tick) const { return static_cast<double>(tick) * sc_.timing.tick; }
  void log(EventKind kind, std::string name, std::string fields);
  void emit(Message message);
  World snapshot() const;
  bool receives(const VehicleSim& v) const;

  void spawn();
  void deliver();
  void announce();
  void protocol();
  void move();

  const IntersectionScenario& sc_;
  SimulationResult result_;
  std::int64_t tick_ = 0;
  std::map<int, VehicleSim> vehicles_;
  std::map<int, PedestrianSim> pedestrians_;
  std::vector<Message> inbox_;
  std::vector<Message> outbox_;
  std::optional<LeaderState> leader_;
  std::optional<int> pending_leader_;  // elected or handed to, not yet delivered
  std::set<int> served_;
  std::vector<std::size_t> vehicle_order_;
  std::vector<std::size_t> pedestrian_order_;
  std::size_t next_vehicle_ = 0;
  std::size_t next_pedestrian_ = 0;
};

void Simulator::log(EventKind kind, std::string name, std::string fields) {
  result_.events.push_back({tick_, time_of(tick_), kind, std::move(name), std::move(fields)});
}

void Simulator::emit(Message message) {
  log(EventKind::Message, std::string(message_kind(message)), describe(message));
  result_.messages.push_back({tick_, message, leader_ ? leader_->leader_id : 0});
  outbox_.push_back(std::move(message));
}

World Simulator::snapshot() const {
  World world;
  world.tick_index = tick_;
  world.time = time_of(tick_);
  world.geometry = sc_.geometry;
  world.comm_range = sc_.comm_range;
  world.detection_range = sc_.detection_range;
  for (const auto& [id, v] : vehicles_) world.vehicles.push_back(v.agent);
  for (const auto& [id, p] : pedestrians_) world.pedestrians.push_back(p.agent);
  return world;
}

bool Simulator::receives(const VehicleSim& v) const {
  return std::abs(v.agent.distance_to_stopline) + sc_.geometry.stopline_offset <= sc_.comm_range;
}

void Simulator::spawn() {
  while (next_vehicle_ < vehicle_order_.size()) {
    const auto& spec = sc_.vehicles[vehicle_order_[next_vehicle_]];
    if (sc_.timing.ticks(spec.spawn_time) > tick_) break;
    ++next_vehicle_;
    VehicleSim sim;
    sim.agent = {spec.id, spec.direction, spec.distance, spec.speed, sc_.layout, Role::Normal};
    sim.outcome = result_.vehicles.size();
    result_.vehicles.push_back({spec.id, spec.direction, time_of(tick_), std::nullopt, 0.0, 0.0});
    vehicles_.emplace(spec.id, sim);
    log(EventKind::SpawnVehicle, "spawn_vehicle",
        fmt::format("id={} dir={} distance={:.3f} speed={:.3f}", spec.id,
                    to_string(spec.direction), spec.distance, spec.speed));
  }
  while (next_pedestrian_ < pedestrian_order_.size()) {
    const auto& spec = sc_.pedestrians[pedestrian_order_[next_pedestrian_]];
    if (sc_.timing.ticks(spec.spawn_time) > tick_) break;
    ++next_pedestrian_;
    PedestrianSim sim;
    sim.agent = {spec.id, spec.start, Intent::WaitingToCross, spec.tag_id};
    sim.spec = spec;
    sim.outcome = result_.pedestrians.size();
    result_.pedestrians.push_back({spec.id, time_of(tick_), std::nullopt, std::nullopt,
                                   std::nullopt});
    pedestrians_.emplace(spec.id, sim);
    log(EventKind::SpawnPedestrian, "spawn_pedestrian",
        fmt::format("id={} tag={} x={:.3f} y={:.3f}", spec.id, spec.tag_id, spec.start.x,
                    spec.start.y));
  }
}

void Simulator::deliver() {
  std::vector<Message> inbox;
  inbox.swap(inbox_);
  for (const auto& message : inbox) {
    if (const auto* b = std::get_if<PhaseBroadcast>(&message)) {
      for (auto& [id, v] : vehicles_) {
        if (receives(v)) v.received = b->phase;
      }
      for (auto& [id, p] : pedestrians_) p.received = b->phase;
    } else if (const auto* e = std::get_if<Elect>(&message)) {
      auto& v = vehicles_.at(e->leader_id);
      v.agent.role = Role::VtlLeader;
      pending_leader_.reset();
      leader_ = start_vtl_leadership(e->leader_id, snapshot(), sc_.timing, served_);
      log(EventKind::RoleChange, "role", fmt::format("id={} role=VtlLeader", e->leader_id));
    } else if (const auto* h = std::get_if<Handover>(&message)) {
      pending_leader_.reset();
      if (h->from_id != h->to_id) {
        vehicles_.at(h->from_id).agent.role = Role::Normal;
        log(EventKind::RoleChange, "role", fmt::format("id={} role=Normal", h->from_id));
      }
      vehicles_.at(h->to_id).agent.role = h->to_role;
      log(EventKind::RoleChange, "role",
          fmt::format("id={} role={}", h->to_id, to_string(h->to_role)));
      if (h->to_role == Role::VtlLeader) {
        served_ = leader_->served;
        leader_ = start_vtl_leadership(h->to_id, snapshot(), sc_.timing, served_);
      }
    } else if (const auto* r = std::get_if<Release>(&message)) {
      vehicles_.at(r->leader_id).agent.role = Role::Normal;
      served_ = leader_->served;
      leader_.reset();
      for (auto& [id, v] : vehicles_) v.received.reset();
      for (auto& [id, p] : pedestrians_) p.received.reset();
      log(EventKind::RoleChange, "role", fmt::format("id={} role=Normal", r->leader_id));
    }
  }
}

void Simulator::announce() {
  const World world = snapshot();
  for (auto& [id, v] : vehicles_) {
    if (v.detect_sent || !world.in_comm_range(v.agent)) continue;
    v.detect_sent = true;
    emit(Detect{id, v.agent.direction, vehicle_position(sc_.geometry, v.agent)});
  }
}

void Simulator::protocol() {
  const World world = snapshot();
  const ConflictReport conflict = sense_conflict(world);
  for (int pid : conflict.waiting_pedestrians) {
    auto& outcome = result_.pedestrians[pedestrians_.at(pid).outcome];
    if (!outcome.detected_time) outcome.detected_time = time_of(tick_);
  }

  if (leader_ && !pending_leader_) {
    const std::uint64_t seed = sc_.seed;
    StepOutput out = leader_->role == Role::VtlLeader
                         ? leader_step(*leader_, world, sc_.timing)
                         : vptl_leader_step(*leader_, world, sc_.timing, sc_.tracking, seed);
    for (const auto& note : out.notes) {
      if (note.kind == PedestrianNote::Kind::Untrackable) {
        log(EventKind::PedestrianUntrackable, "pedestrian_untrackable",
            fmt::format("id={} leader={} coverage={}", note.pedestrian_id, leader_->leader_id,
                        geometry::to_string(note.coverage)));
      } else if (note.kind == PedestrianNote::Kind::Crossed) {
        log(EventKind::PedestrianCrossed, "pedestrian_crossed",
            fmt::format("id={} leader={} from={} to={} sample={}", note.pedestrian_id,
                        leader_->leader_id, tracking::to_string(note.event->from),
                        tracking::to_string(note.event->to), note.event->time_index));
      }
    }
    result_.timeline.push_back({tick_, time_of(tick_), out.broadcast.phase, out.broadcast.sender});
    emit(out.broadcast);
    if (out.control) {
      if (const auto* h = std::get_if<Handover>(&*out.control)) {
        if (h->to_id != h->from_id) pending_leader_ = h->to_id;
      }
      emit(*out.control);
    }
  } else if (!leader_ && !pending_leader_ && conflict.any()) {
    const char* kind = conflict.vehicle_vehicle && conflict.vehicle_pedestrian
                           ? "vehicle-vehicle+vehicle-pedestrian"
                       : conflict.vehicle_vehicle ? "vehicle-vehicle"
                                                  : "vehicle-pedestrian";
    log(EventKind::Conflict, "conflict",
        fmt::format("kind={} candidates={} pedestrians={}", kind, conflict.candidates.size(),
                    conflict.waiting_pedestrians.size()));
    const int id = elect_leader(conflict);
    pending_leader_ = id;
    emit(Elect{id});
  }
}

void Simulator::move() {
  const double dt = sc_.timing.tick;
  const double exit_distance = 2.0 * sc_.geometry.stopline_offset + 20.0;
  const double now = time_of(tick_);

  std::map<Direction, std::vector<VehicleSim*>> lanes;
  for (auto& [id, v] : vehicles_) lanes[v.agent.direction].push_back(&v);

  std::vector<int> exited;
  for (auto& [direction, lane] : lanes) {
    std::sort(lane.begin(), lane.end(), [](const VehicleSim* a, const VehicleSim* b) {
      if (a->agent.distance_to_stopline != b->agent.distance_to_stopline) {
        return a->agent.distance_to_stopline < b->agent.distance_to_stopline;
      }
      return a->agent.id < b->agent.id;
    });
    const VehicleSim* ahead = nullptr;
    for (VehicleSim* v : lane) {
      VehicleAgent& a = v->agent;
      const double d = a.distance_to_stopline;
      const bool leader_role = a.role != Role::Normal || pending_leader_ == a.id;
      const bool red = v->received &&
                       (v->received->pedestrian == PedestrianSignal::Active ||
                        v->received->signal_for(axis_of(a.direction)) == Signal::Red);
      double target = d - a.speed * dt;
      if (d >= 0.0 && (leader_role || red)) target = std::max(target, 0.0);
      if (ahead != nullptr) {
        target = std::max(target, ahead->agent.distance_to_stopline + sc_.queue_gap);
      }
      target = std::min(target, d);

      auto& outcome = result_.vehicles[v->outcome];
      if (d >= 0.0 && target == d) {
        outcome.stopped_time += dt;
        v->current_stop += dt;
        outcome.longest_stop = std::max(outcome.longest_stop, v->current_stop);
      } else {
        v->current_stop = 0.0;
      }
      a.distance_to_stopline = target;
      if (d >= 0.0 && target < 0.0) {
        outcome.cross_time = now;
        log(EventKind::VehicleCross, "vehicle_cross", fmt::format("id={}", a.id));
      }
      if (target < -exit_distance) exited.push_back(a.id);
      ahead = v;
    }
  }
  std::sort(exited.begin(), exited.end());
  for (int id : exited) {
    vehicles_.erase(id);
    log(EventKind::VehicleExit, "vehicle_exit", fmt::format("id={}", id));
  }

  for (auto& [id, p] : pedestrians_) {
    auto& outcome = result_.pedestrians[p.outcome];
    if (p.agent.intent == Intent::WaitingToCross && p.received &&
        p.received->pedestrian == PedestrianSignal::Active) {
      p.agent.intent = Intent::Crossing;
      outcome.active_time = now;
      log(EventKind::PedestrianIntent, "pedestrian_intent",
          fmt::format("id={} intent=Crossing", id));
    }
    if (p.agent.intent == Intent::Crossing) {
      const double remaining = geometry::distance(p.agent.position, p.spec.end);
      const double step = p.spec.walk_speed * dt;
      if (remaining <= step) {
        p.agent.position = p.spec.end;
        p.agent.intent = Intent::Done;
        outcome.done_time = now;
        log(EventKind::PedestrianIntent, "pedestrian_intent",
            fmt::format("id={} intent=Done", id));
      } else {
        p.agent.position.x += (p.spec.end.x - p.agent.position.x) * step / remaining;
        p.agent.position.y += (p.spec.end.y - p.agent.position.y) * step / remaining;
      }
    }
  }
}

SimulationResult Simulator::run() {
  sc_.validate();
  result_.ticks = sc_.timing.ticks(sc_.duration);

  vehicle_order_.resize(sc_.vehicles.size());
  for (std::size_t i = 0; i < vehicle_order_.size(); ++i) vehicle_order_[i] = i;
  std::stable_sort(vehicle_order_.begin(), vehicle_order_.end(), [&](std::size_t a, std::size_t b) {
    const auto& va = sc_.vehicles[a];
    const auto& vb = sc_.vehicles[b];
    const auto ta = sc_.timing.ticks(va.spawn_time);
    const auto tb = sc_.timing.ticks(vb.spawn_time);
    return ta != tb ? ta < tb : va.id < vb.id;
  });
  pedestrian_order_.resize(sc_.pedestrians.size());
  for (std::size_t i = 0; i < pedestrian_order_.size(); ++i) pedestrian_order_[i] = i;
  std::stable_sort(pedestrian_order_.begin(), pedestrian_order_.end(),
                   [&](std::size_t a, std::size_t b) {
                     const auto& pa = sc_.pedestrians[a];
                     const auto& pb = sc_.pedestrians[b];
                     const auto ta = sc_.timing.ticks(pa.spawn_time);
                     const auto tb = sc_.timing.ticks(pb.spawn_time);
                     return ta != tb ? ta < tb : pa.id < pb.id;
                   });

  tick_ = 0;
  log(EventKind::SimStart, "sim_start",
      fmt::format("scenario={} seed={} tick={:.3f} duration={:.3f}", sc_.name, sc_.seed,
                  sc_.timing.tick, sc_.duration));
  for (tick_ = 0; tick_ < result_.ticks; ++tick_) {
    spawn();
    deliver();
    announce();
    protocol();
    int leaders = 0;
    for (const auto& [id, v] : vehicles_) leaders += v.agent.role != Role::Normal ? 1 : 0;
    result_.leaders_per_tick.push_back(leaders);
    move();
    inbox_ = std::move(outbox_);
    outbox_.clear();
  }
  log(EventKind::SimEnd, "sim_end", "");
  return std::move(result_);
}

}  // namespace

void IntersectionScenario::validate() const {
  config_check(timing.tick > 0.0 && std::isfinite(timing.tick), "tick must be positive");
  config_check(duration >= 0.0 && std::isfinite(duration), "duration must be non-negative");
  config_check(timing.phase_min > 0.0, "phase_min must be positive");
  config_check(timing.phase_min <= timing.phase_max, "phase_min must not exceed phase_max");
  config_check(timing.pedestrian_phase_fixed > 0.0, "pedestrian_phase_fixed must be positive");
  config_check(timing.clearance >= 0.0, "clearance must be non-negative");
  config_check(comm_range > 0.0, "comm_range must be positive");
  config_check(detection_range > 0.0, "detection_range must be positive");
  config_check(queue_gap >= 0.0, "queue_gap must be non-negative");
  config_check(geometry.stopline_offset >= 0.0, "stopline_offset must be non-negative");
  config_check(tracking.window >= 2, "tracking window must be at least 2");
  config_check(tracking.samples_per_tick >= 1, "samples_per_tick must be at least 1");
  config_check(tracking.min_confidence > 0.0 && tracking.min_confidence < 1.0,
               "min_confidence must lie in (0, 1)");
  config_check(tracking.noise.sigma_e >= 0.0, "sigma_e must be non-negative");
  try {
    layout.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }

  std::set<int> ids;
  for (const auto& v : vehicles) {
    config_check(v.id > 0, "vehicle ids must be positive");
    config_check(ids.insert(v.id).second, fmt::format("duplicate vehicle id {}", v.id));
    config_check(v.spawn_time >= 0.0, "vehicle spawn time must be non-negative");
    config_check(v.distance >= 0.0, "vehicle spawn distance must be non-negative");
    config_check(v.speed > 0.0, "vehicle speed must be positive");
  }
  std::set<int> pids;
  for (const auto& p : pedestrians) {
    config_check(pids.insert(p.id).second, fmt::format("duplicate pedestrian id {}", p.id));
    config_check(p.spawn_time >= 0.0, "pedestrian spawn time must be non-negative");
    config_check(p.walk_speed > 0.0, "pedestrian walk speed must be positive");
  }
}

void SimulationResult::write_log(std::ostream& out) const {
  for (const auto& e : events) {
    out << fmt::format("t={:.3f} {}", e.time, e.name);
    if (!e.fields.empty()) out << ' ' << e.fields;
    out << '\n';
  }
}

void SimulationResult::write_timeline(std::ostream& out) const {
  out << "t,ns,ew,pedestrian\n";
  for (const auto& row : timeline) {
    out << fmt::format("{:.3f},{},{},{}\n", row.time, to_string(row.phase.ns),
                       to_string(row.phase.ew), to_string(row.phase.pedestrian));
  }
}

SimulationResult run_scenario(const IntersectionScenario& scenario) {
  return Simulator(scenario).run();
}

}  // namespace uwbloc::vptl
