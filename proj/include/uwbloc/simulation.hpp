#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uwbloc/vptl.hpp"

namespace uwbloc::vptl {

struct VehicleSpec {
  int id = 0;
  double spawn_time = 0.0;
  Direction direction = Direction::North;
  double distance = 100.0;  // to the stop line at spawn
  double speed = 10.0;
};

struct PedestrianSpec {
  int id = 0;
  int tag_id = 0;
  double spawn_time = 0.0;
  Point start;
  Point end;
  double walk_speed = 1.2;
};

struct IntersectionScenario {
  std::string name = "scenario";
  std::vector<VehicleSpec> vehicles;
  std::vector<PedestrianSpec> pedestrians;
  double duration = 120.0;
  std::uint64_t seed = 1;
  double comm_range = 300.0;
  double detection_range = 50.0;
  double queue_gap = 7.0;  // bumper-to-bumper spacing in a stopped queue
  IntersectionGeometry geometry;
  ProtocolTiming timing;
  TrackingParams tracking;
  geometry::AnchorLayout layout;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
};

enum class EventKind {
  SimStart,
  SimEnd,
  SpawnVehicle,
  SpawnPedestrian,
  Message,
  Conflict,
  RoleChange,
  VehicleCross,
  VehicleExit,
  PedestrianIntent,
  PedestrianUntrackable,
  PedestrianCrossed,
};

struct LogEvent {
  std::int64_t tick = 0;
  double time = 0.0;
  EventKind kind = EventKind::SimStart;
  std::string name;    // event-kind token written to the log
  std::string fields;  // space separated key=value pairs
};

struct TimelineRow {
  std::int64_t tick = 0;
  double time = 0.0;
  PhaseState phase;
  int sender = 0;
};

struct SentMessage {
  std::int64_t tick = 0;
  Message message;
  int leader_at_emission = 0;  // 0 when leaderless
};

struct VehicleOutcome {
  int id = 0;
  Direction direction = Direction::North;
  double spawn_time = 0.0;
  std::optional<double> cross_time;
  double stopped_time = 0.0;  // total time held before the stop line
  double longest_stop = 0.0;  // longest continuous hold
};

struct PedestrianOutcome {
  int id = 0;
  double spawn_time = 0.0;
  std::optional<double> detected_time;  // first tick in a vehicle-pedestrian conflict
  std::optional<double> active_time;    // first observed pedestrian phase
  std::optional<double> done_time;
};

struct SimulationResult {
  std::vector<LogEvent> events;
  std::vector<TimelineRow> timeline;   // one row per leader broadcast
  std::vector<int> leaders_per_tick;   // agents holding a leader role
  std::vector<SentMessage> messages;
  std::vector<VehicleOutcome> vehicles;
  std::vector<PedestrianOutcome> pedestrians;
  std::int64_t ticks = 0;

  /// `t=<seconds> <event-kind> <fields...>` per line.
  void write_log(std::ostream& out) const;
  /// `t,ns,ew,pedestrian`
  void write_timeline(std::ostream& out) const;
};

/// Deterministic tick loop. Messages emitted in one tick are delivered at
/// the start of the next; the leader's own vehicle never leaves its stop
/// line while it holds the role.
SimulationResult run_scenario(const IntersectionScenario& scenario);

}  // namespace uwbloc::vptl
