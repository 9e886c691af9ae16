#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uwbloc/geometry.hpp"
#include "uwbloc/ranging.hpp"
#include "uwbloc/tracking.hpp"

namespace uwbloc::vptl {

using geometry::Point;

enum class Direction { North, South, East, West };
enum class Axis { NS, EW };
enum class Signal { Red, Green };
enum class PedestrianSignal { Inactive, Active };
enum class Role { Normal, VtlLeader, VptlLeader };
enum class Intent { WaitingToCross, Crossing, Done };

std::string_view to_string(Direction d);
std::string_view to_string(Axis a);
std::string_view to_string(Signal s);
std::string_view to_string(PedestrianSignal s);
std::string_view to_string(Role r);
std::string_view to_string(Intent i);
Direction parse_direction(std::string_view text);

Axis axis_of(Direction d);
Axis orthogonal(Axis a);

struct PhaseState {
  Signal ns = Signal::Red;
  Signal ew = Signal::Red;
  PedestrianSignal pedestrian = PedestrianSignal::Inactive;

  Signal signal_for(Axis a) const { return a == Axis::NS ? ns : ew; }
  /// Never both axes green; a pedestrian phase holds every vehicle lane red.
  bool safe() const;
  /// Red on `red_axis`, green on the other one, no pedestrian phase.
  static PhaseState serving(Axis green_axis);
  static PhaseState pedestrian_phase();

  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// Road layout around a four-way intersection centered at the origin,
/// +y north and +x east. Vehicles drive on the right.
struct IntersectionGeometry {
  double stopline_offset = 10.0;  // stop line to intersection center
  double lane_offset = 1.75;      // lane center to road center line
};

/// A vehicle approaching from `direction` travels away from that side,
/// e.g. North means it comes from the north heading south.
struct VehicleAgent {
  int id = 0;
  Direction direction = Direction::North;
  double distance_to_stopline = 0.0;  // negative once past the stop line
  double speed = 0.0;
  geometry::AnchorLayout layout;
  Role role = Role::Normal;

  bool approaching() const { return distance_to_stopline >= 0.0; }
};

struct PedestrianAgent {
  int id = 0;
  Point position;
  Intent intent = Intent::WaitingToCross;
  int tag_id = 0;
};

Point heading(Direction d);
Point right_of(Direction d);
Point vehicle_position(const IntersectionGeometry& g, const VehicleAgent& v);
/// Intersection-frame point expressed in the vehicle's anchor frame
/// (+x right of the vehicle, +y ahead of it).
Point to_vehicle_frame(const IntersectionGeometry& g, const VehicleAgent& v, Point world);

struct Detect {
  int sender = 0;
  Direction direction = Direction::North;
  Point position;
};
struct Elect {
  int leader_id = 0;
};
struct PhaseBroadcast {
  int sender = 0;
  PhaseState phase;
  double remaining = 0.0;
};
struct Handover {
  int from_id = 0;
  int to_id = 0;
  Role to_role = Role::VtlLeader;
};
struct Release {
  int leader_id = 0;
};
using Message = std::variant<Detect, Elect, PhaseBroadcast, Handover, Release>;

std::string_view message_kind(const Message& m);
std::string describe(const Message& m);

struct ProtocolTiming {
  double tick = 0.1;
  double phase_min = 5.0;
  double phase_max = 30.0;
  double pedestrian_phase_fixed = 15.0;
  double clearance = 2.0;  // added to the slowest served vehicle's time to the stop line

  std::int64_t ticks(double seconds) const;
};

struct TrackingParams {
  std::size_t window = 10;
  double min_confidence = tracking::kDefaultMinConfidence;
  std::size_t samples_per_tick = 1;
  ranging::NoiseModel noise;
  ranging::RangingMode mode = ranging::RangingMode::DS;
};

/// Snapshot of everything the protocol may observe during one tick.
struct World {
  std::int64_t tick_index = 0;
  double time = 0.0;
  IntersectionGeometry geometry;
  double comm_range = 300.0;
  double detection_range = 50.0;
  std::vector<VehicleAgent> vehicles;      // sorted by id
  std::vector<PedestrianAgent> pedestrians;  // sorted by id

  const VehicleAgent* find_vehicle(int id) const;
  bool in_comm_range(const VehicleAgent& v) const;
};

struct Candidate {
  int id = 0;
  double distance_to_stopline = 0.0;
};

struct ConflictReport {
  bool vehicle_vehicle = false;
  bool vehicle_pedestrian = false;
  std::vector<Candidate> candidates;         // approaching vehicles in range, by id
  std::vector<int> waiting_pedestrians;      // detected and waiting to cross

  bool any() const { return vehicle_vehicle || vehicle_pedestrian; }
};

ConflictReport sense_conflict(const World& world);

/// Lowest id among the candidates nearest to the stop line. Independent of
/// candidate order.
int select_leader(std::span<const Candidate> candidates);
int elect_leader(const ConflictReport& report);

/// Approaching, in-range vehicles on one axis.
std::vector<Candidate> candidates_on(const World& world, Axis axis);

struct PedestrianTrack {
  explicit PedestrianTrack(const TrackingParams& params)
      : detector(params.window, params.min_confidence) {}

  tracking::CrossingDetector detector;
  std::vector<geometry::TagPosition> estimates;
  bool crossed = false;
  bool untrackable_noted = false;
};

/// Per-leadership protocol state. Handed from leader to leader together
/// with the role; `served` survives across leaders within a run.
struct LeaderState {
  int leader_id = 0;
  Role role = Role::VtlLeader;
  Axis own_axis = Axis::NS;
  std::int64_t phase_start_tick = 0;
  double phase_duration = 0.0;

  // Pedestrian phase bookkeeping.
  std::int64_t active_ticks = 0;
  bool fixed_mode = false;
  std::map<int, PedestrianTrack> tracks;
  std::set<int> served;  // pedestrians confirmed across the street
};

struct PedestrianNote {
  enum class Kind { Tracking, Untrackable, Crossed } kind = Kind::Tracking;
  int pedestrian_id = 0;
  geometry::CoverageStatus coverage = geometry::CoverageStatus::BothAnchors;
  std::optional<tracking::CrossingEvent> event;
};

struct StepOutput {
  PhaseBroadcast broadcast;
  std::optional<Message> control;  // Handover or Release
  std::vector<PedestrianNote> notes;
};

/// Seconds of green the leader grants the served axis: time for the slowest
/// in-range served vehicle to reach the stop line plus clearance, clamped
/// to [phase_min, phase_max].
double plan_green(const World& world, Axis served, const ProtocolTiming& timing);

/// State for a vehicle that just became VTL leader at `world.tick_index`.
LeaderState start_vtl_leadership(int leader_id, const World& world,
                                 const ProtocolTiming& timing, std::set<int> served = {});

/// One tick of the VTL leader: broadcast the current phase and, once the
/// phase timer runs out (or the served axis empties after phase_min), hand
/// over, switch to the pedestrian phase, or release.
StepOutput leader_step(LeaderState& state, const World& world, const ProtocolTiming& timing);

/// One tick of the VPTL leader: hold every lane red, range each pedestrian
/// that wants to cross and hand over once all have been seen crossing. Any
/// pedestrian outside two-anchor coverage pins the phase to exactly
/// pedestrian_phase_fixed seconds.
StepOutput vptl_leader_step(LeaderState& state, const World& world,
                            const ProtocolTiming& timing, const TrackingParams& params,
                            std::uint64_t seed);

}  // namespace uwbloc::vptl
