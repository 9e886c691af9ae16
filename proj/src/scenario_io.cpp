#include "uwbloc/scenario_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "uwbloc/error.hpp"

namespace uwbloc::vptl {
namespace {

using nlohmann::json;

void reject_unknown(const json& object, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) {
    throw Error(ErrorCode::ConfigError, fmt::format("'{}' must be an object", where));
  }
  for (const auto& item : object.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("unknown key '{}' in {}", item.key(), where));
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (auto it = object.find(key); it != object.end()) target = it->get<T>();
}

Point read_point(const json& value, std::string_view what) {
  if (!value.is_array() || value.size() != 2) {
    throw Error(ErrorCode::ConfigError, fmt::format("{} must be an [x, y] pair", what));
  }
  return {value[0].get<double>(), value[1].get<double>()};
}

IntersectionScenario from_json(const json& doc) {
  reject_unknown(doc, "scenario",
                 {"name", "seed", "tick", "duration", "comm_range", "detection_range",
                  "queue_gap", "intersection", "timing", "tracking", "layout", "vehicles",
                  "pedestrians"});
  IntersectionScenario sc;
  read(doc, "name", sc.name);
  read(doc, "seed", sc.seed);
  read(doc, "tick", sc.timing.tick);
  read(doc, "duration", sc.duration);
  read(doc, "comm_range", sc.comm_range);
  read(doc, "detection_range", sc.detection_range);
  read(doc, "queue_gap", sc.queue_gap);

  if (auto it = doc.find("intersection"); it != doc.end()) {
    reject_unknown(*it, "intersection", {"stopline_offset", "lane_offset"});
    read(*it, "stopline_offset", sc.geometry.stopline_offset);
    read(*it, "lane_offset", sc.geometry.lane_offset);
  }
  if (auto it = doc.find("timing"); it != doc.end()) {
    reject_unknown(*it, "timing",
                   {"phase_min", "phase_max", "pedestrian_phase_fixed", "clearance"});
    read(*it, "phase_min", sc.timing.phase_min);
    read(*it, "phase_max", sc.timing.phase_max);
    read(*it, "pedestrian_phase_fixed", sc.timing.pedestrian_phase_fixed);
    read(*it, "clearance", sc.timing.clearance);
  }
  if (auto it = doc.find("tracking"); it != doc.end()) {
    reject_unknown(*it, "tracking",
                   {"window", "min_confidence", "samples_per_tick", "sigma_e", "bias", "mode"});
    read(*it, "window", sc.tracking.window);
    read(*it, "min_confidence", sc.tracking.min_confidence);
    read(*it, "samples_per_tick", sc.tracking.samples_per_tick);
    read(*it, "sigma_e", sc.tracking.noise.sigma_e);
    read(*it, "bias", sc.tracking.noise.bias);
    if (auto mode = it->find("mode"); mode != it->end()) {
      sc.tracking.mode = ranging::parse_ranging_mode(mode->get<std::string>());
    }
  }
  if (auto it = doc.find("layout"); it != doc.end()) {
    reject_unknown(*it, "layout",
                   {"baseline", "mount_height", "front_range", "front_halfangle",
                    "occlusion_start", "occlusion_end", "side_range"});
    if (auto b = it->find("baseline"); b != it->end()) {
      sc.layout.half_baseline = b->get<double>() / 2.0;
    }
    read(*it, "mount_height", sc.layout.mount_height);
    read(*it, "front_range", sc.layout.front_range);
    read(*it, "front_halfangle", sc.layout.front_halfangle);
    read(*it, "occlusion_start", sc.layout.occlusion_start);
    read(*it, "occlusion_end", sc.layout.occlusion_end);
    read(*it, "side_range", sc.layout.side_range);
  }
  if (auto it = doc.find("vehicles"); it != doc.end()) {
    for (const auto& v : *it) {
      reject_unknown(v, "vehicle", {"id", "spawn", "direction", "distance", "speed"});
      VehicleSpec spec;
      read(v, "id", spec.id);
      read(v, "spawn", spec.spawn_time);
      if (auto d = v.find("direction"); d != v.end()) {
        spec.direction = parse_direction(d->get<std::string>());
      }
      read(v, "distance", spec.distance);
      read(v, "speed", spec.speed);
      sc.vehicles.push_back(spec);
    }
  }
  if (auto it = doc.find("pedestrians"); it != doc.end()) {
    for (const auto& p : *it) {
      reject_unknown(p, "pedestrian", {"id", "tag_id", "spawn", "start", "end", "walk_speed"});
      PedestrianSpec spec;
      read(p, "id", spec.id);
      spec.tag_id = spec.id;
      read(p, "tag_id", spec.tag_id);
      read(p, "spawn", spec.spawn_time);
      if (!p.contains("start") || !p.contains("end")) {
        throw Error(ErrorCode::ConfigError, "pedestrian requires start and end points");
      }
      spec.start = read_point(p["start"], "pedestrian start");
      spec.end = read_point(p["end"], "pedestrian end");
      read(p, "walk_speed", spec.walk_speed);
      sc.pedestrians.push_back(spec);
    }
  }
  sc.validate();
  return sc;
}

}  // namespace

IntersectionScenario parse_scenario(std::string_view json_text) {
  try {
    return from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("malformed scenario: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, fmt::format("invalid scenario: {}", e.what()));
  }
}

IntersectionScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Io, fmt::format("cannot open scenario file {}", path.string()));
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

}  // namespace uwbloc::vptl
