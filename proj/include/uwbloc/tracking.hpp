#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "uwbloc/geometry.hpp"
#include "uwbloc/ranging.hpp"

namespace uwbloc::tracking {

using geometry::TagPosition;

struct BatchSource {
  geometry::Point true_position;
  std::uint64_t seed = 0;
  ranging::RangingMode mode = ranging::RangingMode::DS;
  std::size_t samples = 0;
};

struct LocalizedBatch {
  std::vector<TagPosition> points;
  std::size_t dropped = 0;
  BatchSource source;
};

enum class SideLabel { Left, Right, Undecided };
std::string_view to_string(SideLabel label);

struct CrossingEvent {
  std::size_t time_index = 0;
  SideLabel from = SideLabel::Undecided;
  SideLabel to = SideLabel::Undecided;
};

inline constexpr double kDefaultMinConfidence = 0.999;

/// Triangulates every sample with the front-solution rule; samples beyond
/// the clamp tolerance are dropped and counted. Throws EmptyResult when
/// nothing survives.
LocalizedBatch localize_batch(const geometry::AnchorLayout& layout,
                              const ranging::MeasurementBatch& batch);

/// One-sided location test on the mean lateral coordinate (normal
/// approximation). Left when mean(x) >= 0 is rejected at min_confidence,
/// Right when mean(x) <= 0 is.
SideLabel classify_side(std::span<const TagPosition> points,
                        double min_confidence = kDefaultMinConfidence);
SideLabel classify_side(const LocalizedBatch& batch,
                        double min_confidence = kDefaultMinConfidence);

/// Centered moving average; the window shrinks at both ends so the output
/// has the same length as the input.
std::vector<TagPosition> smooth(std::span<const TagPosition> points, std::size_t window);

/// Incremental form of detect_crossing. Each pushed sample closes a
/// trailing window that is relabeled; a Left<->Right change of the last
/// decided label emits an event.
class CrossingDetector {
 public:
  CrossingDetector(std::size_t window, double min_confidence = kDefaultMinConfidence);

  std::optional<CrossingEvent> push(const TagPosition& p);

  SideLabel last_decided() const { return last_; }
  std::size_t count() const { return index_; }

 private:
  std::size_t window_;
  double min_confidence_;
  std::deque<TagPosition> buffer_;
  std::size_t index_ = 0;
  SideLabel last_ = SideLabel::Undecided;
};

std::vector<CrossingEvent> detect_crossing(std::span<const TagPosition> stream,
                                           std::size_t window,
                                           double min_confidence = kDefaultMinConfidence);

/// Left/right separation experiment: tags at (-lateral, d) and (+lateral, d)
/// for every forward distance d.
struct SideTestConfig {
  double lateral = 5.0;
  std::vector<double> distances{10.0, 20.0, 30.0};
  std::size_t n = 200;
  ranging::NoiseModel noise;
  std::uint64_t seed = 1;
  double min_confidence = kDefaultMinConfidence;
  ranging::RangingMode mode = ranging::RangingMode::DS;
};

struct SideTestRow {
  double distance = 0.0;
  LocalizedBatch left;
  LocalizedBatch right;
  SideLabel left_label = SideLabel::Undecided;
  SideLabel right_label = SideLabel::Undecided;
  double left_max_x = 0.0;
  double right_min_x = 0.0;
  bool separated = false;  // x-extents of the two clouds are disjoint

  bool correctly_classified() const {
    return left_label == SideLabel::Left && right_label == SideLabel::Right;
  }
};

std::vector<SideTestRow> side_test(const geometry::AnchorLayout& layout,
                                   const SideTestConfig& config);

/// `x_m,y_m`
void write_points_csv(std::ostream& out, std::span<const TagPosition> points);
/// `index,from,to`
void write_events_csv(std::ostream& out, std::span<const CrossingEvent> events);
/// `distance_m,side,x_m,y_m` for every point of every row.
void write_scatter_csv(std::ostream& out, std::span<const SideTestRow> rows);
/// One `distance=... separated=...` line per row.
void write_side_report(std::ostream& out, std::span<const SideTestRow> rows);

}  // namespace uwbloc::tracking
