#include "uwbloc/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "uwbloc/error.hpp"

namespace uwbloc::tracking {
namespace {

void require_confidence(double c) {
  if (!(c > 0.0 && c < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_confidence must lie in (0, 1)");
  }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::string_view to_string(SideLabel label) {
  switch (label) {
    case SideLabel::Left: return "Left";
    case SideLabel::Right: return "Right";
    case SideLabel::Undecided: return "Undecided";
  }
  return "Undecided";
}

LocalizedBatch localize_batch(const geometry::AnchorLayout& layout,
                              const ranging::MeasurementBatch& batch) {
  LocalizedBatch out;
  out.source = {batch.true_position, batch.seed, batch.mode, batch.samples.size()};
  out.points.reserve(batch.samples.size());
  for (const auto& sample : batch.samples) {
    try {
      out.points.push_back(geometry::triangulate(layout, sample));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      ++out.dropped;
    }
  }
  if (out.points.empty()) {
    throw Error(ErrorCode::EmptyResult, "every sample in the batch was infeasible");
  }
  return out;
}

SideLabel classify_side(std::span<const TagPosition> points, double min_confidence) {
  require_confidence(min_confidence);
  if (points.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "side classification needs at least two points");
  }
  std::vector<double> xs;
  xs.reserve(points.size());
  for (const auto& p : points) xs.push_back(p.x_k);

  const double mean = ranging::sample_mean(xs);
  const double sd = ranging::sample_std(xs);
  double z = 0.0;
  if (sd > 0.0) {
    z = mean / (sd / std::sqrt(static_cast<double>(xs.size())));
  } else if (mean != 0.0) {
    z = std::copysign(std::numeric_limits<double>::infinity(), mean);
  }

  const double alpha = 1.0 - min_confidence;
  if (normal_cdf(z) <= alpha) return SideLabel::Left;
  if (normal_cdf(-z) <= alpha) return SideLabel::Right;
  return SideLabel::Undecided;
}

SideLabel classify_side(const LocalizedBatch& batch, double min_confidence) {
  return classify_side(std::span<const TagPosition>(batch.points), min_confidence);
}

std::vector<TagPosition> smooth(std::span<const TagPosition> points, std::size_t window) {
  if (window == 0) {
    throw Error(ErrorCode::InvalidArgument, "smoothing window must be at least 1");
  }
  const std::size_t before = (window - 1) / 2;
  const std::size_t after = window / 2;
  std::vector<TagPosition> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(points.size() - 1, i + after);
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      sx += points[j].x_k;
      sy += points[j].y_k;
    }
    const auto count = static_cast<double>(hi - lo + 1);
    out.push_back({sx / count, sy / count});
  }
  return out;
}

CrossingDetector::CrossingDetector(std::size_t window, double min_confidence)
    : window_(window), min_confidence_(min_confidence) {
  if (window < 2) {
    throw Error(ErrorCode::InvalidArgument, "crossing window must be at least 2");
  }
  require_confidence(min_confidence);
}

std::optional<CrossingEvent> CrossingDetector::push(const TagPosition& p) {
  const std::size_t index = index_++;
  buffer_.push_back(p);
  if (buffer_.size() > window_) buffer_.pop_front();
  if (buffer_.size() < window_) return std::nullopt;

  const std::vector<TagPosition> current(buffer_.begin(), buffer_.end());
  const SideLabel label = classify_side(current, min_confidence_);
  if (label == SideLabel::Undecided) return std::nullopt;

  const SideLabel previous = last_;
  last_ = label;
  if (previous != SideLabel::Undecided && previous != label) {
    return CrossingEvent{index, previous, label};
  }
  return std::nullopt;
}

std::vector<CrossingEvent> detect_crossing(std::span<const TagPosition> stream,
                                           std::size_t window, double min_confidence) {
  CrossingDetector detector(window, min_confidence);
  std::vector<CrossingEvent> events;
  for (const auto& p : stream) {
    if (auto event = detector.push(p)) events.push_back(*event);
  }
  return events;
}

std::vector<SideTestRow> side_test(const geometry::AnchorLayout& layout,
                                   const SideTestConfig& config) {
  if (!(config.lateral >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "lateral offset must be non-negative");
  }
  std::vector<SideTestRow> rows;
  for (std::size_t i = 0; i < config.distances.size(); ++i) {
    const double d = config.distances[i];
    if (!(d > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "side-test distances must be positive");
    }
    SideTestRow row;
    row.distance = d;
    const auto left_batch =
        ranging::simulate_batch(layout, {-config.lateral, d}, config.noise, config.n,
                                ranging::mix_seed(config.seed, 2 * i), config.mode);
    const auto right_batch =
        ranging::simulate_batch(layout, {config.lateral, d}, config.noise, config.n,
                                ranging::mix_seed(config.seed, 2 * i + 1), config.mode);
    row.left = localize_batch(layout, left_batch);
    row.right = localize_batch(layout, right_batch);
    row.left_label = classify_side(row.left, config.min_confidence);
    row.right_label = classify_side(row.right, config.min_confidence);

    row.left_max_x = -std::numeric_limits<double>::infinity();
    for (const auto& p : row.left.points) row.left_max_x = std::max(row.left_max_x, p.x_k);
    row.right_min_x = std::numeric_limits<double>::infinity();
    for (const auto& p : row.right.points) row.right_min_x = std::min(row.right_min_x, p.x_k);
    row.separated = row.left_max_x < row.right_min_x;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_points_csv(std::ostream& out, std::span<const TagPosition> points) {
  out << "x_m,y_m\n";
  for (const auto& p : points) out << fmt::format("{:.9g},{:.9g}\n", p.x_k, p.y_k);
}

void write_events_csv(std::ostream& out, std::span<const CrossingEvent> events) {
  out << "index,from,to\n";
  for (const auto& e : events) {
    out << fmt::format("{},{},{}\n", e.time_index, to_string(e.from), to_string(e.to));
  }
}

void write_scatter_csv(std::ostream& out, std::span<const SideTestRow> rows) {
  out << "distance_m,side,x_m,y_m\n";
  for (const auto& row : rows) {
    for (const auto& p : row.left.points) {
      out << fmt::format("{:.9g},left,{:.9g},{:.9g}\n", row.distance, p.x_k, p.y_k);
    }
    for (const auto& p : row.right.points) {
      out << fmt::format("{:.9g},right,{:.9g},{:.9g}\n", row.distance, p.x_k, p.y_k);
    }
  }
}

void write_side_report(std::ostream& out, std::span<const SideTestRow> rows) {
  for (const auto& row : rows) {
    out << fmt::format(
        "distance={:.9g} left_label={} right_label={} left_max_x={:.6f} right_min_x={:.6f} "
        "separated={} dropped={}\n",
        row.distance, to_string(row.left_label), to_string(row.right_label), row.left_max_x,
        row.right_min_x, row.separated ? "true" : "false", row.left.dropped + row.right.dropped);
  }
}

}  // namespace uwbloc::tracking
