#include "uwbloc/geometry.hpp"

#include <cmath>
#include <numbers>

#include "uwbloc/error.hpp"

namespace uwbloc::geometry {
namespace {

void require_baseline(const AnchorLayout& layout) {
  if (!(layout.half_baseline > 0.0) || !std::isfinite(layout.half_baseline)) {
    throw Error(ErrorCode::DegenerateLayout, "anchor half-baseline must be positive");
  }
}

void require_ranges(RangePair ranges) {
  if (!std::isfinite(ranges.r1) || !std::isfinite(ranges.r2) || ranges.r1 < 0.0 ||
      ranges.r2 < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "ranges must be finite and non-negative");
  }
}

double bearing_deg(Point p) {
  return std::atan2(std::abs(p.x), p.y) * 180.0 / std::numbers::pi;
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

AnchorLayout AnchorLayout::with_baseline(double baseline) {
  AnchorLayout layout;
  layout.half_baseline = baseline / 2.0;
  return layout;
}

void AnchorLayout::validate() const {
  require_baseline(*this);
  if (!(side_range > 0.0) || !(front_range > side_range)) {
    throw Error(ErrorCode::ConfigError, "coverage ranges must satisfy front_range > side_range > 0");
  }
  if (!(front_halfangle > 0.0) || front_halfangle > 90.0) {
    throw Error(ErrorCode::ConfigError, "front half-angle must lie in (0, 90] degrees");
  }
  if (occlusion_start < front_halfangle || !(occlusion_end > occlusion_start) ||
      occlusion_end > 180.0) {
    throw Error(ErrorCode::ConfigError, "occlusion band must lie outside the front sector");
  }
}

std::string_view to_string(CoverageStatus status) {
  switch (status) {
    case CoverageStatus::BothAnchors: return "BothAnchors";
    case CoverageStatus::OneAnchor: return "OneAnchor";
    case CoverageStatus::None: return "None";
  }
  return "None";
}

RangePair ranges_to(const AnchorLayout& layout, Point p) {
  return {distance(p, layout.left_anchor()), distance(p, layout.right_anchor())};
}

TagPosition triangulate(const AnchorLayout& layout, RangePair ranges) {
  require_baseline(layout);
  require_ranges(ranges);

  const double x = layout.half_baseline;
  const double r1sq = ranges.r1 * ranges.r1;
  const double r2sq = ranges.r2 * ranges.r2;
  const double x_k = (r1sq - r2sq) / (4.0 * x);
  // Symmetric in (r1, r2) so swapping the anchors only flips the sign of x_k.
  const double y_sq = 0.5 * (r1sq + r2sq) - x * x - x_k * x_k;

  if (y_sq >= 0.0) {
    return {x_k, std::sqrt(y_sq)};
  }
  const double sum = ranges.r1 + ranges.r2;
  if (y_sq >= -kClampTolerance * sum * sum) {
    return {x_k, 0.0};
  }
  throw Error(ErrorCode::Infeasible, "infeasible ranging pair");
}

TagPosition perturbed_triangulate(const AnchorLayout& layout, RangePair ranges, double e,
                                  Perturbation mode) {
  const RangePair perturbed =
      mode == Perturbation::WorstCaseX ? RangePair{ranges.r1 + e, ranges.r2 - e}
                                       : RangePair{ranges.r1 + e, ranges.r2 + e};
  return triangulate(layout, perturbed);
}

Sensitivity sensitivity(const AnchorLayout& layout, RangePair ranges, double e) {
  require_baseline(layout);
  require_ranges(ranges);

  const double x = layout.half_baseline;
  const double a = e + ranges.r1;
  const double b = e + ranges.r2;
  const double zeta = a * a - b * b;

  // y~ = x * sqrt(radicand); the chain rule on radicand gives the numerator.
  const double radicand =
      (a * a + b * b) / (2.0 * x * x) - zeta * zeta / (16.0 * x * x * x * x) - 1.0;
  if (!(radicand > 0.0)) {
    throw Error(ErrorCode::Singular, "vertical sensitivity is singular on the baseline");
  }
  const double numerator = (4.0 * e + 2.0 * ranges.r1 + 2.0 * ranges.r2) / (2.0 * x) -
                           (2.0 * ranges.r1 - 2.0 * ranges.r2) * zeta / (8.0 * x * x * x);

  return {(ranges.r1 + ranges.r2) / (2.0 * x), numerator / (2.0 * std::sqrt(radicand))};
}

Sensitivity sensitivity_frontal(const AnchorLayout& layout, double r) {
  require_baseline(layout);
  const double x = layout.half_baseline;
  if (!(r > x) || !std::isfinite(r)) {
    throw Error(ErrorCode::Singular, "frontal sensitivity requires r > half-baseline");
  }
  const double ratio = x / r;
  return {r / x, 1.0 / std::sqrt(1.0 - ratio * ratio)};
}

TagPosition resolve_side(TagPosition candidate, double aux_range, Point aux_anchor) {
  if (std::abs(aux_anchor.y) <= 1e-12) {
    throw Error(ErrorCode::Ambiguous, "auxiliary anchor lies on the baseline");
  }
  const TagPosition front{candidate.x_k, std::abs(candidate.y_k)};
  const TagPosition rear{candidate.x_k, -std::abs(candidate.y_k)};
  const double front_residual =
      std::abs(distance({front.x_k, front.y_k}, aux_anchor) - aux_range);
  const double rear_residual = std::abs(distance({rear.x_k, rear.y_k}, aux_anchor) - aux_range);

  const double tolerance = 1e-9 * std::max(1.0, std::abs(aux_range));
  if (std::abs(front_residual - rear_residual) <= tolerance) {
    throw Error(ErrorCode::Ambiguous, "auxiliary range cannot separate the two intersections");
  }
  return front_residual < rear_residual ? front : rear;
}

CoverageStatus coverage(const AnchorLayout& layout, Point p) {
  const double range = std::hypot(p.x, p.y);
  if (range <= layout.side_range) {
    return CoverageStatus::BothAnchors;
  }
  if (range > layout.front_range) {
    return CoverageStatus::None;
  }
  const double bearing = bearing_deg(p);
  if (bearing <= layout.front_halfangle) {
    return CoverageStatus::BothAnchors;
  }
  if (bearing >= layout.occlusion_start && bearing <= layout.occlusion_end) {
    return CoverageStatus::OneAnchor;
  }
  return CoverageStatus::None;
}

}  // namespace uwbloc::geometry
