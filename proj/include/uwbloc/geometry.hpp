#pragma once

#include <string_view>

namespace uwbloc::geometry {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

/// Two anchors on the host vehicle's rear-view mirrors plus the coverage
/// envelope measured around them.
///
/// Frame: anchors sit at (-half_baseline, 0) (left) and (+half_baseline, 0)
/// (right); +y points forward. Angles are bearings off the forward axis.
struct AnchorLayout {
  double half_baseline = 1.85 / 2.0;
  double mount_height = 1.1;  // metadata, localization is planar
  double front_range = 50.0;
  double front_halfangle = 60.0;
  double occlusion_start = 60.0;
  double occlusion_end = 90.0;
  double side_range = 5.0;

  static AnchorLayout with_baseline(double baseline);

  Point left_anchor() const { return {-half_baseline, 0.0}; }
  Point right_anchor() const { return {half_baseline, 0.0}; }

  /// Throws DegenerateLayout / ConfigError when an invariant is broken.
  void validate() const;
};

struct RangePair {
  double r1 = 0.0;  // to the left anchor
  double r2 = 0.0;  // to the right anchor
};

struct TagPosition {
  double x_k = 0.0;  // lateral, positive to the right
  double y_k = 0.0;  // longitudinal, positive forward
};

struct Sensitivity {
  double dx_de = 0.0;
  double dy_de = 0.0;
};

enum class CoverageStatus { BothAnchors, OneAnchor, None };
std::string_view to_string(CoverageStatus status);

enum class Perturbation { WorstCaseX, WorstCaseY };

/// Relative slack on the square-root argument before a pair is rejected as
/// infeasible; inside the slack the tag is snapped onto the baseline.
inline constexpr double kClampTolerance = 1e-6;

/// True distances from both anchors to a point.
RangePair ranges_to(const AnchorLayout& layout, Point p);

TagPosition triangulate(const AnchorLayout& layout, RangePair ranges);

/// WorstCaseX evaluates (r1 + e, r2 - e); WorstCaseY evaluates (r1 + e, r2 + e).
TagPosition perturbed_triangulate(const AnchorLayout& layout, RangePair ranges,
                                  double e, Perturbation mode);

/// Analytic derivative of the perturbed solution with respect to the
/// ranging error e, for arbitrary (r1, r2).
Sensitivity sensitivity(const AnchorLayout& layout, RangePair ranges, double e = 0.0);

/// Closed form of sensitivity() for a tag straight ahead (r1 = r2 = r, e = 0).
Sensitivity sensitivity_frontal(const AnchorLayout& layout, double r);

/// Picks the front or rear intersection using a third, off-baseline anchor.
TagPosition resolve_side(TagPosition candidate, double aux_range, Point aux_anchor);

CoverageStatus coverage(const AnchorLayout& layout, Point true_position);

}  // namespace uwbloc::geometry
