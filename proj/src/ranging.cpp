#include "uwbloc/ranging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "uwbloc/error.hpp"

namespace uwbloc::ranging {

using geometry::AnchorLayout;
using geometry::Point;
using geometry::RangePair;

double NoiseModel::per_range_sigma() const { return std::numbers::sqrt2 * sigma_e; }

void NoiseModel::validate() const {
  if (!(sigma_e >= 0.0) || !std::isfinite(sigma_e) || !std::isfinite(bias)) {
    throw Error(ErrorCode::InvalidArgument, "sigma_e must be finite and non-negative");
  }
}

std::string_view to_string(RangingMode mode) {
  switch (mode) {
    case RangingMode::SS: return "SS";
    case RangingMode::DS: return "DS";
    case RangingMode::AA: return "AA";
  }
  return "DS";
}

RangingMode parse_ranging_mode(std::string_view text) {
  if (text == "SS") return RangingMode::SS;
  if (text == "DS") return RangingMode::DS;
  if (text == "AA") return RangingMode::AA;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown ranging mode '{}'", text));
}

double GaussianSource::uniform() {
  // 53 random mantissa bits, offset by half an ulp so 0 is never returned.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MeasurementBatch simulate_batch(const AnchorLayout& layout, Point true_position,
                                const NoiseModel& noise, std::size_t n, std::uint64_t seed,
                                RangingMode mode) {
  if (n == 0) {
    throw Error(ErrorCode::InvalidArgument, "batch size must be at least 1");
  }
  if (true_position.y == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "true position lies on the anchor baseline");
  }
  noise.validate();

  const RangePair truth = geometry::ranges_to(layout, true_position);
  MeasurementBatch batch{true_position, {}, seed, mode};
  batch.samples.reserve(n);

  GaussianSource source(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double common = noise.sigma_e * source.normal();
    const double differential = noise.sigma_e * source.normal();
    const double r1 = truth.r1 + common + differential + noise.bias;
    const double r2 = truth.r2 + common - differential + noise.bias;
    batch.samples.push_back({std::max(r1, 0.0), std::max(r2, 0.0)});
  }
  return batch;
}

ErrorProfile error_profile(const AnchorLayout& layout, std::span<const double> distances,
                           std::size_t n, const NoiseModel& noise, std::uint64_t seed,
                           RangingMode mode) {
  ErrorProfile profile;
  const double x = layout.half_baseline;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double d = distances[i];
    if (!(d > x)) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("profile distance {} m must exceed the half-baseline", d));
    }
    // Straight ahead so that both true ranges equal d.
    const Point tag{0.0, std::sqrt(d * d - x * x)};
    const MeasurementBatch batch = simulate_batch(layout, tag, noise, n, mix_seed(seed, i), mode);

    std::vector<double> xs;
    std::vector<double> ys;
    xs.reserve(n);
    ys.reserve(n);
    std::size_t dropped = 0;
    for (const RangePair& sample : batch.samples) {
      try {
        const auto p = geometry::triangulate(layout, sample);
        xs.push_back(p.x_k);
        ys.push_back(p.y_k);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Infeasible) throw;
        ++dropped;
      }
    }
    profile.rows.push_back({d, sample_std(xs), sample_std(ys), xs.size(), dropped,
                            dropped * 100 > n});
  }
  return profile;
}

void write_csv(std::ostream& out, const ErrorProfile& profile) {
  out << "distance_m,std_x_m,std_y_m,n\n";
  for (const auto& row : profile.rows) {
    out << fmt::format("{:.9g},{:.9g},{:.9g},{}\n", row.distance, row.std_x, row.std_y, row.n);
  }
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  // Shift by the first value so a constant sequence yields exactly zero.
  const double pivot = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - pivot;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - pivot - mean) * (v - pivot - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace uwbloc::ranging
