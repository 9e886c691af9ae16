#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "uwbloc/geometry.hpp"

namespace uwbloc::ranging {

/// Additive ranging error. sigma_e is the standard deviation of the scalar
/// error term e that the worst-case perturbations apply to both ranges: the
/// antisymmetric part (r1 + e, r2 - e) and the common part (r1 + e, r2 + e)
/// are independent draws of std sigma_e, so each individual range carries
/// std sqrt(2) * sigma_e.
struct NoiseModel {
  double sigma_e = 0.0185;
  double bias = 0.0;

  double per_range_sigma() const;
  void validate() const;
};

/// All three exchange schemes share one statistical model; the mode is
/// carried through as metadata only.
enum class RangingMode { SS, DS, AA };
std::string_view to_string(RangingMode mode);
RangingMode parse_ranging_mode(std::string_view text);

struct MeasurementBatch {
  geometry::Point true_position;
  std::vector<geometry::RangePair> samples;
  std::uint64_t seed = 0;
  RangingMode mode = RangingMode::DS;
};

struct ErrorProfileRow {
  double distance = 0.0;
  double std_x = 0.0;
  double std_y = 0.0;
  std::size_t n = 0;        // samples that triangulated
  std::size_t dropped = 0;  // samples rejected as infeasible
  bool infeasible_warning = false;  // dropped > 1% of the batch
};

struct ErrorProfile {
  std::vector<ErrorProfileRow> rows;
};

/// Deterministic normal generator. Uses the fully specified mt19937_64 and
/// its own uniform/Box-Muller mapping so streams match across standard
/// library implementations.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // (0, 1)
  double normal();   // N(0, 1)

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

MeasurementBatch simulate_batch(const geometry::AnchorLayout& layout,
                                geometry::Point true_position, const NoiseModel& noise,
                                std::size_t n, std::uint64_t seed,
                                RangingMode mode = RangingMode::DS);

ErrorProfile error_profile(const geometry::AnchorLayout& layout,
                           std::span<const double> distances, std::size_t n,
                           const NoiseModel& noise, std::uint64_t seed,
                           RangingMode mode = RangingMode::DS);

inline const std::vector<double> kDefaultProfileGrid{5, 10, 15, 20, 25, 30, 40};

/// Header `distance_m,std_x_m,std_y_m,n`.
void write_csv(std::ostream& out, const ErrorProfile& profile);

double sample_mean(std::span<const double> values);
/// Unbiased (n - 1) sample standard deviation; zero for fewer than two values.
double sample_std(std::span<const double> values);

}  // namespace uwbloc::ranging
