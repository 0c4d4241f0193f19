#pragma once

#include <cstddef>
#include <span>

#include "ecs/core.hpp"

namespace ecs {

/// Embedded characteristic score at every frequency in ts:
///   (1 / (p T)) sum_rho | ecf(real_rho, T) - ecf(synthetic_rho, T) |
/// Feature columns are evaluated independently and summed in column order.
EcsResult ecs(const EmbeddingMatrix& real, const EmbeddingMatrix& synthetic, const FrequencySet& ts,
              const Execution& exec = {});

struct FrechetResult {
  double fid = 0.0;
  double fid_per_dimension = 0.0;
  std::size_t p = 0;

  bool operator==(const FrechetResult&) const = default;
};

/// Closed-form Frechet distance between Gaussians with the given moments.
/// Roundoff negatives down to -1e-8 are clipped to 0; anything lower throws
/// NumericFailure.
FrechetResult frechet_distance(const GaussianSummary& a, const GaussianSummary& b);

struct TailBound {
  double s = 0.0;
  double bound_exact = 0.0;      // s * integral_{-1/s}^{1/s} (1 - ecf(t)) dt, Simpson
  double bound_trapezoid = 0.0;  // 2 (1 - Re ecf(1/s))
  double empirical_tail = 0.0;   // fraction of |x| > 2s

  bool operator==(const TailBound&) const = default;
};

inline constexpr int kDefaultQuadPoints = 101;

/// Characteristic-function bound on P(|Y| > 2s) from the empirical CF of one
/// column. quad_points must be odd and >= 3.
TailBound tail_bound(std::span<const double> column, double s, int quad_points = kDefaultQuadPoints);

/// |ecf(t) - sum_{v<=ell} (i t)^v m_v / v!| with m_v the raw sample moments.
/// Small for light-tailed data; large when moments do not exist.
double moment_taylor_check(std::span<const double> column, double t, int ell);

}  // namespace ecs
