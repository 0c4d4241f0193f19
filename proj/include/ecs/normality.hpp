#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "ecs/core.hpp"

namespace ecs {

enum class NormalityTest { MardiaKurtosis, HenzeZirkler };

std::string_view to_string(NormalityTest test);
NormalityTest parse_normality_test(std::string_view name);

/// Smallest reported p-value.
inline constexpr double kPValueFloor = 2.2e-16;

struct NormalityTestResult {
  NormalityTest test = NormalityTest::MardiaKurtosis;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;       // rows supplied
  std::size_t p = 0;
  std::size_t n_used = 0;  // rows entering the statistic
  bool subsampled = false;

  bool operator==(const NormalityTestResult&) const = default;
};

struct NormalityOptions {
  /// Henze-Zirkler is O(n^2); larger inputs are subsampled to this many rows.
  std::size_t max_rows = 20000;
  std::uint64_t subsample_seed = 0;
  Execution exec;
};

/// Mardia's multivariate kurtosis test (biased covariance, two-sided normal
/// reference).
NormalityTestResult mardia_kurtosis(const EmbeddingMatrix& x);

/// Henze-Zirkler test with the lognormal null approximation.
NormalityTestResult henze_zirkler(const EmbeddingMatrix& x, const NormalityOptions& options = {});

/// Two-sided standard normal tail 2 (1 - Phi(|z|)), floored.
double two_sided_normal_p(double z);

}  // namespace ecs
