#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ecs/core.hpp"

namespace ecs {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Variate stream for one row of one sample. Draws are a pure function of
/// (seed, row index, draw position), so row i is identical no matter which
/// worker produces it.
class RowStream {
 public:
  RowStream(std::uint64_t seed, std::uint64_t row) noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal by the Box-Muller transform.
  double normal() noexcept;
  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the U^(1/shape) boost.
  double gamma(double shape) noexcept;
  double chi_square(double df) noexcept { return 2.0 * gamma(0.5 * df); }

 private:
  void refill() noexcept;

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  /// Independent generator identified by `tag`.
  SeededRng substream(std::uint64_t tag) const noexcept;
  RowStream row(std::uint64_t index) const noexcept { return RowStream(seed_, index); }

 private:
  std::uint64_t seed_;
};

/// Draws rows [first_row, first_row + count) of the sample defined by
/// (spec, rng). Splitting a sample into chunks reproduces it exactly.
RowMatrix sample_rows(const DistributionSpec& spec, const SeededRng& rng, std::size_t first_row,
                      std::size_t count, const Execution& exec = {});

EmbeddingMatrix sample(const DistributionSpec& spec, std::size_t count, const SeededRng& rng,
                       const Execution& exec = {});

/// k distinct indices from [0, n), ascending; seeded partial Fisher-Yates.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, const SeededRng& rng);

struct Table1Row {
  double df = 0.0;
  double t = 0.0;
  double mean_ecs = 0.0;
  std::optional<double> std_error;  // empty when reps == 1

  bool operator==(const Table1Row&) const = default;
};

struct Table1Config {
  std::size_t n = 100000;
  std::size_t reps = 5;
  std::size_t p = 32;
  std::vector<double> ts = {0.5, 1.0};
  std::vector<double> dfs = {100.0, 10.0, 5.0, 3.0, 2.01};
  std::uint64_t seed = 42;
};

inline constexpr std::size_t kFullScaleSamples = 1000000;

/// Normal versus identity-covariance t replication study. Each replicate
/// draws one N(0, I_p) sample shared by all df comparisons and a fresh t
/// sample per df. Rows come out in descending df, then ascending T.
std::vector<Table1Row> replicate_table1(const Table1Config& config, const Execution& exec = {});

}  // namespace ecs
