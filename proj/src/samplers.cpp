#include "ecs/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "ecs/parallel.hpp"
#include "ecs/stats.hpp"

namespace ecs {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RowStream::RowStream(std::uint64_t seed, std::uint64_t row) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, 0u, static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32)} {}

void RowStream::refill() noexcept {
  block_ = Philox4x32::generate(counter_, key_);
  if (++counter_[0] == 0) ++counter_[1];
  used_ = 0;
}

double RowStream::uniform() noexcept {
  if (used_ > 2) refill();
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(block_[used_]) << 32 | block_[used_ + 1]) >> 11;
  used_ += 2;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RowStream::normal() noexcept {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

double RowStream::gamma(double shape) noexcept {
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

SeededRng SeededRng::substream(std::uint64_t tag) const noexcept {
  return SeededRng(splitmix64(seed_ ^ splitmix64(tag + 0x632BE59BD9B4E019ull)));
}

namespace {

// Lower-triangular factor F with F F^T = scale; rank-deficient PSD scales use
// the eigen factor.
Eigen::MatrixXd scale_factor(const Eigen::MatrixXd& scale) {
  const double asym = (scale - scale.transpose()).cwiseAbs().maxCoeff();
  const double magnitude = scale.cwiseAbs().maxCoeff();
  if (asym > 1e-12 * magnitude) throw Error(ErrorCode::NonPsdScale, "scale matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scale);
  const double top = solver.eigenvalues().maxCoeff();
  const double bottom = solver.eigenvalues().minCoeff();
  if (top < 0.0 || bottom < -1e-10 * top) {
    throw Error(ErrorCode::NonPsdScale, "scale has eigenvalue " + std::to_string(bottom));
  }
  return solver.eigenvectors() * solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

RowMatrix sample_rows(const DistributionSpec& spec, const SeededRng& rng, std::size_t first_row,
                      std::size_t count, const Execution& exec) {
  const auto p = static_cast<Eigen::Index>(spec.dim());
  const bool is_t = spec.family() == Family::MultivariateT;
  const double df = spec.df();
  const std::optional<double> iso = spec.isotropic_scale();
  const double iso_root = iso ? std::sqrt(*iso) : 0.0;
  const Eigen::MatrixXd factor = iso ? Eigen::MatrixXd() : scale_factor(spec.effective_scale());
  const Eigen::VectorXd& mean = spec.mean();

  RowMatrix out(static_cast<Eigen::Index>(count), p);
  parallel_for(count, exec.threads, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd z(p);
    for (std::size_t r = begin; r < end; ++r) {
      RowStream stream = rng.row(first_row + r);
      for (Eigen::Index j = 0; j < p; ++j) z(j) = stream.normal();
      double weight = 1.0;
      if (is_t) weight = std::sqrt(df / stream.chi_square(df));
      auto row = out.row(static_cast<Eigen::Index>(r));
      if (iso) {
        row = (iso_root * weight) * z.transpose();
      } else {
        row = weight * (factor * z).transpose();
      }
      row += mean.transpose();
    }
  });
  return out;
}

EmbeddingMatrix sample(const DistributionSpec& spec, std::size_t count, const SeededRng& rng,
                       const Execution& exec) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  return EmbeddingMatrix(sample_rows(spec, rng, 0, count, exec));
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, const SeededRng& rng) {
  if (k > n) throw Error(ErrorCode::InvalidArgument, "cannot draw more indices than rows");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  RowStream stream = rng.row(0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto span = static_cast<double>(n - i);
    auto offset = static_cast<std::size_t>(stream.uniform() * span);
    offset = std::min(offset, n - i - 1);
    std::swap(pool[i], pool[i + offset]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

namespace {

// Streaming per-column empirical CF sums for several frequencies. Exact
// accumulation means chunked feeding matches a single pass bit for bit.
class EcfAccumulator {
 public:
  EcfAccumulator(std::size_t p, const std::vector<double>& ts)
      : p_(p), ts_(ts), re_(p * ts.size()), im_(p * ts.size()) {}

  void add(const RowMatrix& rows, const Execution& exec) {
    const auto n = rows.rows();
    parallel_for(p_, exec.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j) {
        for (std::size_t k = 0; k < ts_.size(); ++k) {
          CompensatedSum& re = re_[k * p_ + j];
          CompensatedSum& im = im_[k * p_ + j];
          const double t = ts_[k];
          for (Eigen::Index i = 0; i < n; ++i) {
            const double angle = t * rows(i, static_cast<Eigen::Index>(j));
            re.add(std::cos(angle));
            im.add(std::sin(angle));
          }
        }
      }
    });
    count_ += static_cast<std::size_t>(n);
  }

  ComplexScalar value(std::size_t t_index, std::size_t column) const {
    const auto n = static_cast<double>(count_);
    return {re_[t_index * p_ + column].value() / n, im_[t_index * p_ + column].value() / n};
  }

 private:
  std::size_t p_;
  std::vector<double> ts_;
  std::vector<CompensatedSum> re_;
  std::vector<CompensatedSum> im_;
  std::size_t count_ = 0;
};

constexpr std::size_t kChunkRows = 1 << 15;

EcfAccumulator stream_ecf(const DistributionSpec& spec, const SeededRng& rng, std::size_t n,
                          const std::vector<double>& ts, const Execution& exec) {
  EcfAccumulator acc(spec.dim(), ts);
  for (std::size_t first = 0; first < n; first += kChunkRows) {
    const std::size_t count = std::min(kChunkRows, n - first);
    acc.add(sample_rows(spec, rng, first, count, exec), exec);
  }
  return acc;
}

}  // namespace

std::vector<Table1Row> replicate_table1(const Table1Config& config, const Execution& exec) {
  if (config.n == 0) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (config.reps == 0) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
  if (config.p == 0) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  const FrequencySet ts(config.ts);
  std::vector<double> dfs = config.dfs;
  if (dfs.empty()) throw Error(ErrorCode::InvalidArgument, "df grid is empty");
  std::sort(dfs.begin(), dfs.end(), std::greater<>());

  const std::size_t p = config.p;
  const std::size_t nt = ts.size();
  // ecs_values[d][k][r]
  std::vector<std::vector<std::vector<double>>> ecs_values(
      dfs.size(), std::vector<std::vector<double>>(nt, std::vector<double>(config.reps)));

  const SeededRng root(config.seed);
  const auto normal_spec = DistributionSpec::standard_normal(p);
  for (std::size_t r = 0; r < config.reps; ++r) {
    const SeededRng rep_rng = root.substream(r);
    const EcfAccumulator normal_ecf = stream_ecf(normal_spec, rep_rng.substream(0), config.n, ts.values(), exec);
    for (std::size_t d = 0; d < dfs.size(); ++d) {
      const auto t_spec = DistributionSpec::student_t(dfs[d], p, IdentityCovariance{});
      const EcfAccumulator t_ecf = stream_ecf(t_spec, rep_rng.substream(1 + d), config.n, ts.values(), exec);
      for (std::size_t k = 0; k < nt; ++k) {
        CompensatedSum total;
        for (std::size_t j = 0; j < p; ++j) total.add(std::abs(normal_ecf.value(k, j) - t_ecf.value(k, j)));
        ecs_values[d][k][r] = total.value() / (static_cast<double>(p) * ts.values()[k]);
      }
    }
  }

  std::vector<Table1Row> rows;
  for (std::size_t d = 0; d < dfs.size(); ++d) {
    for (std::size_t k = 0; k < nt; ++k) {
      const auto& values = ecs_values[d][k];
      CompensatedSum sum;
      for (double v : values) sum.add(v);
      const double mean = sum.value() / static_cast<double>(values.size());
      Table1Row row{dfs[d], ts.values()[k], mean, std::nullopt};
      if (values.size() > 1) {
        CompensatedSum squares;
        for (double v : values) squares.add((v - mean) * (v - mean));
        const double variance = squares.value() / static_cast<double>(values.size() - 1);
        row.std_error = std::sqrt(variance / static_cast<double>(values.size()));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ecs
