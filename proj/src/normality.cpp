#include "ecs/normality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ecs/parallel.hpp"
#include "ecs/samplers.hpp"
#include "ecs/stats.hpp"

namespace ecs {

std::string_view to_string(NormalityTest test) {
  switch (test) {
    case NormalityTest::MardiaKurtosis: return "mardia_kurtosis";
    case NormalityTest::HenzeZirkler: return "henze_zirkler";
  }
  return "unknown";
}

NormalityTest parse_normality_test(std::string_view name) {
  if (name == "mardia" || name == "mardia_kurtosis") return NormalityTest::MardiaKurtosis;
  if (name == "hz" || name == "henze_zirkler") return NormalityTest::HenzeZirkler;
  throw Error(ErrorCode::InvalidArgument, "unknown normality test '" + std::string(name) + "'");
}

double two_sided_normal_p(double z) {
  const double p = std::erfc(std::abs(z) / std::numbers::sqrt2);
  return std::clamp(p, kPValueFloor, 1.0);
}

namespace {

// Rows mapped through the inverse Cholesky factor of the biased covariance,
// so squared Mahalanobis distances become squared Euclidean ones.
RowMatrix standardize(const EmbeddingMatrix& x, const Execution& exec) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const Eigen::VectorXd mean = column_means(x);
  const Eigen::MatrixXd cov = centered_scatter(x, mean, exec) / static_cast<double>(n);

  // Affinely degenerate rows (duplicates, collinear samples) are a data
  // problem; too few rows for the dimension is a shape problem.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const double top = lambda.maxCoeff();
  const auto rank = top > 0.0 ? static_cast<std::size_t>((lambda.array() > 1e-10 * top).count()) : 0;
  const std::size_t attainable = std::min(n > 0 ? n - 1 : 0, p);
  if (rank < attainable) {
    throw Error(ErrorCode::SingularCovariance,
                "sample covariance has rank " + std::to_string(rank) + " (expected " + std::to_string(attainable) +
                    "); rows are affinely dependent");
  }
  if (n <= p + 1) {
    throw Error(ErrorCode::InsufficientSamples,
                "need n > p + 1 rows, got n=" + std::to_string(n) + " with p=" + std::to_string(p));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "Cholesky factorization failed");

  Eigen::MatrixXd centered_t = (x.data().rowwise() - mean.transpose()).transpose();
  llt.matrixL().solveInPlace(centered_t);
  return centered_t.transpose();
}

// Exact integer sum of terms in [0, 1], each truncated to 64 fractional
// bits. Order independent; cheaper than CompensatedSum when the terms span
// many binades.
class UnitIntervalSum {
 public:
  void add(double x) noexcept { acc_ += static_cast<unsigned __int128>(x * 0x1p64); }
  void merge(const UnitIntervalSum& other) noexcept { acc_ += other.acc_; }
  double value() const noexcept { return static_cast<double>(acc_) * 0x1p-64; }

 private:
  unsigned __int128 acc_ = 0;
};

double squared_norm(const double* y, std::size_t p) {
  double s = 0.0;
  for (std::size_t k = 0; k < p; ++k) s += y[k] * y[k];
  return s;
}

}  // namespace

NormalityTestResult mardia_kurtosis(const EmbeddingMatrix& x) {
  const RowMatrix y = standardize(x, {});
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  CompensatedSum fourth;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = squared_norm(y.row(static_cast<Eigen::Index>(i)).data(), p);
    fourth.add(d * d);
  }
  const double b2 = fourth.value() / static_cast<double>(n);
  const double dp = static_cast<double>(p);
  const double expected = dp * (dp + 2.0);
  const double statistic = (b2 - expected) * std::sqrt(static_cast<double>(n) / (8.0 * expected));

  NormalityTestResult result;
  result.test = NormalityTest::MardiaKurtosis;
  result.statistic = statistic;
  result.p_value = two_sided_normal_p(statistic);
  result.n = n;
  result.p = p;
  result.n_used = n;
  return result;
}

NormalityTestResult henze_zirkler(const EmbeddingMatrix& x, const NormalityOptions& options) {
  const std::size_t n_input = x.rows();
  const std::size_t p = x.cols();
  bool subsampled = false;
  RowMatrix y;
  if (options.max_rows > 0 && n_input > options.max_rows) {
    const auto keep = subsample_indices(n_input, options.max_rows, SeededRng(options.subsample_seed));
    RowMatrix rows(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < keep.size(); ++r) {
      rows.row(static_cast<Eigen::Index>(r)) = x.data().row(static_cast<Eigen::Index>(keep[r]));
    }
    y = standardize(EmbeddingMatrix(std::move(rows)), options.exec);
    subsampled = true;
  } else {
    y = standardize(x, options.exec);
  }
  const auto n = static_cast<std::size_t>(y.rows());
  const double dn = static_cast<double>(n);
  const double dp = static_cast<double>(p);

  const double beta = std::pow(dn * (2.0 * dp + 1.0) / 4.0, 1.0 / (dp + 4.0)) / std::numbers::sqrt2;
  const double b2 = beta * beta;

  // Sum over unordered pairs; the diagonal contributes n terms of exp(0).
  const std::size_t workers = std::clamp<std::size_t>(options.exec.threads, 1, n);
  std::vector<UnitIntervalSum> partial(workers);
  const double* base = y.data();
  parallel_for(workers, static_cast<unsigned>(workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t w = begin; w < end; ++w) {
      UnitIntervalSum& acc = partial[w];
      for (std::size_t i = w; i < n; i += workers) {
        const double* yi = base + i * p;
        for (std::size_t j = i + 1; j < n; ++j) {
          const double* yj = base + j * p;
          double d = 0.0;
          for (std::size_t k = 0; k < p; ++k) {
            const double diff = yi[k] - yj[k];
            d += diff * diff;
          }
          acc.add(std::exp(-0.5 * b2 * d));
        }
      }
    }
  });
  UnitIntervalSum pairs;
  for (const auto& s : partial) pairs.merge(s);

  CompensatedSum centre;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = squared_norm(base + i * p, p);
    centre.add(std::exp(-b2 * d / (2.0 * (1.0 + b2))));
  }

  const double pair_term = (2.0 * pairs.value() + dn) / (dn * dn);
  const double centre_term = 2.0 * std::pow(1.0 + b2, -dp / 2.0) * centre.value() / dn;
  const double constant_term = std::pow(1.0 + 2.0 * b2, -dp / 2.0);
  const double hz = dn * (pair_term - centre_term + constant_term);

  // Lognormal approximation to the null distribution of HZ; the mean and
  // variance expressions are those of Henze and Zirkler (1990).
  const double a = 1.0 + 2.0 * b2;
  const double b4 = b2 * b2;
  const double b8 = b4 * b4;
  const double mu = 1.0 - std::pow(a, -dp / 2.0) * (1.0 + dp * b2 / a + dp * (dp + 2.0) * b4 / (2.0 * a * a));
  const double wb = (1.0 + b2) * (1.0 + 3.0 * b2);
  const double si2 = 2.0 * std::pow(1.0 + 4.0 * b2, -dp / 2.0) +
                     2.0 * std::pow(a, -dp) *
                         (1.0 + 2.0 * dp * b4 / (a * a) + 3.0 * dp * (dp + 2.0) * b8 / (4.0 * std::pow(a, 4))) -
                     4.0 * std::pow(wb, -dp / 2.0) *
                         (1.0 + 3.0 * dp * b4 / (2.0 * wb) + dp * (dp + 2.0) * b8 / (2.0 * wb * wb));
  const double log_mean = std::log(std::sqrt(std::pow(mu, 4) / (si2 + mu * mu)));
  const double log_sd = std::sqrt(std::log((si2 + mu * mu) / (mu * mu)));

  double p_value = 1.0;
  if (hz > 0.0) {
    const double z = (std::log(hz) - log_mean) / log_sd;
    p_value = 0.5 * std::erfc(z / std::numbers::sqrt2);
  }

  NormalityTestResult result;
  result.test = NormalityTest::HenzeZirkler;
  result.statistic = hz;
  result.p_value = std::clamp(p_value, kPValueFloor, 1.0);
  result.n = n_input;
  result.p = p;
  result.n_used = n;
  result.subsampled = subsampled;
  return result;
}

}  // namespace ecs
