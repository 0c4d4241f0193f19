#include "ecs/stats.hpp"

#include <algorithm>
#include <string>

#include "ecs/parallel.hpp"

namespace ecs {

double CompensatedSum::value() const noexcept {
  if (count_ == 0) return 0.0;
  std::size_t k = count_ - 1;
  double hi = partials_[k];
  double lo = 0.0;
  while (k > 0) {
    const double x = hi;
    const double y = partials_[--k];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  // Round-half-even correction when the remaining partials push the
  // discarded half-ulp over the boundary.
  if (k > 0 && ((lo < 0.0 && partials_[k - 1] < 0.0) || (lo > 0.0 && partials_[k - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

namespace {

ComplexScalar ecf_strided(const double* base, std::size_t n, std::size_t stride, double t) {
  CompensatedSum re;
  CompensatedSum im;
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = t * base[i * stride];
    re.add(std::cos(angle));
    im.add(std::sin(angle));
  }
  const double dn = static_cast<double>(n);
  return {re.value() / dn, im.value() / dn};
}

void check_frequency(double t) {
  if (!std::isfinite(t) || t <= 0.0) {
    throw Error(ErrorCode::InvalidFrequency, "frequency must be finite and > 0, got " + std::to_string(t));
  }
}

}  // namespace

EcfEstimate ecf(std::span<const double> column, double t) {
  if (column.empty()) throw Error(ErrorCode::EmptyColumn, "empirical CF of an empty column");
  check_frequency(t);
  return {ecf_strided(column.data(), column.size(), 1, t), t, column.size()};
}

std::vector<ComplexScalar> ecf_columns(const EmbeddingMatrix& x, double t, const Execution& exec) {
  check_frequency(t);
  const std::size_t p = x.cols();
  std::vector<ComplexScalar> out(p);
  const double* base = x.data().data();
  parallel_for(p, exec.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) out[j] = ecf_strided(base + j, x.rows(), p, t);
  });
  return out;
}

std::vector<double> sample_moments(std::span<const double> column, int order) {
  if (column.empty()) throw Error(ErrorCode::EmptyColumn, "moments of an empty column");
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "moment order must be >= 0");
  std::vector<CompensatedSum> sums(static_cast<std::size_t>(order) + 1);
  for (double v : column) {
    double power = 1.0;
    for (auto& s : sums) {
      s.add(power);
      power *= v;
    }
  }
  std::vector<double> out;
  out.reserve(sums.size());
  for (const auto& s : sums) out.push_back(s.value() / static_cast<double>(column.size()));
  return out;
}

Eigen::VectorXd column_means(const EmbeddingMatrix& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<CompensatedSum> sums(p);
  const auto first = x.data().row(0);
  Eigen::VectorXd lo = first.transpose();
  Eigen::VectorXd hi = lo;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double v = x(i, j);
      sums[j].add(v);
      const auto jj = static_cast<Eigen::Index>(j);
      lo(jj) = std::min(lo(jj), v);
      hi(jj) = std::max(hi(jj), v);
    }
  }
  // The division can move the mean one ulp outside [min, max]; clamping keeps
  // constant columns exactly constant after centering.
  Eigen::VectorXd mean(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    mean(jj) = std::clamp(sums[j].value() / static_cast<double>(n), lo(jj), hi(jj));
  }
  return mean;
}

Eigen::MatrixXd centered_scatter(const EmbeddingMatrix& x, const Eigen::VectorXd& mean, const Execution& exec) {
  const auto p = static_cast<Eigen::Index>(x.cols());
  if (mean.size() != p) throw Error(ErrorCode::DimensionMismatch, "mean length does not match columns");
  const Eigen::MatrixXd centered = x.data().rowwise() - mean.transpose();
  const Eigen::Index n = centered.rows();
  Eigen::MatrixXd scatter(p, p);
  parallel_for(static_cast<std::size_t>(p), exec.threads, [&](std::size_t begin, std::size_t end) {
    for (auto j = static_cast<Eigen::Index>(begin); j < static_cast<Eigen::Index>(end); ++j) {
      const double* cj = centered.col(j).data();
      for (Eigen::Index k = j; k < p; ++k) {
        const double* ck = centered.col(k).data();
        CompensatedSum s;
        for (Eigen::Index i = 0; i < n; ++i) s.add(cj[i] * ck[i]);
        scatter(j, k) = s.value();
      }
    }
  });
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j + 1; k < p; ++k) scatter(k, j) = scatter(j, k);
  }
  return scatter;
}

GaussianSummary gaussian_summary(const EmbeddingMatrix& x, const Execution& exec) {
  const std::size_t n = x.rows();
  if (n < 2) {
    throw Error(ErrorCode::InsufficientSamples, "covariance needs at least 2 rows, got " + std::to_string(n));
  }
  Eigen::VectorXd mean = column_means(x);
  Eigen::MatrixXd cov = centered_scatter(x, mean, exec) / static_cast<double>(n - 1);
  return GaussianSummary(std::move(mean), std::move(cov), n);
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "sym_sqrt needs a square matrix");
  if (a.size() == 0) return a;
  if (!a.allFinite()) throw Error(ErrorCode::NonFinite, "sym_sqrt input has non-finite entries");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw Error(ErrorCode::NotSymmetric, "asymmetry " + std::to_string(asym) + " exceeds 1e-10 relative");
  }
  if (scale == 0.0) return Eigen::MatrixXd::Zero(a.rows(), a.cols());

  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericFailure, "eigendecomposition failed");
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const double top = lambda.maxCoeff();
  const double bottom = lambda.minCoeff();
  if (top < 0.0 || bottom < -1e-10 * top) {
    throw Error(ErrorCode::IndefiniteMatrix, "eigenvalue " + std::to_string(bottom) + " below -1e-10 * " +
                                                 std::to_string(top));
  }
  const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = solver.eigenvectors();
  Eigen::MatrixXd out = v * root.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

PcaProjection pca_project(const EmbeddingMatrix& a, const EmbeddingMatrix& b, std::size_t k) {
  validate_pair(a, b);
  const auto p = static_cast<Eigen::Index>(a.cols());
  if (k == 0 || static_cast<Eigen::Index>(k) > p) {
    throw Error(ErrorCode::InvalidArgument,
                "need 1 <= k <= p, got k=" + std::to_string(k) + " with p=" + std::to_string(p));
  }
  const Eigen::Index na = a.data().rows();
  const Eigen::Index nb = b.data().rows();
  if (na + nb < 2) throw Error(ErrorCode::InsufficientSamples, "PCA needs at least 2 pooled rows");

  RowMatrix pooled(na + nb, p);
  pooled.topRows(na) = a.data();
  pooled.bottomRows(nb) = b.data();
  const EmbeddingMatrix pooled_matrix(std::move(pooled));
  const Eigen::VectorXd mean = column_means(pooled_matrix);
  const Eigen::MatrixXd cov = centered_scatter(pooled_matrix, mean) / static_cast<double>(na + nb - 1);

  const auto kk = static_cast<Eigen::Index>(k);
  PcaProjection out;
  out.components = Eigen::MatrixXd::Zero(p, kk);
  out.variances = Eigen::VectorXd::Zero(kk);
  if (cov.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericFailure, "eigendecomposition failed");
    for (Eigen::Index c = 0; c < kk; ++c) {
      // Eigen returns ascending eigenvalues.
      Eigen::VectorXd v = solver.eigenvectors().col(p - 1 - c);
      Eigen::Index lead = 0;
      v.cwiseAbs().maxCoeff(&lead);
      if (v(lead) < 0.0) v = -v;
      out.components.col(c) = v;
      out.variances(c) = std::max(0.0, solver.eigenvalues()(p - 1 - c));
    }
  } else {
    for (Eigen::Index c = 0; c < kk; ++c) out.components(c, c) = 1.0;
  }
  out.scores_a = (a.data().rowwise() - mean.transpose()) * out.components;
  out.scores_b = (b.data().rowwise() - mean.transpose()) * out.components;
  return out;
}

}  // namespace ecs
