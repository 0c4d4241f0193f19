#include "ecs/metrics.hpp"

#include <cmath>
#include <string>

#include "ecs/stats.hpp"

namespace ecs {

EcsResult ecs(const EmbeddingMatrix& real, const EmbeddingMatrix& synthetic, const FrequencySet& ts,
              const Execution& exec) {
  validate_pair(real, synthetic);
  const std::size_t p = real.cols();
  EcsResult result;
  result.n = real.rows();
  result.m = synthetic.rows();
  result.per_t.reserve(ts.size());
  for (double t : ts.values()) {
    const auto j = ecf_columns(real, t, exec);
    const auto k = ecf_columns(synthetic, t, exec);
    EcsAtFrequency at;
    at.t = t;
    at.per_feature.resize(p);
    CompensatedSum total;
    for (std::size_t rho = 0; rho < p; ++rho) {
      at.per_feature[rho] = std::abs(j[rho] - k[rho]);
      total.add(at.per_feature[rho]);
    }
    at.value = total.value() / (static_cast<double>(p) * t);
    result.per_t.push_back(std::move(at));
  }
  return result;
}

FrechetResult frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "summaries have p=" + std::to_string(a.dim()) + " and p=" + std::to_string(b.dim()));
  }
  const double mean_term = (a.mean() - b.mean()).squaredNorm();
  const Eigen::MatrixXd root_a = sym_sqrt(a.cov());
  Eigen::MatrixXd inner = root_a * b.cov() * root_a;
  inner = 0.5 * (inner + inner.transpose());
  const Eigen::MatrixXd cross = sym_sqrt(inner);

  CompensatedSum trace;
  for (Eigen::Index i = 0; i < a.cov().rows(); ++i) {
    trace.add(a.cov()(i, i));
    trace.add(b.cov()(i, i));
    trace.add(-2.0 * cross(i, i));
  }
  trace.add(mean_term);
  double fid = trace.value();
  if (fid < 0.0) {
    if (fid < -1e-8) {
      throw Error(ErrorCode::NumericFailure, "Frechet distance " + std::to_string(fid) + " below -1e-8");
    }
    fid = 0.0;
  }
  const std::size_t p = a.dim();
  return {fid, fid / static_cast<double>(p), p};
}

namespace {

ComplexScalar ecf_unchecked(std::span<const double> column, double t) {
  CompensatedSum re;
  CompensatedSum im;
  for (double x : column) {
    const double angle = t * x;
    re.add(std::cos(angle));
    im.add(std::sin(angle));
  }
  const auto n = static_cast<double>(column.size());
  return {re.value() / n, im.value() / n};
}

}  // namespace

TailBound tail_bound(std::span<const double> column, double s, int quad_points) {
  if (column.empty()) throw Error(ErrorCode::EmptyColumn, "tail bound of an empty column");
  if (!std::isfinite(s) || s <= 0.0) throw Error(ErrorCode::InvalidArgument, "s must be finite and > 0");
  if (quad_points < 3 || quad_points % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "Simpson quadrature needs an odd point count >= 3, got " + std::to_string(quad_points));
  }
  const double u = 1.0 / s;
  const int half = (quad_points - 1) / 2;
  const double h = u / half;

  // Nodes u*(k-half)/half are exact negations of each other, so the
  // conjugate-symmetric imaginary parts cancel exactly.
  CompensatedSum re;
  CompensatedSum im;
  for (int k = 0; k < quad_points; ++k) {
    const double weight = (k == 0 || k == quad_points - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const double t = u * (static_cast<double>(k - half) / half);
    const ComplexScalar g = 1.0 - ecf_unchecked(column, t);
    re.add(weight * g.real());
    im.add(weight * g.imag());
  }
  TailBound out;
  out.s = s;
  out.bound_exact = s * (h / 3.0) * re.value();
  if (out.bound_exact < 0.0) {
    if (out.bound_exact < -1e-8) throw Error(ErrorCode::NumericFailure, "negative tail bound");
    out.bound_exact = 0.0;
  }
  out.bound_trapezoid = 2.0 * (1.0 - ecf_unchecked(column, u).real());

  std::size_t beyond = 0;
  for (double x : column) {
    if (std::abs(x) > 2.0 * s) ++beyond;
  }
  out.empirical_tail = static_cast<double>(beyond) / static_cast<double>(column.size());
  return out;
}

double moment_taylor_check(std::span<const double> column, double t, int ell) {
  if (column.empty()) throw Error(ErrorCode::EmptyColumn, "Taylor check of an empty column");
  if (!std::isfinite(t) || t <= 0.0 || t > 0.1) {
    throw Error(ErrorCode::InvalidArgument, "t must lie in (0, 0.1], got " + std::to_string(t));
  }
  if (ell != 1 && ell != 2) throw Error(ErrorCode::InvalidArgument, "ell must be 1 or 2");
  const auto moments = sample_moments(column, ell);
  ComplexScalar series = moments[0];
  series += ComplexScalar(0.0, t * moments[1]);
  if (ell == 2) series += -0.5 * t * t * moments[2];
  return std::abs(ecf(column, t).value - series);
}

}  // namespace ecs
