#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ecs/core.hpp"

namespace ecs {

/// Error-free-transform accumulator (Shewchuk partials, as in Python's
/// math.fsum). The partials represent the running sum exactly, so value()
/// is the correctly rounded total and does not depend on the order of add()
/// calls. Merging two accumulators is exact as well.
class CompensatedSum {
 public:
  void add(double x) {
    std::size_t kept = 0;
    for (std::size_t k = 0; k < count_; ++k) {
      double y = partials_[k];
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[kept++] = lo;
      x = hi;
    }
    if (kept == partials_.size()) partials_.push_back(x);
    else partials_[kept] = x;
    count_ = kept + 1;
  }

  void merge(const CompensatedSum& other) {
    for (std::size_t k = 0; k < other.count_; ++k) add(other.partials_[k]);
  }

  double value() const noexcept;

 private:
  // Non-overlapping partials; count_ of them are live. Each may hold a single
  // bit, so the count is bounded only by the exponent range.
  std::vector<double> partials_;
  std::size_t count_ = 0;
};

struct EcfEstimate {
  ComplexScalar value;
  double t = 0.0;
  std::size_t n = 0;
};

/// Empirical characteristic function (1/n) sum exp(i t x_k).
EcfEstimate ecf(std::span<const double> column, double t);

/// ecf() of every column of x at frequency t, in column order.
std::vector<ComplexScalar> ecf_columns(const EmbeddingMatrix& x, double t, const Execution& exec = {});

/// Raw sample moments (1/n) sum x^v for v = 0..order.
std::vector<double> sample_moments(std::span<const double> column, int order);

/// Column means and unbiased (n-1) covariance.
GaussianSummary gaussian_summary(const EmbeddingMatrix& x, const Execution& exec = {});

/// Column means (exactly rounded sums divided by n).
Eigen::VectorXd column_means(const EmbeddingMatrix& x);

/// sum_i (x_i - mean)(x_i - mean)^T with exact accumulation, symmetric.
Eigen::MatrixXd centered_scatter(const EmbeddingMatrix& x, const Eigen::VectorXd& mean,
                                 const Execution& exec = {});

/// Principal square root of a symmetric PSD matrix via eigendecomposition;
/// eigenvalues within tolerance below zero are clipped to zero.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a);

struct PcaProjection {
  Eigen::MatrixXd scores_a;    // rows(a) x k
  Eigen::MatrixXd scores_b;    // rows(b) x k
  Eigen::MatrixXd components;  // p x k, unit columns
  Eigen::VectorXd variances;   // k leading eigenvalues of the pooled covariance
};

/// PCA fitted on the pooled rows of a and b. Each component's
/// largest-magnitude loading is positive.
PcaProjection pca_project(const EmbeddingMatrix& a, const EmbeddingMatrix& b, std::size_t k = 2);

}  // namespace ecs
