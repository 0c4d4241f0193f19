#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ecs {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexScalar = std::complex<double>;

enum class ErrorCode {
  DimensionMismatch,
  EmptyMatrix,
  EmptyColumn,
  NonFinite,
  InvalidFrequency,
  InvalidArgument,
  InsufficientSamples,
  NotSymmetric,
  IndefiniteMatrix,
  SingularCovariance,
  InvalidSpec,
  NonPsdScale,
  FileNotFound,
  RaggedRows,
  NonNumeric,
  BadMagic,
  TruncatedFile,
  TrailingData,
  IoError,
  NumericFailure,
};

std::string_view to_string(ErrorCode code);

// Input errors are the caller's fault (bad files, shapes, parameters);
// numeric errors mean a computation broke on otherwise valid input.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> row = std::nullopt,
        std::optional<std::size_t> col = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> col() const noexcept { return col_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
  std::optional<std::size_t> col_;
};

/// Dense n x p sample matrix; one row per sample, one column per feature.
/// Immutable after construction. Every entry is finite and n, p >= 1.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(RowMatrix data);
  EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  const RowMatrix& data() const noexcept { return data_; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  std::span<const double> values() const noexcept {
    return {data_.data(), static_cast<std::size_t>(data_.size())};
  }
  /// Copy of column j, in row order.
  std::vector<double> column(std::size_t j) const;

 private:
  RowMatrix data_;
};

/// Strictly increasing list of positive frequencies.
class FrequencySet {
 public:
  explicit FrequencySet(std::vector<double> values);
  static FrequencySet defaults() { return FrequencySet({0.5, 1.0}); }

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

struct EcsAtFrequency {
  double t = 0.0;
  double value = 0.0;
  std::vector<double> per_feature;

  bool operator==(const EcsAtFrequency&) const = default;
};

struct EcsResult {
  std::vector<EcsAtFrequency> per_t;
  std::size_t n = 0;
  std::size_t m = 0;

  bool operator==(const EcsResult&) const = default;
};

/// Mean and covariance of one embedding set.
class GaussianSummary {
 public:
  /// Validates symmetry (1e-12 relative) and PSD up to roundoff.
  GaussianSummary(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::size_t n);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  std::size_t n_;
};

enum class Family { MultivariateNormal, MultivariateT };

struct IdentityCovariance {};

class DistributionSpec {
 public:
  static DistributionSpec normal(Eigen::VectorXd mean, Eigen::MatrixXd scale);
  static DistributionSpec standard_normal(std::size_t p);
  static DistributionSpec student_t(double df, Eigen::VectorXd mean, Eigen::MatrixXd scale);
  /// Multivariate t with scale ((df-2)/df) I so the population covariance is I.
  static DistributionSpec student_t(double df, std::size_t p, IdentityCovariance);

  Family family() const noexcept { return family_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  double df() const noexcept { return df_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  bool identity_covariance() const noexcept { return identity_cov_; }
  /// Explicit scale matrix; for the identity-covariance flag this is the
  /// effective ((df-2)/df) I, and I for the standard normal.
  Eigen::MatrixXd effective_scale() const;
  /// Non-empty only when the scale is a multiple of the identity.
  std::optional<double> isotropic_scale() const noexcept { return isotropic_; }

 private:
  DistributionSpec() = default;

  Family family_ = Family::MultivariateNormal;
  double df_ = 0.0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd scale_;
  std::optional<double> isotropic_;
  bool identity_cov_ = false;
};

/// Worker count for the column / row-block parallel paths. Results never
/// depend on it.
struct Execution {
  unsigned threads = 1;
};

/// Throws DimensionMismatch when the feature counts differ. Sample counts may
/// differ.
void validate_pair(const EmbeddingMatrix& real, const EmbeddingMatrix& synthetic);

}  // namespace ecs
