#include "ecs/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ecs {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidFrequency: return "InvalidFrequency";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::IndefiniteMatrix: return "IndefiniteMatrix";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NonPsdScale: return "NonPsdScale";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::NonNumeric: return "NonNumeric";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndefiniteMatrix:
    case ErrorCode::NumericFailure:
    case ErrorCode::NotSymmetric:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> row,
             std::optional<std::size_t> col)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      row_(row),
      col_(col) {}

namespace {

void check_finite(const double* values, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = values[i * cols + j];
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite value " << v << " at row " << i << ", column " << j;
        throw Error(ErrorCode::NonFinite, os.str(), i, j);
      }
    }
  }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() == 0 || data_.cols() == 0) {
    throw Error(ErrorCode::EmptyMatrix, "matrix has " + std::to_string(data_.rows()) + " rows and " +
                                            std::to_string(data_.cols()) + " columns");
  }
  check_finite(data_.data(), rows(), cols());
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::EmptyMatrix, "matrix has " + std::to_string(rows) + " rows and " +
                                            std::to_string(cols) + " columns");
  }
  if (row_major.size() != rows * cols) {
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(rows * cols) +
                                                " values, got " + std::to_string(row_major.size()));
  }
  check_finite(row_major.data(), rows, cols);
  data_ = Eigen::Map<const RowMatrix>(row_major.data(), static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(cols));
}

std::vector<double> EmbeddingMatrix::column(std::size_t j) const {
  if (j >= cols()) throw Error(ErrorCode::InvalidArgument, "column index out of range");
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = (*this)(i, j);
  return out;
}

FrequencySet::FrequencySet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::InvalidFrequency, "frequency set is empty");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double t = values_[k];
    if (!std::isfinite(t) || t <= 0.0) {
      throw Error(ErrorCode::InvalidFrequency, "frequency must be finite and > 0, got " + std::to_string(t));
    }
    if (k > 0 && !(values_[k - 1] < t)) {
      throw Error(ErrorCode::InvalidFrequency, "frequencies must be strictly increasing");
    }
  }
}

GaussianSummary::GaussianSummary(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::size_t n)
    : mean_(std::move(mean)), cov_(std::move(cov)), n_(n) {
  if (mean_.size() == 0) throw Error(ErrorCode::EmptyMatrix, "summary has dimension 0");
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "covariance is " + std::to_string(cov_.rows()) + "x" +
                                                  std::to_string(cov_.cols()) + " but mean has length " +
                                                  std::to_string(mean_.size()));
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw Error(ErrorCode::NonFinite, "summary contains non-finite values");
  }
  const double scale = cov_.cwiseAbs().maxCoeff();
  const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw Error(ErrorCode::NotSymmetric, "covariance asymmetry " + std::to_string(asym));
  }
  if (scale > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_, Eigen::EigenvaluesOnly);
    const double hi = solver.eigenvalues().maxCoeff();
    const double lo = solver.eigenvalues().minCoeff();
    if (hi < 0.0 || lo < -1e-10 * hi) {
      throw Error(ErrorCode::IndefiniteMatrix, "covariance eigenvalue " + std::to_string(lo) + " below tolerance");
    }
  }
}

DistributionSpec DistributionSpec::normal(Eigen::VectorXd mean, Eigen::MatrixXd scale) {
  if (mean.size() == 0) throw Error(ErrorCode::InvalidSpec, "dimension must be >= 1");
  if (scale.rows() != mean.size() || scale.cols() != mean.size()) {
    throw Error(ErrorCode::InvalidSpec, "scale shape does not match mean length");
  }
  if (!mean.allFinite() || !scale.allFinite()) throw Error(ErrorCode::InvalidSpec, "non-finite parameters");
  DistributionSpec spec;
  spec.family_ = Family::MultivariateNormal;
  spec.mean_ = std::move(mean);
  spec.scale_ = std::move(scale);
  return spec;
}

DistributionSpec DistributionSpec::standard_normal(std::size_t p) {
  if (p == 0) throw Error(ErrorCode::InvalidSpec, "dimension must be >= 1");
  DistributionSpec spec;
  spec.family_ = Family::MultivariateNormal;
  spec.mean_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  spec.isotropic_ = 1.0;
  spec.identity_cov_ = true;
  return spec;
}

DistributionSpec DistributionSpec::student_t(double df, Eigen::VectorXd mean, Eigen::MatrixXd scale) {
  if (!std::isfinite(df) || df <= 0.0) throw Error(ErrorCode::InvalidSpec, "df must be > 0");
  DistributionSpec spec = normal(std::move(mean), std::move(scale));
  spec.family_ = Family::MultivariateT;
  spec.df_ = df;
  return spec;
}

DistributionSpec DistributionSpec::student_t(double df, std::size_t p, IdentityCovariance) {
  if (p == 0) throw Error(ErrorCode::InvalidSpec, "dimension must be >= 1");
  if (!std::isfinite(df) || df <= 2.0) {
    throw Error(ErrorCode::InvalidSpec,
                "identity-covariance t requires df > 2, got " + std::to_string(df));
  }
  DistributionSpec spec;
  spec.family_ = Family::MultivariateT;
  spec.df_ = df;
  spec.mean_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  spec.isotropic_ = (df - 2.0) / df;
  spec.identity_cov_ = true;
  return spec;
}

Eigen::MatrixXd DistributionSpec::effective_scale() const {
  if (isotropic_) {
    const auto p = mean_.size();
    return *isotropic_ * Eigen::MatrixXd::Identity(p, p);
  }
  return scale_;
}

void validate_pair(const EmbeddingMatrix& real, const EmbeddingMatrix& synthetic) {
  if (real.cols() != synthetic.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "real embeddings have p=" + std::to_string(real.cols()) +
                                                  " but synthetic embeddings have p=" +
                                                  std::to_string(synthetic.cols()));
  }
}

}  // namespace ecs
