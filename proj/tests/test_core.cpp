#include <cmath>
#include <limits>

#include "doctest.h"
#include "ecs/core.hpp"

using namespace ecs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ecs::Error");
  return ErrorCode::NumericFailure;
}

EmbeddingMatrix zeros(std::size_t n, std::size_t p) { return EmbeddingMatrix(n, p, std::vector<double>(n * p, 0.0)); }

}  // namespace

TEST_CASE("validate_pair accepts differing sample counts") {
  CHECK_NOTHROW(validate_pair(zeros(3, 2), zeros(5, 2)));
}

TEST_CASE("validate_pair rejects differing feature counts and names both") {
  try {
    validate_pair(zeros(3, 2), zeros(5, 3));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
    const std::string what = e.what();
    CHECK(what.find("p=2") != std::string::npos);
    CHECK(what.find("p=3") != std::string::npos);
  }
}

TEST_CASE("empty matrices cannot be constructed") {
  CHECK(code_of([] { zeros(0, 2); }) == ErrorCode::EmptyMatrix);
  CHECK(code_of([] { zeros(2, 0); }) == ErrorCode::EmptyMatrix);
  CHECK(code_of([] { EmbeddingMatrix(RowMatrix(0, 2)); }) == ErrorCode::EmptyMatrix);
}

TEST_CASE("non-finite entries are rejected with coordinates") {
  std::vector<double> values = {1.0, 2.0, 3.0, std::numeric_limits<double>::quiet_NaN()};
  try {
    EmbeddingMatrix(2, 2, values);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
    CHECK(e.row() == 1u);
    CHECK(e.col() == 1u);
  }
  RowMatrix m = RowMatrix::Zero(3, 2);
  m(2, 0) = std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { EmbeddingMatrix{m}; }) == ErrorCode::NonFinite);
}

TEST_CASE("matrix accessors are row-major") {
  const EmbeddingMatrix x(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(x.rows() == 2);
  CHECK(x.cols() == 3);
  CHECK(x(1, 0) == 4.0);
  CHECK(x.values()[2] == 3.0);
  CHECK(x.column(2) == std::vector<double>{3.0, 6.0});
}

TEST_CASE("frequency sets are positive and strictly increasing") {
  CHECK(FrequencySet::defaults().values() == std::vector<double>{0.5, 1.0});
  CHECK(code_of([] { FrequencySet({}); }) == ErrorCode::InvalidFrequency);
  CHECK(code_of([] { FrequencySet({0.0, 1.0}); }) == ErrorCode::InvalidFrequency);
  CHECK(code_of([] { FrequencySet({-1.0}); }) == ErrorCode::InvalidFrequency);
  CHECK(code_of([] { FrequencySet({1.0, 1.0}); }) == ErrorCode::InvalidFrequency);
  CHECK(code_of([] { FrequencySet({1.0, 0.5}); }) == ErrorCode::InvalidFrequency);
}

TEST_CASE("gaussian summary validates symmetry and semi-definiteness") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.4, 1.0;
  CHECK(code_of([&] { GaussianSummary(Eigen::VectorXd::Zero(2), asym, 10); }) == ErrorCode::NotSymmetric);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK(code_of([&] { GaussianSummary(Eigen::VectorXd::Zero(2), indefinite, 10); }) == ErrorCode::IndefiniteMatrix);

  CHECK(code_of([&] { GaussianSummary(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(2, 2), 10); }) ==
        ErrorCode::DimensionMismatch);
  CHECK_NOTHROW(GaussianSummary(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2), 10));
}

TEST_CASE("identity-covariance t uses scale (df-2)/df and needs df > 2") {
  const auto spec = DistributionSpec::student_t(5.0, 4, IdentityCovariance{});
  CHECK(spec.family() == Family::MultivariateT);
  CHECK(spec.dim() == 4);
  REQUIRE(spec.isotropic_scale());
  CHECK(*spec.isotropic_scale() == doctest::Approx(0.6));
  CHECK(spec.effective_scale().isApprox(0.6 * Eigen::MatrixXd::Identity(4, 4)));

  CHECK(code_of([] { DistributionSpec::student_t(2.0, 4, IdentityCovariance{}); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { DistributionSpec::student_t(1.5, 4, IdentityCovariance{}); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { DistributionSpec::student_t(0.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)); }) ==
        ErrorCode::InvalidSpec);
  CHECK(code_of([] { DistributionSpec::normal(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(3, 3)); }) ==
        ErrorCode::InvalidSpec);
}

TEST_CASE("error classes split input from numeric failures") {
  CHECK(is_input_error(ErrorCode::RaggedRows));
  CHECK(is_input_error(ErrorCode::SingularCovariance));
  CHECK(is_input_error(ErrorCode::DimensionMismatch));
  CHECK_FALSE(is_input_error(ErrorCode::NumericFailure));
  CHECK_FALSE(is_input_error(ErrorCode::IndefiniteMatrix));
}
