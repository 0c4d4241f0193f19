#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ecs/metrics.hpp"
#include "ecs/samplers.hpp"
#include "ecs/stats.hpp"

using namespace ecs;

namespace {

EmbeddingMatrix normal_matrix(std::size_t n, std::size_t p, std::uint32_t seed, double shift = 0.0, double sd = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(shift, sd);
  std::vector<double> values(n * p);
  for (double& v : values) v = dist(gen);
  return EmbeddingMatrix(n, p, std::move(values));
}

// CF of the univariate Student t with df degrees of freedom and scale sigma.
double student_t_cf(double df, double sigma, double t) {
  const double x = std::sqrt(df) * std::abs(sigma * t);
  if (x == 0.0) return 1.0;
  return boost::math::cyl_bessel_k(df / 2.0, x) * std::pow(x, df / 2.0) /
         (boost::math::tgamma(df / 2.0) * std::pow(2.0, df / 2.0 - 1.0));
}

// Population ECS between N(0, I) and the identity-covariance t: every
// marginal pair contributes the same real difference.
double population_ecs(double df, double t) {
  return std::abs(std::exp(-t * t / 2.0) - student_t_cf(df, std::sqrt((df - 2.0) / df), t)) / t;
}

Eigen::MatrixXd random_spd(std::size_t p, std::mt19937_64& gen) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd g(p, p);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = dist(gen);
  Eigen::MatrixXd spd = g * g.transpose() / static_cast<double>(p);
  spd.diagonal().array() += 0.1;
  return spd;
}

}  // namespace

TEST_CASE("ecs of a matrix with itself is exactly zero") {
  const auto x = normal_matrix(500, 6, 1);
  const auto r = ecs::ecs(x, x, FrequencySet::defaults());
  REQUIRE(r.per_t.size() == 2);
  for (const auto& at : r.per_t) {
    CHECK(at.value == 0.0);
    for (double f : at.per_feature) CHECK(f == 0.0);
  }
  CHECK(r.n == 500);
  CHECK(r.m == 500);
}

TEST_CASE("ecs is exactly symmetric and respects the triangle inequality") {
  std::mt19937 pick(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 1 + pick() % 8;
    const auto a = normal_matrix(50 + pick() % 200, p, pick());
    const auto b = normal_matrix(50 + pick() % 200, p, pick(), 0.3, 1.5);
    const auto c = normal_matrix(50 + pick() % 200, p, pick(), -0.2, 0.7);
    const FrequencySet ts({0.25, 1.0, 3.0});
    const auto ab = ecs::ecs(a, b, ts);
    const auto ba = ecs::ecs(b, a, ts);
    const auto bc = ecs::ecs(b, c, ts);
    const auto ac = ecs::ecs(a, c, ts);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(ab.per_t[k].value == ba.per_t[k].value);
      CHECK(ac.per_t[k].value <= ab.per_t[k].value + bc.per_t[k].value + 1e-12);
    }
  }
}

TEST_CASE("ecs is the per-feature mean divided by T and bounded by 2/T") {
  const auto a = normal_matrix(300, 5, 11);
  const auto b = normal_matrix(200, 5, 12, 4.0, 0.1);
  const FrequencySet ts({0.5, 2.0});
  const auto r = ecs::ecs(a, b, ts);
  for (const auto& at : r.per_t) {
    double sum = 0.0;
    for (double f : at.per_feature) {
      CHECK(f >= 0.0);
      CHECK(f <= 2.0);
      sum += f;
    }
    CHECK(at.value == doctest::Approx(sum / (5.0 * at.t)).epsilon(1e-14));
    CHECK(at.value <= 2.0 / at.t);
  }
}

TEST_CASE("ecs is invariant to thread count and row order") {
  const auto a = normal_matrix(2000, 7, 21);
  const auto b = normal_matrix(1500, 7, 22, 0.5);
  const auto one = ecs::ecs(a, b, FrequencySet::defaults(), {1});
  const auto many = ecs::ecs(a, b, FrequencySet::defaults(), {4});
  CHECK(one == many);

  RowMatrix reversed = a.data().colwise().reverse();
  CHECK(ecs::ecs(EmbeddingMatrix(reversed), b, FrequencySet::defaults()) == one);
}

TEST_CASE("ecs rejects mismatched feature counts") {
  CHECK_THROWS_AS(ecs::ecs(normal_matrix(5, 2, 1), normal_matrix(5, 3, 2), FrequencySet::defaults()), Error);
}

TEST_CASE("ecs of a unit mean shift matches the closed form") {
  const auto a = normal_matrix(1000000, 1, 31);
  const auto b = normal_matrix(1000000, 1, 32, 1.0);
  const double expected = 2.0 * std::exp(-0.5) * std::sin(0.5);
  CHECK(std::abs(ecs::ecs(a, b, FrequencySet({1.0})).per_t[0].value - expected) <= 0.005);
}

TEST_CASE("t characteristic function oracle reproduces the population values") {
  // Independent check of the Bessel-K oracle: df = 1 is Cauchy, exp(-|t|).
  CHECK(student_t_cf(1.0, 1.0, 0.7) == doctest::Approx(std::exp(-0.7)).epsilon(1e-12));
  // Large df approaches the normal CF.
  CHECK(student_t_cf(100.0, 1.0, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(5e-3));
  CHECK(population_ecs(3.0, 1.0) == doctest::Approx(0.129228).epsilon(1e-4));
  CHECK(population_ecs(2.01, 0.5) == doctest::Approx(0.226138).epsilon(1e-4));
}

TEST_CASE("sampled normal versus t ecs converges to the population value") {
  const std::size_t n = 200000;
  const std::size_t p = 8;
  const auto normal = sample(DistributionSpec::standard_normal(p), n, SeededRng(101));
  for (double df : {2.01, 3.0, 5.0}) {
    const auto heavy = sample(DistributionSpec::student_t(df, p, IdentityCovariance{}), n, SeededRng(102));
    const auto r = ecs::ecs(normal, heavy, FrequencySet::defaults());
    for (const auto& at : r.per_t) {
      CAPTURE(df);
      CAPTURE(at.t);
      CHECK(std::abs(at.value - population_ecs(df, at.t)) <= 0.006);
    }
  }
}

TEST_CASE("frechet distance closed forms") {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  const GaussianSummary base(zero, eye, 10);
  CHECK(frechet_distance(base, base).fid == 0.0);

  Eigen::VectorXd shifted = zero;
  shifted(1) = 1.0;
  const auto shift = frechet_distance(base, GaussianSummary(shifted, eye, 10));
  CHECK(shift.fid == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(shift.fid_per_dimension == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(shift.p == 3);

  Eigen::Vector3d sigma(1.0, 2.0, 0.5);
  Eigen::Vector3d tau(3.0, 0.5, 0.5);
  const auto diag = frechet_distance(GaussianSummary(zero, sigma.array().square().matrix().asDiagonal(), 10),
                                     GaussianSummary(zero, tau.array().square().matrix().asDiagonal(), 10));
  CHECK(diag.fid == doctest::Approx((sigma - tau).squaredNorm()).epsilon(1e-12));

  // Degenerate covariances are allowed.
  CHECK(frechet_distance(GaussianSummary(zero, Eigen::MatrixXd::Zero(3, 3), 2), base).fid ==
        doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(frechet_distance(base, GaussianSummary(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 2)),
                  Error);
}

TEST_CASE("frechet distance matches a general eigenvalue oracle") {
  // tr sqrt(A B) equals the sum of square roots of the (real, non-negative)
  // eigenvalues of the non-symmetric product A B.
  std::mt19937_64 gen(7);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = 1 + trial % 10;
    const Eigen::MatrixXd a = random_spd(p, gen);
    const Eigen::MatrixXd b = random_spd(p, gen);
    Eigen::VectorXd ma(p);
    Eigen::VectorXd mb(p);
    for (std::size_t i = 0; i < p; ++i) {
      ma(i) = dist(gen);
      mb(i) = dist(gen);
    }
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(a * b).eigenvalues();
    double root_trace = 0.0;
    for (Eigen::Index i = 0; i < eig.size(); ++i) root_trace += std::sqrt(std::max(eig(i).real(), 0.0));
    const double oracle = (ma - mb).squaredNorm() + a.trace() + b.trace() - 2.0 * root_trace;
    const GaussianSummary sa(ma, a, 100);
    const GaussianSummary sb(mb, b, 100);
    CAPTURE(p);
    CHECK(frechet_distance(sa, sb).fid == doctest::Approx(oracle).epsilon(1e-9).scale(1.0));
    CHECK(frechet_distance(sa, sb).fid == doctest::Approx(frechet_distance(sb, sa).fid).epsilon(1e-9).scale(1.0));
    CHECK(std::abs(frechet_distance(sa, sa).fid) < 1e-10);
  }
}

TEST_CASE("tail bound quadrature is exact enough for a point mass") {
  // For x == c: s * int_{-1/s}^{1/s} (1 - cos(c t)) dt = 2 - 2 s sin(c/s) / c.
  const std::vector<double> column(10, 1.7);
  for (double s : {0.5, 1.0, 3.0}) {
    const auto tb = tail_bound(column, s);
    CHECK(tb.bound_exact == doctest::Approx(2.0 - 2.0 * s * std::sin(1.7 / s) / 1.7).epsilon(1e-8).scale(1.0));
    CHECK(tb.bound_trapezoid == doctest::Approx(2.0 * (1.0 - std::cos(1.7 / s))).epsilon(1e-14).scale(1.0));
    CHECK(tb.empirical_tail == (1.7 > 2.0 * s ? 1.0 : 0.0));
  }
  const std::vector<double> zeros(4, 0.0);
  const auto tb = tail_bound(zeros, 1.0);
  CHECK(tb.bound_exact == 0.0);
  CHECK(tb.bound_trapezoid == 0.0);
  CHECK(tb.empirical_tail == 0.0);
}

TEST_CASE("tail bound on normal data dominates the tail and matches the closed form") {
  const auto x = normal_matrix(1000000, 1, 41);
  const auto column = x.column(0);
  const double n = 1e6;
  double previous_gap = std::numeric_limits<double>::infinity();
  for (double s : {1.0, 1.5, 2.0, 4.0}) {
    const auto tb = tail_bound(column, s);
    const double u = 1.0 / s;
    const double population = 2.0 * s * (u - std::sqrt(std::numbers::pi / 2.0) * std::erf(u / std::sqrt(2.0)));
    const double tail = std::erfc(2.0 * s / std::sqrt(2.0));
    CAPTURE(s);
    CHECK(std::abs(tb.bound_exact - population) <= 0.002);
    CHECK(std::abs(tb.empirical_tail - tail) <= 4.0 * std::sqrt(tail * (1.0 - tail) / n) + 1e-6);
    CHECK(tb.empirical_tail <= tb.bound_exact);
    // 1 - exp(-t^2/2) is convex on |t| < 1, so the trapezoid overestimates.
    const double gap = tb.bound_trapezoid - tb.bound_exact;
    CHECK(gap >= 0.0);
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
}

TEST_CASE("tail bound rejects bad arguments") {
  const std::vector<double> column = {1.0, 2.0};
  CHECK_THROWS_AS(tail_bound(column, 0.0), Error);
  CHECK_THROWS_AS(tail_bound(column, -1.0), Error);
  CHECK_THROWS_AS(tail_bound(column, 1.0, 100), Error);
  CHECK_THROWS_AS(tail_bound(column, 1.0, 1), Error);
  CHECK_THROWS_AS(tail_bound(std::vector<double>{}, 1.0), Error);
  CHECK_NOTHROW(tail_bound(column, 1.0, 3));
}

TEST_CASE("moment Taylor check separates light and heavy tails") {
  const auto x = normal_matrix(100000, 1, 51);
  const auto column = x.column(0);
  CHECK(moment_taylor_check(column, 0.05, 2) <= 1e-4);
  CHECK(moment_taylor_check(column, 0.05, 1) <= 2e-3);
  CHECK(moment_taylor_check(std::vector<double>(8, 0.0), 0.1, 2) == 0.0);

  std::mt19937_64 gen(52);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> cauchy(100000);
  for (double& v : cauchy) v = std::tan(std::numbers::pi * (unif(gen) - 0.5));
  CHECK(moment_taylor_check(cauchy, 0.05, 2) > 1.0);

  CHECK_THROWS_AS(moment_taylor_check(column, 0.2, 2), Error);
  CHECK_THROWS_AS(moment_taylor_check(column, 0.0, 2), Error);
  CHECK_THROWS_AS(moment_taylor_check(column, 0.05, 3), Error);
}
