#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hmf/error.hpp"
#include "hmf/gibbs.hpp"
#include "hmf/init.hpp"
#include "oracle/oracle.hpp"
#include "support/fixtures.hpp"

using namespace hmf;
using fixtures::Flavour;
using fixtures::Kind;

namespace {

bool near(double a, double b, double tol = 1e-10) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool near(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol = 1e-10) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index i = 0; i < a.size(); ++i)
    if (!near(a.data()[i], b.data()[i], tol)) return false;
  return true;
}

// Compares every posterior the library exposes with the oracle.
void check_all_posteriors(const HmfModel& m, const oracle::Model& o, double tol = 1e-10) {
  for (std::size_t n = 0; n < m.datasets.size(); ++n) {
    const GammaParams g = noise_posterior(m, n);
    const oracle::Gamma og = oracle::noise(o, static_cast<int>(n));
    CHECK(near(g.shape, og.shape, tol));
    CHECK(near(g.rate, og.rate, tol));
    const DatasetSpec& d = m.datasets[n];
    const Matrix& pf = d.private_factor;
    for (Index r = 0; r < pf.rows(); ++r) {
      for (Index c = 0; c < pf.cols(); ++c) {
        if (d.cp_constrained && r != c) continue;
        const UnivariateParams p = private_entry_posterior(m, n, r, c);
        const oracle::Uni q = oracle::private_entry(o, static_cast<int>(n), static_cast<int>(r), static_cast<int>(c));
        CHECK(near(p.tau, q.tau, tol));
        CHECK(near(p.mu, q.mu, tol));
      }
      if (d.private_prior == PriorKind::gaussian && !d.cp_constrained) {
        const MultivariateParams p = private_row_posterior(m, n, r);
        const oracle::Multi q = oracle::private_row(o, static_cast<int>(n), static_cast<int>(r));
        CHECK(near(p.precision, q.precision, tol));
        CHECK(near(p.mean, q.mean, tol));
        CHECK(near(p.covariance, q.covariance, tol));
      }
    }
  }
  for (std::size_t t = 0; t < m.entity_types.size(); ++t) {
    const EntityType& e = m.entity_types[t];
    const auto a = ard_posterior(m, t);
    for (Index k = 0; k < e.factors; ++k) {
      const oracle::Gamma q = oracle::ard(o, static_cast<int>(t), static_cast<int>(k));
      CHECK(near(a[static_cast<std::size_t>(k)].shape, q.shape, tol));
      CHECK(near(a[static_cast<std::size_t>(k)].rate, q.rate, tol));
    }
    for (Index i = 0; i < e.instances; ++i) {
      for (Index k = 0; k < e.factors; ++k) {
        const UnivariateParams p = shared_entry_posterior(m, t, i, k);
        const oracle::Uni q = oracle::shared_entry(o, static_cast<int>(t), static_cast<int>(i), static_cast<int>(k));
        CHECK(near(p.tau, q.tau, tol));
        CHECK(near(p.mu, q.mu, tol));
      }
      if (e.negativity == Negativity::real) {
        const MultivariateParams p = shared_row_posterior(m, t, i);
        const oracle::Multi q = oracle::shared_row(o, static_cast<int>(t), static_cast<int>(i));
        CHECK(near(p.precision, q.precision, tol));
        CHECK(near(p.mean, q.mean, tol));
      }
    }
  }
}

HmfModel feature_model(Matrix f, Matrix g, ObservedMatrix d, PriorKind prior, Negativity neg) {
  HmfModel m;
  const auto e = add_entity(m, "e", f.rows(), f.cols(), neg);
  add_feature_dataset(m, "D", e, std::move(d), prior);
  m.entity_types[0].F = std::move(f);
  m.datasets[0].private_factor = std::move(g);
  return m;
}

}  // namespace

TEST_SUITE("gibbs") {
  TEST_CASE("noise posterior with zero residual") {
    HmfModel m = feature_model(Matrix::Ones(2, 1), Matrix::Ones(2, 1), ObservedMatrix(Matrix::Ones(2, 2)),
                               PriorKind::exponential, Negativity::nonnegative);
    const GammaParams g = noise_posterior(m, 0);
    CHECK(g.shape == 3.0);
    CHECK(g.rate == 1.0);
  }

  TEST_CASE("noise posterior with importance 2") {
    HmfModel m = feature_model(Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1), ObservedMatrix(Matrix::Ones(1, 1)),
                               PriorKind::exponential, Negativity::nonnegative);
    m.datasets[0].importance = 2.0;
    const GammaParams g = noise_posterior(m, 0);
    CHECK(g.shape == 2.0);
    CHECK(g.rate == 2.0);
  }

  TEST_CASE("importance 0 leaves the noise prior") {
    std::mt19937_64 gen(3);
    HmfModel m = fixtures::single(Kind::R, Flavour::exponential, gen);
    m.datasets[0].importance = 0.0;
    const GammaParams g = noise_posterior(m, 0);
    CHECK(g.shape == m.hyper.alpha_tau);
    CHECK(g.rate == m.hyper.beta_tau);
  }

  TEST_CASE("ARD posterior hand cases") {
    SUBCASE("nonnegative zero column") {
      HmfModel m;
      add_entity(m, "a", 2, 1, Negativity::nonnegative);
      add_entity(m, "b", 2, 1, Negativity::nonnegative);
      add_main_dataset(m, "R", 0, 1, ObservedMatrix(Matrix::Ones(2, 2)), PriorKind::exponential, 1.0);
      const auto a = ard_posterior(m, 0);
      CHECK(a[0].shape == 3.0);
      CHECK(a[0].rate == 1.0);
    }
    SUBCASE("real column (1, 2)") {
      HmfModel m;
      add_entity(m, "a", 2, 1, Negativity::real);
      add_entity(m, "b", 2, 1, Negativity::real);
      add_main_dataset(m, "R", 0, 1, ObservedMatrix(Matrix::Ones(2, 2)), PriorKind::gaussian, 1.0);
      m.entity_types[0].F << 1.0, 2.0;
      const auto a = ard_posterior(m, 0);
      CHECK(a[0].shape == 2.0);
      CHECK(a[0].rate == 3.5);
    }
    SUBCASE("linked nonnegative feature dataset") {
      HmfModel m = feature_model(Matrix::Zero(1, 1), Matrix::Zero(3, 1), ObservedMatrix(Matrix::Ones(1, 3)),
                                 PriorKind::exponential, Negativity::nonnegative);
      const auto a = ard_posterior(m, 0);
      CHECK(a[0].shape == 5.0);
      CHECK(a[0].rate == 1.0);
    }
  }

  TEST_CASE("ARD switched off leaves lambda alone") {
    std::mt19937_64 gen(8);
    HmfModel m = fixtures::single(Kind::D, Flavour::gaussian, gen);
    m.hyper.ard = false;
    const Vector before = m.entity_types[0].lambda;
    RngStream r(1, 1);
    update_ard(m, 0, r);
    CHECK(m.entity_types[0].lambda == before);
  }

  TEST_CASE("feature dataset, K=1, exponential G matches the loop oracle") {
    std::mt19937_64 gen(11);
    HmfModel m = feature_model(fixtures::random_matrix(4, 1, true, gen), fixtures::random_matrix(3, 1, true, gen),
                               fixtures::random_observed(4, 3, 0.9, gen), PriorKind::exponential,
                               Negativity::nonnegative);
    m.datasets[0].noise_precision = 1.7;
    const oracle::Model o = oracle::from_hmf(m);
    for (Index j = 0; j < 3; ++j) {
      const UnivariateParams p = private_entry_posterior(m, 0, j, 0);
      const oracle::Uni q = oracle::private_entry(o, 0, static_cast<int>(j), 0);
      CHECK(near(p.mu, q.mu));
      CHECK(near(p.tau, q.tau));
    }
  }

  TEST_CASE("importance 0 gives the Gaussian prior for S") {
    std::mt19937_64 gen(12);
    HmfModel m = fixtures::single(Kind::R, Flavour::gaussian, gen);
    m.datasets[0].importance = 0.0;
    const double lam = m.datasets[0].private_lambda;
    const UnivariateParams p = private_entry_posterior(m, 0, 0, 0);
    CHECK(p.mu == 0.0);
    CHECK(p.tau == lam);
  }

  TEST_CASE("similarity dataset, K=1: hand-computed precision") {
    HmfModel m;
    add_entity(m, "s", 3, 1, Negativity::nonnegative);
    ObservedMatrix c(Matrix::Ones(3, 3));
    for (Index i = 0; i < 3; ++i) c.mask(i, i) = 0;
    add_similarity_dataset(m, "C", 0, c, PriorKind::exponential, 1.0);
    m.entity_types[0].F << 0.5, 1.5, 2.0;
    m.entity_types[0].lambda << 0.7;
    m.datasets[0].private_factor << 1.3;
    m.datasets[0].noise_precision = 2.0;
    m.datasets[0].importance = 1.5;
    const double s = 1.3, ta = 3.0;
    const double f[3] = {0.5, 1.5, 2.0};
    for (int i = 0; i < 3; ++i) {
      double sum = 0;
      for (int j = 0; j < 3; ++j)
        if (j != i) sum += 2 * (s * f[j]) * (s * f[j]);  // row and column terms
      const UnivariateParams p = shared_entry_posterior(m, 0, i, 0);
      CHECK(near(p.tau, ta * sum));
    }
  }

  TEST_CASE("every single-matrix reduction matches the oracle") {
    std::mt19937_64 gen(2024);
    for (Kind k : {Kind::R, Kind::D, Kind::C})
      for (Flavour f : {Flavour::exponential, Flavour::gaussian, Flavour::mixed})
        for (int rep = 0; rep < 5; ++rep) {
          CAPTURE(fixtures::name(k));
          CAPTURE(fixtures::name(f));
          const HmfModel m = fixtures::single(k, f, gen);
          REQUIRE(validate(m).empty());
          check_all_posteriors(m, oracle::from_hmf(m));
        }
  }

  TEST_CASE("joint model matches the oracle") {
    std::mt19937_64 gen(7);
    for (int rep = 0; rep < 5; ++rep) {
      const HmfModel m = fixtures::joint(gen, rep % 2 == 1);
      REQUIRE(validate(m).empty());
      check_all_posteriors(m, oracle::from_hmf(m));
    }
  }

  TEST_CASE("importance equals replication") {
    std::mt19937_64 gen(17);
    for (int mult : {2, 3}) {
      HmfModel m = fixtures::joint(gen);
      for (auto& d : m.datasets) d.importance = mult;
      check_all_posteriors(m, oracle::from_hmf(m, mult), 1e-12);
    }
  }

  TEST_CASE("rowwise is refused on nonnegative blocks") {
    std::mt19937_64 gen(4);
    HmfModel m = fixtures::single(Kind::R, Flavour::exponential, gen);
    RngStream r(1, 1);
    CHECK_THROWS_AS(update_shared_factor(m, 0, DrawMode::rowwise, r), ParameterError);
    CHECK_THROWS_AS(update_private_factor(m, 0, DrawMode::rowwise, r), ParameterError);
  }

  TEST_CASE("cp-constrained S keeps a zero off-diagonal") {
    std::mt19937_64 gen(5);
    HmfModel m;
    add_entity(m, "a", 5, 3, Negativity::nonnegative);
    add_entity(m, "b", 4, 3, Negativity::nonnegative);
    add_main_dataset(m, "R", 0, 1, fixtures::random_observed(5, 4, 0.9, gen), PriorKind::exponential, 1.0, 1.0, true);
    RngStream init(1, 1);
    initialise(m, InitStrategy{SharedInit::random, PrivateInit::random}, init);
    RngStream r(2, 2);
    for (int s = 0; s < 20; ++s) {
      sweep(m, DrawMode::elementwise, r);
      for (Index a = 0; a < 3; ++a)
        for (Index b = 0; b < 3; ++b)
          if (a != b) REQUIRE(m.datasets[0].private_factor(a, b) == 0.0);
    }
  }

  TEST_CASE("a row with no data is drawn from its prior") {
    HmfModel m;
    add_entity(m, "a", 3, 1, Negativity::nonnegative);
    add_entity(m, "b", 2, 1, Negativity::nonnegative);
    ObservedMatrix r(Matrix::Ones(3, 2));
    r.mask.row(2).setZero();
    add_main_dataset(m, "R", 0, 1, r, PriorKind::exponential, 1.0);
    m.entity_types[0].F.setConstant(1.0);
    m.entity_types[1].F.setConstant(1.0);
    m.datasets[0].private_factor.setConstant(1.0);
    m.entity_types[0].lambda << 2.0;
    RngStream rng(3, 3);
    Diagnostics diag;
    double sum = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      update_shared_factor(m, 0, DrawMode::elementwise, rng, &diag);
      sum += m.entity_types[0].F(2, 0);
    }
    CHECK(std::abs(sum / n - 0.5) < 0.02);
    CHECK(diag.prior_fallbacks >= static_cast<std::size_t>(n));
  }

  TEST_CASE("sweeps preserve nonnegativity and are deterministic") {
    std::mt19937_64 gen(6);
    HmfModel m = fixtures::joint(gen);
    HmfModel copy = m;
    RngStream a(9, 0), b(9, 0);
    for (int s = 0; s < 5; ++s) {
      sweep(m, DrawMode::rowwise, a);
      sweep(copy, DrawMode::rowwise, b);
    }
    for (const auto& e : m.entity_types)
      if (e.negativity == Negativity::nonnegative) CHECK(e.F.minCoeff() >= 0.0);
    for (const auto& d : m.datasets)
      if (d.private_prior == PriorKind::exponential) CHECK(d.private_factor.minCoeff() >= 0.0);
    for (std::size_t t = 0; t < m.entity_types.size(); ++t) CHECK(m.entity_types[t].F == copy.entity_types[t].F);
    for (std::size_t n = 0; n < m.datasets.size(); ++n) {
      CHECK(m.datasets[n].private_factor == copy.datasets[n].private_factor);
      CHECK(m.datasets[n].noise_precision == copy.datasets[n].noise_precision);
    }
  }

  TEST_CASE("thread count does not change a sweep") {
    std::mt19937_64 gen(16);
    HmfModel m = fixtures::joint(gen, true);
    HmfModel copy = m;
    RngStream a(9, 0), b(9, 0);
    for (int s = 0; s < 3; ++s) {
      sweep(m, DrawMode::elementwise, a, GibbsOptions{1, false});
      sweep(copy, DrawMode::elementwise, b, GibbsOptions{4, false});
    }
    for (std::size_t t = 0; t < m.entity_types.size(); ++t) CHECK(m.entity_types[t].F == copy.entity_types[t].F);
  }

  TEST_CASE("training residual after 200 sweeps is near the noise level") {
    const auto syn = fixtures::synthetic_tri(30, 25, 3, 3, 100.0, 1);
    HmfModel m = fixtures::tri_model(ObservedMatrix(syn.noisy), 5, 1);
    RngStream init(1, 1);
    initialise(m, InitStrategy{}, init);
    RngStream r(1, 0);
    for (int s = 0; s < 200; ++s) sweep(m, DrawMode::elementwise, r, GibbsOptions{1, false});
    const Matrix res = syn.noisy - reconstruct(m, m.datasets[0]);
    CHECK(res.squaredNorm() / static_cast<double>(res.size()) < 3.0 / 100.0);
  }

  TEST_CASE("run bookkeeping") {
    std::mt19937_64 gen(21);
    HmfModel m = fixtures::single(Kind::R, Flavour::exponential, gen);
    SUBCASE("one retained draw equals the final state") {
      m.schedule = {10, 9, 1, 4};
      const PosteriorSummary s = run(m, DrawMode::elementwise);
      CHECK(s.retained_draws == 1);
      CHECK(s.entity_means[0] == m.entity_types[0].F);
      CHECK(s.private_means[0] == m.datasets[0].private_factor);
      CHECK(s.noise_means[0] == m.datasets[0].noise_precision);
    }
    SUBCASE("thinning") {
      m.schedule = {20, 0, 5, 4};
      const PosteriorSummary s = run(m, DrawMode::elementwise);
      CHECK(s.retained_draws == 4);
      for (const auto& f : s.entity_means) CHECK(f.minCoeff() >= 0.0);
    }
  }

  TEST_CASE("log joint") {
    std::mt19937_64 gen(31);
    SUBCASE("matches the summation oracle") {
      for (int rep = 0; rep < 5; ++rep) {
        const HmfModel m = fixtures::joint(gen);
        CHECK(near(log_joint(m), oracle::log_joint(oracle::from_hmf(m))));
      }
    }
    SUBCASE("linear in importance") {
      HmfModel m = fixtures::single(Kind::R, Flavour::exponential, gen);
      m.datasets[0].importance = 0.0;
      const double base = log_joint(m);
      m.datasets[0].importance = 1.0;
      const double one = log_joint(m);
      m.datasets[0].importance = 2.0;
      const double two = log_joint(m);
      CHECK(near(two - base, 2 * (one - base)));
    }
    SUBCASE("perfect reconstruction at unit precision") {
      HmfModel m = feature_model(Matrix::Ones(1, 1), Matrix::Ones(1, 1), ObservedMatrix(Matrix::Ones(1, 1)),
                                 PriorKind::exponential, Negativity::nonnegative);
      m.datasets[0].noise_precision = 1.0;
      const double with = log_joint(m);
      m.datasets[0].importance = 0.0;
      CHECK(near(with - log_joint(m), 0.5 * std::log(1.0 / (2 * std::numbers::pi))));
    }
  }
}
