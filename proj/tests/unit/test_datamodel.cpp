#include <random>

#include "doctest.h"
#include "hmf/datamodel.hpp"
#include "hmf/error.hpp"
#include "support/fixtures.hpp"

using namespace hmf;

namespace {

HmfModel two_entity_model() {
  HmfModel m;
  const auto a = add_entity(m, "cellline", 3, 2, Negativity::nonnegative);
  const auto b = add_entity(m, "drug", 4, 2, Negativity::nonnegative);
  add_main_dataset(m, "R", a, b, ObservedMatrix(Matrix::Ones(3, 4)), PriorKind::exponential, 1.0);
  return m;
}

}  // namespace

TEST_SUITE("datamodel") {
  TEST_CASE("consistent two-entity model validates") { CHECK(validate(two_entity_model()).empty()); }

  TEST_CASE("observed similarity diagonal is one violation") {
    HmfModel m;
    const auto s = add_entity(m, "sample", 3, 2, Negativity::nonnegative);
    ObservedMatrix c(Matrix::Ones(3, 3));
    for (Index i = 1; i < 3; ++i) c.mask(i, i) = 0;
    add_similarity_dataset(m, "C", s, c, PriorKind::exponential, 1.0);
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == "similarity_diagonal_observed");
  }

  TEST_CASE("feature matrix with the wrong column count is one dimension violation") {
    HmfModel m;
    const auto d = add_entity(m, "drug", 3, 2, Negativity::nonnegative);
    add_feature_dataset(m, "D", d, ObservedMatrix(Matrix::Ones(3, 5)), PriorKind::exponential);
    m.datasets[0].private_factor = Matrix::Zero(5, 3);
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == "private_factor_dims");
  }

  TEST_CASE("validate is side-effect free and idempotent") {
    HmfModel m = two_entity_model();
    m.entity_types[0].F(0, 0) = -1.0;
    const HmfModel before = m;
    const auto v1 = validate(m), v2 = validate(m);
    REQUIRE(v1.size() == v2.size());
    for (std::size_t i = 0; i < v1.size(); ++i) CHECK(v1[i].rule == v2[i].rule);
    CHECK(m.entity_types[0].F == before.entity_types[0].F);
    CHECK(v1[0].rule == "nonnegative_factor");
  }

  TEST_CASE("other invariants are reported") {
    SUBCASE("all-false mask") {
      HmfModel m = two_entity_model();
      m.datasets[0].data.mask.setZero();
      CHECK(validate(m).front().rule == "mask_nonempty");
    }
    SUBCASE("main dataset over one entity") {
      HmfModel m;
      const auto a = add_entity(m, "x", 3, 2, Negativity::nonnegative);
      add_main_dataset(m, "R", a, a, ObservedMatrix(Matrix::Ones(3, 3)), PriorKind::exponential, 1.0);
      CHECK(validate(m).front().rule == "main_distinct_entities");
    }
    SUBCASE("cp with nonzero off-diagonal") {
      HmfModel m = two_entity_model();
      m.datasets[0].cp_constrained = true;
      m.datasets[0].private_factor(0, 1) = 0.5;
      CHECK(validate(m).front().rule == "cp_offdiagonal");
    }
    SUBCASE("schedule without retained draws") {
      HmfModel m = two_entity_model();
      m.schedule.iterations = 10;
      m.schedule.burn_in = 10;
      CHECK_FALSE(validate(m).empty());
    }
    SUBCASE("unused entity") {
      HmfModel m = two_entity_model();
      add_entity(m, "lonely", 2, 1, Negativity::real);
      CHECK(validate(m).front().rule == "entity_linked");
    }
    SUBCASE("negative exponential-prior private factor") {
      HmfModel m = two_entity_model();
      m.datasets[0].private_factor(1, 1) = -0.1;
      CHECK_FALSE(validate(m).empty());
    }
  }

  TEST_CASE("index sets for a main dataset") {
    const HmfModel m = two_entity_model();
    const IndexSets c = derive_index_sets(m, 0), d = derive_index_sets(m, 1);
    CHECK(c.u1 == std::vector<std::size_t>{0});
    CHECK(c.u2.empty());
    CHECK(c.v.empty());
    CHECK(c.w.empty());
    CHECK(d.u2 == std::vector<std::size_t>{0});
    CHECK(d.u1.empty());
  }

  TEST_CASE("index sets for similarity and feature datasets") {
    HmfModel m;
    const auto s = add_entity(m, "sample", 3, 2, Negativity::nonnegative);
    const auto dr = add_entity(m, "drug", 4, 2, Negativity::nonnegative);
    ObservedMatrix c(Matrix::Ones(3, 3));
    for (Index i = 0; i < 3; ++i) c.mask(i, i) = 0;
    add_similarity_dataset(m, "C", s, c, PriorKind::exponential, 1.0);
    add_feature_dataset(m, "D1", dr, ObservedMatrix(Matrix::Ones(4, 2)), PriorKind::exponential);
    add_feature_dataset(m, "D2", dr, ObservedMatrix(Matrix::Ones(4, 3)), PriorKind::gaussian);
    CHECK(derive_index_sets(m, s).w == std::vector<std::size_t>{0});
    const IndexSets d = derive_index_sets(m, dr);
    CHECK(d.v.size() == 2);
    CHECK(d.v_plus == std::vector<std::size_t>{1});
    CHECK(d.v_minus == std::vector<std::size_t>{2});
  }

  TEST_CASE("unresolved entity reference is a configuration error") {
    HmfModel m = two_entity_model();
    m.datasets[0].col_entity = 9;
    CHECK_THROWS_AS(derive_index_sets(m, 0), ConfigError);
  }

  TEST_CASE("schedule arithmetic") {
    SamplerSchedule s;
    CHECK(s.retained_draws() == 50);
    s.iterations = 20;
    s.burn_in = 0;
    s.thinning = 5;
    CHECK(s.retained_draws() == 4);
    CHECK(s.retains(5));
    CHECK_FALSE(s.retains(4));
  }

  TEST_CASE("masked values never expose unobserved cells") {
    std::mt19937_64 g(1);
    const ObservedMatrix m = fixtures::random_observed(4, 5, 0.5, g);
    const Matrix v = m.masked_values(), w = m.weights();
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 5; ++j) {
        CHECK(w(i, j) == (m.observed(i, j) ? 1.0 : 0.0));
        CHECK(v(i, j) == (m.observed(i, j) ? m.values(i, j) : 0.0));
      }
  }
}
