#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "hmf/datamodel.hpp"
#include "hmf/eval.hpp"

namespace fixtures {

using hmf::Index;
using hmf::Matrix;

// exponential: nonnegative F, exponential private prior (BNMF family)
// gaussian:    real F, Gaussian private prior (BMF family)
// mixed:       nonnegative F, Gaussian private prior (semi-nonnegative)
enum class Flavour { exponential, gaussian, mixed };
enum class Kind { R, D, C };

inline const char* name(Flavour f) {
  return f == Flavour::exponential ? "exponential" : f == Flavour::gaussian ? "gaussian" : "mixed";
}
inline const char* name(Kind k) { return k == Kind::R ? "R" : k == Kind::D ? "D" : "C"; }

inline double uni(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Matrix random_matrix(Index r, Index c, bool nonneg, std::mt19937_64& g) {
  Matrix m(r, c);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = nonneg ? uni(g, 0.05, 1.5) : n(g);
  return m;
}

// Random values with roughly `density` of cells observed, at least one per
// matrix; the diagonal is unobserved when `square_sim`.
inline hmf::ObservedMatrix random_observed(Index r, Index c, double density, std::mt19937_64& g,
                                           bool square_sim = false) {
  hmf::ObservedMatrix m(random_matrix(r, c, false, g));
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) {
      const bool diag = square_sim && i == j;
      m.mask(i, j) = (!diag && uni(g, 0, 1) < density) ? 1 : 0;
      if (m.mask(i, j) == 0) m.values(i, j) = uni(g, -1e6, 1e6);  // garbage, never read
    }
  if (m.observed_count() == 0) m.mask(0, c > 1 ? 1 : 0) = 1;
  return m;
}

inline void randomise_state(hmf::HmfModel& m, std::mt19937_64& g, bool random_importance = true) {
  for (auto& e : m.entity_types) {
    e.F = random_matrix(e.instances, e.factors, e.negativity == hmf::Negativity::nonnegative, g);
    for (Index k = 0; k < e.factors; ++k) e.lambda[k] = uni(g, 0.5, 2.0);
  }
  for (auto& d : m.datasets) {
    d.private_factor = random_matrix(d.private_factor.rows(), d.private_factor.cols(),
                                     d.private_prior == hmf::PriorKind::exponential, g);
    if (d.cp_constrained)
      for (Index a = 0; a < d.private_factor.rows(); ++a)
        for (Index b = 0; b < d.private_factor.cols(); ++b)
          if (a != b) d.private_factor(a, b) = 0.0;
    d.noise_precision = uni(g, 0.5, 3.0);
    d.private_lambda = uni(g, 0.5, 2.0);
    if (random_importance) d.importance = uni(g, 0.5, 2.0);
  }
  m.hyper.alpha_tau = uni(g, 0.5, 2.0);
  m.hyper.beta_tau = uni(g, 0.5, 2.0);
  m.hyper.alpha_0 = uni(g, 0.5, 2.0);
  m.hyper.beta_0 = uni(g, 0.5, 2.0);
}

// One dataset of the given kind, sizes <= 6x5 and K, L <= 3.
inline hmf::HmfModel single(Kind kind, Flavour fl, std::mt19937_64& g, double density = 0.8) {
  using namespace hmf;
  HmfModel m;
  const auto neg = fl == Flavour::gaussian ? Negativity::real : Negativity::nonnegative;
  const auto prior = fl == Flavour::exponential ? PriorKind::exponential : PriorKind::gaussian;
  const Index rows = 2 + static_cast<Index>(g() % 5);  // 2..6
  const Index cols = 2 + static_cast<Index>(g() % 4);  // 2..5
  const Index k = 1 + static_cast<Index>(g() % 3);
  const Index l = 1 + static_cast<Index>(g() % 3);
  switch (kind) {
    case Kind::R: {
      const auto a = add_entity(m, "rows", rows, k, neg);
      const auto b = add_entity(m, "cols", cols, l, neg);
      add_main_dataset(m, "R", a, b, random_observed(rows, cols, density, g), prior, 1.0);
      break;
    }
    case Kind::D: {
      const auto a = add_entity(m, "rows", rows, k, neg);
      add_feature_dataset(m, "D", a, random_observed(rows, cols, density, g), prior);
      break;
    }
    case Kind::C: {
      const auto a = add_entity(m, "items", rows, k, neg);
      add_similarity_dataset(m, "C", a, random_observed(rows, rows, density, g, true), prior, 1.0);
      break;
    }
  }
  randomise_state(m, g);
  return m;
}

// Three entity types joined by every dataset kind, including one of each
// private prior on the feature side.
inline hmf::HmfModel joint(std::mt19937_64& g, bool real_entities = false) {
  using namespace hmf;
  HmfModel m;
  const auto neg = real_entities ? Negativity::real : Negativity::nonnegative;
  const auto a = add_entity(m, "cells", 5, 2, neg);
  const auto b = add_entity(m, "drugs", 4, 3, neg);
  const auto c = add_entity(m, "genes", 3, 3, Negativity::real);
  add_main_dataset(m, "R1", a, b, random_observed(5, 4, 0.8, g), PriorKind::exponential, 1.0);
  add_main_dataset(m, "R2", c, a, random_observed(3, 5, 0.7, g), PriorKind::gaussian, 1.0);
  add_feature_dataset(m, "D1", a, random_observed(5, 3, 0.8, g), PriorKind::exponential);
  add_feature_dataset(m, "D2", a, random_observed(5, 4, 0.8, g), PriorKind::gaussian);
  add_feature_dataset(m, "D3", b, random_observed(4, 2, 0.9, g), PriorKind::gaussian);
  add_similarity_dataset(m, "C1", a, random_observed(5, 5, 0.8, g, true), PriorKind::exponential, 1.0);
  add_similarity_dataset(m, "C2", b, random_observed(4, 4, 0.9, g, true), PriorKind::gaussian, 1.0);
  add_main_dataset(m, "R3", b, c, random_observed(4, 3, 0.9, g), PriorKind::exponential, 1.0, 1.0, true);
  randomise_state(m, g);
  return m;
}

// R = F S G^T + N(0, 1/tau) with F, S, G ~ Exp(1), nonnegative.
struct Synthetic {
  Matrix F, S, G, truth, noisy;
};

inline Synthetic synthetic_tri(Index i, Index j, Index k, Index l, double tau, std::uint64_t seed,
                               bool dense_s = true) {
  std::mt19937_64 g(seed);
  std::exponential_distribution<double> ex(1.0);
  std::normal_distribution<double> noise(0.0, 1.0 / std::sqrt(tau));
  Synthetic s;
  s.F.resize(i, k);
  s.S.resize(k, l);
  s.G.resize(j, l);
  for (Index a = 0; a < s.F.size(); ++a) s.F.data()[a] = ex(g);
  for (Index a = 0; a < s.G.size(); ++a) s.G.data()[a] = ex(g);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < l; ++b) s.S(a, b) = (dense_s || a == b) ? ex(g) : 0.0;
  s.truth = s.F * s.S * s.G.transpose();
  s.noisy = s.truth;
  for (Index a = 0; a < s.noisy.size(); ++a) s.noisy.data()[a] += noise(g);
  return s;
}

// Single main-dataset model with nonnegative entities and exponential S.
inline hmf::HmfModel tri_model(const hmf::ObservedMatrix& data, Index k, std::uint64_t seed) {
  using namespace hmf;
  HmfModel m;
  const auto a = add_entity(m, "rows", data.rows(), k, Negativity::nonnegative);
  const auto b = add_entity(m, "cols", data.cols(), k, Negativity::nonnegative);
  add_main_dataset(m, "R", a, b, data, PriorKind::exponential, 1.0);
  m.schedule.seed = seed;
  return m;
}

}  // namespace fixtures
