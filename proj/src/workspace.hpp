#pragma once

// Internal state used while resampling one factor block. A block is rebuilt
// from the model at the start of every update, so residuals never drift
// across blocks.

#include <atomic>
#include <cstddef>
#include <vector>

#include "hmf/datamodel.hpp"
#include "hmf/gibbs.hpp"

namespace hmf::detail {

inline constexpr double kMinPrecision = 1e-14;

struct Counters {
  std::atomic<std::size_t> clamps{0};
  std::atomic<std::size_t> fallbacks{0};
};

// One dataset seen from the factor being updated. Row i of x lines up with
// row i of the factor, and pred(i, j) = sum_k factor(i, k) * design_t(k, j).
struct View {
  Matrix x;         // observed values, 0 where unobserved
  Matrix w;         // 0/1 weights
  Matrix e;         // w .* (x - pred)
  Matrix design_t;  // K x cols
  double scale = 0.0;  // tau * importance
};

// A similarity dataset contributes a row view (C) and a column view (C^T)
// whose designs both depend on the factor being updated.
struct Coupling {
  std::size_t row_view;
  std::size_t col_view;
  Matrix s;  // S^m
};

struct FactorBlock {
  Matrix* factor = nullptr;
  PriorKind prior = PriorKind::gaussian;
  Vector lambda;
  std::vector<View> views;
  std::vector<Coupling> couplings;
  const Mask* pinned = nullptr;

  bool coupled() const { return !couplings.empty(); }
};

FactorBlock shared_block(HmfModel& model, std::size_t entity);
FactorBlock feature_block(HmfModel& model, std::size_t dataset);

UnivariateParams entry_params(const FactorBlock& b, Index i, Index k);
MultivariateParams row_params(const FactorBlock& b, Index i);
void apply_entry_change(FactorBlock& b, Index i, Index k, double delta);
void apply_row_change(FactorBlock& b, Index i, const Vector& delta);

// Middle matrix S of a main or similarity dataset:
// x ~ left * S * right^T.
struct MiddleBlock {
  Matrix* s = nullptr;
  Matrix left;     // I x K
  Matrix right_t;  // L x J
  Matrix w;
  Matrix e;
  double scale = 0.0;
  PriorKind prior = PriorKind::gaussian;
  double lambda = 1.0;
  bool cp = false;
  const Mask* pinned = nullptr;
  // Per-row Gram matrices right^T diag(w_i) right, filled lazily for
  // row-wise draws.
  std::vector<Eigen::MatrixXd> gram;
};

MiddleBlock middle_block(HmfModel& model, std::size_t dataset);

UnivariateParams middle_entry_params(const MiddleBlock& b, Index k, Index l);
MultivariateParams middle_row_params(MiddleBlock& b, Index k);
void apply_middle_change(MiddleBlock& b, Index k, Index l, double delta);

// Draw one value from an entry conditional, applying the precision floor and
// the prior fallback for untouched exponential entries.
double draw_entry(const UnivariateParams& p, PriorKind prior, double prior_lambda, RngStream& rng,
                  Counters& counters);

// Covariance and mean from precision and linear term.
void finish_multivariate(MultivariateParams& p);

// Per-unit child streams derived from a parent, advancing the parent once.
std::vector<RngStream> child_streams(RngStream& parent, std::size_t n);

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn);

}  // namespace hmf::detail

#include "parallel.ipp"
