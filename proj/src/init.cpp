#include "hmf/init.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "hmf/error.hpp"
#include "hmf/simd.hpp"

namespace hmf {

SharedInit parse_shared_init(std::string_view s) {
  if (s == "expectation") return SharedInit::expectation;
  if (s == "random") return SharedInit::random;
  if (s == "kmeans") return SharedInit::kmeans;
  throw ConfigError("unknown shared initialisation '" + std::string(s) + "'");
}

PrivateInit parse_private_init(std::string_view s) {
  if (s == "expectation") return PrivateInit::expectation;
  if (s == "random") return PrivateInit::random;
  if (s == "leastsquares") return PrivateInit::leastsquares;
  throw ConfigError("unknown private initialisation '" + std::string(s) + "'");
}

const char* to_string(SharedInit s) {
  switch (s) {
    case SharedInit::expectation: return "expectation";
    case SharedInit::random: return "random";
    case SharedInit::kmeans: return "kmeans";
  }
  return "?";
}

const char* to_string(PrivateInit p) {
  switch (p) {
    case PrivateInit::expectation: return "expectation";
    case PrivateInit::random: return "random";
    case PrivateInit::leastsquares: return "leastsquares";
  }
  return "?";
}

namespace {

double private_lambda(const HmfModel& model, const DatasetSpec& d, Index col) {
  return d.kind == DatasetKind::feature ? model.row_entity(d).lambda[col] : d.private_lambda;
}

// Zero CP off-diagonals and restore pinned entries after an initialiser has
// overwritten a private block.
void enforce_private_constraints(DatasetSpec& d, const Matrix& before) {
  Matrix& pf = d.private_factor;
  if (d.cp_constrained)
    for (Index k = 0; k < pf.rows(); ++k)
      for (Index l = 0; l < pf.cols(); ++l)
        if (k != l) pf(k, l) = 0.0;
  if (d.pinned.size() != 0 && before.rows() == pf.rows() && before.cols() == pf.cols())
    for (Index k = 0; k < pf.rows(); ++k)
      for (Index l = 0; l < pf.cols(); ++l)
        if (d.pinned(k, l) != 0) pf(k, l) = before(k, l);
}

RngStream child(RngStream& rng, std::uint64_t kind, std::size_t index) {
  const std::uint64_t key = rng.engine()();
  return RngStream(rng.seed(), mix_keys(rng.stream_id(), key, kind, index));
}

void expectation_entity(EntityType& e, RngStream& rng) {
  for (Index i = 0; i < e.instances; ++i)
    for (Index k = 0; k < e.factors; ++k)
      e.F(i, k) = e.negativity == Negativity::nonnegative
                      ? 1.0 / e.lambda[k]
                      : sample_uniform(-kExpectationJitter, kExpectationJitter, rng);
}

void random_entity(EntityType& e, RngStream& rng) {
  for (Index i = 0; i < e.instances; ++i)
    for (Index k = 0; k < e.factors; ++k)
      e.F(i, k) = e.negativity == Negativity::nonnegative ? sample_exponential(e.lambda[k], rng)
                                                           : sample_normal(0.0, e.lambda[k], rng);
}

void expectation_private(const HmfModel& model, DatasetSpec& d, RngStream& rng) {
  const Matrix before = d.private_factor;
  Matrix& pf = d.private_factor;
  for (Index r = 0; r < pf.rows(); ++r)
    for (Index c = 0; c < pf.cols(); ++c)
      pf(r, c) = d.private_prior == PriorKind::exponential
                     ? 1.0 / private_lambda(model, d, c)
                     : sample_uniform(-kExpectationJitter, kExpectationJitter, rng);
  enforce_private_constraints(d, before);
}

void random_private(const HmfModel& model, DatasetSpec& d, RngStream& rng) {
  const Matrix before = d.private_factor;
  Matrix& pf = d.private_factor;
  for (Index r = 0; r < pf.rows(); ++r)
    for (Index c = 0; c < pf.cols(); ++c) {
      const double lam = private_lambda(model, d, c);
      pf(r, c) = d.private_prior == PriorKind::exponential ? sample_exponential(lam, rng)
                                                           : sample_normal(0.0, lam, rng);
    }
  enforce_private_constraints(d, before);
}

// Missing cells replaced by the column mean of observed cells, or the matrix
// mean when a column has none.
Matrix column_mean_imputed(const Matrix& values, const Mask& mask) {
  double total = 0.0;
  std::size_t count = 0;
  for (Index i = 0; i < values.size(); ++i)
    if (mask.data()[i] != 0) {
      total += values.data()[i];
      ++count;
    }
  const double matrix_mean = count > 0 ? total / static_cast<double>(count) : 0.0;
  Matrix out(values.rows(), values.cols());
  for (Index j = 0; j < values.cols(); ++j) {
    double s = 0.0;
    std::size_t n = 0;
    for (Index i = 0; i < values.rows(); ++i)
      if (mask(i, j) != 0) {
        s += values(i, j);
        ++n;
      }
    const double fill = n > 0 ? s / static_cast<double>(n) : matrix_mean;
    for (Index i = 0; i < values.rows(); ++i) out(i, j) = mask(i, j) != 0 ? values(i, j) : fill;
  }
  return out;
}

Matrix matrix_mean_imputed(const ObservedMatrix& m) {
  double total = 0.0;
  std::size_t count = 0;
  for (Index i = 0; i < m.values.size(); ++i)
    if (m.mask.data()[i] != 0) {
      total += m.values.data()[i];
      ++count;
    }
  const double fill = count > 0 ? total / static_cast<double>(count) : 0.0;
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.values.size(); ++i)
    out.data()[i] = m.mask.data()[i] != 0 ? m.values.data()[i] : fill;
  return out;
}

Matrix pinv(const Matrix& m) {
  const Eigen::MatrixXd dense = m;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(dense);
  return cod.pseudoInverse();
}

}  // namespace

void init_hyper_expectation(HmfModel& model) {
  const double lam = model.hyper.alpha_0 / model.hyper.beta_0;
  for (auto& e : model.entity_types) e.lambda = Vector::Constant(e.factors, lam);
  const double tau = model.hyper.alpha_tau / model.hyper.beta_tau;
  for (auto& d : model.datasets) d.noise_precision = tau;
}

void init_expectation(HmfModel& model, RngStream& rng) {
  init_hyper_expectation(model);
  for (std::size_t t = 0; t < model.entity_types.size(); ++t) {
    RngStream r = child(rng, 1, t);
    expectation_entity(model.entity_types[t], r);
  }
  for (std::size_t n = 0; n < model.datasets.size(); ++n) {
    RngStream r = child(rng, 2, n);
    expectation_private(model, model.datasets[n], r);
  }
}

void init_expectation(HmfModel& model) {
  RngStream rng(model.schedule.seed, 0x1417);
  init_expectation(model, rng);
}

void init_random(HmfModel& model, RngStream& rng) {
  init_hyper_expectation(model);
  for (std::size_t t = 0; t < model.entity_types.size(); ++t) {
    RngStream r = child(rng, 3, t);
    random_entity(model.entity_types[t], r);
  }
  for (std::size_t n = 0; n < model.datasets.size(); ++n) {
    RngStream r = child(rng, 4, n);
    random_private(model, model.datasets[n], r);
  }
}

std::vector<Index> kmeans_assign(const Matrix& rows, Index clusters, RngStream& rng,
                                 int max_iterations) {
  const Index n = rows.rows(), dim = rows.cols();
  const auto udim = static_cast<std::size_t>(dim);
  if (clusters < 1) throw ConfigError("k-means needs at least one cluster");
  std::vector<Index> assign(static_cast<std::size_t>(n), 0);
  if (n == 0) return assign;

  // Seed with distinct random rows (Fisher-Yates prefix).
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = 0; i < std::min(n, clusters); ++i) {
    const auto j = i + static_cast<Index>(rng.uniform() * static_cast<double>(n - i));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(std::min(j, n - 1))]);
  }
  Matrix centroids = Matrix::Zero(clusters, dim);
  for (Index c = 0; c < clusters; ++c) centroids.row(c) = rows.row(order[static_cast<std::size_t>(c % n)]);

  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
  std::vector<Index> counts(static_cast<std::size_t>(clusters), 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = iter == 0;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index c = 0; c < clusters; ++c) {
        const double d = simd::squared_distance(rows.row(i).data(), centroids.row(c).data(), udim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) changed = true;
      assign[static_cast<std::size_t>(i)] = best;
      dist[static_cast<std::size_t>(i)] = best_d;
    }
    std::fill(counts.begin(), counts.end(), 0);
    for (Index a : assign) ++counts[static_cast<std::size_t>(a)];

    // Re-seed empty clusters from the point farthest from its centroid,
    // taken from a cluster that can spare it.
    for (Index c = 0; c < clusters; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const Index a = assign[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(a)] > 1 && dist[static_cast<std::size_t>(i)] > far_d) {
          far_d = dist[static_cast<std::size_t>(i)];
          far = i;
        }
      }
      if (far < 0) break;
      --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
      assign[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      dist[static_cast<std::size_t>(far)] = 0.0;
      changed = true;
    }

    Matrix sums = Matrix::Zero(clusters, dim);
    for (Index i = 0; i < n; ++i) sums.row(assign[static_cast<std::size_t>(i)]) += rows.row(i);
    for (Index c = 0; c < clusters; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    if (!changed) break;
  }
  return assign;
}

void init_kmeans(HmfModel& model, std::size_t entity, RngStream& rng) {
  const IndexSets sets = derive_index_sets(model, entity);
  EntityType& e = model.entity_types[entity];

  std::vector<Matrix> blocks;
  for (std::size_t n : sets.u1) {
    const auto& d = model.datasets[n].data;
    blocks.push_back(column_mean_imputed(d.values, d.mask));
  }
  for (std::size_t n : sets.u2) {
    const auto& d = model.datasets[n].data;
    blocks.push_back(column_mean_imputed(d.values.transpose(), d.mask.transpose()));
  }
  for (std::size_t n : sets.v) {
    const auto& d = model.datasets[n].data;
    blocks.push_back(column_mean_imputed(d.values, d.mask));
  }
  for (std::size_t n : sets.w) {
    const auto& d = model.datasets[n].data;
    blocks.push_back(column_mean_imputed(d.values, d.mask));
  }
  if (blocks.empty())
    throw ConfigError("entity type '" + e.name + "' has no linked data for k-means initialisation");

  Index width = 0;
  for (const auto& b : blocks) width += b.cols();
  Matrix rows(e.instances, width);
  Index off = 0;
  for (const auto& b : blocks) {
    rows.middleCols(off, b.cols()) = b;
    off += b.cols();
  }

  const auto assign = kmeans_assign(rows, e.factors, rng);
  e.F = Matrix::Constant(e.instances, e.factors, kKmeansOffset);
  for (Index i = 0; i < e.instances; ++i) e.F(i, assign[static_cast<std::size_t>(i)]) += 1.0;
}

void init_least_squares(HmfModel& model, std::size_t dataset) {
  DatasetSpec& d = model.datasets.at(dataset);
  const Matrix before = d.private_factor;
  const Matrix x = matrix_mean_imputed(d.data);
  const Matrix& f = model.row_entity(d).F;
  switch (d.kind) {
    case DatasetKind::feature:
      d.private_factor = (pinv(f) * x).transpose();
      break;
    case DatasetKind::main:
    case DatasetKind::similarity: {
      const Matrix& g = model.col_entity(d).F;
      d.private_factor = pinv(f) * x * pinv(g.transpose());
      break;
    }
  }
  if (d.private_prior == PriorKind::exponential)
    d.private_factor = d.private_factor.cwiseMax(kLeastSquaresFloor);
  enforce_private_constraints(d, before);
}

void initialise(HmfModel& model, const InitStrategy& strategy, RngStream& rng) {
  init_hyper_expectation(model);
  for (std::size_t t = 0; t < model.entity_types.size(); ++t) {
    RngStream r = child(rng, 5, t);
    switch (strategy.shared) {
      case SharedInit::expectation: expectation_entity(model.entity_types[t], r); break;
      case SharedInit::random: random_entity(model.entity_types[t], r); break;
      case SharedInit::kmeans: init_kmeans(model, t, r); break;
    }
  }
  for (std::size_t n = 0; n < model.datasets.size(); ++n) {
    RngStream r = child(rng, 6, n);
    switch (strategy.private_) {
      case PrivateInit::expectation: expectation_private(model, model.datasets[n], r); break;
      case PrivateInit::random: random_private(model, model.datasets[n], r); break;
      case PrivateInit::leastsquares: init_least_squares(model, n); break;
    }
  }
}

}  // namespace hmf
