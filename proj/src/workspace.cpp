#include "workspace.hpp"

#include <cmath>

#include "hmf/error.hpp"
#include "hmf/simd.hpp"

namespace hmf::detail {
namespace {

Matrix residual(const Matrix& x, const Matrix& w, const Matrix& factor, const Matrix& design_t) {
  Matrix e = x - factor * design_t;
  e.array() *= w.array();
  return e;
}

View make_view(Matrix x, Matrix w, Matrix design_t, const Matrix& factor, double scale) {
  View v;
  v.e = residual(x, w, factor, design_t);
  v.x = std::move(x);
  v.w = std::move(w);
  v.design_t = std::move(design_t);
  v.scale = scale;
  return v;
}

double scale_of(const DatasetSpec& d) { return d.noise_precision * d.importance; }

}  // namespace

FactorBlock shared_block(HmfModel& model, std::size_t entity) {
  const IndexSets sets = derive_index_sets(model, entity);
  EntityType& ent = model.entity_types[entity];
  FactorBlock b;
  b.factor = &ent.F;
  b.prior = ent.negativity == Negativity::nonnegative ? PriorKind::exponential : PriorKind::gaussian;
  b.lambda = ent.lambda;
  const Matrix& f = ent.F;

  for (std::size_t n : sets.u1) {
    const DatasetSpec& d = model.datasets[n];
    const Matrix& fu = model.col_entity(d).F;
    b.views.push_back(make_view(d.data.masked_values(), d.data.weights(),
                                d.private_factor * fu.transpose(), f, scale_of(d)));
  }
  for (std::size_t n : sets.u2) {
    const DatasetSpec& d = model.datasets[n];
    const Matrix& ft = model.row_entity(d).F;
    b.views.push_back(make_view(d.data.masked_values().transpose(), d.data.weights().transpose(),
                                (ft * d.private_factor).transpose(), f, scale_of(d)));
  }
  for (std::size_t n : sets.v) {
    const DatasetSpec& d = model.datasets[n];
    b.views.push_back(make_view(d.data.masked_values(), d.data.weights(),
                                d.private_factor.transpose(), f, scale_of(d)));
  }
  for (std::size_t n : sets.w) {
    const DatasetSpec& d = model.datasets[n];
    const Matrix& s = d.private_factor;
    Coupling c;
    c.row_view = b.views.size();
    b.views.push_back(make_view(d.data.masked_values(), d.data.weights(), s * f.transpose(), f,
                                scale_of(d)));
    c.col_view = b.views.size();
    b.views.push_back(make_view(d.data.masked_values().transpose(), d.data.weights().transpose(),
                                s.transpose() * f.transpose(), f, scale_of(d)));
    c.s = s;
    b.couplings.push_back(std::move(c));
  }
  return b;
}

FactorBlock feature_block(HmfModel& model, std::size_t dataset) {
  DatasetSpec& d = model.datasets[dataset];
  const EntityType& ent = model.row_entity(d);
  FactorBlock b;
  b.factor = &d.private_factor;
  b.prior = d.private_prior;
  b.lambda = ent.lambda;
  b.views.push_back(make_view(d.data.masked_values().transpose(), d.data.weights().transpose(),
                              ent.F.transpose(), d.private_factor, scale_of(d)));
  if (d.pinned.size() != 0) b.pinned = &d.pinned;
  return b;
}

UnivariateParams entry_params(const FactorBlock& b, Index i, Index k) {
  const double f = (*b.factor)(i, k);
  double prec = 0.0, lin = 0.0;
  for (const View& v : b.views) {
    const auto n = static_cast<std::size_t>(v.x.cols());
    const simd::Moments m =
        simd::residual_moments(v.w.row(i).data(), v.e.row(i).data(), v.design_t.row(k).data(), f, n);
    prec += v.scale * m.precision;
    lin += v.scale * m.linear;
  }
  const double lambda = b.lambda[k];
  if (b.prior == PriorKind::exponential) {
    if (prec == 0.0) return {0.0, 0.0};
    return {(lin - lambda) / prec, prec};
  }
  const double tau = lambda + prec;
  return {lin / tau, tau};
}

MultivariateParams row_params(const FactorBlock& b, Index i) {
  const Index kk = b.factor->cols();
  MultivariateParams p;
  p.precision = b.lambda.asDiagonal();
  p.linear = Vector::Zero(kk);
  for (const View& v : b.views) {
    const auto n = static_cast<std::size_t>(v.x.cols());
    const double* w = v.w.row(i).data();
    const double* x = v.x.row(i).data();
    for (Index k = 0; k < kk; ++k) {
      const double* ck = v.design_t.row(k).data();
      p.linear[k] += v.scale * simd::weighted_dot(w, x, ck, n);
      for (Index k2 = k; k2 < kk; ++k2) {
        const double g = v.scale * simd::weighted_dot(w, ck, v.design_t.row(k2).data(), n);
        p.precision(k, k2) += g;
        if (k2 != k) p.precision(k2, k) += g;
      }
    }
  }
  finish_multivariate(p);
  return p;
}

void apply_entry_change(FactorBlock& b, Index i, Index k, double delta) {
  if (delta == 0.0) return;
  for (View& v : b.views)
    simd::axpy(-delta, v.design_t.row(k).data(), v.e.row(i).data(), static_cast<std::size_t>(v.x.cols()));
  for (Coupling& c : b.couplings) {
    View& rv = b.views[c.row_view];
    View& cv = b.views[c.col_view];
    const Index n = rv.x.rows();
    // Column i of both residuals: entries C(j, i) and C(i, j) for j != i.
    for (Index j = 0; j < n; ++j) {
      rv.e(j, i) -= delta * cv.design_t(k, j);
      cv.e(j, i) -= delta * rv.design_t(k, j);
    }
    for (Index k2 = 0; k2 < c.s.rows(); ++k2) {
      rv.design_t(k2, i) += c.s(k2, k) * delta;
      cv.design_t(k2, i) += c.s(k, k2) * delta;
    }
  }
}

void apply_row_change(FactorBlock& b, Index i, const Vector& delta) {
  for (Index k = 0; k < delta.size(); ++k) apply_entry_change(b, i, k, delta[k]);
}

MiddleBlock middle_block(HmfModel& model, std::size_t dataset) {
  DatasetSpec& d = model.datasets[dataset];
  MiddleBlock b;
  b.s = &d.private_factor;
  b.left = model.row_entity(d).F;
  const Matrix& right = model.col_entity(d).F;
  b.right_t = right.transpose();
  b.w = d.data.weights();
  b.e = d.data.masked_values() - b.left * d.private_factor * b.right_t;
  b.e.array() *= b.w.array();
  b.scale = scale_of(d);
  b.prior = d.private_prior;
  b.lambda = d.private_lambda;
  b.cp = d.cp_constrained;
  if (d.pinned.size() != 0) b.pinned = &d.pinned;
  return b;
}

UnivariateParams middle_entry_params(const MiddleBlock& b, Index k, Index l) {
  const double s_kl = (*b.s)(k, l);
  const auto n = static_cast<std::size_t>(b.right_t.cols());
  const double* rl = b.right_t.row(l).data();
  double prec = 0.0, lin = 0.0;
  for (Index i = 0; i < b.left.rows(); ++i) {
    const double a = b.left(i, k);
    const simd::Moments m = simd::residual_moments(b.w.row(i).data(), b.e.row(i).data(), rl, s_kl * a, n);
    prec += a * a * m.precision;
    lin += a * m.linear;
  }
  prec *= b.scale;
  lin *= b.scale;
  if (b.prior == PriorKind::exponential) {
    if (prec == 0.0) return {0.0, 0.0};
    return {(lin - b.lambda) / prec, prec};
  }
  const double tau = b.lambda + prec;
  return {lin / tau, tau};
}

MultivariateParams middle_row_params(MiddleBlock& b, Index k) {
  const Index rows = b.left.rows();
  const Index ll = b.right_t.rows();
  const auto n = static_cast<std::size_t>(b.right_t.cols());
  if (b.gram.empty()) {
    b.gram.resize(static_cast<std::size_t>(rows));
    for (Index i = 0; i < rows; ++i) {
      Eigen::MatrixXd g(ll, ll);
      const double* w = b.w.row(i).data();
      for (Index l = 0; l < ll; ++l)
        for (Index l2 = l; l2 < ll; ++l2) {
          g(l, l2) = simd::weighted_dot(w, b.right_t.row(l).data(), b.right_t.row(l2).data(), n);
          g(l2, l) = g(l, l2);
        }
      b.gram[static_cast<std::size_t>(i)] = std::move(g);
    }
  }
  MultivariateParams p;
  p.precision = Eigen::MatrixXd::Zero(ll, ll);
  p.linear = Vector::Zero(ll);
  const Vector s_k = b.s->row(k).transpose();
  Vector v(ll);
  for (Index i = 0; i < rows; ++i) {
    const double a = b.left(i, k);
    if (a == 0.0) continue;
    const auto& g = b.gram[static_cast<std::size_t>(i)];
    for (Index l = 0; l < ll; ++l)
      v[l] = simd::weighted_dot(b.w.row(i).data(), b.e.row(i).data(), b.right_t.row(l).data(), n);
    p.precision.noalias() += (a * a) * g;
    p.linear.noalias() += a * v + (a * a) * (g * s_k);
  }
  p.precision *= b.scale;
  p.linear *= b.scale;
  p.precision.diagonal().array() += b.lambda;
  finish_multivariate(p);
  return p;
}

void apply_middle_change(MiddleBlock& b, Index k, Index l, double delta) {
  if (delta == 0.0) return;
  const auto n = static_cast<std::size_t>(b.right_t.cols());
  for (Index i = 0; i < b.left.rows(); ++i) {
    const double a = b.left(i, k);
    if (a != 0.0) simd::axpy(-delta * a, b.right_t.row(l).data(), b.e.row(i).data(), n);
  }
}

double draw_entry(const UnivariateParams& p, PriorKind prior, double prior_lambda, RngStream& rng,
                  Counters& counters) {
  double mu = p.mu, tau = p.tau;
  if (prior == PriorKind::exponential && tau == 0.0) {
    counters.fallbacks.fetch_add(1, std::memory_order_relaxed);
    return sample_exponential(prior_lambda, rng);
  }
  if (tau < kMinPrecision) {
    counters.clamps.fetch_add(1, std::memory_order_relaxed);
    mu = mu * (tau / kMinPrecision);
    tau = kMinPrecision;
  }
  if (!std::isfinite(mu)) throw NumericalError("non-finite conditional mean");
  if (prior == PriorKind::exponential) return sample_truncated_normal({mu, tau}, rng);
  return sample_normal(mu, tau, rng);
}

void finish_multivariate(MultivariateParams& p) {
  const Eigen::MatrixXd l = jittered_cholesky(p.precision);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(l.rows(), l.cols());
  const Eigen::MatrixXd linv = l.triangularView<Eigen::Lower>().solve(id);
  p.covariance = linv.transpose() * linv;
  p.mean = p.covariance * p.linear;
}

std::vector<RngStream> child_streams(RngStream& parent, std::size_t n) {
  const std::uint64_t key = parent.engine()();
  std::vector<RngStream> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.emplace_back(parent.seed(), mix_keys(parent.stream_id(), key, i));
  return out;
}

}  // namespace hmf::detail
