#include "hmf/gibbs.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hmf/error.hpp"
#include "hmf/simd.hpp"
#include "workspace.hpp"

namespace hmf {

using detail::Counters;

const char* to_string(DrawMode m) { return m == DrawMode::rowwise ? "rowwise" : "elementwise"; }

namespace {

void flush(const Counters& c, Diagnostics* diag) {
  if (diag == nullptr) return;
  diag->clamp_events += c.clamps.load();
  diag->prior_fallbacks += c.fallbacks.load();
}

bool row_has_pin(const Mask* pinned, Index r) {
  return pinned != nullptr && (pinned->row(r).array() != 0).any();
}

bool is_pinned(const Mask* pinned, Index r, Index c) {
  return pinned != nullptr && (*pinned)(r, c) != 0;
}

// Element-wise or row-wise resampling of a factor block whose rows are
// conditionally independent unless the block is coupled through a
// similarity dataset.
void resample_block(detail::FactorBlock& b, DrawMode mode, RngStream& rng, Counters& ctr,
                    unsigned threads) {
  Matrix& y = *b.factor;
  const Index rows = y.rows(), kk = y.cols();
  auto streams = detail::child_streams(rng, static_cast<std::size_t>(rows));
  const unsigned t = b.coupled() ? 1u : threads;

  auto draw_one = [&](Index i, Index k) {
    if (is_pinned(b.pinned, i, k)) return;
    const UnivariateParams p = detail::entry_params(b, i, k);
    const double v = detail::draw_entry(p, b.prior, b.lambda[k], streams[static_cast<std::size_t>(i)], ctr);
    const double delta = v - y(i, k);
    y(i, k) = v;
    detail::apply_entry_change(b, i, k, delta);
  };

  if (mode == DrawMode::elementwise) {
    for (Index k = 0; k < kk; ++k)
      detail::parallel_for(static_cast<std::size_t>(rows), t,
                           [&](std::size_t i) { draw_one(static_cast<Index>(i), k); });
    return;
  }

  detail::parallel_for(static_cast<std::size_t>(rows), t, [&](std::size_t iu) {
    const auto i = static_cast<Index>(iu);
    if (row_has_pin(b.pinned, i)) {
      for (Index k = 0; k < kk; ++k) draw_one(i, k);
      return;
    }
    const MultivariateParams p = detail::row_params(b, i);
    const Vector draw = sample_multivariate_normal(p.mean, p.covariance, streams[iu]);
    const Vector delta = draw - y.row(i).transpose();
    y.row(i) = draw.transpose();
    if (b.coupled()) detail::apply_row_change(b, i, delta);
  });
}

void resample_middle(detail::MiddleBlock& b, DrawMode mode, RngStream& rng, Counters& ctr) {
  Matrix& s = *b.s;
  const Index kk = s.rows(), ll = s.cols();
  RngStream stream = detail::child_streams(rng, 1).front();

  auto draw_one = [&](Index k, Index l) {
    const UnivariateParams p = detail::middle_entry_params(b, k, l);
    const double v = detail::draw_entry(p, b.prior, b.lambda, stream, ctr);
    const double delta = v - s(k, l);
    s(k, l) = v;
    detail::apply_middle_change(b, k, l, delta);
  };

  if (mode == DrawMode::elementwise) {
    if (b.cp) {
      for (Index k = 0; k < kk; ++k) draw_one(k, k);
      return;
    }
    for (Index l = 0; l < ll; ++l)
      for (Index k = 0; k < kk; ++k)
        if (!is_pinned(b.pinned, k, l)) draw_one(k, l);
    return;
  }

  for (Index k = 0; k < kk; ++k) {
    if (b.cp || row_has_pin(b.pinned, k)) {
      for (Index l = 0; l < ll; ++l) {
        if (b.cp && l != k) continue;
        if (!b.cp && is_pinned(b.pinned, k, l)) continue;
        draw_one(k, l);
      }
      continue;
    }
    const MultivariateParams p = detail::middle_row_params(b, k);
    const Vector draw = sample_multivariate_normal(p.mean, p.covariance, stream);
    for (Index l = 0; l < ll; ++l) {
      const double delta = draw[l] - s(k, l);
      s(k, l) = draw[l];
      detail::apply_middle_change(b, k, l, delta);
    }
  }
}

std::string entity_path(std::size_t t) { return "entity_types[" + std::to_string(t) + "]"; }
std::string dataset_path(std::size_t n) { return "datasets[" + std::to_string(n) + "]"; }

template <typename Fn>
void with_path(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw NumericalError(path + ": " + e.what());
  }
}

double gamma_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double exponential_logpdf(double x, double rate) { return std::log(rate) - rate * x; }

double normal_logpdf_zero_mean(double x, double precision) {
  return 0.5 * std::log(precision / (2.0 * std::numbers::pi)) - 0.5 * precision * x * x;
}

}  // namespace

GammaParams noise_posterior(const HmfModel& model, std::size_t dataset) {
  const DatasetSpec& d = model.datasets.at(dataset);
  const Matrix pred = reconstruct(model, d);
  const Matrix w = d.data.weights();
  const Matrix r = d.data.masked_values() - pred;
  double sq = 0.0;
  for (Index i = 0; i < r.rows(); ++i)
    sq += simd::weighted_sq(w.row(i).data(), r.row(i).data(), static_cast<std::size_t>(r.cols()));
  const auto observed = static_cast<double>(d.data.observed_count());
  return {model.hyper.alpha_tau + d.importance * observed / 2.0,
          model.hyper.beta_tau + d.importance * 0.5 * sq};
}

std::vector<GammaParams> ard_posterior(const HmfModel& model, std::size_t entity) {
  const IndexSets sets = derive_index_sets(model, entity);
  const EntityType& e = model.entity_types[entity];
  const bool nonneg = e.negativity == Negativity::nonnegative;
  const auto inst = static_cast<double>(e.instances);
  std::vector<GammaParams> out(static_cast<std::size_t>(e.factors));
  for (Index k = 0; k < e.factors; ++k) {
    GammaParams& g = out[static_cast<std::size_t>(k)];
    if (nonneg) {
      g.shape = model.hyper.alpha_0 + inst;
      g.rate = model.hyper.beta_0 + e.F.col(k).sum();
    } else {
      g.shape = model.hyper.alpha_0 + inst / 2.0;
      g.rate = model.hyper.beta_0 + 0.5 * e.F.col(k).squaredNorm();
    }
    for (std::size_t l : sets.v_plus) {
      const DatasetSpec& d = model.datasets[l];
      g.shape += static_cast<double>(d.feature_count);
      g.rate += d.private_factor.col(k).sum();
    }
    for (std::size_t l : sets.v_minus) {
      const DatasetSpec& d = model.datasets[l];
      g.shape += static_cast<double>(d.feature_count) / 2.0;
      g.rate += 0.5 * d.private_factor.col(k).squaredNorm();
    }
  }
  return out;
}

UnivariateParams shared_entry_posterior(const HmfModel& model, std::size_t entity, Index i, Index k) {
  HmfModel copy = model;
  const detail::FactorBlock b = detail::shared_block(copy, entity);
  return detail::entry_params(b, i, k);
}

MultivariateParams shared_row_posterior(const HmfModel& model, std::size_t entity, Index i) {
  HmfModel copy = model;
  const detail::FactorBlock b = detail::shared_block(copy, entity);
  return detail::row_params(b, i);
}

UnivariateParams private_entry_posterior(const HmfModel& model, std::size_t dataset, Index r, Index c) {
  HmfModel copy = model;
  if (copy.datasets.at(dataset).kind == DatasetKind::feature) {
    const detail::FactorBlock b = detail::feature_block(copy, dataset);
    return detail::entry_params(b, r, c);
  }
  const detail::MiddleBlock b = detail::middle_block(copy, dataset);
  return detail::middle_entry_params(b, r, c);
}

MultivariateParams private_row_posterior(const HmfModel& model, std::size_t dataset, Index r) {
  HmfModel copy = model;
  if (copy.datasets.at(dataset).kind == DatasetKind::feature) {
    const detail::FactorBlock b = detail::feature_block(copy, dataset);
    return detail::row_params(b, r);
  }
  detail::MiddleBlock b = detail::middle_block(copy, dataset);
  return detail::middle_row_params(b, r);
}

double update_noise(HmfModel& model, std::size_t dataset, RngStream& rng) {
  const GammaParams p = noise_posterior(model, dataset);
  const double tau = sample_gamma(p.shape, p.rate, rng);
  model.datasets[dataset].noise_precision = tau;
  return tau;
}

Vector update_ard(HmfModel& model, std::size_t entity, RngStream& rng) {
  EntityType& e = model.entity_types.at(entity);
  if (!model.hyper.ard) return e.lambda;
  const auto params = ard_posterior(model, entity);
  for (Index k = 0; k < e.factors; ++k) {
    const GammaParams& g = params[static_cast<std::size_t>(k)];
    e.lambda[k] = sample_gamma(g.shape, g.rate, rng);
  }
  return e.lambda;
}

const Matrix& update_shared_factor(HmfModel& model, std::size_t entity, DrawMode mode,
                                   RngStream& rng, Diagnostics* diag, unsigned threads) {
  EntityType& e = model.entity_types.at(entity);
  if (mode == DrawMode::rowwise && e.negativity == Negativity::nonnegative)
    throw ParameterError("row-wise draws need a real-valued block; entity '" + e.name +
                         "' is nonnegative");
  detail::FactorBlock b = detail::shared_block(model, entity);
  Counters ctr;
  resample_block(b, mode, rng, ctr, threads);
  flush(ctr, diag);
  return e.F;
}

const Matrix& update_private_factor(HmfModel& model, std::size_t dataset, DrawMode mode,
                                    RngStream& rng, Diagnostics* diag, unsigned threads) {
  DatasetSpec& d = model.datasets.at(dataset);
  if (mode == DrawMode::rowwise && d.private_prior == PriorKind::exponential)
    throw ParameterError("row-wise draws need a real-valued block; dataset '" + d.name +
                         "' has an exponential prior");
  Counters ctr;
  if (d.kind == DatasetKind::feature) {
    detail::FactorBlock b = detail::feature_block(model, dataset);
    resample_block(b, mode, rng, ctr, threads);
  } else {
    detail::MiddleBlock b = detail::middle_block(model, dataset);
    resample_middle(b, mode, rng, ctr);
  }
  flush(ctr, diag);
  return d.private_factor;
}

void sweep(HmfModel& model, DrawMode mode, RngStream& rng, const GibbsOptions& opts, Diagnostics* diag) {
  const std::uint64_t key = rng.engine()();
  auto block_rng = [&](std::uint64_t kind, std::size_t index) {
    return RngStream(rng.seed(), mix_keys(rng.stream_id(), key, kind, index));
  };

  // Noise precisions are independent of each other given everything else.
  for (std::size_t n = 0; n < model.datasets.size(); ++n)
    with_path(dataset_path(n) + ".noise_precision", [&] {
      RngStream r = block_rng(1, n);
      update_noise(model, n, r);
    });
  for (std::size_t t = 0; t < model.entity_types.size(); ++t)
    with_path(entity_path(t) + ".lambda", [&] {
      RngStream r = block_rng(2, t);
      update_ard(model, t, r);
    });
  for (std::size_t t = 0; t < model.entity_types.size(); ++t)
    with_path(entity_path(t) + ".F", [&] {
      const bool real = model.entity_types[t].negativity == Negativity::real;
      RngStream r = block_rng(3, t);
      update_shared_factor(model, t, real ? mode : DrawMode::elementwise, r, diag, opts.threads);
    });
  for (std::size_t n = 0; n < model.datasets.size(); ++n)
    with_path(dataset_path(n) + ".private_factor", [&] {
      const bool real = model.datasets[n].private_prior == PriorKind::gaussian;
      RngStream r = block_rng(4, n);
      update_private_factor(model, n, real ? mode : DrawMode::elementwise, r, diag, opts.threads);
    });

  if (diag != nullptr && opts.record_log_joint) diag->log_joint.push_back(log_joint(model));
}

PosteriorSummary run(HmfModel& model, DrawMode mode, const GibbsOptions& opts, Diagnostics* diag) {
  const auto violations = validate(model);
  if (!violations.empty())
    throw ConfigError(violations.front().path + ": " + violations.front().message);

  PosteriorSummary sum;
  for (const auto& e : model.entity_types) {
    sum.entity_means.push_back(Matrix::Zero(e.F.rows(), e.F.cols()));
    sum.lambda_means.push_back(Vector::Zero(e.lambda.size()));
  }
  for (const auto& d : model.datasets)
    sum.private_means.push_back(Matrix::Zero(d.private_factor.rows(), d.private_factor.cols()));
  sum.noise_means.assign(model.datasets.size(), 0.0);

  RngStream rng(model.schedule.seed, 0);
  for (std::size_t s = 1; s <= model.schedule.iterations; ++s) {
    sweep(model, mode, rng, opts, diag);
    if (!model.schedule.retains(s)) continue;
    ++sum.retained_draws;
    for (std::size_t t = 0; t < model.entity_types.size(); ++t) {
      sum.entity_means[t] += model.entity_types[t].F;
      sum.lambda_means[t] += model.entity_types[t].lambda;
    }
    for (std::size_t n = 0; n < model.datasets.size(); ++n) {
      sum.private_means[n] += model.datasets[n].private_factor;
      sum.noise_means[n] += model.datasets[n].noise_precision;
    }
  }
  const auto draws = static_cast<double>(sum.retained_draws);
  for (auto& m : sum.entity_means) m /= draws;
  for (auto& m : sum.lambda_means) m /= draws;
  for (auto& m : sum.private_means) m /= draws;
  for (auto& m : sum.noise_means) m /= draws;
  return sum;
}

double log_joint(const HmfModel& model) {
  double total = 0.0;
  const auto& h = model.hyper;
  for (const auto& e : model.entity_types) {
    for (Index k = 0; k < e.factors; ++k) {
      const double lam = e.lambda[k];
      for (Index i = 0; i < e.instances; ++i)
        total += e.negativity == Negativity::nonnegative ? exponential_logpdf(e.F(i, k), lam)
                                                          : normal_logpdf_zero_mean(e.F(i, k), lam);
      if (h.ard) total += gamma_logpdf(lam, h.alpha_0, h.beta_0);
    }
  }
  for (const auto& d : model.datasets) {
    total += gamma_logpdf(d.noise_precision, h.alpha_tau, h.beta_tau);
    const Matrix& pf = d.private_factor;
    for (Index r = 0; r < pf.rows(); ++r)
      for (Index c = 0; c < pf.cols(); ++c) {
        if (d.cp_constrained && r != c) continue;
        const double lam = d.kind == DatasetKind::feature ? model.row_entity(d).lambda[c] : d.private_lambda;
        total += d.private_prior == PriorKind::exponential ? exponential_logpdf(pf(r, c), lam)
                                                           : normal_logpdf_zero_mean(pf(r, c), lam);
      }
    if (d.importance == 0.0) continue;
    const Matrix pred = reconstruct(model, d);
    const double tau = d.noise_precision;
    const double norm = 0.5 * std::log(tau / (2.0 * std::numbers::pi));
    double ll = 0.0;
    for (Index i = 0; i < pred.rows(); ++i)
      for (Index j = 0; j < pred.cols(); ++j)
        if (d.data.observed(i, j)) {
          const double r = d.data.values(i, j) - pred(i, j);
          ll += norm - 0.5 * tau * r * r;
        }
    total += d.importance * ll;
  }
  return total;
}

HmfModel apply_summary(const HmfModel& model, const PosteriorSummary& summary) {
  HmfModel out = model;
  for (std::size_t t = 0; t < out.entity_types.size(); ++t) {
    out.entity_types[t].F = summary.entity_means.at(t);
    out.entity_types[t].lambda = summary.lambda_means.at(t);
  }
  for (std::size_t n = 0; n < out.datasets.size(); ++n) {
    out.datasets[n].private_factor = summary.private_means.at(n);
    out.datasets[n].noise_precision = summary.noise_means.at(n);
  }
  return out;
}

}  // namespace hmf
