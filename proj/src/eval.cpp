#include "hmf/eval.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "hmf/error.hpp"
#include "parallel.ipp"

namespace hmf {
namespace {

void check_cells(const DatasetSpec& d, const std::vector<Cell>& cells) {
  for (const Cell& c : cells)
    if (c.row < 0 || c.col < 0 || c.row >= d.data.rows() || c.col >= d.data.cols())
      throw DataError("cell (" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                      ") is outside dataset '" + d.name + "' (" + std::to_string(d.data.rows()) +
                      "x" + std::to_string(d.data.cols()) + ")");
}

std::vector<double> predict_from(const Matrix& f, const Matrix& priv, const Matrix* g,
                                 const std::vector<Cell>& cells) {
  std::vector<double> out;
  out.reserve(cells.size());
  for (const Cell& c : cells) {
    if (g == nullptr) {
      out.push_back(f.row(c.row).dot(priv.row(c.col)));
    } else {
      out.push_back((f.row(c.row) * priv).dot(g->row(c.col)));
    }
  }
  return out;
}

void shuffle(std::vector<std::size_t>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    if (j >= i) j = i - 1;
    std::swap(v[i - 1], v[j]);
  }
}

constexpr std::uint64_t kFoldStream = 0xf01d;
constexpr std::uint64_t kSplitStream = 0x5b1;
constexpr std::uint64_t kNmfStream = 0x4e4d46;

// Train on `train` and score on `test` against the original values.
double fit_and_score(const HmfModel& model, std::size_t dataset, const Mask& train,
                     const std::vector<Cell>& test, std::uint64_t seed, const EvalOptions& opts,
                     const std::string& label) {
  HmfModel m = model;
  m.datasets[dataset].data.mask = train;
  m.schedule.seed = seed;
  PosteriorSummary s;
  try {
    s = fit(m, opts.strategy, opts.draw_mode, GibbsOptions{1, false});
  } catch (const ConfigError& e) {
    throw ConfigError(label + ": " + e.what());
  }
  const std::vector<double> pred = predict(m, s, dataset, test);
  std::vector<double> actual;
  actual.reserve(test.size());
  for (const Cell& c : test) actual.push_back(model.datasets[dataset].data.values(c.row, c.col));
  return mse(pred, actual);
}

}  // namespace

PosteriorSummary fit(HmfModel& model, const InitStrategy& strategy, DrawMode mode,
                     const GibbsOptions& gibbs, Diagnostics* diag) {
  const auto violations = validate(model);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw ConfigError(v.path + ": " + v.rule + ": " + v.message);
  }
  RngStream init_rng(model.schedule.seed, 1);
  initialise(model, strategy, init_rng);
  return run(model, mode, gibbs, diag);
}

std::vector<double> predict(const HmfModel& model, const PosteriorSummary& summary,
                            std::size_t dataset, const std::vector<Cell>& cells) {
  const DatasetSpec& d = model.datasets.at(dataset);
  check_cells(d, cells);
  const Matrix& f = summary.entity_means.at(d.row_entity);
  const Matrix& priv = summary.private_means.at(dataset);
  if (d.kind == DatasetKind::feature) return predict_from(f, priv, nullptr, cells);
  const std::size_t col = d.kind == DatasetKind::main ? d.col_entity : d.row_entity;
  return predict_from(f, priv, &summary.entity_means.at(col), cells);
}

std::vector<double> predict(const HmfModel& model, std::size_t dataset,
                            const std::vector<Cell>& cells) {
  const DatasetSpec& d = model.datasets.at(dataset);
  check_cells(d, cells);
  const Matrix& f = model.row_entity(d).F;
  if (d.kind == DatasetKind::feature) return predict_from(f, d.private_factor, nullptr, cells);
  return predict_from(f, d.private_factor, &model.col_entity(d).F, cells);
}

double mse(const std::vector<double>& predicted, const std::vector<double>& actual) {
  if (predicted.empty() || predicted.size() != actual.size())
    throw DataError("mse needs two equal-length non-empty series (got " +
                    std::to_string(predicted.size()) + " and " + std::to_string(actual.size()) +
                    ")");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    s += d * d;
  }
  return s / static_cast<double>(predicted.size());
}

std::vector<Cell> observed_cells(const ObservedMatrix& m) {
  std::vector<Cell> out;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (m.observed(i, j)) out.push_back({i, j});
  return out;
}

std::vector<Cell> unobserved_cells(const ObservedMatrix& m) {
  std::vector<Cell> out;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (!m.observed(i, j)) out.push_back({i, j});
  return out;
}

std::vector<Cell> FoldPlan::held_out(const ObservedMatrix& data, std::size_t f) const {
  std::vector<Cell> out;
  if (mode == FoldMode::in_matrix) {
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (assignment[c] == f) out.push_back(cells[c]);
    return out;
  }
  for (Index i = 0; i < data.rows(); ++i) {
    if (assignment[static_cast<std::size_t>(i)] != f) continue;
    for (Index j = 0; j < data.cols(); ++j)
      if (data.observed(i, j)) out.push_back({i, j});
  }
  return out;
}

FoldPlan make_folds(const DatasetSpec& dataset, FoldMode mode, std::size_t folds,
                    std::uint64_t seed) {
  if (folds < 1) throw ConfigError("fold count must be at least 1");
  FoldPlan plan;
  plan.mode = mode;
  plan.folds = folds;
  plan.seed = seed;
  std::size_t units = 0;
  if (mode == FoldMode::in_matrix) {
    plan.cells = observed_cells(dataset.data);
    units = plan.cells.size();
    if (units < folds)
      throw DataError("dataset '" + dataset.name + "' has " + std::to_string(units) +
                      " observed cells, fewer than " + std::to_string(folds) + " folds");
  } else {
    units = static_cast<std::size_t>(dataset.data.rows());
    if (units < folds)
      throw DataError("dataset '" + dataset.name + "' has " + std::to_string(units) +
                      " rows, fewer than " + std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(units);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed, kFoldStream);
  shuffle(order, rng);
  plan.assignment.assign(units, 0);
  for (std::size_t p = 0; p < units; ++p) plan.assignment[order[p]] = p % folds;
  return plan;
}

ExperimentResult cross_validate(const HmfModel& model, std::size_t dataset, const FoldPlan& plan,
                                const EvalOptions& opts) {
  const DatasetSpec& target = model.datasets.at(dataset);
  const std::size_t expected = plan.mode == FoldMode::in_matrix
                                   ? target.data.observed_count()
                                   : static_cast<std::size_t>(target.data.rows());
  if (plan.assignment.size() != expected)
    throw ConfigError("fold plan does not match dataset '" + target.name + "'");

  ExperimentResult res;
  res.fold_mse.assign(plan.folds, 0.0);
  detail::parallel_for(plan.folds, opts.threads, [&](std::size_t f) {
    const std::vector<Cell> test = plan.held_out(target.data, f);
    const std::string label = "fold " + std::to_string(f);
    if (test.empty()) throw DataError(label + " holds out no observed cells");
    Mask train = target.data.mask;
    for (const Cell& c : test) train(c.row, c.col) = 0;
    res.fold_mse[f] = fit_and_score(model, dataset, train, test,
                                    mix_keys(model.schedule.seed, kFoldStream, f), opts, label);
  });
  res.mean_mse = std::accumulate(res.fold_mse.begin(), res.fold_mse.end(), 0.0) /
                 static_cast<double>(res.fold_mse.size());
  return res;
}

Split random_split(const ObservedMatrix& data, double fraction, RngStream& rng, int max_attempts) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("missing fraction must lie strictly between 0 and 1");
  const std::vector<Cell> cells = observed_cells(data);
  const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cells.size())));
  if (n_test == 0 || n_test >= cells.size())
    throw DataError("fraction " + std::to_string(fraction) + " of " +
                    std::to_string(cells.size()) + " observed cells leaves no test or no training set");
  std::vector<std::size_t> order(cells.size());
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    Split s;
    s.train = data.mask;
    for (std::size_t p = 0; p < n_test; ++p) {
      const Cell& c = cells[order[p]];
      s.train(c.row, c.col) = 0;
    }
    bool ok = true;
    for (Index i = 0; ok && i < data.rows(); ++i)
      if (data.mask.row(i).any() && !s.train.row(i).any()) ok = false;
    for (Index j = 0; ok && j < data.cols(); ++j)
      if (data.mask.col(j).any() && !s.train.col(j).any()) ok = false;
    if (!ok) continue;
    for (Index i = 0; i < data.rows(); ++i)
      for (Index j = 0; j < data.cols(); ++j)
        if (data.observed(i, j) && s.train(i, j) == 0) s.test.push_back({i, j});
    return s;
  }
  throw DataError("could not hold out a fraction " + std::to_string(fraction) +
                  " while keeping every row and column observed after " +
                  std::to_string(max_attempts) + " attempts");
}

ExperimentResult sparsity_experiment(const HmfModel& model, std::size_t dataset,
                                     const std::vector<double>& fractions, std::size_t repeats,
                                     const EvalOptions& opts) {
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (fractions.empty()) throw ConfigError("no missing fractions given");
  for (double f : fractions)
    if (!(f > 0.0 && f < 1.0))
      throw ConfigError("missing fraction " + std::to_string(f) + " is not in (0, 1)");
  const DatasetSpec& target = model.datasets.at(dataset);

  // Splits are drawn up front so that failures surface before any sampling.
  std::vector<Split> splits;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi)
    for (std::size_t r = 0; r < repeats; ++r) {
      RngStream rng(model.schedule.seed, mix_keys(kSplitStream, fi, r));
      splits.push_back(random_split(target.data, fractions[fi], rng));
    }

  std::vector<double> scores(splits.size(), 0.0);
  detail::parallel_for(splits.size(), opts.threads, [&](std::size_t u) {
    scores[u] = fit_and_score(model, dataset, splits[u].train, splits[u].test,
                              mix_keys(model.schedule.seed, kSplitStream, u), opts,
                              "fraction " + std::to_string(fractions[u / repeats]) + " repeat " +
                                  std::to_string(u % repeats));
  });

  ExperimentResult res;
  res.fold_mse = scores;
  res.mean_mse = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    double mean = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) mean += scores[fi * repeats + r];
    mean /= static_cast<double>(repeats);
    double ss = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      const double d = scores[fi * repeats + r] - mean;
      ss += d * d;
    }
    const double sd = repeats > 1 ? std::sqrt(ss / static_cast<double>(repeats - 1)) : 0.0;
    res.series.push_back({fractions[fi], mean, sd});
  }
  return res;
}

double masked_squared_error(const ObservedMatrix& data, const Matrix& approx) {
  double s = 0.0;
  for (Index i = 0; i < data.rows(); ++i)
    for (Index j = 0; j < data.cols(); ++j)
      if (data.observed(i, j)) {
        const double d = data.values(i, j) - approx(i, j);
        s += d * d;
      }
  return s;
}

NmfResult np_nmf_baseline(const ObservedMatrix& data, Index k, std::size_t iterations,
                          std::uint64_t seed) {
  if (k < 1) throw ConfigError("NMF rank must be at least 1");
  for (Index i = 0; i < data.rows(); ++i)
    for (Index j = 0; j < data.cols(); ++j)
      if (data.observed(i, j) && !(data.values(i, j) >= 0.0))
        throw DataError("NMF needs nonnegative data; cell (" + std::to_string(i) + ", " +
                        std::to_string(j) + ") is " + std::to_string(data.values(i, j)));
  constexpr double kFloor = 1e-12;
  RngStream rng(seed, kNmfStream);
  NmfResult r;
  r.F.resize(data.rows(), k);
  r.G.resize(data.cols(), k);
  for (Index i = 0; i < r.F.size(); ++i) r.F.data()[i] = rng.uniform();
  for (Index i = 0; i < r.G.size(); ++i) r.G.data()[i] = rng.uniform();

  const Matrix w = data.weights();
  const Matrix md = data.masked_values();
  const Matrix mdt = md.transpose();
  // A zero denominator means no observed cell touches the entry; it keeps its
  // value rather than collapsing to zero.
  auto step = [&](Matrix& x, const Matrix& num, const Matrix& den) {
    for (Index i = 0; i < x.size(); ++i) {
      const double d = den.data()[i];
      if (d > 0.0) x.data()[i] *= num.data()[i] / std::max(d, kFloor);
    }
  };
  r.objective.reserve(iterations);
  for (std::size_t it = 0; it < iterations; ++it) {
    Matrix approx = (r.F * r.G.transpose()).cwiseProduct(w);
    step(r.F, md * r.G, approx * r.G);
    approx = (r.F * r.G.transpose()).cwiseProduct(w);
    step(r.G, mdt * r.F, approx.transpose() * r.F);
    r.objective.push_back(masked_squared_error(data, r.F * r.G.transpose()));
  }
  return r;
}

}  // namespace hmf
