#pragma once

#include <cstdint>
#include <vector>

#include "hmf/datamodel.hpp"
#include "hmf/gibbs.hpp"
#include "hmf/init.hpp"

namespace hmf {

struct Cell {
  Index row;
  Index col;
  bool operator==(const Cell&) const = default;
};

// Reconstruction of each cell from the posterior-mean factors. DataError when
// a cell is out of bounds.
std::vector<double> predict(const HmfModel& model, const PosteriorSummary& summary,
                            std::size_t dataset, const std::vector<Cell>& cells);
// Same, from the factors currently stored in the model.
std::vector<double> predict(const HmfModel& model, std::size_t dataset,
                            const std::vector<Cell>& cells);

double mse(const std::vector<double>& predicted, const std::vector<double>& actual);

std::vector<Cell> observed_cells(const ObservedMatrix& m);    // row-major order
std::vector<Cell> unobserved_cells(const ObservedMatrix& m);

enum class FoldMode { in_matrix, out_of_matrix };

struct FoldPlan {
  FoldMode mode = FoldMode::in_matrix;
  std::size_t folds = 0;
  // in_matrix: the observed cells and a fold per cell.
  // out_of_matrix: cells is empty and there is a fold per row.
  std::vector<Cell> cells;
  std::vector<std::size_t> assignment;
  std::uint64_t seed = 0;

  // Cells held out by fold f, in row-major order.
  std::vector<Cell> held_out(const ObservedMatrix& data, std::size_t f) const;
};

FoldPlan make_folds(const DatasetSpec& dataset, FoldMode mode, std::size_t folds,
                    std::uint64_t seed);

struct SeriesPoint {
  double fraction;
  double mean_mse;
  double sd;
};

struct ExperimentResult {
  std::vector<double> fold_mse;
  double mean_mse = 0.0;
  std::vector<SeriesPoint> series;  // sparsity experiments only
};

struct EvalOptions {
  InitStrategy strategy;
  DrawMode draw_mode = DrawMode::elementwise;
  // Folds and repeats run concurrently; each sampler run is single-threaded,
  // so results do not depend on this.
  unsigned threads = 1;
};

// Validate (ConfigError on the first violation), initialise from
// (schedule.seed, 1) and run the sampler.
PosteriorSummary fit(HmfModel& model, const InitStrategy& strategy, DrawMode mode,
                     const GibbsOptions& gibbs = {}, Diagnostics* diag = nullptr);

// Re-initialises and re-runs the sampler per fold with the held-out cells (or
// rows) of the target masked. Fold f seeds from (schedule.seed, f).
ExperimentResult cross_validate(const HmfModel& model, std::size_t dataset, const FoldPlan& plan,
                                const EvalOptions& opts = {});

struct Split {
  Mask train;
  std::vector<Cell> test;
};

// Holds out round(fraction * observed) cells while keeping at least one
// training entry in every row and column; resamples up to `max_attempts`
// times and throws DataError if that fails.
Split random_split(const ObservedMatrix& data, double fraction, RngStream& rng,
                   int max_attempts = 100);

ExperimentResult sparsity_experiment(const HmfModel& model, std::size_t dataset,
                                     const std::vector<double>& fractions, std::size_t repeats,
                                     const EvalOptions& opts = {});

struct NmfResult {
  Matrix F;  // rows x K
  Matrix G;  // cols x K
  std::vector<double> objective;  // masked squared error after each iteration
};

// Mask-aware Lee-Seung multiplicative updates from Uniform(0, 1) factors.
NmfResult np_nmf_baseline(const ObservedMatrix& data, Index k, std::size_t iterations,
                          std::uint64_t seed);

double masked_squared_error(const ObservedMatrix& data, const Matrix& approx);

}  // namespace hmf
