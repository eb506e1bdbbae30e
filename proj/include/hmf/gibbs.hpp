#pragma once

#include <cstddef>
#include <vector>

#include "hmf/datamodel.hpp"
#include "hmf/sampling.hpp"

namespace hmf {

// Row-wise draws use the multivariate Gaussian conditional and are only legal
// for real-valued blocks. In a sweep, nonnegative blocks always fall back to
// element-wise truncated-normal draws.
enum class DrawMode { elementwise, rowwise };

const char* to_string(DrawMode m);

struct GammaParams {
  double shape;
  double rate;
};

// Conditional of one factor entry. For exponential-prior blocks this is
// TN(mu, tau); for Gaussian-prior blocks N(mu, 1/tau). An exponential entry
// that no data touches has tau = 0 and mu = 0 and is drawn from its prior.
struct UnivariateParams {
  double mu;
  double tau;
};

struct MultivariateParams {
  Vector mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd precision;
  Vector linear;  // precision * mean
};

// Posterior parameters computed from the current state without drawing.
// These are what the update operations sample from.
GammaParams noise_posterior(const HmfModel& model, std::size_t dataset);
std::vector<GammaParams> ard_posterior(const HmfModel& model, std::size_t entity);
UnivariateParams shared_entry_posterior(const HmfModel& model, std::size_t entity, Index i,
                                        Index k);
MultivariateParams shared_row_posterior(const HmfModel& model, std::size_t entity, Index i);
// (r, c) indexes the private factor: (j, k) of G or (k, l) of S.
UnivariateParams private_entry_posterior(const HmfModel& model, std::size_t dataset, Index r,
                                         Index c);
// Row j of G or row k of S.
MultivariateParams private_row_posterior(const HmfModel& model, std::size_t dataset, Index r);

struct GibbsOptions {
  unsigned threads = 1;
  bool record_log_joint = true;
};

struct Diagnostics {
  std::vector<double> log_joint;
  // Posterior precisions raised to the 1e-14 floor.
  std::size_t clamp_events = 0;
  // Exponential entries with no data touching them, drawn from the prior.
  std::size_t prior_fallbacks = 0;
};

struct PosteriorSummary {
  std::vector<Matrix> entity_means;   // per entity type, mean of F^t
  std::vector<Vector> lambda_means;   // per entity type
  std::vector<Matrix> private_means;  // per dataset, mean of S / G
  std::vector<double> noise_means;    // per dataset
  std::size_t retained_draws = 0;
};

// Individual updates. Each writes the new values into `model` and returns
// them. The rng is advanced; per-row child streams are derived from it, so
// results do not depend on `threads`.
double update_noise(HmfModel& model, std::size_t dataset, RngStream& rng);
Vector update_ard(HmfModel& model, std::size_t entity, RngStream& rng);
const Matrix& update_private_factor(HmfModel& model, std::size_t dataset, DrawMode mode,
                                    RngStream& rng, Diagnostics* diag = nullptr,
                                    unsigned threads = 1);
const Matrix& update_shared_factor(HmfModel& model, std::size_t entity, DrawMode mode,
                                   RngStream& rng, Diagnostics* diag = nullptr,
                                   unsigned threads = 1);

// One full Gibbs scan: noise precisions, ARD vectors, shared factors in
// entity order, then private factors in dataset order.
void sweep(HmfModel& model, DrawMode mode, RngStream& rng, const GibbsOptions& opts = {},
           Diagnostics* diag = nullptr);

// schedule.iterations sweeps from the current (initialised) state, averaging
// the retained draws.
PosteriorSummary run(HmfModel& model, DrawMode mode, const GibbsOptions& opts = {},
                     Diagnostics* diag = nullptr);

// Importance-weighted log joint density of the current state.
double log_joint(const HmfModel& model);

// State with every factor and noise precision replaced by its posterior mean.
HmfModel apply_summary(const HmfModel& model, const PosteriorSummary& summary);

}  // namespace hmf
