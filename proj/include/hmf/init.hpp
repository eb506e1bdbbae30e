#pragma once

#include <string_view>

#include "hmf/datamodel.hpp"
#include "hmf/sampling.hpp"

namespace hmf {

enum class SharedInit { expectation, random, kmeans };
enum class PrivateInit { expectation, random, leastsquares };

// ARD vectors and noise precisions always start at their prior expectation.
struct InitStrategy {
  SharedInit shared = SharedInit::kmeans;
  PrivateInit private_ = PrivateInit::leastsquares;
};

SharedInit parse_shared_init(std::string_view s);    // ConfigError on unknown names
PrivateInit parse_private_init(std::string_view s);
const char* to_string(SharedInit s);
const char* to_string(PrivateInit p);

inline constexpr double kKmeansOffset = 0.2;
inline constexpr double kExpectationJitter = 1e-4;
inline constexpr double kLeastSquaresFloor = 1e-6;

// lambda^t = alpha_0 / beta_0 and tau = alpha_tau / beta_tau everywhere.
void init_hyper_expectation(HmfModel& model);

// Every factor at its prior mean: 1/lambda for exponential entries, a
// Uniform(-1e-4, 1e-4) perturbation of 0 for Gaussian ones.
void init_expectation(HmfModel& model, RngStream& rng);
void init_expectation(HmfModel& model);  // rng from schedule.seed

// Every factor drawn once from its prior given the expected lambdas.
void init_random(HmfModel& model, RngStream& rng);

// F^t(i, k) = [row i in cluster k] + 0.2, clustering the concatenated rows
// of every dataset that touches the entity (missing cells mean-imputed for
// the clustering only). ConfigError when the entity has no linked data.
void init_kmeans(HmfModel& model, std::size_t entity, RngStream& rng);

// Pseudo-inverse fit of S^n, G^l or S^m against the current shared factors,
// with missing cells replaced by the matrix mean for this computation only.
// Exponential-prior blocks are floored at 1e-6.
void init_least_squares(HmfModel& model, std::size_t dataset);

void initialise(HmfModel& model, const InitStrategy& strategy, RngStream& rng);

// Plain Lloyd's k-means, exposed for tests. Returns the cluster of each row.
std::vector<Index> kmeans_assign(const Matrix& rows, Index clusters, RngStream& rng,
                                 int max_iterations = 100);

}  // namespace hmf
