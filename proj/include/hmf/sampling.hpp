#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace hmf {

// A seeded random stream. Two streams built from the same (seed, stream_id)
// produce the same sequence; distinct stream ids give decorrelated engines.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::mt19937_64& engine() { return engine_; }

  // Uniform on [0, 1).
  double uniform();
  double standard_normal();

  // Child stream whose id mixes this stream's id with `key`.
  RngStream derive(std::uint64_t key) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// Mixes several 64-bit keys into one stream id (splitmix64 finaliser chain).
std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b);
std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c);
std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d);

struct TruncatedNormalParams {
  double mu;
  double tau;  // precision
};

// Draw from N(mu, 1/tau) truncated to [0, inf). Standard-normal rejection when
// mu*sqrt(tau) > -1, otherwise an exponential-proposal tail sampler.
double sample_truncated_normal(TruncatedNormalParams params, RngStream& rng);

// Gamma with rate parameterisation: mean shape / rate.
double sample_gamma(double shape, double rate, RngStream& rng);

// Normal with precision parameterisation: variance 1 / tau.
double sample_normal(double mu, double tau, RngStream& rng);

double sample_exponential(double rate, RngStream& rng);

double sample_uniform(double lo, double hi, RngStream& rng);

// Draw from N(mean, covariance). The covariance is factorised with additive
// diagonal jitter starting at 1e-10 * trace / K and doubling at most 8 times;
// NumericalError (with a minimum-eigenvalue estimate) if that still fails.
Eigen::VectorXd sample_multivariate_normal(const Eigen::VectorXd& mean,
                                           const Eigen::MatrixXd& covariance, RngStream& rng);

// Lower Cholesky factor of a symmetric matrix under the jitter policy above.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& m);

// Analytic moments used by tests and diagnostics.
double truncated_normal_mean(double mu, double tau);
double truncated_normal_variance(double mu, double tau);

}  // namespace hmf
