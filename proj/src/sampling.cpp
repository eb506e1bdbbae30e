#include "hmf/sampling.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hmf/error.hpp"

namespace hmf {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hazard of the standard normal at a: phi(a) / (1 - Phi(a)).
double normal_hazard(double a) {
  if (a < 25.0) {
    const double phi = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
    const double tail = 0.5 * std::erfc(a / std::numbers::sqrt2);
    return phi / tail;
  }
  // Continued fraction for the Mills ratio, evaluated backwards.
  double frac = a;
  for (int n = 60; n >= 1; --n) frac = a + n / frac;
  return frac;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(splitmix64(seed ^ splitmix64(stream_id))) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  std::normal_distribution<double> d;
  return d(engine_);
}

RngStream RngStream::derive(std::uint64_t key) const {
  return RngStream(seed_, mix_keys(stream_id_, key));
}

std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x632be59bd9b4e019ULL));
}
std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_keys(mix_keys(a, b), c);
}
std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return mix_keys(mix_keys(a, b, c), d);
}

double sample_truncated_normal(TruncatedNormalParams params, RngStream& rng) {
  const double mu = params.mu, tau = params.tau;
  if (!std::isfinite(tau) || tau <= 0.0) {
    std::ostringstream os;
    os << "truncated normal precision must be positive and finite, got " << tau;
    throw ParameterError(os.str());
  }
  if (!std::isfinite(mu)) throw ParameterError("truncated normal location must be finite");

  const double sd = 1.0 / std::sqrt(tau);
  // Lower truncation point in standard units.
  const double a = -mu * std::sqrt(tau);
  if (a < 1.0) {
    for (;;) {
      const double z = rng.standard_normal();
      if (z >= a) return std::max(0.0, mu + z * sd);
    }
  }
  // Exponential proposal on the excess over a, with the optimal rate.
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double excess = -std::log1p(-rng.uniform()) / lambda;
    const double z = a + excess;
    const double d = z - lambda;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return excess * sd;
  }
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    std::ostringstream os;
    os << "gamma parameters must be positive, got shape=" << shape << " rate=" << rate;
    throw ParameterError(os.str());
  }
  std::gamma_distribution<double> d(shape, 1.0 / rate);
  return d(rng.engine());
}

double sample_normal(double mu, double tau, RngStream& rng) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    std::ostringstream os;
    os << "normal precision must be positive, got " << tau;
    throw ParameterError(os.str());
  }
  return mu + rng.standard_normal() / std::sqrt(tau);
}

double sample_exponential(double rate, RngStream& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ParameterError("exponential rate must be positive");
  return -std::log1p(-rng.uniform()) / rate;
}

double sample_uniform(double lo, double hi, RngStream& rng) { return lo + (hi - lo) * rng.uniform(); }

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& m) {
  const Eigen::Index k = m.rows();
  if (k == 0 || m.cols() != k) throw NumericalError("covariance must be a non-empty square matrix");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  double jitter = 1e-10 * std::abs(m.trace()) / static_cast<double>(k);
  if (!(jitter > 0.0)) jitter = 1e-10;
  for (int attempt = 0; attempt <= 8; ++attempt) {
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter *= 2.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  std::ostringstream os;
  os << "covariance not positive-definite after jitter; minimum eigenvalue estimate "
     << (es.info() == Eigen::Success ? es.eigenvalues().minCoeff() : std::nan(""));
  throw NumericalError(os.str());
}

Eigen::VectorXd sample_multivariate_normal(const Eigen::VectorXd& mean,
                                           const Eigen::MatrixXd& covariance, RngStream& rng) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
    throw ParameterError("multivariate normal: mean/covariance size mismatch");
  const Eigen::MatrixXd l = jittered_cholesky(covariance);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.standard_normal();
  return mean + l * z;
}

double truncated_normal_mean(double mu, double tau) {
  const double sd = 1.0 / std::sqrt(tau);
  return mu + sd * normal_hazard(-mu * std::sqrt(tau));
}

double truncated_normal_variance(double mu, double tau) {
  const double a = -mu * std::sqrt(tau);
  const double h = normal_hazard(a);
  return (1.0 + a * h - h * h) / tau;
}

}  // namespace hmf
