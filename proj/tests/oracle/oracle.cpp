#include "oracle.hpp"

#include <cmath>

namespace oracle {

namespace {

const double kPi = 3.14159265358979323846;

const Mat& col_factor(const Model& m, const Dataset& d) {
  return d.kind == Kind::R ? m.entities[d.u].F : m.entities[d.t].F;
}

// F_i S G_j^T (or F_i G_j^T) summed term by term.
double recon(const Model& m, const Dataset& d, int i, int j) {
  const Mat& f = m.entities[d.t].F;
  double s = 0.0;
  if (d.kind == Kind::D) {
    for (int k = 0; k < f.cols(); ++k) s += f(i, k) * d.P(j, k);
    return s;
  }
  const Mat& g = col_factor(m, d);
  for (int a = 0; a < d.P.rows(); ++a)
    for (int b = 0; b < d.P.cols(); ++b) s += f(i, a) * d.P(a, b) * g(j, b);
  return s;
}

Uni finish(double tau, double lin, double lambda, bool exp_prior) {
  if (exp_prior) return {(lin - lambda) / tau, tau};
  return {lin / (tau + lambda), tau + lambda};
}

Multi finish(Mat precision, Vec linear) {
  Multi out;
  out.covariance = precision.inverse();
  out.mean = out.covariance * linear;
  out.precision = std::move(precision);
  out.linear = std::move(linear);
  return out;
}

// Coefficient vector c (over k) with x ~ F_i . c + 0 for the shared entry
// F^t_i, for one observation of dataset d in which row i of entity t
// appears. `as_row` says whether i is the observation's row index.
Vec shared_coefficients(const Model& m, const Dataset& d, int t, const Entry& e, bool as_row) {
  const int kk = static_cast<int>(m.entities[t].F.cols());
  Vec c = Vec::Zero(kk);
  if (d.kind == Kind::D) {
    for (int k = 0; k < kk; ++k) c[k] = d.P(e.j, k);
    return c;
  }
  if (as_row) {
    const Mat& g = col_factor(m, d);
    for (int k = 0; k < kk; ++k)
      for (int l = 0; l < d.P.cols(); ++l) c[k] += d.P(k, l) * g(e.j, l);
  } else {
    const Mat& f = m.entities[d.t].F;
    for (int k = 0; k < kk; ++k)
      for (int a = 0; a < d.P.rows(); ++a) c[k] += f(e.i, a) * d.P(a, k);
  }
  return c;
}

template <typename Fn>
void for_each_shared_term(const Model& m, int t, int i, Fn&& fn) {
  for (const Dataset& d : m.datasets) {
    for (const Entry& e : d.entries) {
      if (d.t == t && e.i == i) fn(d, e, shared_coefficients(m, d, t, e, true));
      const bool col_side = (d.kind == Kind::R && d.u == t) || (d.kind == Kind::C && d.t == t);
      if (col_side && e.j == i) fn(d, e, shared_coefficients(m, d, t, e, false));
    }
  }
}

}  // namespace

Model from_hmf(const hmf::HmfModel& hm, int replicate) {
  Model m;
  m.alpha_tau = hm.hyper.alpha_tau;
  m.beta_tau = hm.hyper.beta_tau;
  m.alpha0 = hm.hyper.alpha_0;
  m.beta0 = hm.hyper.beta_0;
  for (const auto& e : hm.entity_types)
    m.entities.push_back({Mat(e.F), Vec(e.lambda), e.negativity == hmf::Negativity::nonnegative});
  for (const auto& d : hm.datasets) {
    Dataset o;
    o.kind = d.kind == hmf::DatasetKind::main ? Kind::R
             : d.kind == hmf::DatasetKind::feature ? Kind::D
                                                   : Kind::C;
    o.t = static_cast<int>(d.row_entity);
    o.u = d.kind == hmf::DatasetKind::main ? static_cast<int>(d.col_entity) : -1;
    for (int i = 0; i < d.data.rows(); ++i)
      for (int j = 0; j < d.data.cols(); ++j)
        if (d.data.mask(i, j) != 0)
          for (int r = 0; r < replicate; ++r) o.entries.push_back({i, j, d.data.values(i, j)});
    o.alpha = d.importance / replicate;
    o.tau = d.noise_precision;
    o.exp_prior = d.private_prior == hmf::PriorKind::exponential;
    o.lambda_s = d.private_lambda;
    o.P = Mat(d.private_factor);
    o.cp = d.cp_constrained;
    m.datasets.push_back(std::move(o));
  }
  return m;
}

Gamma noise(const Model& m, int n) {
  const Dataset& d = m.datasets[n];
  double ss = 0.0;
  for (const Entry& e : d.entries) {
    const double r = e.x - recon(m, d, e.i, e.j);
    ss += r * r;
  }
  return {m.alpha_tau + d.alpha * static_cast<double>(d.entries.size()) / 2.0,
          m.beta_tau + d.alpha * ss / 2.0};
}

Gamma ard(const Model& m, int t, int k) {
  const Entity& ent = m.entities[t];
  Gamma g{m.alpha0, m.beta0};
  for (int i = 0; i < ent.F.rows(); ++i) {
    if (ent.nonneg) {
      g.shape += 1.0;
      g.rate += ent.F(i, k);
    } else {
      g.shape += 0.5;
      g.rate += 0.5 * ent.F(i, k) * ent.F(i, k);
    }
  }
  for (const Dataset& d : m.datasets) {
    if (d.kind != Kind::D || d.t != t) continue;
    for (int j = 0; j < d.P.rows(); ++j) {
      if (d.exp_prior) {
        g.shape += 1.0;
        g.rate += d.P(j, k);
      } else {
        g.shape += 0.5;
        g.rate += 0.5 * d.P(j, k) * d.P(j, k);
      }
    }
  }
  return g;
}

Uni shared_entry(const Model& m, int t, int i, int k) {
  const Entity& ent = m.entities[t];
  double tau = 0.0, lin = 0.0;
  for_each_shared_term(m, t, i, [&](const Dataset& d, const Entry& e, const Vec& c) {
    double rest = 0.0;
    for (int k2 = 0; k2 < c.size(); ++k2)
      if (k2 != k) rest += ent.F(i, k2) * c[k2];
    tau += d.tau * d.alpha * c[k] * c[k];
    lin += d.tau * d.alpha * (e.x - rest) * c[k];
  });
  return finish(tau, lin, ent.lambda[k], ent.nonneg);
}

Multi shared_row(const Model& m, int t, int i) {
  const Entity& ent = m.entities[t];
  const int kk = static_cast<int>(ent.F.cols());
  Mat prec = Mat::Zero(kk, kk);
  for (int k = 0; k < kk; ++k) prec(k, k) = ent.lambda[k];
  Vec lin = Vec::Zero(kk);
  for_each_shared_term(m, t, i, [&](const Dataset& d, const Entry& e, const Vec& c) {
    for (int a = 0; a < kk; ++a) {
      lin[a] += d.tau * d.alpha * e.x * c[a];
      for (int b = 0; b < kk; ++b) prec(a, b) += d.tau * d.alpha * c[a] * c[b];
    }
  });
  return finish(prec, lin);
}

Uni private_entry(const Model& m, int n, int r, int c) {
  const Dataset& d = m.datasets[n];
  const Mat& f = m.entities[d.t].F;
  double tau = 0.0, lin = 0.0;
  if (d.kind == Kind::D) {
    for (const Entry& e : d.entries) {
      if (e.j != r) continue;
      double rest = 0.0;
      for (int k = 0; k < f.cols(); ++k)
        if (k != c) rest += f(e.i, k) * d.P(r, k);
      tau += d.tau * d.alpha * f(e.i, c) * f(e.i, c);
      lin += d.tau * d.alpha * (e.x - rest) * f(e.i, c);
    }
    return finish(tau, lin, m.entities[d.t].lambda[c], d.exp_prior);
  }
  const Mat& g = col_factor(m, d);
  for (const Entry& e : d.entries) {
    double rest = 0.0;
    for (int a = 0; a < d.P.rows(); ++a)
      for (int b = 0; b < d.P.cols(); ++b)
        if (a != r || b != c) rest += f(e.i, a) * d.P(a, b) * g(e.j, b);
    const double coef = f(e.i, r) * g(e.j, c);
    tau += d.tau * d.alpha * coef * coef;
    lin += d.tau * d.alpha * (e.x - rest) * coef;
  }
  return finish(tau, lin, d.lambda_s, d.exp_prior);
}

Multi private_row(const Model& m, int n, int r) {
  const Dataset& d = m.datasets[n];
  const Mat& f = m.entities[d.t].F;
  const int width = static_cast<int>(d.P.cols());
  Mat prec = Mat::Zero(width, width);
  Vec lin = Vec::Zero(width);
  if (d.kind == Kind::D) {
    for (int k = 0; k < width; ++k) prec(k, k) = m.entities[d.t].lambda[k];
    for (const Entry& e : d.entries) {
      if (e.j != r) continue;
      for (int a = 0; a < width; ++a) {
        lin[a] += d.tau * d.alpha * e.x * f(e.i, a);
        for (int b = 0; b < width; ++b) prec(a, b) += d.tau * d.alpha * f(e.i, a) * f(e.i, b);
      }
    }
    return finish(prec, lin);
  }
  const Mat& g = col_factor(m, d);
  for (int l = 0; l < width; ++l) prec(l, l) = d.lambda_s;
  for (const Entry& e : d.entries) {
    double rest = 0.0;
    for (int a = 0; a < d.P.rows(); ++a)
      if (a != r)
        for (int b = 0; b < width; ++b) rest += f(e.i, a) * d.P(a, b) * g(e.j, b);
    Vec c(width);
    for (int l = 0; l < width; ++l) c[l] = f(e.i, r) * g(e.j, l);
    for (int a = 0; a < width; ++a) {
      lin[a] += d.tau * d.alpha * (e.x - rest) * c[a];
      for (int b = 0; b < width; ++b) prec(a, b) += d.tau * d.alpha * c[a] * c[b];
    }
  }
  return finish(prec, lin);
}

double log_joint(const Model& m) {
  auto exp_lp = [](double x, double lam) { return std::log(lam) - lam * x; };
  auto norm_lp = [](double x, double lam) { return 0.5 * std::log(lam / (2 * kPi)) - 0.5 * lam * x * x; };
  auto gamma_lp = [](double x, double a, double b) {
    return a * std::log(b) - std::lgamma(a) + (a - 1) * std::log(x) - b * x;
  };
  double total = 0.0;
  for (const Entity& e : m.entities)
    for (int k = 0; k < e.F.cols(); ++k) {
      for (int i = 0; i < e.F.rows(); ++i)
        total += e.nonneg ? exp_lp(e.F(i, k), e.lambda[k]) : norm_lp(e.F(i, k), e.lambda[k]);
      total += gamma_lp(e.lambda[k], m.alpha0, m.beta0);
    }
  for (const Dataset& d : m.datasets) {
    total += gamma_lp(d.tau, m.alpha_tau, m.beta_tau);
    for (int r = 0; r < d.P.rows(); ++r)
      for (int c = 0; c < d.P.cols(); ++c) {
        if (d.cp && r != c) continue;
        const double lam = d.kind == Kind::D ? m.entities[d.t].lambda[c] : d.lambda_s;
        total += d.exp_prior ? exp_lp(d.P(r, c), lam) : norm_lp(d.P(r, c), lam);
      }
    for (const Entry& e : d.entries) {
      const double r = e.x - recon(m, d, e.i, e.j);
      total += d.alpha * (0.5 * std::log(d.tau / (2 * kPi)) - 0.5 * d.tau * r * r);
    }
  }
  return total;
}

}  // namespace oracle
