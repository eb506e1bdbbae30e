#include "hmf/preprocess.hpp"

#include <cmath>
#include <string>

#include "hmf/error.hpp"

namespace hmf {

ObservedMatrix cap(const ObservedMatrix& m, double ceiling) {
  if (!std::isfinite(ceiling)) throw ConfigError("cap ceiling must be finite");
  ObservedMatrix out = m;
  for (Index i = 0; i < out.values.size(); ++i)
    if (out.mask.data()[i] != 0) out.values.data()[i] = std::min(out.values.data()[i], ceiling);
  return out;
}

ObservedMatrix rescale_rows_unit(const ObservedMatrix& m) {
  ObservedMatrix out = m;
  for (Index i = 0; i < m.rows(); ++i) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (Index j = 0; j < m.cols(); ++j) {
      if (!m.observed(i, j)) continue;
      const double v = m.values(i, j);
      if (!any) {
        lo = hi = v;
        any = true;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!any) throw DataError("row " + std::to_string(i) + " has no observed entries");
    for (Index j = 0; j < m.cols(); ++j) {
      if (!m.observed(i, j)) continue;
      out.values(i, j) = hi > lo ? (m.values(i, j) - lo) / (hi - lo) : 0.5;
    }
  }
  return out;
}

Standardised standardise_columns(const ObservedMatrix& m) {
  Standardised res{m, {}};
  ObservedMatrix& out = res.matrix;
  for (Index j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (Index i = 0; i < m.rows(); ++i)
      if (m.observed(i, j)) {
        sum += m.values(i, j);
        ++n;
      }
    if (n == 0) {
      res.warnings.push_back("column " + std::to_string(j) + " has no observed entries");
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Index i = 0; i < m.rows(); ++i)
      if (m.observed(i, j)) ss += (m.values(i, j) - mean) * (m.values(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0))
      res.warnings.push_back("column " + std::to_string(j) + " has zero variance");
    for (Index i = 0; i < m.rows(); ++i)
      if (m.observed(i, j)) out.values(i, j) = sd > 0.0 ? (m.values(i, j) - mean) / sd : 0.0;
  }
  return res;
}

KernelMatrix jaccard_kernel(const ObservedMatrix& rows) {
  for (Index i = 0; i < rows.rows(); ++i)
    for (Index j = 0; j < rows.cols(); ++j)
      if (rows.observed(i, j) && rows.values(i, j) != 0.0 && rows.values(i, j) != 1.0)
        throw DataError("non-binary value at (" + std::to_string(i) + ", " + std::to_string(j) +
                        ")");
  const Index n = rows.rows();
  KernelMatrix k(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a; b < n; ++b) {
      std::size_t inter = 0, uni = 0, co = 0;
      for (Index j = 0; j < rows.cols(); ++j) {
        if (!rows.observed(a, j) || !rows.observed(b, j)) continue;
        ++co;
        const bool x = rows.values(a, j) != 0.0, y = rows.values(b, j) != 0.0;
        inter += (x && y) ? 1 : 0;
        uni += (x || y) ? 1 : 0;
      }
      double v = 1.0;
      if (uni > 0) v = static_cast<double>(inter) / static_cast<double>(uni);
      const std::uint8_t obs = (co > 0 || a == b) ? 1 : 0;
      k.values(a, b) = k.values(b, a) = v;
      k.mask(a, b) = k.mask(b, a) = obs;
    }
  }
  return k;
}

KernelMatrix gaussian_kernel(const ObservedMatrix& rows, double sigma2) {
  if (rows.observed_count() != static_cast<std::size_t>(rows.values.size()))
    throw DataError("gaussian kernel needs fully observed rows");
  if (!std::isfinite(sigma2)) throw ConfigError("sigma2 must be finite");
  if (sigma2 <= 0.0) sigma2 = static_cast<double>(rows.cols());
  if (sigma2 <= 0.0) throw ConfigError("gaussian kernel needs at least one feature");
  const Index n = rows.rows();
  KernelMatrix k(Matrix::Ones(n, n));
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) {
      const double d2 = (rows.values.row(a) - rows.values.row(b)).squaredNorm();
      k.values(a, b) = k.values(b, a) = std::exp(-d2 / (2.0 * sigma2));
    }
  return k;
}

DatasetSpec kernel_to_similarity_dataset(const KernelMatrix& kernel, const HmfModel& model,
                                         std::size_t entity, std::string name, PriorKind prior,
                                         double lambda, double importance) {
  const EntityType& e = model.entity_types.at(entity);
  if (kernel.rows() != e.instances || kernel.cols() != e.instances)
    throw ConfigError("kernel is " + std::to_string(kernel.rows()) + "x" +
                      std::to_string(kernel.cols()) + " but entity type '" + e.name + "' has " +
                      std::to_string(e.instances) + " instances");
  DatasetSpec d;
  d.name = std::move(name);
  d.kind = DatasetKind::similarity;
  d.row_entity = entity;
  d.data = kernel;
  for (Index i = 0; i < kernel.rows(); ++i) d.data.mask(i, i) = 0;
  d.private_prior = prior;
  d.private_lambda = lambda;
  d.importance = importance;
  d.private_factor = Matrix::Zero(e.factors, e.factors);
  return d;
}

}  // namespace hmf
