#include "hmf/datamodel.hpp"

#include <cmath>
#include <sstream>

#include "hmf/error.hpp"

namespace hmf {

ObservedMatrix::ObservedMatrix(Index rows, Index cols)
    : values(Matrix::Zero(rows, cols)), mask(Mask::Zero(rows, cols)) {}

ObservedMatrix::ObservedMatrix(Matrix v) : values(std::move(v)) {
  mask = Mask::Ones(values.rows(), values.cols());
}

ObservedMatrix::ObservedMatrix(Matrix v, Mask m) : values(std::move(v)), mask(std::move(m)) {}

std::size_t ObservedMatrix::observed_count() const {
  std::size_t n = 0;
  for (Index i = 0; i < mask.size(); ++i) n += mask.data()[i] != 0;
  return n;
}

Matrix ObservedMatrix::masked_values() const {
  Matrix out(values.rows(), values.cols());
  for (Index i = 0; i < values.size(); ++i)
    out.data()[i] = mask.data()[i] != 0 ? values.data()[i] : 0.0;
  return out;
}

Matrix ObservedMatrix::weights() const { return mask.cast<double>(); }

const char* to_string(Negativity n) { return n == Negativity::nonnegative ? "nonnegative" : "real"; }
const char* to_string(PriorKind p) { return p == PriorKind::exponential ? "exponential" : "gaussian"; }
const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::main: return "R";
    case DatasetKind::feature: return "D";
    case DatasetKind::similarity: return "C";
  }
  return "?";
}

std::size_t SamplerSchedule::retained_draws() const {
  if (thinning == 0 || burn_in >= iterations) return 0;
  return (iterations - burn_in) / thinning;
}

bool SamplerSchedule::retains(std::size_t sweep) const {
  return sweep > burn_in && thinning > 0 && (sweep - burn_in) % thinning == 0;
}

std::size_t HmfModel::entity_index(const std::string& name) const {
  for (std::size_t i = 0; i < entity_types.size(); ++i)
    if (entity_types[i].name == name) return i;
  return kNoEntity;
}

std::size_t HmfModel::dataset_index(const std::string& name) const {
  for (std::size_t i = 0; i < datasets.size(); ++i)
    if (datasets[i].name == name) return i;
  return kNoEntity;
}

const EntityType& HmfModel::col_entity(const DatasetSpec& d) const {
  return entity_types.at(d.kind == DatasetKind::similarity ? d.row_entity : d.col_entity);
}

namespace {

class Reporter {
 public:
  explicit Reporter(std::vector<Violation>& out) : out_(out) {}
  void add(std::string path, std::string rule, std::string message) {
    out_.push_back({std::move(path), std::move(rule), std::move(message)});
  }

 private:
  std::vector<Violation>& out_;
};

std::string dims(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

void check_entity(const EntityType& e, const std::string& path, Reporter& rep) {
  if (e.name.empty()) rep.add(path + ".name", "entity_name", "entity type needs a name");
  if (e.instances < 1) rep.add(path + ".instances", "entity_instances", "instances must be >= 1");
  if (e.factors < 1) rep.add(path + ".factors", "entity_factors", "factors must be >= 1");
  if (e.F.rows() != e.instances || e.F.cols() != e.factors) {
    rep.add(path + ".F", "entity_factor_dims",
            "F is " + dims(e.F.rows(), e.F.cols()) + ", expected " + dims(e.instances, e.factors));
  } else {
    if (!all_finite(e.F)) rep.add(path + ".F", "finite", "F has non-finite entries");
    if (e.negativity == Negativity::nonnegative && (e.F.array() < 0.0).any())
      rep.add(path + ".F", "nonnegative_factor", "nonnegative entity has negative F entries");
  }
  if (e.lambda.size() != e.factors)
    rep.add(path + ".lambda", "ard_dims", "lambda length must equal factors");
  else if (!(e.lambda.array() > 0.0).all() || !e.lambda.allFinite())
    rep.add(path + ".lambda", "ard_positive", "lambda entries must be positive");
}

void check_dataset(const HmfModel& model, const DatasetSpec& d, const std::string& path,
                   Reporter& rep) {
  const auto n_ent = model.entity_types.size();
  if (d.name.empty()) rep.add(path + ".name", "dataset_name", "dataset needs a name");
  if (d.row_entity >= n_ent) {
    rep.add(path + ".row_entity", "entity_reference", "row entity does not resolve");
    return;
  }
  const EntityType& row = model.entity_types[d.row_entity];

  Index exp_rows = row.instances, exp_cols = 0;
  Index pf_rows = 0, pf_cols = 0;
  switch (d.kind) {
    case DatasetKind::main: {
      if (d.col_entity >= n_ent) {
        rep.add(path + ".col_entity", "entity_reference", "column entity does not resolve");
        return;
      }
      if (d.col_entity == d.row_entity)
        rep.add(path + ".col_entity", "main_distinct_entities",
                "main datasets must link two distinct entity types; declare same-type data as "
                "similarity");
      const EntityType& col = model.entity_types[d.col_entity];
      exp_cols = col.instances;
      pf_rows = row.factors;
      pf_cols = col.factors;
      break;
    }
    case DatasetKind::feature:
      if (d.col_entity != kNoEntity)
        rep.add(path + ".col_entity", "feature_no_col_entity",
                "feature datasets have no column entity");
      if (d.feature_count < 1)
        rep.add(path + ".feature_count", "feature_count", "feature_count must be >= 1");
      exp_cols = d.feature_count;
      pf_rows = d.feature_count;
      pf_cols = row.factors;
      if (d.cp_constrained)
        rep.add(path + ".cp_constrained", "cp_kind", "CP constraint applies to main datasets only");
      break;
    case DatasetKind::similarity:
      if (d.col_entity != kNoEntity && d.col_entity != d.row_entity)
        rep.add(path + ".col_entity", "similarity_same_entity",
                "similarity datasets relate an entity type to itself");
      exp_cols = row.instances;
      pf_rows = row.factors;
      pf_cols = row.factors;
      if (d.cp_constrained)
        rep.add(path + ".cp_constrained", "cp_kind", "CP constraint applies to main datasets only");
      break;
  }

  const auto& data = d.data;
  bool data_dims_ok = true;
  if (data.values.rows() != exp_rows || data.values.cols() != exp_cols) {
    rep.add(path + ".data", "data_dims",
            "data is " + dims(data.values.rows(), data.values.cols()) + ", expected " +
                dims(exp_rows, exp_cols));
    data_dims_ok = false;
  }
  if (data.mask.rows() != data.values.rows() || data.mask.cols() != data.values.cols()) {
    rep.add(path + ".data.mask", "mask_dims", "mask dimensions differ from values");
    data_dims_ok = false;
  }
  if (data_dims_ok) {
    if (data.observed_count() == 0)
      rep.add(path + ".data.mask", "mask_nonempty", "dataset has no observed entries");
    for (Index i = 0; i < data.rows(); ++i)
      for (Index j = 0; j < data.cols(); ++j)
        if (data.observed(i, j) && !std::isfinite(data.values(i, j))) {
          std::ostringstream os;
          os << "observed value at (" << i << "," << j << ") is not finite";
          rep.add(path + ".data.values", "finite", os.str());
          i = data.rows();
          break;
        }
    if (d.kind == DatasetKind::similarity && data.rows() == data.cols()) {
      for (Index i = 0; i < data.rows(); ++i)
        if (data.observed(i, i)) {
          std::ostringstream os;
          os << "similarity dataset observes diagonal entry (" << i << "," << i << ")";
          rep.add(path + ".data.mask", "similarity_diagonal_observed", os.str());
          break;
        }
    }
  }

  const Matrix& pf = d.private_factor;
  if (pf.rows() != pf_rows || pf.cols() != pf_cols) {
    rep.add(path + ".private_factor", "private_factor_dims",
            "private factor is " + dims(pf.rows(), pf.cols()) + ", expected " +
                dims(pf_rows, pf_cols));
  } else {
    if (!all_finite(pf)) rep.add(path + ".private_factor", "finite", "non-finite private factor");
    if (d.private_prior == PriorKind::exponential && (pf.array() < 0.0).any())
      rep.add(path + ".private_factor", "nonnegative_factor",
              "exponential-prior private factor has negative entries");
    if (d.cp_constrained) {
      if (pf.rows() != pf.cols()) {
        rep.add(path + ".private_factor", "cp_square", "CP-constrained S must be square");
      } else {
        for (Index k = 0; k < pf.rows(); ++k)
          for (Index l = 0; l < pf.cols(); ++l)
            if (k != l && pf(k, l) != 0.0) {
              rep.add(path + ".private_factor", "cp_offdiagonal",
                      "CP-constrained S has non-zero off-diagonal entries");
              k = pf.rows();
              break;
            }
      }
    }
    if (d.pinned.size() != 0 && (d.pinned.rows() != pf.rows() || d.pinned.cols() != pf.cols()))
      rep.add(path + ".pinned", "pinned_dims", "pinned mask dimensions differ from private factor");
  }

  if (!std::isfinite(d.importance) || d.importance < 0.0)
    rep.add(path + ".importance", "importance", "importance must be finite and >= 0");
  if (!std::isfinite(d.noise_precision) || !(d.noise_precision > 0.0))
    rep.add(path + ".noise_precision", "noise_positive", "noise precision must be positive");
  if (d.kind != DatasetKind::feature && (!std::isfinite(d.private_lambda) || !(d.private_lambda > 0.0)))
    rep.add(path + ".private_lambda", "lambda_positive", "private lambda must be positive");
}

}  // namespace

std::vector<Violation> validate(const HmfModel& model) {
  std::vector<Violation> out;
  Reporter rep(out);

  if (model.entity_types.empty()) rep.add("entity_types", "nonempty", "no entity types");
  if (model.datasets.empty()) rep.add("datasets", "nonempty", "no datasets");

  for (std::size_t t = 0; t < model.entity_types.size(); ++t) {
    const std::string path = "entity_types[" + std::to_string(t) + "]";
    check_entity(model.entity_types[t], path, rep);
    for (std::size_t u = 0; u < t; ++u)
      if (model.entity_types[u].name == model.entity_types[t].name)
        rep.add(path + ".name", "unique_name", "duplicate entity name '" + model.entity_types[t].name + "'");
  }
  for (std::size_t n = 0; n < model.datasets.size(); ++n) {
    const std::string path = "datasets[" + std::to_string(n) + "]";
    check_dataset(model, model.datasets[n], path, rep);
    for (std::size_t m = 0; m < n; ++m)
      if (model.datasets[m].name == model.datasets[n].name)
        rep.add(path + ".name", "unique_name", "duplicate dataset name '" + model.datasets[n].name + "'");
  }

  for (std::size_t t = 0; t < model.entity_types.size(); ++t) {
    bool used = false;
    for (const auto& d : model.datasets)
      used = used || d.row_entity == t || (d.kind == DatasetKind::main && d.col_entity == t);
    if (!used)
      rep.add("entity_types[" + std::to_string(t) + "]", "entity_linked",
              "entity type '" + model.entity_types[t].name + "' appears in no dataset");
  }

  const auto& h = model.hyper;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      rep.add(std::string("hyper.") + name, "hyper_positive", std::string(name) + " must be positive");
  };
  positive(h.alpha_tau, "alpha_tau");
  positive(h.beta_tau, "beta_tau");
  positive(h.alpha_0, "alpha_0");
  positive(h.beta_0, "beta_0");
  positive(h.lambda_private_default, "lambda_private_default");

  const auto& s = model.schedule;
  if (s.thinning < 1) rep.add("schedule.thinning", "thinning", "thinning must be >= 1");
  if (s.burn_in >= s.iterations)
    rep.add("schedule.burn_in", "burn_in", "burn_in must be smaller than iterations");
  else if (s.thinning >= 1 && s.retained_draws() < 1)
    rep.add("schedule", "retained_draws", "schedule retains no draws");
  return out;
}

IndexSets derive_index_sets(const HmfModel& model, std::size_t entity) {
  if (entity >= model.entity_types.size())
    throw ConfigError("entity index " + std::to_string(entity) + " does not resolve");
  IndexSets sets;
  for (std::size_t n = 0; n < model.datasets.size(); ++n) {
    const auto& d = model.datasets[n];
    if (d.row_entity >= model.entity_types.size() ||
        (d.kind == DatasetKind::main && d.col_entity >= model.entity_types.size()))
      throw ConfigError("dataset '" + d.name + "' has an unresolved entity reference");
    switch (d.kind) {
      case DatasetKind::main:
        if (d.row_entity == entity) sets.u1.push_back(n);
        if (d.col_entity == entity) sets.u2.push_back(n);
        break;
      case DatasetKind::feature:
        if (d.row_entity == entity) {
          sets.v.push_back(n);
          (d.private_prior == PriorKind::exponential ? sets.v_plus : sets.v_minus).push_back(n);
        }
        break;
      case DatasetKind::similarity:
        if (d.row_entity == entity) sets.w.push_back(n);
        break;
    }
  }
  return sets;
}

std::size_t add_entity(HmfModel& model, std::string name, Index instances, Index factors,
                       Negativity negativity) {
  EntityType e;
  e.name = std::move(name);
  e.instances = instances;
  e.factors = factors;
  e.negativity = negativity;
  e.F = Matrix::Zero(instances, factors);
  e.lambda = Vector::Ones(factors);
  model.entity_types.push_back(std::move(e));
  return model.entity_types.size() - 1;
}

std::size_t add_main_dataset(HmfModel& model, std::string name, std::size_t row_entity,
                             std::size_t col_entity, ObservedMatrix data, PriorKind prior,
                             double lambda, double importance, bool cp_constrained) {
  DatasetSpec d;
  d.name = std::move(name);
  d.kind = DatasetKind::main;
  d.row_entity = row_entity;
  d.col_entity = col_entity;
  d.data = std::move(data);
  d.private_prior = prior;
  d.private_lambda = lambda;
  d.importance = importance;
  d.cp_constrained = cp_constrained;
  d.private_factor = Matrix::Zero(model.entity_types.at(row_entity).factors,
                                  model.entity_types.at(col_entity).factors);
  model.datasets.push_back(std::move(d));
  return model.datasets.size() - 1;
}

std::size_t add_feature_dataset(HmfModel& model, std::string name, std::size_t entity,
                                ObservedMatrix data, PriorKind prior, double importance) {
  DatasetSpec d;
  d.name = std::move(name);
  d.kind = DatasetKind::feature;
  d.row_entity = entity;
  d.feature_count = data.cols();
  d.data = std::move(data);
  d.private_prior = prior;
  d.importance = importance;
  d.private_factor = Matrix::Zero(d.feature_count, model.entity_types.at(entity).factors);
  model.datasets.push_back(std::move(d));
  return model.datasets.size() - 1;
}

std::size_t add_similarity_dataset(HmfModel& model, std::string name, std::size_t entity,
                                   ObservedMatrix data, PriorKind prior, double lambda,
                                   double importance) {
  DatasetSpec d;
  d.name = std::move(name);
  d.kind = DatasetKind::similarity;
  d.row_entity = entity;
  d.data = std::move(data);
  d.private_prior = prior;
  d.private_lambda = lambda;
  d.importance = importance;
  const Index k = model.entity_types.at(entity).factors;
  d.private_factor = Matrix::Zero(k, k);
  model.datasets.push_back(std::move(d));
  return model.datasets.size() - 1;
}

Matrix reconstruct(const HmfModel& model, const DatasetSpec& d) {
  const Matrix& f = model.row_entity(d).F;
  if (d.kind == DatasetKind::feature) return f * d.private_factor.transpose();
  const Matrix& g = model.col_entity(d).F;
  return f * d.private_factor * g.transpose();
}

}  // namespace hmf
