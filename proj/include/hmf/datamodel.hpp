#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hmf {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr std::size_t kNoEntity = std::numeric_limits<std::size_t>::max();

// Dense values plus the observed set. Values at unobserved cells carry no
// meaning and are never read by the model.
struct ObservedMatrix {
  Matrix values;
  Mask mask;  // 1 = observed

  ObservedMatrix() = default;
  ObservedMatrix(Index rows, Index cols);
  // Fully observed.
  explicit ObservedMatrix(Matrix v);
  ObservedMatrix(Matrix v, Mask m);

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  bool observed(Index i, Index j) const { return mask(i, j) != 0; }
  std::size_t observed_count() const;

  // Copy of the values with every unobserved cell set to 0.
  Matrix masked_values() const;
  // The mask as 0/1 doubles.
  Matrix weights() const;
};

enum class Negativity { nonnegative, real };
// Prior on a dataset-specific factor block.
enum class PriorKind { exponential, gaussian };
enum class DatasetKind { main, feature, similarity };

const char* to_string(Negativity n);
const char* to_string(PriorKind p);
const char* to_string(DatasetKind k);

struct EntityType {
  std::string name;
  Index instances = 0;
  Index factors = 0;
  Negativity negativity = Negativity::nonnegative;
  Matrix F;       // instances x factors
  Vector lambda;  // ARD precision per factor
};

struct DatasetSpec {
  std::string name;
  DatasetKind kind = DatasetKind::feature;
  std::size_t row_entity = kNoEntity;
  std::size_t col_entity = kNoEntity;  // main only; similarity mirrors row_entity
  Index feature_count = 0;             // feature only
  ObservedMatrix data;
  PriorKind private_prior = PriorKind::gaussian;
  // lambda_S for main/similarity. Feature datasets take the row entity's ARD
  // vector instead and ignore this field.
  double private_lambda = 1.0;
  // S (K_row x K_col), G (J x K_row) or S (K x K).
  Matrix private_factor;
  double importance = 1.0;
  double noise_precision = 1.0;
  bool cp_constrained = false;
  // Optional: private entries held at their current value by every update.
  // Empty means nothing is pinned.
  Mask pinned;
};

struct Hyperparameters {
  double alpha_tau = 1.0;
  double beta_tau = 1.0;
  double alpha_0 = 1.0;
  double beta_0 = 1.0;
  double lambda_private_default = 1.0;
  // With ard=false the lambda vectors are held at their initial values.
  bool ard = true;
};

struct SamplerSchedule {
  std::size_t iterations = 200;
  std::size_t burn_in = 100;
  std::size_t thinning = 2;
  std::uint64_t seed = 0;

  std::size_t retained_draws() const;
  // 1-based sweep index.
  bool retains(std::size_t sweep) const;
};

struct HmfModel {
  std::vector<EntityType> entity_types;
  std::vector<DatasetSpec> datasets;
  Hyperparameters hyper;
  SamplerSchedule schedule;

  std::size_t entity_index(const std::string& name) const;  // kNoEntity if absent
  std::size_t dataset_index(const std::string& name) const;

  const EntityType& row_entity(const DatasetSpec& d) const { return entity_types.at(d.row_entity); }
  // The column-side entity: the second entity for main datasets, the row
  // entity again for similarity datasets. Undefined for feature datasets.
  const EntityType& col_entity(const DatasetSpec& d) const;
};

struct Violation {
  std::string path;
  std::string rule;
  std::string message;
};

std::vector<Violation> validate(const HmfModel& model);

struct IndexSets {
  std::vector<std::size_t> u1;  // main datasets with this entity on the rows
  std::vector<std::size_t> u2;  // main datasets with this entity on the columns
  std::vector<std::size_t> v;   // feature datasets
  std::vector<std::size_t> v_plus;   // ... with a nonnegative G
  std::vector<std::size_t> v_minus;  // ... with a real-valued G
  std::vector<std::size_t> w;   // similarity datasets
};

// Throws ConfigError on an unresolved entity reference.
IndexSets derive_index_sets(const HmfModel& model, std::size_t entity);

// Construction helpers. Factor matrices are allocated with zeros, lambda
// vectors with ones and noise precisions at 1; run an initialiser before
// sampling.
std::size_t add_entity(HmfModel& model, std::string name, Index instances, Index factors,
                       Negativity negativity);
std::size_t add_main_dataset(HmfModel& model, std::string name, std::size_t row_entity,
                             std::size_t col_entity, ObservedMatrix data, PriorKind prior,
                             double lambda, double importance = 1.0, bool cp_constrained = false);
std::size_t add_feature_dataset(HmfModel& model, std::string name, std::size_t entity,
                                ObservedMatrix data, PriorKind prior, double importance = 1.0);
std::size_t add_similarity_dataset(HmfModel& model, std::string name, std::size_t entity,
                                   ObservedMatrix data, PriorKind prior, double lambda,
                                   double importance = 1.0);

// Reconstruction F S F'^T or F G^T of a dataset from the given state.
Matrix reconstruct(const HmfModel& model, const DatasetSpec& d);

}  // namespace hmf
