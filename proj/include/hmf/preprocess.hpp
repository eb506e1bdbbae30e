#pragma once

#include <string>
#include <vector>

#include "hmf/datamodel.hpp"

namespace hmf {

// Symmetric similarity matrix. mask(i, j) is false only where a Jaccard pair
// has no co-observed columns.
using KernelMatrix = ObservedMatrix;

// Observed entries become min(value, ceiling).
ObservedMatrix cap(const ObservedMatrix& m, double ceiling);

// Per row, observed min -> 0 and observed max -> 1. Constant rows go to 0.5.
// DataError for a row with nothing observed.
ObservedMatrix rescale_rows_unit(const ObservedMatrix& m);

struct Standardised {
  ObservedMatrix matrix;
  std::vector<std::string> warnings;  // one per zero-variance column
};

// Per column over observed entries: subtract the mean, divide by the
// population standard deviation.
Standardised standardise_columns(const ObservedMatrix& m);

// |a and b| / |a or b| over the columns observed in both rows; 1 when both
// rows are all zero there. DataError on a non-binary observed value.
KernelMatrix jaccard_kernel(const ObservedMatrix& rows);

// exp(-|xi - xj|^2 / (2 sigma2)). Input must be fully observed. sigma2 <= 0
// selects the default, the number of features.
KernelMatrix gaussian_kernel(const ObservedMatrix& rows, double sigma2 = 0.0);

// Similarity dataset over `entity` with the diagonal unobserved. ConfigError
// when the kernel size does not match the entity.
DatasetSpec kernel_to_similarity_dataset(const KernelMatrix& kernel, const HmfModel& model,
                                         std::size_t entity, std::string name, PriorKind prior,
                                         double lambda, double importance = 1.0);

}  // namespace hmf
