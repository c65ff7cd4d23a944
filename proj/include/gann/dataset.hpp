#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "gann/types.hpp"

namespace gann {

enum class SetRole { base, query };

/// An n x d float dataset. Vector ids are the dense range [0, count()).
/// Immutable after construction by convention; safe to share across threads.
struct VectorSet {
  MatrixXfR data;  // count x dim, row-major
  SetRole role = SetRole::base;

  Eigen::Index count() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }

  auto vec(Eigen::Index id) const { return data.row(id); }

  /// Throws std::invalid_argument if empty or any value is non-finite.
  void validate() const;
};

/// Exact k nearest neighbors per query, ids in ascending (distance, id)
/// order along each row.
struct GroundTruth {
  MatrixXiR ids;  // query_count x k

  Eigen::Index query_count() const { return ids.rows(); }
  Eigen::Index k() const { return ids.cols(); }
};

struct SyntheticSpec {
  Eigen::Index dim = 32;
  Eigen::Index cardinality = 100000;
  Eigen::Index clusters = 10;
  float sd = 5.0f;
  Eigen::Index query_count = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Parses "dim = 32" style lines; keys: dim, cardinality, clusters, sd,
/// query_count, seed. Unknown keys are rejected.
SyntheticSpec synthetic_spec_from_kv(const std::string& text);

/// Gaussian clusters with centers drawn uniformly from [0,100]^dim.
/// Point i is assigned to cluster i % clusters. Queries come from the same
/// centers with a noise stream derived from the seed (see README for the
/// exact generator). Identical specs yield bit-identical datasets.
std::pair<VectorSet, VectorSet> generate_synthetic(const SyntheticSpec& spec);

/// Linear-scan exact k-NN, ties broken by smaller id. Parallel across
/// queries; output is independent of thread count.
GroundTruth brute_force_knn(const VectorSet& base, const VectorSet& queries,
                            Eigen::Index k);

}  // namespace gann
