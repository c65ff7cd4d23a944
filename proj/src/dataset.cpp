#include "gann/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gann/distance.hpp"
#include "gann/parallel.hpp"
#include "gann/random.hpp"

namespace gann {

void VectorSet::validate() const {
  if (data.rows() <= 0 || data.cols() <= 0) {
    throw std::invalid_argument("VectorSet: empty dataset");
  }
  if (!data.allFinite()) {
    throw std::invalid_argument("VectorSet: non-finite value in data");
  }
}

void SyntheticSpec::validate() const {
  if (dim < 1 || cardinality < 1 || clusters < 1 || query_count < 1) {
    throw std::invalid_argument("SyntheticSpec: all counts must be >= 1");
  }
  if (!(sd > 0.0f)) {
    throw std::invalid_argument("SyntheticSpec: sd must be positive");
  }
  if (clusters > cardinality) {
    throw std::invalid_argument("SyntheticSpec: clusters > cardinality");
  }
}

SyntheticSpec synthetic_spec_from_kv(const std::string& text) {
  SyntheticSpec spec;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto strip = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t\r");
      std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("synthetic spec: bad line: " + line);
    }
    std::string key = strip(t.substr(0, eq));
    std::string value = strip(t.substr(eq + 1));
    if (key == "dim") spec.dim = std::stoll(value);
    else if (key == "cardinality") spec.cardinality = std::stoll(value);
    else if (key == "clusters") spec.clusters = std::stoll(value);
    else if (key == "sd") spec.sd = std::stof(value);
    else if (key == "query_count") spec.query_count = std::stoll(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else throw std::invalid_argument("synthetic spec: unknown key: " + key);
  }
  spec.validate();
  return spec;
}

namespace {

MatrixXfR draw_points(const MatrixXfR& centers, Eigen::Index n,
                      Eigen::Index dim, Eigen::Index clusters, float sd,
                      SplitMix64& noise) {
  MatrixXfR out(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto center = centers.row(i % clusters);
    for (Eigen::Index j = 0; j < dim; ++j) {
      out(i, j) = center(j) + static_cast<float>(noise.next_normal() * sd);
    }
  }
  return out;
}

}  // namespace

std::pair<VectorSet, VectorSet> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();

  SplitMix64 center_rng(spec.seed);
  MatrixXfR centers(spec.clusters, spec.dim);
  for (Eigen::Index c = 0; c < spec.clusters; ++c) {
    for (Eigen::Index j = 0; j < spec.dim; ++j) {
      centers(c, j) = static_cast<float>(center_rng.next_double() * 100.0);
    }
  }

  SplitMix64 base_noise(derive_seed(spec.seed, 0xbaceULL));
  SplitMix64 query_noise(derive_seed(spec.seed, 0xc0e7ULL));

  VectorSet base{draw_points(centers, spec.cardinality, spec.dim,
                             spec.clusters, spec.sd, base_noise),
                 SetRole::base};
  VectorSet queries{draw_points(centers, spec.query_count, spec.dim,
                                spec.clusters, spec.sd, query_noise),
                    SetRole::query};
  return {std::move(base), std::move(queries)};
}

GroundTruth brute_force_knn(const VectorSet& base, const VectorSet& queries,
                            Eigen::Index k) {
  if (k < 1 || k > base.count()) {
    throw std::invalid_argument("brute_force_knn: k out of range");
  }
  if (base.dim() != queries.dim()) {
    throw std::invalid_argument("brute_force_knn: dimensionality mismatch");
  }

  GroundTruth gt;
  gt.ids.resize(queries.count(), k);

  parallel_for(0, static_cast<std::size_t>(queries.count()), [&](std::size_t q) {
    const auto qv = queries.vec(static_cast<Eigen::Index>(q));
    // Bounded max-heap keyed by (distance, id); the heap top is the worst
    // of the current best k.
    std::vector<std::pair<float, std::int32_t>> heap;
    heap.reserve(k + 1);
    auto cmp = [](const auto& a, const auto& b) { return a < b; };
    for (Eigen::Index i = 0; i < base.count(); ++i) {
      float d = euclidean_distance(qv, base.vec(i));
      std::pair<float, std::int32_t> cand{d, static_cast<std::int32_t>(i)};
      if (static_cast<Eigen::Index>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), cmp);
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), cmp);
      }
    }
    std::sort_heap(heap.begin(), heap.end(), cmp);
    for (Eigen::Index j = 0; j < k; ++j) {
      gt.ids(static_cast<Eigen::Index>(q), j) = heap[j].second;
    }
  });
  return gt;
}

}  // namespace gann
