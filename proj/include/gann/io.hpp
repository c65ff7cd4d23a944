#pragma once

#include <stdexcept>
#include <string>

#include "gann/dataset.hpp"
#include "gann/graph.hpp"

namespace gann {

/// Malformed file contents (bad record header, trailing bytes, wrong magic).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// TexMex container: each record is a 4-byte little-endian signed int `dim`
// followed by dim 4-byte little-endian payloads (float32 for fvecs,
// int32 for ivecs). All records in one file must share the same dim.

VectorSet load_fvecs(const std::string& path, SetRole role = SetRole::base);
void save_fvecs(const std::string& path, const VectorSet& set);

GroundTruth load_ivecs(const std::string& path);
void save_ivecs(const std::string& path, const GroundTruth& gt);

// Graph index container: magic "GANN", u32 version, u64 vertex count, then
// per vertex a u32 degree and that many (id: int32, dist: float32) pairs.
// Everything little-endian.

void save_graph(const std::string& path, const Graph& g);
Graph load_graph(const std::string& path);

/// Adjacency ids only, one ivecs record per vertex (record dim = degree).
/// For interop with external tools; not readable by load_ivecs when
/// degrees differ between vertices.
void export_adjacency_ivecs(const std::string& path, const Graph& g);

}  // namespace gann
