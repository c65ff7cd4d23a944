#include "gann/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts unsupported");

namespace gann {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  return out;
}

std::streamsize file_size(std::ifstream& in) {
  in.seekg(0, std::ios::end);
  std::streamsize size = in.tellg();
  in.seekg(0, std::ios::beg);
  return size;
}

// Reads every record of a *vecs file into a row-major matrix of T.
template <typename T>
RowMajorMatrix<T> load_vecs(const std::string& path) {
  auto in = open_input(path);
  const std::streamsize size = file_size(in);

  std::int32_t dim = 0;
  if (size < static_cast<std::streamsize>(sizeof(dim))) {
    throw FormatError(path + ": file too small for a record header");
  }
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  if (dim <= 0) throw FormatError(path + ": record dim <= 0");

  const std::streamsize record = 4 + static_cast<std::streamsize>(dim) * 4;
  if (size % record != 0) {
    throw FormatError(path + ": trailing partial record");
  }
  const std::streamsize rows = size / record;

  RowMajorMatrix<T> out(rows, dim);
  in.seekg(0, std::ios::beg);
  for (std::streamsize r = 0; r < rows; ++r) {
    std::int32_t record_dim = 0;
    in.read(reinterpret_cast<char*>(&record_dim), sizeof(record_dim));
    if (record_dim != dim) {
      throw FormatError(path + ": inconsistent per-record dim");
    }
    in.read(reinterpret_cast<char*>(out.row(r).data()),
            static_cast<std::streamsize>(dim) * sizeof(T));
    if (!in) throw FormatError(path + ": short read");
  }
  return out;
}

template <typename T>
void save_vecs(const std::string& path, const RowMajorMatrix<T>& m) {
  auto out = open_output(path);
  const std::int32_t dim = static_cast<std::int32_t>(m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(m.row(r).data()),
              static_cast<std::streamsize>(dim) * sizeof(T));
  }
  if (!out) throw FormatError(path + ": write failed");
}

}  // namespace

VectorSet load_fvecs(const std::string& path, SetRole role) {
  VectorSet set{load_vecs<float>(path), role};
  set.validate();
  return set;
}

void save_fvecs(const std::string& path, const VectorSet& set) {
  save_vecs(path, set.data);
}

GroundTruth load_ivecs(const std::string& path) {
  return GroundTruth{load_vecs<std::int32_t>(path)};
}

void save_ivecs(const std::string& path, const GroundTruth& gt) {
  save_vecs(path, gt.ids);
}

namespace {
constexpr char kGraphMagic[4] = {'G', 'A', 'N', 'N'};
constexpr std::uint32_t kGraphVersion = 1;
}  // namespace

void save_graph(const std::string& path, const Graph& g) {
  auto out = open_output(path);
  out.write(kGraphMagic, 4);
  out.write(reinterpret_cast<const char*>(&kGraphVersion), 4);
  const std::uint64_t n = g.vertex_count();
  out.write(reinterpret_cast<const char*>(&n), 8);
  for (const auto& list : g.adjacency) {
    const std::uint32_t degree = static_cast<std::uint32_t>(list.size());
    out.write(reinterpret_cast<const char*>(&degree), 4);
    for (const Neighbor& nb : list) {
      const std::int32_t id = static_cast<std::int32_t>(nb.id);
      out.write(reinterpret_cast<const char*>(&id), 4);
      out.write(reinterpret_cast<const char*>(&nb.dist), 4);
    }
  }
  if (!out) throw FormatError(path + ": write failed");
}

Graph load_graph(const std::string& path) {
  auto in = open_input(path);
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t n = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in || std::memcmp(magic, kGraphMagic, 4) != 0) {
    throw FormatError(path + ": not a graph index file");
  }
  if (version != kGraphVersion) {
    throw FormatError(path + ": unsupported graph version");
  }
  Graph g(static_cast<std::size_t>(n));
  for (std::uint64_t v = 0; v < n; ++v) {
    std::uint32_t degree = 0;
    in.read(reinterpret_cast<char*>(&degree), 4);
    if (!in) throw FormatError(path + ": truncated adjacency");
    auto& list = g.adjacency[static_cast<std::size_t>(v)];
    list.resize(degree);
    for (std::uint32_t e = 0; e < degree; ++e) {
      std::int32_t id = 0;
      float dist = 0.0f;
      in.read(reinterpret_cast<char*>(&id), 4);
      in.read(reinterpret_cast<char*>(&dist), 4);
      if (!in) throw FormatError(path + ": truncated adjacency");
      if (id < 0 || static_cast<std::uint64_t>(id) >= n) {
        throw FormatError(path + ": neighbor id out of range");
      }
      list[e] = Neighbor{static_cast<VertexId>(id), dist};
    }
  }
  return g;
}

void export_adjacency_ivecs(const std::string& path, const Graph& g) {
  auto out = open_output(path);
  for (const auto& list : g.adjacency) {
    const std::int32_t degree = static_cast<std::int32_t>(list.size());
    out.write(reinterpret_cast<const char*>(&degree), 4);
    for (const Neighbor& nb : list) {
      const std::int32_t id = static_cast<std::int32_t>(nb.id);
      out.write(reinterpret_cast<const char*>(&id), 4);
    }
  }
  if (!out) throw FormatError(path + ": write failed");
}

}  // namespace gann
