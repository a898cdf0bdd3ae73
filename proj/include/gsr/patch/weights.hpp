#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/random.hpp>
#include <gsr/patch/point_set.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace gsr {

struct TensorSpec {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
};

// Named parameter matrices. Read-only once loaded; rank-1 tensors are
// stored as 1 x n rows.
class WeightStore {
 public:
  void set(const std::string& name, Matrix m) { tensors_[name] = std::move(m); }

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

  const Matrix& get(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw InputError("weights: missing tensor '" + name + "'");
    return it->second;
  }

  const Matrix& get(const std::string& name, Eigen::Index rows, Eigen::Index cols) const {
    const Matrix& m = get(name);
    if (m.rows() != rows || m.cols() != cols) {
      throw InputError("weights: tensor '" + name + "' is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    return m;
  }

  void require(const std::vector<TensorSpec>& specs) const {
    for (const auto& s : specs) get(s.name, s.rows, s.cols);
  }

  const std::map<std::string, Matrix>& tensors() const { return tensors_; }

 private:
  std::map<std::string, Matrix> tensors_;
};

// Gaussian init with std 1/sqrt(rows), rounded to f32 so a saved store
// reloads bit-identically.
inline WeightStore seeded_weights(const std::vector<TensorSpec>& specs, std::uint64_t seed) {
  WeightStore store;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& s = specs[k];
    Rng rng(derive_seed(seed, k));
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(std::max<Eigen::Index>(s.rows, 1))));
    Matrix m(s.rows, s.cols);
    for (Eigen::Index r = 0; r < s.rows; ++r) {
      for (Eigen::Index c = 0; c < s.cols; ++c) m(r, c) = static_cast<float>(normal(rng));
    }
    store.set(s.name, std::move(m));
  }
  return store;
}

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class ByteReader {
 public:
  ByteReader(std::string path, const std::vector<std::uint8_t>& bytes) : path_(std::move(path)), bytes_(bytes) {}

  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(path_, pos_, std::string("truncated ") + what);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
    pos_ += n;
    return s;
  }

 private:
  std::string path_;
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// GSW1: magic, then tensors until end of file, each as
// u32 name_len, name, u32 rank, u32 dims[rank], f32 data (row-major).
// All integers and floats little-endian.
inline std::vector<std::uint8_t> encode_weights(const WeightStore& store) {
  std::vector<std::uint8_t> out{'G', 'S', 'W', '1'};
  for (const auto& [name, m] : store.tensors()) {
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    detail::put_u32(out, 2);
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) detail::put_f32(out, static_cast<float>(m(r, c)));
    }
  }
  return out;
}

inline WeightStore decode_weights(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(path, bytes);
  if (r.str(4, "magic") != "GSW1") throw FormatError(path, 0, "bad magic, expected GSW1");
  WeightStore store;
  while (!r.at_end()) {
    const std::size_t start = r.pos();
    const std::uint32_t len = r.u32("name length");
    if (len == 0 || len > 4096) throw FormatError(path, start, "implausible tensor name length");
    const std::string name = r.str(len, "tensor name");
    const std::size_t rank_at = r.pos();
    const std::uint32_t rank = r.u32("rank");
    if (rank < 1 || rank > 2) throw FormatError(path, rank_at, "tensor '" + name + "' has unsupported rank");
    std::uint32_t dims[2] = {1, 1};
    for (std::uint32_t d = 0; d < rank; ++d) dims[rank == 1 ? 1 : d] = r.u32("dims");
    r.need(std::size_t(dims[0]) * dims[1] * 4, "tensor data");
    Matrix m(dims[0], dims[1]);
    for (std::uint32_t i = 0; i < dims[0]; ++i) {
      for (std::uint32_t j = 0; j < dims[1]; ++j) m(i, j) = r.f32("tensor data");
    }
    store.set(name, std::move(m));
  }
  return store;
}

inline void save_weights(const WeightStore& store, const std::string& path) {
  const auto bytes = encode_weights(store);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline WeightStore load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, 0, "cannot open weight file");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_weights(path, bytes);
}

}  // namespace gsr
