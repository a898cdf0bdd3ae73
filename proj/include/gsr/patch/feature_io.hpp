#pragma once

#include <gsr/core/error.hpp>
#include <gsr/patch/pipeline.hpp>
#include <gsr/patch/weights.hpp>

#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace gsr {

inline constexpr std::uint32_t kFeatureFileVersion = 1;

// Contents of a GSR1 feature file.
struct FeatureFile {
  std::uint32_t version = kFeatureFileVersion;
  std::uint32_t frames = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t dim = 0;
  std::vector<float> features;  // tokens x dim
  std::vector<float> centers;   // tokens x 3

  std::size_t token_count() const { return std::size_t(frames) * rows * cols; }
};

inline FeatureFile to_feature_file(const HybridFeatures& h) {
  FeatureFile f;
  f.frames = static_cast<std::uint32_t>(h.frames);
  f.rows = static_cast<std::uint32_t>(h.rows);
  f.cols = static_cast<std::uint32_t>(h.cols);
  f.dim = static_cast<std::uint32_t>(h.dim);
  for (Eigen::Index t = 0; t < h.features.rows(); ++t) {
    for (Eigen::Index d = 0; d < h.features.cols(); ++d) f.features.push_back(static_cast<float>(h.features(t, d)));
  }
  for (const auto& c : h.centers) {
    for (int a = 0; a < 3; ++a) f.centers.push_back(static_cast<float>(c[a]));
  }
  return f;
}

// Layout: "GSR1", u32 version, N, H', W', D, f32 features (token-major),
// f32 centers (tokens x 3). Little-endian throughout.
inline std::vector<std::uint8_t> encode_feature_file(const FeatureFile& f) {
  if (f.features.size() != f.token_count() * f.dim || f.centers.size() != f.token_count() * 3) {
    throw InputError("feature file: payload size does not match header");
  }
  std::vector<std::uint8_t> out{'G', 'S', 'R', '1'};
  for (std::uint32_t v : {f.version, f.frames, f.rows, f.cols, f.dim}) detail::put_u32(out, v);
  for (float v : f.features) detail::put_f32(out, v);
  for (float v : f.centers) detail::put_f32(out, v);
  return out;
}

inline FeatureFile decode_feature_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(path, bytes);
  if (r.str(4, "magic") != "GSR1") throw FormatError(path, 0, "bad magic, expected GSR1");
  FeatureFile f;
  f.version = r.u32("version");
  if (f.version != kFeatureFileVersion) throw FormatError(path, 4, "unsupported version " + std::to_string(f.version));
  f.frames = r.u32("N");
  f.rows = r.u32("H'");
  f.cols = r.u32("W'");
  f.dim = r.u32("D");
  const std::size_t tokens = f.token_count();
  r.need((tokens * f.dim + tokens * 3) * 4, "payload");
  f.features.resize(tokens * f.dim);
  for (auto& v : f.features) v = r.f32("features");
  f.centers.resize(tokens * 3);
  for (auto& v : f.centers) v = r.f32("centers");
  if (!r.at_end()) throw FormatError(path, r.pos(), "trailing bytes after payload");
  return f;
}

inline void write_feature_file(const FeatureFile& f, const std::string& path) {
  const auto bytes = encode_feature_file(f);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline FeatureFile read_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, 0, "cannot open feature file");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_feature_file(path, bytes);
}

}  // namespace gsr
