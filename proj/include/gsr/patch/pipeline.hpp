#pragma once

#include <gsr/core/error.hpp>
#include <gsr/patch/dual_path.hpp>
#include <gsr/patch/encoder.hpp>
#include <gsr/patch/fuse.hpp>
#include <gsr/patch/geo_map.hpp>
#include <gsr/patch/patch_grid.hpp>
#include <gsr/patch/positional.hpp>
#include <gsr/patch/semantic.hpp>
#include <gsr/scene/bundle.hpp>

#include <limits>
#include <vector>

namespace gsr {

struct HybridConfig {
  int patch_size = kDefaultPatchSize;
  int samples_per_patch = kDefaultSamplesPerPatch;
  int semantic_dim = 64;    // D_s
  int geo_pool_dim = 64;    // C_out of the semantic-aligned path
  int cross_head_dim = 16;  // query/key width of the cross-attention
  int model_dim = 96;       // D, multiple of 6
  EncoderConfig encoder;
  std::uint64_t sample_seed = 0;

  int geo_channels() const { return encoder.out_channels(); }

  void validate() const {
    encoder.validate();
    if (encoder.in_channels != 6) throw InputError("hybrid: point attributes are xyz + rgb (6 channels)");
    if (model_dim % 6 != 0) throw InputError("hybrid: model dimension must be a multiple of 6");
    if (patch_size < 1 || samples_per_patch < 1 || semantic_dim < 1 || geo_pool_dim < 1 || cross_head_dim < 1) {
      throw InputError("hybrid: dimensions must be positive");
    }
  }
};

// Every tensor the hybrid pipeline reads, including the descriptor
// encoder's projection.
inline std::vector<TensorSpec> hybrid_weight_specs(const HybridConfig& cfg) {
  cfg.validate();
  auto specs = encoder_weight_specs(cfg.encoder);
  const int c = cfg.geo_channels();
  specs.push_back({"semantic.proj", kDescriptorWidth, cfg.semantic_dim});
  specs.push_back({"dual.query", cfg.semantic_dim, cfg.cross_head_dim});
  specs.push_back({"dual.key", c, cfg.cross_head_dim});
  specs.push_back({"dual.value", c, cfg.geo_pool_dim});
  specs.push_back({"fuse.semantic", cfg.semantic_dim, cfg.model_dim});
  specs.push_back({"fuse.geometric", cfg.geo_pool_dim + c, cfg.model_dim});
  return specs;
}

// Patch tokens for a scene: N * H' * W' rows of width D, frame-major then
// row-major. Patches without valid depth carry only the semantic term and a
// NaN center.
struct HybridFeatures {
  int frames = 0;
  int rows = 0;
  int cols = 0;
  int dim = 0;
  Matrix features;
  std::vector<Vec3> centers;
  std::vector<std::uint8_t> valid;
  std::vector<HybridPatchFeature> parts;

  std::size_t token_count() const { return std::size_t(frames) * rows * cols; }
};

inline HybridFeatures build_hybrid_features(const SceneBundle& bundle, const HybridConfig& cfg,
                                            const WeightStore& weights, const SemanticEncoder& semantic) {
  cfg.validate();
  if (bundle.frames.empty()) throw InputError("hybrid: bundle has no frames");
  if (semantic.dim() != cfg.semantic_dim) throw InputError("hybrid: semantic encoder width differs from config");
  weights.require(encoder_weight_specs(cfg.encoder));
  const int c = cfg.geo_channels();
  const SemanticPoolWeights pool_w{weights.get("dual.query", cfg.semantic_dim, cfg.cross_head_dim),
                                   weights.get("dual.key", c, cfg.cross_head_dim),
                                   weights.get("dual.value", c, cfg.geo_pool_dim)};
  const FuseWeights fuse_w{weights.get("fuse.semantic", cfg.semantic_dim, cfg.model_dim),
                           weights.get("fuse.geometric", cfg.geo_pool_dim + c, cfg.model_dim)};

  std::vector<PatchGrid> grids;
  for (std::size_t f = 0; f < bundle.frames.size(); ++f) {
    const PointMap map = back_project(bundle.frames[f].depth, bundle.intrinsics, bundle.frames[f].pose);
    grids.push_back(partition_and_sample(map, cfg.patch_size, cfg.samples_per_patch, cfg.sample_seed,
                                         static_cast<int>(f)));
  }
  const auto slots = sample_slots(grids);

  HybridFeatures out;
  out.frames = static_cast<int>(grids.size());
  out.rows = grids[0].rows;
  out.cols = grids[0].cols;
  out.dim = cfg.model_dim;
  out.features.resize(static_cast<Eigen::Index>(out.token_count()), cfg.model_dim);
  out.centers.assign(out.token_count(), Vec3::Constant(std::numeric_limits<double>::quiet_NaN()));
  out.valid.assign(out.token_count(), 0);

  Aabb scene_box;
  GeoFeatureMap geo;
  if (!slots.empty()) {
    PointSet cloud;
    cloud.features.resize(static_cast<Eigen::Index>(slots.size()), 6);
    for (const auto& s : slots) cloud.positions.push_back(grids[s.frame].at(s.h, s.w).points[s.k]);
    scene_box = bounding_box(cloud.positions);
    const Vec3 extent = scene_box.extent();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const SampleSlot& s = slots[i];
      for (int a = 0; a < 3; ++a) {
        cloud.features(i, a) = extent[a] > 0 ? (cloud.positions[i][a] - scene_box.min[a]) / extent[a] : 0.0;
      }
      const RgbImage& img = bundle.frames[s.frame].image;
      const int pixel = grids[s.frame].at(s.h, s.w).pixels[s.k];
      for (int ch = 0; ch < 3; ++ch) cloud.features(i, 3 + ch) = img.empty() ? 0.0 : img.data[pixel * 3 + ch] / 255.0;
    }
    const Matrix encoded = encode_points(cloud, cfg.encoder, weights);
    geo = scatter_to_map(encoded, slots, grids);
  }

  const RowVector zero_geo = RowVector::Zero(cfg.geo_pool_dim + c);
  for (int f = 0; f < out.frames; ++f) {
    const Matrix sem = semantic.encode(bundle.frames[f], f, cfg.patch_size, out.rows, out.cols);
    for (int h = 0; h < out.rows; ++h) {
      for (int w = 0; w < out.cols; ++w) {
        const std::size_t t = (std::size_t(f) * out.rows + h) * out.cols + w;
        const PatchSamples& patch = grids[f].at(h, w);
        const RowVector s = sem.row(h * out.cols + w);
        HybridPatchFeature part;
        if (patch.valid) {
          const Matrix block = geo.patch_block(f, h, w);
          const RowVector geo_sem = semantic_aligned_pool(s, block, pool_w).feature;
          const RowVector geo_pos = position_aligned_sample(patch.center, patch.points, block);
          part = fuse(s, geo_sem, geo_pos, positional_encode(patch.center, scene_box, cfg.model_dim), fuse_w);
          out.centers[t] = patch.center;
          out.valid[t] = 1;
        } else {
          part = fuse(s, zero_geo.head(cfg.geo_pool_dim), zero_geo.tail(c), RowVector::Zero(cfg.model_dim), fuse_w);
        }
        out.features.row(static_cast<Eigen::Index>(t)) = part.hybrid;
        out.parts.push_back(std::move(part));
      }
    }
  }
  return out;
}

}  // namespace gsr
