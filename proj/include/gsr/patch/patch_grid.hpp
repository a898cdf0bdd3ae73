#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/random.hpp>
#include <gsr/scene/camera.hpp>

#include <limits>
#include <vector>

namespace gsr {

inline constexpr int kDefaultPatchSize = 16;
inline constexpr int kDefaultSamplesPerPatch = 64;

struct PatchSamples {
  std::vector<Vec3> points;  // always samples_per_patch entries
  std::vector<int> pixels;   // linear pixel index per sample, -1 when the patch is empty
  int valid_pixels = 0;
  int pad_count = 0;  // samples drawn with replacement beyond the valid pixel count
  Vec3 center = Vec3::Zero();
  int center_pixel = -1;
  bool valid = false;  // false when the patch has no valid pixel
};

struct PatchGrid {
  int patch_size = kDefaultPatchSize;
  int samples_per_patch = kDefaultSamplesPerPatch;
  int rows = 0;  // H' = H / p
  int cols = 0;  // W' = W / p
  int dropped_right = 0;   // remainder columns not covered by any patch
  int dropped_bottom = 0;  // remainder rows not covered by any patch
  std::vector<PatchSamples> patches;  // row-major

  const PatchSamples& at(int h, int w) const { return patches[std::size_t(h) * cols + w]; }
  std::size_t patch_count() const { return patches.size(); }
};

// Splits the map into p x p patches and draws `samples` points per patch,
// uniformly without replacement among valid pixels; patches with fewer valid
// pixels take every valid pixel once and pad with draws with replacement.
// The center point is pixel (p/2, p/2) of the patch, or the nearest valid
// pixel (ties in row-major order) when it is invalid.
inline PatchGrid partition_and_sample(const PointMap& map, int patch_size, int samples, std::uint64_t seed,
                                      int frame_index = 0) {
  if (patch_size < 1) throw InputError("partition_and_sample: patch size must be >= 1");
  if (samples < 1) throw InputError("partition_and_sample: sample count must be >= 1");
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.samples_per_patch = samples;
  grid.rows = map.height / patch_size;
  grid.cols = map.width / patch_size;
  grid.dropped_bottom = map.height % patch_size;
  grid.dropped_right = map.width % patch_size;
  if (grid.rows == 0 || grid.cols == 0) {
    throw InputError("partition_and_sample: map smaller than one patch");
  }
  grid.patches.resize(std::size_t(grid.rows) * grid.cols);

  std::vector<int> valid;
  for (int h = 0; h < grid.rows; ++h) {
    for (int w = 0; w < grid.cols; ++w) {
      PatchSamples& patch = grid.patches[std::size_t(h) * grid.cols + w];
      const int v0 = h * patch_size;
      const int u0 = w * patch_size;
      valid.clear();
      for (int v = v0; v < v0 + patch_size; ++v) {
        for (int u = u0; u < u0 + patch_size; ++u) {
          if (map.is_valid(u, v)) valid.push_back(static_cast<int>(map.index(u, v)));
        }
      }
      patch.valid_pixels = static_cast<int>(valid.size());
      patch.points.assign(samples, Vec3::Zero());
      patch.pixels.assign(samples, -1);
      if (valid.empty()) {
        patch.pad_count = samples;
        continue;
      }
      patch.valid = true;

      Rng rng(derive_seed(seed, frame_index, h, w));
      const int distinct = std::min<int>(samples, static_cast<int>(valid.size()));
      for (int k = 0; k < distinct; ++k) {
        const std::size_t j = k + uniform_index(rng, valid.size() - k);
        std::swap(valid[k], valid[j]);
        patch.pixels[k] = valid[k];
      }
      for (int k = distinct; k < samples; ++k) patch.pixels[k] = valid[uniform_index(rng, valid.size())];
      patch.pad_count = samples - distinct;
      for (int k = 0; k < samples; ++k) patch.points[k] = map.values[patch.pixels[k]];

      const int cu = u0 + patch_size / 2;
      const int cv = v0 + patch_size / 2;
      if (map.is_valid(cu, cv)) {
        patch.center_pixel = static_cast<int>(map.index(cu, cv));
      } else {
        long best = std::numeric_limits<long>::max();
        for (int v = v0; v < v0 + patch_size; ++v) {
          for (int u = u0; u < u0 + patch_size; ++u) {
            if (!map.is_valid(u, v)) continue;
            const long d = long(u - cu) * (u - cu) + long(v - cv) * (v - cv);
            if (d < best) {
              best = d;
              patch.center_pixel = static_cast<int>(map.index(u, v));
            }
          }
        }
      }
      patch.center = map.values[patch.center_pixel];
    }
  }
  return grid;
}

}  // namespace gsr
