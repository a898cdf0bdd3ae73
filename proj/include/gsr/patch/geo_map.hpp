#pragma once

#include <gsr/core/error.hpp>
#include <gsr/patch/patch_grid.hpp>
#include <gsr/patch/point_set.hpp>

#include <span>
#include <string>
#include <vector>

namespace gsr {

// Source slot of one encoded point: sample k of patch (h, w) in a frame.
struct SampleSlot {
  int frame = 0;
  int h = 0;
  int w = 0;
  int k = 0;
};

// Per-frame C x K x H' x W' geometric features aligned with the patch
// samples. Slots of patches without valid pixels are zero and flagged
// invalid.
class GeoFeatureMap {
 public:
  GeoFeatureMap() = default;
  GeoFeatureMap(int frames, int channels, int samples, int rows, int cols)
      : frames_(frames), channels_(channels), samples_(samples), rows_(rows), cols_(cols),
        data_(std::size_t(frames) * channels * samples * rows * cols, 0.0),
        patch_valid_(std::size_t(frames) * rows * cols, 0) {}

  int frames() const { return frames_; }
  int channels() const { return channels_; }
  int samples() const { return samples_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& at(int f, int c, int k, int h, int w) { return data_[offset(f, c, k, h, w)]; }
  double at(int f, int c, int k, int h, int w) const { return data_[offset(f, c, k, h, w)]; }

  bool patch_valid(int f, int h, int w) const { return patch_valid_[(std::size_t(f) * rows_ + h) * cols_ + w] != 0; }
  void set_patch_valid(int f, int h, int w, bool v) { patch_valid_[(std::size_t(f) * rows_ + h) * cols_ + w] = v; }

  // K x C features of one patch.
  Matrix patch_block(int f, int h, int w) const {
    Matrix out(samples_, channels_);
    for (int k = 0; k < samples_; ++k) {
      for (int c = 0; c < channels_; ++c) out(k, c) = at(f, c, k, h, w);
    }
    return out;
  }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t offset(int f, int c, int k, int h, int w) const {
    return (((std::size_t(f) * channels_ + c) * samples_ + k) * rows_ + h) * cols_ + w;
  }

  int frames_ = 0;
  int channels_ = 0;
  int samples_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
  std::vector<std::uint8_t> patch_valid_;
};

// Slots of every sample of every valid patch, frame-major then row-major,
// sample index fastest.
inline std::vector<SampleSlot> sample_slots(std::span<const PatchGrid> grids) {
  std::vector<SampleSlot> slots;
  for (std::size_t f = 0; f < grids.size(); ++f) {
    const PatchGrid& g = grids[f];
    for (int h = 0; h < g.rows; ++h) {
      for (int w = 0; w < g.cols; ++w) {
        if (!g.at(h, w).valid) continue;
        for (int k = 0; k < g.samples_per_patch; ++k) slots.push_back({static_cast<int>(f), h, w, k});
      }
    }
  }
  return slots;
}

// Writes feature row i into the slot provenance[i]. Every sample of every
// valid patch must be written exactly once.
inline GeoFeatureMap scatter_to_map(const Matrix& features, std::span<const SampleSlot> provenance,
                                    std::span<const PatchGrid> grids) {
  if (grids.empty()) throw InputError("scatter_to_map: no patch grids");
  if (static_cast<std::size_t>(features.rows()) != provenance.size()) {
    throw InputError("scatter_to_map: " + std::to_string(features.rows()) + " feature rows but " +
                     std::to_string(provenance.size()) + " provenance entries");
  }
  const PatchGrid& g0 = grids[0];
  for (const auto& g : grids) {
    if (g.rows != g0.rows || g.cols != g0.cols || g.samples_per_patch != g0.samples_per_patch) {
      throw InputError("scatter_to_map: frames have different patch grids");
    }
  }
  GeoFeatureMap map(static_cast<int>(grids.size()), static_cast<int>(features.cols()), g0.samples_per_patch, g0.rows,
                    g0.cols);
  std::vector<std::uint8_t> written(std::size_t(map.frames()) * g0.rows * g0.cols * g0.samples_per_patch, 0);
  auto slot_index = [&](const SampleSlot& s) {
    return ((std::size_t(s.frame) * g0.rows + s.h) * g0.cols + s.w) * g0.samples_per_patch + s.k;
  };
  for (std::size_t i = 0; i < provenance.size(); ++i) {
    const SampleSlot& s = provenance[i];
    if (s.frame < 0 || s.frame >= map.frames() || s.h < 0 || s.h >= g0.rows || s.w < 0 || s.w >= g0.cols || s.k < 0 ||
        s.k >= g0.samples_per_patch) {
      throw InputError("scatter_to_map: provenance entry " + std::to_string(i) + " is out of range");
    }
    if (!grids[s.frame].at(s.h, s.w).valid) {
      throw InputError("scatter_to_map: provenance entry " + std::to_string(i) + " targets an invalid patch");
    }
    auto& flag = written[slot_index(s)];
    if (flag) throw InputError("scatter_to_map: slot written twice by provenance entry " + std::to_string(i));
    flag = 1;
    for (int c = 0; c < map.channels(); ++c) map.at(s.frame, c, s.k, s.h, s.w) = features(i, c);
  }
  for (int f = 0; f < map.frames(); ++f) {
    for (int h = 0; h < g0.rows; ++h) {
      for (int w = 0; w < g0.cols; ++w) {
        const bool valid = grids[f].at(h, w).valid;
        map.set_patch_valid(f, h, w, valid);
        if (!valid) continue;
        for (int k = 0; k < g0.samples_per_patch; ++k) {
          if (!written[slot_index({f, h, w, k})]) {
            throw InputError("scatter_to_map: provenance gap at frame " + std::to_string(f) + " patch (" +
                             std::to_string(h) + "," + std::to_string(w) + ") sample " + std::to_string(k));
          }
        }
      }
    }
  }
  return map;
}

// Inverse of scatter_to_map over the slots of `provenance`.
inline Matrix flatten_map(const GeoFeatureMap& map, std::span<const SampleSlot> provenance) {
  Matrix out(static_cast<Eigen::Index>(provenance.size()), map.channels());
  for (std::size_t i = 0; i < provenance.size(); ++i) {
    const SampleSlot& s = provenance[i];
    for (int c = 0; c < map.channels(); ++c) out(i, c) = map.at(s.frame, c, s.k, s.h, s.w);
  }
  return out;
}

}  // namespace gsr
