#pragma once

#include <gsr/core/error.hpp>
#include <gsr/patch/point_set.hpp>

#include <string>

namespace gsr {

// semantic: D_s x D; geometric: (C_out + C) x D.
struct FuseWeights {
  Matrix semantic;
  Matrix geometric;
};

struct HybridPatchFeature {
  RowVector hybrid;          // D
  RowVector semantic_term;   // semantic * P_sem
  RowVector geometric_term;  // concat(geo_sem, geo_pos) * P_geo
  RowVector positional;      // pe
};

// hybrid = semantic P_sem + pe + concat(geo_sem, geo_pos) P_geo.
inline HybridPatchFeature fuse(const RowVector& semantic, const RowVector& geo_sem, const RowVector& geo_pos,
                               const RowVector& pe, const FuseWeights& w) {
  if (semantic.size() != w.semantic.rows()) throw InputError("fuse: semantic width does not match projection");
  if (geo_sem.size() + geo_pos.size() != w.geometric.rows()) {
    throw InputError("fuse: geometric widths " + std::to_string(geo_sem.size()) + "+" +
                     std::to_string(geo_pos.size()) + " do not match projection rows " +
                     std::to_string(w.geometric.rows()));
  }
  if (w.semantic.cols() != w.geometric.cols() || pe.size() != w.semantic.cols()) {
    throw InputError("fuse: output dimensions disagree");
  }
  RowVector geo(geo_sem.size() + geo_pos.size());
  geo << geo_sem, geo_pos;
  HybridPatchFeature out;
  out.semantic_term = semantic * w.semantic;
  out.geometric_term = geo * w.geometric;
  out.positional = pe;
  out.hybrid = out.semantic_term + out.positional + out.geometric_term;
  return out;
}

}  // namespace gsr
