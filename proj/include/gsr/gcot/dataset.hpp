#pragma once

#include <gsr/core/random.hpp>
#include <gsr/gcot/bev.hpp>
#include <gsr/gcot/generators.hpp>
#include <gsr/gcot/llm.hpp>
#include <gsr/gcot/scene_meta.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace gsr {

struct DatasetOptions {
  std::uint64_t seed = 0;
  int per_task = 4;  // draws per task per scene; duplicate questions are dropped
  std::vector<TaskKind> tasks{kAllTasks.begin(), kAllTasks.end()};
  double straight_thresh_deg = kStraightThresholdDeg;
  SceneMetadataOptions meta;
  double bev_mpp = 0.05;
  RetryPolicy retry;
  const TemplateCatalog* templates = nullptr;  // builtin when null
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Draws the question samples of one scene, without reasoning paths.
inline std::vector<QaSample> generate_questions(const SceneMetadata& meta, const DatasetOptions& opt) {
  const TemplateCatalog& tc = opt.templates ? *opt.templates : TemplateCatalog::builtin();
  std::vector<QaSample> out;
  for (TaskKind task : opt.tasks) {
    std::set<std::string> seen;
    int index = 0;
    for (int i = 0; i < opt.per_task; ++i) {
      Rng rng(derive_seed(opt.seed, fnv1a(meta.scene_id), static_cast<std::uint64_t>(task), i));
      std::optional<QaSample> q;
      switch (task) {
        case TaskKind::kObjectCount: q = gen_object_count(meta, rng, tc); break;
        case TaskKind::kAbsDistance: q = gen_abs_distance(meta, rng, tc); break;
        case TaskKind::kObjectSize: q = gen_object_size(meta, rng, tc); break;
        case TaskKind::kRoomSize: q = gen_room_size(meta, tc); break;
        case TaskKind::kRelDistance: q = gen_rel_distance(meta, rng, tc); break;
        case TaskKind::kRelDirection: q = gen_rel_direction(meta, rng, tc); break;
        case TaskKind::kAppearanceOrder: q = gen_appearance_order(meta, rng, tc); break;
        case TaskKind::kRoutePlan:
          if (!meta.trajectories.empty()) {
            const auto& traj = meta.trajectories[static_cast<std::size_t>(i) % meta.trajectories.size()];
            q = gen_route_plan(meta, traj, rng, opt.straight_thresh_deg, tc);
          }
          break;
      }
      if (!q || !seen.insert(q->question).second) continue;
      q->id = meta.scene_id + "/" + std::string(task_name(task)) + "/" + std::to_string(index++);
      out.push_back(std::move(*q));
    }
  }
  return out;
}

// Samples of one scene with reasoning paths requested for the tasks that
// carry them. The BEV map of each request shows the sample's own boxes.
inline std::vector<QaSample> generate_scene(const SceneMetadata& meta, const std::vector<Vec3>& cloud,
                                            CotBackend& backend, const DatasetOptions& opt) {
  const TemplateCatalog& tc = opt.templates ? *opt.templates : TemplateCatalog::builtin();
  auto samples = generate_questions(meta, opt);
  for (auto& q : samples) {
    if (!task_has_cot(q.task)) continue;
    std::vector<BevBox> boxes;
    for (const auto& g : q.groundings) {
      for (const auto& b : g.boxes) boxes.push_back({b, g.name});
    }
    std::optional<BevImage> bev;
    if (!cloud.empty() || !boxes.empty()) bev = render_bev(cloud, boxes, opt.bev_mpp);
    apply_cot(q, request_cot(backend, bev ? &*bev : nullptr, q, opt.retry, tc));
  }
  return samples;
}

// Runs `work(i)` for i in [0, n) on up to `jobs` threads. The first exception
// is rethrown after all threads stop.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& work) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline void write_jsonl(std::ostream& out, const std::vector<QaSample>& samples) {
  for (const auto& q : samples) out << to_json(q).dump() << '\n';
}

inline std::vector<QaSample> read_jsonl(std::istream& in, const std::string& path = "<stream>") {
  std::vector<QaSample> out;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t here = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(qa_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw FormatError(path, here, e.what());
    }
  }
  return out;
}

}  // namespace gsr
