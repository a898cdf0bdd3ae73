#include "gsr/cli.hpp"

#include <gsr/align/scale.hpp>
#include <gsr/eval/report.hpp>
#include <gsr/gcot/dataset.hpp>
#include <gsr/gcot/llm_http.hpp>
#include <gsr/gcot/png.hpp>
#include <gsr/patch/feature_io.hpp>
#include <gsr/patch/pipeline.hpp>
#include <gsr/scene/bundle_io.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <tuple>

namespace gsr::cli {
namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string axis_status(const SceneBundle& b) {
  if (b.axis_align_applied) return "applied";
  return b.axis_align ? "given" : "none";
}

std::size_t valid_points(const SceneBundle& b) {
  std::size_t n = 0;
  for (const auto& f : b.frames) n += f.depth.valid_count();
  return n;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<QaSample> read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path, 0, "cannot open file");
  return read_jsonl(in, path);
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> scenes;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  for (const auto& dir : a.scenes) {
    const SceneBundle b = read_bundle(dir);
    out << "scene " << b.scene_id << ": " << b.frames.size() << " frames, " << b.objects.size() << " objects, "
        << valid_points(b) << " points, axis-align " << axis_status(b) << ", " << b.trajectories.size()
        << " trajectories\n";
  }
  return kExitOk;
}

// ---- encode ----------------------------------------------------------------

struct EncodeArgs {
  std::string scene;
  std::string output;
  std::string weights;
  std::optional<std::uint64_t> seed_weights;
  std::string save_weights;
  std::string semantic;
  HybridConfig cfg;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  if (a.weights.empty() == !a.seed_weights) {
    throw UsageError("encode: give exactly one of --weights or --seed-weights");
  }
  const SceneBundle b = read_bundle(a.scene);
  const auto specs = hybrid_weight_specs(a.cfg);
  const WeightStore w = a.seed_weights ? seeded_weights(specs, *a.seed_weights) : load_weights(a.weights);
  if (!a.save_weights.empty()) save_weights(w, a.save_weights);

  std::unique_ptr<SemanticEncoder> sem;
  if (a.semantic.empty()) {
    sem = std::make_unique<DescriptorSemanticEncoder>(w.get("semantic.proj", kDescriptorWidth, a.cfg.semantic_dim));
  } else {
    sem = std::make_unique<PrecomputedSemanticEncoder>(load_weights(a.semantic), a.cfg.semantic_dim);
  }
  const HybridFeatures h = build_hybrid_features(b, a.cfg, w, *sem);
  write_feature_file(to_feature_file(h), a.output);
  out << "wrote " << a.output << ": " << h.frames << " x " << h.rows << " x " << h.cols << " = " << h.token_count()
      << " tokens of width " << h.dim << "\n";
  return kExitOk;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  std::vector<std::string> scenes;
  std::string output;
  std::uint64_t seed = 0;
  int per_task = 4;
  std::vector<std::string> tasks;
  std::string llm = "mock";
  std::string llm_url;
  std::string llm_key;
  std::string llm_model = "gpt-4o";
  int max_in_flight = 4;
  int retry_delay_ms = 500;
  int jobs = 1;
  std::string templates;
  long area_thresh = kDefaultAreaThreshold;
  double straight_thresh = kStraightThresholdDeg;
  double alpha = kDefaultAlpha;
  double bev_mpp = 0.05;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  if (a.llm != "mock" && a.llm != "http") throw UsageError("gen: --llm must be mock or http");
  std::optional<TemplateCatalog> catalog;
  if (!a.templates.empty()) catalog = TemplateCatalog::with_overrides(a.templates);

  DatasetOptions opt;
  opt.seed = a.seed;
  opt.per_task = a.per_task;
  if (!a.tasks.empty()) {
    opt.tasks.clear();
    for (const auto& t : a.tasks) opt.tasks.push_back(parse_task(t));
  }
  opt.straight_thresh_deg = a.straight_thresh;
  opt.meta.area_thresh = a.area_thresh;
  opt.meta.alpha = a.alpha;
  opt.bev_mpp = a.bev_mpp;
  opt.retry.initial_delay = std::chrono::milliseconds(a.retry_delay_ms);
  opt.templates = catalog ? &*catalog : nullptr;

  std::unique_ptr<HttpCotBackend> http;
  if (a.llm == "http") {
    http = std::make_unique<HttpCotBackend>(HttpEndpoint{a.llm_url, a.llm_key, a.llm_model, a.max_in_flight, 120});
  }

  std::vector<std::vector<QaSample>> per_scene(a.scenes.size());
  parallel_for(a.scenes.size(), a.jobs, [&](std::size_t i) {
    const SceneBundle b = read_bundle(a.scenes[i]);
    const auto cloud = scene_cloud(b, opt.meta.voxel);
    const SceneMetadata meta = scene_metadata(b, &cloud, opt.meta);
    MockCotBackend mock;
    CotBackend& backend = http ? static_cast<CotBackend&>(*http) : mock;
    per_scene[i] = generate_scene(meta, cloud, backend, opt);
  });

  std::ostringstream text;
  std::map<std::string, int> counts;
  int with_cot = 0, failed = 0;
  for (const auto& samples : per_scene) {
    write_jsonl(text, samples);
    for (const auto& q : samples) {
      ++counts[std::string(task_name(q.task))];
      with_cot += q.cot.has_value();
      failed += q.cot_status == CotStatus::kFailed || q.cot_status == CotStatus::kRejected;
    }
  }
  write_text(a.output, text.str());
  std::size_t total = 0;
  for (const auto& s : per_scene) total += s.size();
  out << "wrote " << total << " samples to " << a.output << " (" << with_cot << " with reasoning, " << failed
      << " without after backend failure)\n";
  for (const auto& [task, n] : counts) out << "  " << task << ": " << n << "\n";
  return kExitOk;
}

// ---- bev -------------------------------------------------------------------

struct BevArgs {
  std::string scene;
  std::string output;
  std::string png;
  double mpp = 0.05;
};

int cmd_bev(const BevArgs& a, std::ostream& out) {
  const SceneBundle b = read_bundle(a.scene);
  const auto cloud = scene_cloud(b, 0.02);
  std::vector<BevBox> boxes;
  for (const auto& o : b.objects) boxes.push_back({o.box, o.category});
  const BevImage bev = render_bev(cloud, boxes, a.mpp);
  write_bev_ppm(bev, a.output);
  if (!a.png.empty()) write_bytes(a.png, encode_png(bev.image));
  out << "wrote " << a.output << ": " << bev.width << " x " << bev.height << " px at " << a.mpp << " m/px\n";
  for (const auto& [cat, c] : bev.color_key) out << "  " << color_hex(c) << " " << cat << "\n";
  return kExitOk;
}

// ---- align -----------------------------------------------------------------

struct AlignArgs {
  std::string src;
  std::string ref;
  std::string output;
  double trim = 0.0;
};

// Camera-frame point pairs for pixels with depth in both bundles.
std::vector<PointPair> camera_pairs(const SceneBundle& src, const SceneBundle& ref) {
  if (src.frames.size() != ref.frames.size()) {
    throw InputError("align: bundles have different frame counts (" + std::to_string(src.frames.size()) + " vs " +
                     std::to_string(ref.frames.size()) + ")");
  }
  std::vector<PointPair> pairs;
  for (std::size_t f = 0; f < src.frames.size(); ++f) {
    const DepthMap& ds = src.frames[f].depth;
    const DepthMap& dr = ref.frames[f].depth;
    if (ds.width != dr.width || ds.height != dr.height) {
      throw InputError("align: frame " + std::to_string(f) + " has different resolutions");
    }
    for (int v = 0; v < ds.height; ++v) {
      for (int u = 0; u < ds.width; ++u) {
        const std::size_t i = ds.index(u, v);
        if (!ds.valid[i] || !dr.valid[i]) continue;
        pairs.push_back({unproject_pixel(src.intrinsics, u, v, ds.values[i]),
                         unproject_pixel(ref.intrinsics, u, v, dr.values[i]), static_cast<int>(f)});
      }
    }
  }
  if (pairs.empty()) throw InputError("align: no pixel has depth in both bundles");
  return pairs;
}

int cmd_align(const AlignArgs& a, std::ostream& out, std::ostream& err) {
  const SceneBundle src = read_bundle(a.src);
  const SceneBundle ref = read_bundle(a.ref);
  const auto pairs = camera_pairs(src, ref);
  ScaleOptions opt;
  opt.trim_fraction = a.trim;
  const ScaleFit fit = solve_scale(pairs, opt);
  for (const auto& w : fit.warnings) err << "warning: " << w << "\n";
  const nlohmann::json j{{"scale", fit.scale},
                         {"residual", fit.residual},
                         {"rms", std::sqrt(fit.residual / static_cast<double>(fit.pairs_used))},
                         {"pairs", pairs.size()},
                         {"pairs_used", fit.pairs_used},
                         {"clamped", fit.clamped},
                         {"warnings", fit.warnings}};
  const std::string text = j.dump(2) + "\n";
  if (!a.output.empty()) write_text(a.output, text);
  out << text;
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string gt;
  std::string pred;
  bool self = false;
  bool json = false;
  std::string output;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.pred.empty() == !a.self) throw UsageError("eval: give exactly one of --pred or --self");
  const auto gt = read_samples(a.gt);
  std::map<std::string, std::string> predictions;
  if (a.self) {
    for (const auto& q : gt) predictions[q.id] = q.response;
  } else {
    std::ifstream in(a.pred);
    if (!in) throw FormatError(a.pred, 0, "cannot open file");
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
      const std::size_t here = offset;
      offset += line.size() + 1;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        predictions[j.at("id").get<std::string>()] = j.at("prediction").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(a.pred, here, e.what());
      }
    }
  }
  const EvalReport rep = evaluate(gt, predictions);
  const std::string js = report_json(rep).dump(2) + "\n";
  if (!a.output.empty()) write_text(a.output, js);
  out << (a.json ? js : report_table(rep));
  return kExitOk;
}

bool on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& s : args) {
    if (s == flag || s.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grounded spatial reasoning toolkit: scene ingest, patch features, dataset generation and scoring"};
  app.name(args.empty() ? "gsr" : args[0]);
  app.set_config("--config", "", "Read options from a TOML or INI file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();  // --config may follow the subcommand

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate scene bundles and print a summary");
  c_ingest->add_option("scenes", ingest.scenes, "Bundle directories")->required()->check(CLI::ExistingDirectory);

  EncodeArgs enc;
  auto* c_enc = app.add_subcommand("encode", "Compute patch-level hybrid features and write a GSR1 file");
  c_enc->add_option("scene", enc.scene, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  c_enc->add_option("-o,--output", enc.output, "Output feature file")->required();
  c_enc->add_option("--weights", enc.weights, "GSW1 weight file")->check(CLI::ExistingFile);
  c_enc->add_option("--seed-weights", enc.seed_weights, "Initialize weights from this seed instead of a file");
  c_enc->add_option("--save-weights", enc.save_weights, "Also write the weights used to this GSW1 file");
  c_enc->add_option("--semantic", enc.semantic,
                    "GSW1 file with precomputed per-frame semantic features (semantic.frameNNNN)")
      ->check(CLI::ExistingFile);
  c_enc->add_option("-p,--patch", enc.cfg.patch_size, "Patch size in pixels")->capture_default_str();
  c_enc->add_option("-k,--samples", enc.cfg.samples_per_patch, "Points sampled per patch")->capture_default_str();
  c_enc->add_option("-d,--dim", enc.cfg.model_dim, "Output feature width (multiple of 6)")->capture_default_str();
  c_enc->add_option("--semantic-dim", enc.cfg.semantic_dim, "Semantic feature width")->capture_default_str();
  c_enc->add_option("--sample-seed", enc.cfg.sample_seed, "Seed of the per-patch point sampling")
      ->capture_default_str();

  GenArgs gen;
  std::string tasks_csv;
  auto* c_gen = app.add_subcommand("gen", "Generate question/answer samples with grounded reasoning as JSONL");
  c_gen->add_option("scenes", gen.scenes, "Bundle directories")->required()->check(CLI::ExistingDirectory);
  c_gen->add_option("-o,--output", gen.output, "Output JSONL file")->required();
  c_gen->add_option("--seed", gen.seed, "Root random seed (required)")->required();
  c_gen->add_option("--per-task", gen.per_task, "Draws per task and scene")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  c_gen->add_option("--tasks", tasks_csv, "Comma-separated task subset (default: all eight)");
  c_gen->add_option("--llm", gen.llm, "Reasoning backend: mock or http")->capture_default_str();
  c_gen->add_option("--llm-url", gen.llm_url, "Chat-completions base URL [env GST_LLM_URL]");
  c_gen->add_option("--llm-key", gen.llm_key, "API key [env GST_LLM_KEY]");
  c_gen->add_option("--llm-model", gen.llm_model, "Model name sent to the endpoint")->capture_default_str();
  c_gen->add_option("--max-in-flight", gen.max_in_flight, "Concurrent requests per endpoint")->capture_default_str();
  c_gen->add_option("--retry-delay-ms", gen.retry_delay_ms, "First retry delay; doubles per attempt")
      ->capture_default_str();
  c_gen->add_option("-j,--jobs", gen.jobs, "Scenes processed in parallel")->capture_default_str();
  c_gen->add_option("--templates", gen.templates, "JSON file overriding question templates")
      ->check(CLI::ExistingFile);
  c_gen->add_option("--area-thresh", gen.area_thresh, "Mask area (pixels) for first appearance")
      ->capture_default_str();
  c_gen->add_option("--straight-thresh", gen.straight_thresh, "Heading change (degrees) still counted as straight")
      ->capture_default_str();
  c_gen->add_option("--alpha", gen.alpha, "Alpha-shape radius for room area (meters)")->capture_default_str();
  c_gen->add_option("--bev-mpp", gen.bev_mpp, "Bird's-eye map resolution (meters per pixel)")->capture_default_str();

  BevArgs bev;
  auto* c_bev = app.add_subcommand("bev", "Render a bird's-eye map with all object boxes");
  c_bev->add_option("scene", bev.scene, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  c_bev->add_option("-o,--output", bev.output, "Output PPM file")->required();
  c_bev->add_option("--png", bev.png, "Also write a PNG copy");
  c_bev->add_option("--mpp", bev.mpp, "Meters per pixel")->capture_default_str();

  AlignArgs align;
  auto* c_align = app.add_subcommand("align", "Solve the metric scale between two reconstructions of one scene");
  c_align->add_option("src", align.src, "Scale-free bundle")->required()->check(CLI::ExistingDirectory);
  c_align->add_option("ref", align.ref, "Metric bundle")->required()->check(CLI::ExistingDirectory);
  c_align->add_option("-o,--output", align.output, "Also write the JSON report here");
  c_align->add_option("--trim", align.trim, "Fraction of worst pairs dropped before a second solve")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.9));

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Score predicted responses against generated ground truth");
  c_eval->add_option("--gt", ev.gt, "Ground-truth JSONL from gen")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--pred", ev.pred, "Predictions JSONL (id, prediction)")->check(CLI::ExistingFile);
  c_eval->add_flag("--self", ev.self, "Score the ground-truth responses against themselves");
  c_eval->add_flag("--json", ev.json, "Print the JSON report instead of the table");
  c_eval->add_option("-o,--output", ev.output, "Also write the JSON report here");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  // Environment variables sit between flags and the config file.
  for (auto [flag, env, dest] : {std::tuple{"--llm-url", "GST_LLM_URL", &gen.llm_url},
                                 std::tuple{"--llm-key", "GST_LLM_KEY", &gen.llm_key}}) {
    if (on_command_line(args, flag)) continue;
    if (const char* v = std::getenv(env); v && *v) *dest = v;
  }
  if (!tasks_csv.empty()) {
    std::stringstream ss(tasks_csv);
    for (std::string t; std::getline(ss, t, ',');) {
      if (!t.empty()) gen.tasks.push_back(t);
    }
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, out);
    if (c_enc->parsed()) return cmd_encode(enc, out);
    if (c_gen->parsed()) return cmd_gen(gen, out);
    if (c_bev->parsed()) return cmd_bev(bev, out);
    if (c_align->parsed()) return cmd_align(align, out, err);
    if (c_eval->parsed()) return cmd_eval(ev, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantError& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace gsr::cli
