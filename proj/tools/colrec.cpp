// Command-line front end: render synthetic datasets, evaluate the
// consistency losses, run multi-scale refinement, fuse depth maps and report
// reconstruction metrics.

#include "colrec/evaluation.hpp"
#include "colrec/fusion.hpp"
#include "colrec/geometry.hpp"
#include "colrec/illumination.hpp"
#include "colrec/image_io.hpp"
#include "colrec/losses.hpp"
#include "colrec/phantom.hpp"
#include "colrec/refinement.hpp"
#include "colrec/resample.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace colrec;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitIo = 3;

json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

struct SceneConfig {
  PhantomParams phantom;
  ViewType view = ViewType::kDownTheBarrel;
  int frames = 10;
  uint64_t seed = 1;
  double mu = 2.0;
  Intrinsics intrinsics;
};

SceneConfig ParseSceneConfig(const json& root) {
  SceneConfig scene;
  const json& s = root.contains("scene") ? root.at("scene") : root;
  if (s.contains("phantom")) {
    const Phantom parsed = Phantom::FromJson(s.at("phantom").dump());
    scene.phantom = parsed.params();
  }
  const std::string view = s.value("view", "down_the_barrel");
  if (view == "down_the_barrel") {
    scene.view = ViewType::kDownTheBarrel;
  } else if (view == "en_face") {
    scene.view = ViewType::kEnFace;
  } else {
    throw InvalidInputError("scene: unknown view type: " + view);
  }
  scene.frames = s.value("frames", 10);
  if (scene.frames < 1) {
    throw InvalidInputError("scene: frame count must be >= 1");
  }
  scene.seed = s.value("seed", uint64_t(1));
  if (root.contains("illumination")) {
    scene.mu = root.at("illumination").value("mu", 2.0);
  }
  scene.mu = s.value("mu", scene.mu);
  if (s.contains("intrinsics")) {
    scene.intrinsics = IntrinsicsFromJson(s.at("intrinsics").dump());
  } else {
    scene.intrinsics = Intrinsics{48.0, 48.0, 31.5, 31.5, 64, 64};
  }
  return scene;
}

LossWeights ParseLossWeights(const json& root) {
  LossWeights weights;
  if (root.contains("losses")) {
    const json& l = root.at("losses");
    weights.lambda1 = l.value("lambda1", weights.lambda1);
    weights.lambda2 = l.value("lambda2", weights.lambda2);
    weights.lambda3 = l.value("lambda3", weights.lambda3);
    weights.lambda4 = l.value("lambda4", weights.lambda4);
  }
  weights.Validate();
  return weights;
}

MaskOptions ParseMaskOptions(const json& root) {
  MaskOptions options;
  if (root.contains("losses")) {
    options.specular_threshold =
        root.at("losses").value("specular_threshold", 0.98);
    options.auto_mask = root.at("losses").value("auto_mask", true);
  }
  return options;
}

RefinementConfig ParseRefinementConfig(const json& root, double mu) {
  RefinementConfig config;
  config.mu = mu;
  if (root.contains("refinement")) {
    const json& r = root.at("refinement");
    config.iterations = r.value("iterations", config.iterations);
    config.w_shading = r.value("w_shading", config.w_shading);
    config.w_prior = r.value("w_prior", config.w_prior);
    config.w_smooth = r.value("w_smooth", config.w_smooth);
    config.lambda1 = r.value("lambda1", config.lambda1);
    config.lambda2 = r.value("lambda2", config.lambda2);
    config.max_optimizer_steps =
        r.value("max_optimizer_steps", config.max_optimizer_steps);
  }
  return config;
}

struct Dataset {
  SceneConfig scene;
  std::optional<Phantom> phantom;
  std::vector<TrajectoryEntry> trajectory;
  fs::path dir;

  fs::path ImagePath(const std::string& id) const { return dir / (id + ".png"); }
  fs::path DepthPath(const std::string& id) const {
    return dir / (id + "_depth.pfm");
  }
  fs::path NormalsPath(const std::string& id) const {
    return dir / (id + "_normals.pfm");
  }
};

Dataset LoadDataset(const std::string& dir) {
  Dataset data;
  data.dir = dir;
  const json manifest = LoadJsonFile((fs::path(dir) / "manifest.json").string());
  data.scene = ParseSceneConfig(manifest);
  if (manifest.contains("scene") && manifest.at("scene").contains("phantom")) {
    data.phantom = Phantom::FromJson(manifest.at("scene").at("phantom").dump());
  }
  data.trajectory = ReadTrajectory((fs::path(dir) / "trajectory.txt").string());
  return data;
}

const TrajectoryEntry& FindFrame(const Dataset& data, const std::string& id) {
  for (const TrajectoryEntry& e : data.trajectory) {
    if (e.frame_id == id) return e;
  }
  throw IoError("frame not found in trajectory: " + id);
}

/// Deterministic frame-parallel loop: outputs are per-frame files, so the
/// schedule cannot affect the result.
void ParallelFrames(size_t count, int jobs,
                    const std::function<void(size_t)>& body) {
  if (jobs <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const int n_workers = int(std::min<size_t>(size_t(jobs), count));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// render

int CmdRender(const std::string& config_path, const std::string& out_dir,
              int jobs) {
  const json config = LoadJsonFile(config_path);
  const SceneConfig scene = ParseSceneConfig(config);
  const Phantom phantom(scene.phantom);
  scene.intrinsics.Validate();

  const Trajectory trajectory =
      MakeTrajectory(phantom, scene.view, scene.frames, scene.seed);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  json manifest;
  manifest["scene"]["phantom"] = json::parse(phantom.ToJson());
  manifest["scene"]["view"] =
      scene.view == ViewType::kDownTheBarrel ? "down_the_barrel" : "en_face";
  manifest["scene"]["frames"] = scene.frames;
  manifest["scene"]["seed"] = scene.seed;
  manifest["scene"]["mu"] = scene.mu;
  manifest["scene"]["intrinsics"] =
      json::parse(IntrinsicsToJson(scene.intrinsics));
  for (const TrajectoryEntry& e : trajectory.entries) {
    manifest["frames"].push_back(e.frame_id);
  }
  WriteTextFile((out / "manifest.json").string(), manifest.dump(2));
  WriteTrajectory((out / "trajectory.txt").string(), trajectory.entries);

  ParallelFrames(trajectory.entries.size(), jobs, [&](size_t i) {
    const TrajectoryEntry& entry = trajectory.entries[i];
    const RenderedFrame frame =
        RenderFrame(phantom, entry.pose, scene.intrinsics, scene.mu);
    WritePng((out / (entry.frame_id + ".png")).string(), frame.image);
    WritePfm((out / (entry.frame_id + "_depth.pfm")).string(), frame.depth);
    WritePfm((out / (entry.frame_id + "_normals.pfm")).string(), frame.normals);
  });
  std::cout << "rendered " << trajectory.entries.size() << " frames to "
            << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// losses

int CmdLosses(const std::string& config_path, const std::string& data_dir,
              const std::string& target_id, const std::string& source_id,
              bool dump_maps, const std::string& out_path) {
  const json config =
      config_path.empty() ? json::object() : LoadJsonFile(config_path);
  const Dataset data = LoadDataset(data_dir);
  const LossWeights weights = ParseLossWeights(config);
  const MaskOptions mask_options = ParseMaskOptions(config);

  const ImageRGB image_t = ReadPng(data.ImagePath(target_id).string());
  const ImageRGB image_s = ReadPng(data.ImagePath(source_id).string());
  const DepthMap depth_t = ReadPfmDepth(data.DepthPath(target_id).string());
  const DepthMap depth_s = ReadPfmDepth(data.DepthPath(source_id).string());
  const NormalMap normals_t =
      ReadPfmNormals(data.NormalsPath(target_id).string());
  const NormalMap normals_s =
      ReadPfmNormals(data.NormalsPath(source_id).string());

  const Pose world_from_t = FindFrame(data, target_id).pose;
  const Pose world_from_s = FindFrame(data, source_id).pose;
  const Pose pose_t_to_s = Compose(Invert(world_from_s), world_from_t);

  InitLossInputs inputs;
  inputs.image_t = &image_t;
  inputs.depth_t = &depth_t;
  inputs.normals_t = &normals_t;
  inputs.intrinsics = data.scene.intrinsics;
  inputs.mask_options = mask_options;
  PairInputs pair;
  pair.image_s = &image_s;
  pair.depth_s = &depth_s;
  pair.normals_s = &normals_s;
  pair.pose_t_to_s = pose_t_to_s;
  inputs.sources.push_back(pair);

  Mask mask;
  const LossReport report = LossInitTotal(inputs, weights, &mask);
  if (out_path.empty()) {
    std::cout << report.ToJson() << "\n";
  } else {
    WriteTextFile(out_path, report.ToJson());
  }
  if (dump_maps) {
    const fs::path out(data.dir);
    WritePfm((out / (target_id + "_" + source_id + "_mask.pfm")).string(),
             mask);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// refine

struct MetricsAccumulator {
  std::vector<DepthMetrics> entries;

  void Add(const DepthMetrics& m) { entries.push_back(m); }

  json Aggregate() const {
    auto stats = [&](auto getter) {
      double mean = 0.0;
      for (const DepthMetrics& m : entries) mean += getter(m);
      mean /= double(entries.size());
      double var = 0.0;
      for (const DepthMetrics& m : entries) {
        const double d = getter(m) - mean;
        var += d * d;
      }
      const double stddev =
          entries.size() > 1 ? std::sqrt(var / double(entries.size() - 1)) : 0.0;
      return json{{"mean", mean}, {"std", stddev}};
    };
    json j;
    j["abs_rel"] = stats([](const DepthMetrics& m) { return m.abs_rel; });
    j["sq_rel"] = stats([](const DepthMetrics& m) { return m.sq_rel; });
    j["rmse"] = stats([](const DepthMetrics& m) { return m.rmse; });
    j["log_rmse"] = stats([](const DepthMetrics& m) { return m.log_rmse; });
    j["frames"] = entries.size();
    return j;
  }
};

int CmdRefine(const std::string& config_path, const std::string& data_dir,
              const std::string& init_source, int iterations,
              const std::string& out_dir, int jobs) {
  const json config =
      config_path.empty() ? json::object() : LoadJsonFile(config_path);
  const Dataset data = LoadDataset(data_dir);
  RefinementConfig refine_config = ParseRefinementConfig(config, data.scene.mu);
  if (iterations >= 0) refine_config.iterations = iterations;
  if (refine_config.iterations < 1) {
    throw InvalidInputError("refine: iterations must be >= 1");
  }
  const double flat_depth =
      config.contains("refinement")
          ? config.at("refinement").value("flat_depth", 1.0)
          : 1.0;

  const Intrinsics& K = data.scene.intrinsics;
  const int shrink = 1 << (refine_config.iterations - 1);
  refine_config.base_width = std::max(8, K.width / shrink);
  refine_config.base_height = std::max(8, K.height / shrink);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  std::vector<DepthMetrics> before(data.trajectory.size());
  std::vector<DepthMetrics> after(data.trajectory.size());
  ParallelFrames(data.trajectory.size(), jobs, [&](size_t i) {
    const std::string& id = data.trajectory[i].frame_id;
    const ImageRGB image = ReadPng(data.ImagePath(id).string());
    const DepthMap gt_depth = ReadPfmDepth(data.DepthPath(id).string());

    DepthMap init;
    if (init_source == "flat") {
      init = DepthMap(refine_config.base_width, refine_config.base_height,
                      flat_depth, true);
    } else {
      const fs::path path = fs::path(init_source) / (id + "_depth.pfm");
      init = ResizeDepthArea(ReadPfmDepth(path.string()),
                             refine_config.base_width,
                             refine_config.base_height);
    }

    const Mask full(gt_depth.width, gt_depth.height, 1.0);
    before[i] = ComputeDepthMetrics(
        ResizeDepthBilinear(init, gt_depth.width, gt_depth.height), gt_depth,
        full);

    const RefinementState state =
        RefineMultiscale(image, init, K, refine_config);
    for (size_t k = 0; k < state.iteration_depths.size(); ++k) {
      const std::string stem = id + "_iter" + std::to_string(k + 1);
      WritePfm((out / (stem + "_depth.pfm")).string(),
               state.iteration_depths[k]);
      WritePfm((out / (stem + "_normals.pfm")).string(),
               state.iteration_normals[k]);
    }
    std::ostringstream csv;
    csv << "iteration,step,energy\n";
    for (const EnergyStep& s : state.energy_steps) {
      csv << s.iteration << "," << s.step << "," << s.energy << "\n";
    }
    WriteTextFile((out / (id + "_energy.csv")).string(), csv.str());

    const DepthMap final_depth =
        (state.depth.width == gt_depth.width &&
         state.depth.height == gt_depth.height)
            ? state.depth
            : ResizeDepthBilinear(state.depth, gt_depth.width, gt_depth.height);
    WritePfm((out / (id + "_depth.pfm")).string(), final_depth);
    after[i] = ComputeDepthMetrics(final_depth, gt_depth, full);
  });

  MetricsAccumulator acc_before, acc_after;
  for (const DepthMetrics& m : before) acc_before.Add(m);
  for (const DepthMetrics& m : after) acc_after.Add(m);
  json report;
  report["init"] = init_source;
  report["iterations"] = refine_config.iterations;
  report["before"] = acc_before.Aggregate();
  report["after"] = acc_after.Aggregate();
  WriteTextFile((out / "refine_report.json").string(), report.dump(2));
  std::cout << report.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fuse

int CmdFuse(const std::string& data_dir, const std::string& depth_dir,
            double voxel_size, const std::string& out_dir) {
  const Dataset data = LoadDataset(data_dir);
  std::vector<PosedDepth> frames;
  for (const TrajectoryEntry& e : data.trajectory) {
    PosedDepth f;
    const fs::path depth_path =
        depth_dir.empty() ? data.DepthPath(e.frame_id)
                          : fs::path(depth_dir) / (e.frame_id + "_depth.pfm");
    f.depth = ReadPfmDepth(depth_path.string());
    f.world_from_camera = e.pose;
    frames.push_back(std::move(f));
  }
  if (frames.empty()) throw InvalidInputError("fuse: no frames in dataset");

  // Bounds from the backprojected observations.
  Vec3 lower = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 upper = -lower;
  for (const PosedDepth& f : frames) {
    for (int y = 0; y < f.depth.height; ++y) {
      for (int x = 0; x < f.depth.width; ++x) {
        if (!f.depth.IsValid(x, y)) continue;
        const Vec3 point =
            f.world_from_camera.rotation *
                Backproject(data.scene.intrinsics, Vec2(x, y), f.depth.At(x, y)) +
            f.world_from_camera.translation;
        lower = lower.cwiseMin(point);
        upper = upper.cwiseMax(point);
      }
    }
  }
  if (!(lower.x() < upper.x())) {
    throw EmptySupportError("fuse: no valid depth observations");
  }
  TsdfConfig tsdf_config = TsdfConfig::ForBounds(
      lower - Vec3::Constant(0.05 * (upper - lower).norm()),
      upper + Vec3::Constant(0.05 * (upper - lower).norm()), voxel_size);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  const VoxelGrid grid = FuseTsdf(frames, data.scene.intrinsics, tsdf_config);
  const TriangleMesh mesh = ExtractMesh(grid);
  WritePlyMesh((out / "mesh.ply").string(), mesh);
  std::cout << "mesh: " << mesh.vertices.size() << " vertices, "
            << mesh.triangles.size() << " triangles\n";

  if (data.phantom) {
    const CoverageMap coverage =
        ComputeCoverage(frames, data.scene.intrinsics, *data.phantom);
    WritePng((out / "coverage.png").string(), coverage.ToImage());
    WriteTextFile((out / "holes.json").string(), coverage.HolesToJson());
    std::cout << "coverage: " << coverage.CoverageFraction() << " ("
              << coverage.holes.size() << " holes)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

int CmdEvaluate(const std::string& pred_dir, const std::string& gt_dir,
                const std::string& report_path, const std::string& label) {
  const Dataset gt = LoadDataset(gt_dir);
  MetricsAccumulator acc;
  std::vector<std::string> missing;
  for (const TrajectoryEntry& e : gt.trajectory) {
    const fs::path pred_path =
        fs::path(pred_dir) / (e.frame_id + "_depth.pfm");
    if (!fs::exists(pred_path)) {
      missing.push_back(e.frame_id);
      continue;
    }
    const DepthMap gt_depth = ReadPfmDepth(gt.DepthPath(e.frame_id).string());
    DepthMap pred = ReadPfmDepth(pred_path.string());
    if (pred.width != gt_depth.width || pred.height != gt_depth.height) {
      pred = ResizeDepthBilinear(pred, gt_depth.width, gt_depth.height);
    }
    const Mask full(gt_depth.width, gt_depth.height, 1.0);
    acc.Add(ComputeDepthMetrics(pred, gt_depth, full));
  }
  if (!missing.empty()) {
    std::ostringstream oss;
    oss << "evaluate: prediction missing for frames:";
    for (const std::string& id : missing) oss << " " << id;
    throw IoError(oss.str());
  }
  if (acc.entries.empty()) {
    throw EmptySupportError("evaluate: no frames evaluated");
  }

  json report;
  report["method"] = label;
  report["depth"] = acc.Aggregate();

  // Optional mesh comparison when both sides carry a fused mesh.
  const fs::path pred_mesh = fs::path(pred_dir) / "mesh.ply";
  const fs::path gt_mesh = fs::path(gt_dir) / "mesh.ply";
  if (fs::exists(pred_mesh) && fs::exists(gt_mesh)) {
    const TriangleMesh mesh_pred = ReadPlyMesh(pred_mesh.string());
    const TriangleMesh mesh_gt = ReadPlyMesh(gt_mesh.string());
    const std::vector<Vec3> cloud_pred =
        SampleMeshSurface(mesh_pred, 100000, 7);
    const std::vector<Vec3> cloud_gt = SampleMeshSurface(mesh_gt, 100000, 7);

    // Camera centers give the correspondence for the rigid alignment.
    std::vector<Vec3> centers_pred, centers_gt;
    const fs::path pred_traj = fs::path(pred_dir) / "trajectory.txt";
    if (fs::exists(pred_traj)) {
      for (const TrajectoryEntry& e : ReadTrajectory(pred_traj.string())) {
        centers_pred.push_back(e.pose.translation);
      }
    }
    for (const TrajectoryEntry& e : gt.trajectory) {
      centers_gt.push_back(e.pose.translation);
    }
    AlignmentResult alignment;
    if (centers_pred.size() == centers_gt.size() && centers_pred.size() >= 3) {
      alignment = ProcrustesAlign(centers_pred, centers_gt);
    }
    std::vector<Vec3> aligned(cloud_pred.size());
    for (size_t i = 0; i < cloud_pred.size(); ++i) {
      aligned[i] = alignment.Apply(cloud_pred[i]);
    }
    const double optimal_scale =
        OptimizeScaleChamfer(cloud_gt, cloud_pred, alignment);
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : aligned) centroid += p;
    centroid /= double(aligned.size());
    const double relative = optimal_scale / alignment.scale;
    for (Vec3& p : aligned) p = centroid + relative * (p - centroid);
    const double chamfer =
        ChamferDistance(cloud_gt, aligned, ChamferDirection::kOneWay);
    report["chamfer"] = chamfer;
    report["alignment"] = json::parse(alignment.ToJson());
    report["chamfer_scale"] = optimal_scale;
  }

  if (!report_path.empty()) WriteTextFile(report_path, report.dump(2));
  std::cout << report.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

std::string FormatCell(const json& stats) {
  std::ostringstream oss;
  oss.precision(3);
  oss << std::fixed << stats.at("mean").get<double>();
  oss << " ± " << std::fixed << stats.at("std").get<double>();
  return oss.str();
}

int CmdReport(const std::vector<std::string>& inputs) {
  std::cout << "Method | Abs Rel | Sq Rel | RMSE | log RMSE | Chamfer\n";
  for (const std::string& path : inputs) {
    const json j = LoadJsonFile(path);
    const json& d = j.at("depth");
    std::cout << j.value("method", path) << " | " << FormatCell(d.at("abs_rel"))
              << " | " << FormatCell(d.at("sq_rel")) << " | "
              << FormatCell(d.at("rmse")) << " | "
              << FormatCell(d.at("log_rmse")) << " | ";
    if (j.contains("chamfer")) {
      std::ostringstream oss;
      oss.precision(3);
      oss << std::fixed << j.at("chamfer").get<double>();
      std::cout << oss.str();
    } else {
      std::cout << "-";
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surface-normal colonoscopy reconstruction toolkit"};
  app.require_subcommand(1);

  std::string default_config;
  if (const char* env = std::getenv("COLREC_CONFIG")) default_config = env;

  // render
  auto* render = app.add_subcommand("render", "render a synthetic dataset");
  std::string render_config = default_config, render_out;
  int render_jobs = 1;
  render->add_option("--config", render_config, "scene config JSON")
      ->required(default_config.empty());
  render->add_option("--out", render_out, "output directory")->required();
  render->add_option("--jobs", render_jobs, "frame-level parallelism");

  // losses
  auto* losses = app.add_subcommand("losses", "evaluate the pairwise losses");
  std::string losses_config = default_config, losses_data, losses_out;
  std::vector<std::string> pair_ids;
  bool dump_maps = false;
  losses->add_option("--config", losses_config, "config JSON");
  losses->add_option("--data", losses_data, "dataset directory")->required();
  losses->add_option("--pair", pair_ids, "target and source frame ids")
      ->expected(2)
      ->required();
  losses->add_flag("--dump-maps", dump_maps, "write per-pixel maps as PFM");
  losses->add_option("--out", losses_out, "report path (stdout if omitted)");

  // refine
  auto* refine = app.add_subcommand("refine", "run multi-scale refinement");
  std::string refine_config = default_config, refine_data, refine_out;
  std::string refine_init = "flat";
  int refine_iterations = -1, refine_jobs = 1;  // -1: defer to the config
  refine->add_option("--config", refine_config, "config JSON");
  refine->add_option("--data", refine_data, "dataset directory")->required();
  refine->add_option("--init", refine_init,
                     "'flat' or a directory of initial depth maps");
  refine->add_option("--iterations", refine_iterations,
                     "refinement iterations (overrides config)");
  refine->add_option("--out", refine_out, "output directory")->required();
  refine->add_option("--jobs", refine_jobs, "frame-level parallelism");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "fuse depth maps into a mesh");
  std::string fuse_data, fuse_depths, fuse_out;
  double fuse_voxel = 0.0;
  fuse->add_option("--frames", fuse_data, "dataset directory")->required();
  fuse->add_option("--depths", fuse_depths,
                   "directory of depth maps (dataset depths if omitted)");
  fuse->add_option("--voxel-size", fuse_voxel, "voxel size (auto if omitted)");
  fuse->add_option("--out", fuse_out, "output directory")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "depth + mesh metrics");
  std::string eval_pred, eval_gt, eval_report, eval_label = "method";
  evaluate->add_option("--pred", eval_pred, "prediction directory")->required();
  evaluate->add_option("--gt", eval_gt, "ground-truth dataset directory")
      ->required();
  evaluate->add_option("--report", eval_report, "JSON report path");
  evaluate->add_option("--label", eval_label, "method label for the report");

  // report
  auto* report = app.add_subcommand("report", "print a metrics table");
  std::vector<std::string> report_inputs;
  report->add_option("inputs", report_inputs, "evaluate JSON reports")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed()) {
      return CmdRender(render_config, render_out, render_jobs);
    }
    if (losses->parsed()) {
      return CmdLosses(losses_config, losses_data, pair_ids[0], pair_ids[1],
                       dump_maps, losses_out);
    }
    if (refine->parsed()) {
      return CmdRefine(refine_config, refine_data, refine_init,
                       refine_iterations, refine_out, refine_jobs);
    }
    if (fuse->parsed()) {
      return CmdFuse(fuse_data, fuse_depths, fuse_voxel, fuse_out);
    }
    if (evaluate->parsed()) {
      return CmdEvaluate(eval_pred, eval_gt, eval_report, eval_label);
    }
    if (report->parsed()) {
      return CmdReport(report_inputs);
    }
  } catch (const EmptySupportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
