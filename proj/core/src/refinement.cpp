#include "colrec/refinement.hpp"

#include "colrec/resample.hpp"

#include <algorithm>
#include <cmath>

namespace colrec {

void RefinementConfig::Validate() const {
  if (iterations < 1) {
    throw InvalidInputError("refinement: iterations must be >= 1");
  }
  if (base_width < 3 || base_height < 3) {
    throw InvalidInputError("refinement: base resolution too small");
  }
  if (w_shading < 0 || w_prior < 0 || w_smooth < 0 || lambda1 < 0 ||
      lambda2 < 0) {
    throw InvalidInputError("refinement: weights must be non-negative");
  }
  if (max_optimizer_steps < 1) {
    throw InvalidInputError("refinement: optimizer step cap must be >= 1");
  }
  if (mu < 0) throw InvalidInputError("refinement: mu must be non-negative");
}

namespace {

constexpr double kCharbonnierEps = 1e-4;

double Charbonnier(double v) {
  return std::sqrt(v * v + kCharbonnierEps * kCharbonnierEps);
}

double CharbonnierGrad(double v) {
  return v / std::sqrt(v * v + kCharbonnierEps * kCharbonnierEps);
}

struct EnergyTerms {
  double shading = 0.0;
  double prior = 0.0;
  double smooth = 0.0;
};

EnergyTerms ComputeEnergyTerms(const ImageRGB& image, const LightField& field,
                               const NormalMap& normals,
                               const NormalMap& normals_in, double albedo) {
  EnergyTerms t;
  size_t n_pixels = 0;
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const size_t i = field.Index(x, y);
      if (!field.validity[i] || !normals.IsValid(x, y)) continue;
      ++n_pixels;
      const double cosine =
          std::max(0.0, normals.At(x, y).dot(field.directions[i]));
      const double shade =
          std::clamp(albedo * field.attenuation[i] * cosine, 0.0, 1.0);
      const double r = image.At(x, y).mean() - shade;
      t.shading += r * r;
      const Vec3 d = normals.At(x, y) - normals_in.At(x, y);
      t.prior += Charbonnier(d.x()) + Charbonnier(d.y()) + Charbonnier(d.z());
    }
  }
  size_t n_edges = 0;
  for (int y = 0; y < normals.height; ++y) {
    for (int x = 0; x < normals.width; ++x) {
      if (!normals.IsValid(x, y)) continue;
      if (x + 1 < normals.width && normals.IsValid(x + 1, y)) {
        const Vec3 d = normals.At(x + 1, y) - normals.At(x, y);
        t.smooth += Charbonnier(d.x()) + Charbonnier(d.y()) + Charbonnier(d.z());
        ++n_edges;
      }
      if (y + 1 < normals.height && normals.IsValid(x, y + 1)) {
        const Vec3 d = normals.At(x, y + 1) - normals.At(x, y);
        t.smooth += Charbonnier(d.x()) + Charbonnier(d.y()) + Charbonnier(d.z());
        ++n_edges;
      }
    }
  }
  if (n_pixels > 0) {
    t.shading /= double(n_pixels);
    t.prior /= double(n_pixels);
  }
  if (n_edges > 0) t.smooth /= double(n_edges);
  return t;
}

std::vector<Vec3> EnergyGradient(const ImageRGB& image,
                                 const LightField& field,
                                 const NormalMap& normals,
                                 const NormalMap& normals_in, double albedo,
                                 const RefinementConfig& config) {
  const size_t count = size_t(field.width) * field.height;
  std::vector<Vec3> grad(count, Vec3::Zero());
  size_t n_pixels = 0, n_edges = 0;
  for (size_t i = 0; i < count; ++i) {
    if (field.validity[i] && normals.validity[i]) ++n_pixels;
  }
  for (int y = 0; y < normals.height; ++y) {
    for (int x = 0; x < normals.width; ++x) {
      if (!normals.IsValid(x, y)) continue;
      if (x + 1 < normals.width && normals.IsValid(x + 1, y)) ++n_edges;
      if (y + 1 < normals.height && normals.IsValid(x, y + 1)) ++n_edges;
    }
  }
  const double pixel_scale = n_pixels > 0 ? 1.0 / double(n_pixels) : 0.0;
  const double edge_scale = n_edges > 0 ? 1.0 / double(n_edges) : 0.0;

  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const size_t i = field.Index(x, y);
      if (!field.validity[i] || !normals.IsValid(x, y)) continue;
      const Vec3& n = normals.At(x, y);
      const Vec3& f = field.directions[i];
      const double raw = albedo * field.attenuation[i] * n.dot(f);
      const double shade = std::clamp(raw, 0.0, 1.0);
      const double r = image.At(x, y).mean() - shade;
      if (raw > 0.0 && raw < 1.0) {
        grad[i] += config.w_shading * pixel_scale * (-2.0 * r) * albedo *
                   field.attenuation[i] * f;
      }
      const Vec3 d = n - normals_in.At(x, y);
      grad[i] += config.w_prior * pixel_scale *
                 Vec3(CharbonnierGrad(d.x()), CharbonnierGrad(d.y()),
                      CharbonnierGrad(d.z()));
    }
  }
  for (int y = 0; y < normals.height; ++y) {
    for (int x = 0; x < normals.width; ++x) {
      if (!normals.IsValid(x, y)) continue;
      const size_t i = normals.Index(x, y);
      auto add_pair = [&](int x2, int y2) {
        const size_t j = normals.Index(x2, y2);
        const Vec3 d = normals.At(x2, y2) - normals.At(x, y);
        const Vec3 g(CharbonnierGrad(d.x()), CharbonnierGrad(d.y()),
                     CharbonnierGrad(d.z()));
        grad[j] += config.w_smooth * edge_scale * g;
        grad[i] -= config.w_smooth * edge_scale * g;
      };
      if (x + 1 < normals.width && normals.IsValid(x + 1, y)) add_pair(x + 1, y);
      if (y + 1 < normals.height && normals.IsValid(x, y + 1)) add_pair(x, y + 1);
    }
  }
  return grad;
}

double TotalEnergy(const EnergyTerms& t, const RefinementConfig& config) {
  return config.w_shading * t.shading + config.w_prior * t.prior +
         config.w_smooth * t.smooth;
}

}  // namespace

double RefinementEnergy(const ImageRGB& image, const LightField& field,
                        const NormalMap& normals, const NormalMap& normals_in,
                        double albedo, const RefinementConfig& config) {
  return TotalEnergy(
      ComputeEnergyTerms(image, field, normals, normals_in, albedo), config);
}

NormalMap RefineIteration(const ImageRGB& image, const LightField& field,
                          const NormalMap& normals_in,
                          const RefinementConfig& config,
                          std::vector<double>* energy_trace) {
  config.Validate();
  if (image.width != field.width || image.height != field.height ||
      normals_in.width != field.width || normals_in.height != field.height) {
    throw InvalidInputError("refinement: dimension mismatch");
  }
  field.Validate();
  const double albedo = EstimateAlbedo(image, normals_in, field);

  NormalMap current = normals_in;
  double energy =
      RefinementEnergy(image, field, current, normals_in, albedo, config);
  if (!std::isfinite(energy)) {
    throw SolverError("refinement: non-finite initial energy");
  }
  if (energy_trace) energy_trace->push_back(energy);

  // The energy is a per-pixel mean, so gradients scale like 1/pixel_count;
  // let the line search find the natural step size instead of capping it.
  double step_size = 0.25 * double(std::max<size_t>(1, image.pixels.size()));
  constexpr double kMinStep = 1e-12;
  for (int step = 0; step < config.max_optimizer_steps; ++step) {
    const std::vector<Vec3> grad =
        EnergyGradient(image, field, current, normals_in, albedo, config);
    // Riemannian gradient: project onto the tangent plane of the sphere.
    NormalMap candidate = current;
    bool accepted = false;
    while (step_size >= kMinStep) {
      for (size_t i = 0; i < current.vectors.size(); ++i) {
        if (!current.validity[i]) continue;
        const Vec3& n = current.vectors[i];
        const Vec3 tangent = grad[i] - n.dot(grad[i]) * n;
        Vec3 moved = n - step_size * tangent;
        const double len = moved.norm();
        candidate.vectors[i] = len > 1e-12 ? Vec3(moved / len) : n;
      }
      const double cand_energy =
          RefinementEnergy(image, field, candidate, normals_in, albedo, config);
      if (!std::isfinite(cand_energy)) {
        throw SolverError("refinement: non-finite energy during line search");
      }
      if (cand_energy < energy) {
        current = candidate;
        energy = cand_energy;
        if (energy_trace) energy_trace->push_back(energy);
        step_size *= 1.5;
        accepted = true;
        break;
      }
      step_size *= 0.5;
    }
    if (!accepted) break;  // converged: no descent direction at any step size
  }
  return current;
}

Intrinsics IntrinsicsForSize(const Intrinsics& K, int width, int height) {
  Intrinsics out = K;
  const double sx = double(width) / K.width;
  const double sy = double(height) / K.height;
  out.fx = K.fx * sx;
  out.fy = K.fy * sy;
  out.cx = (K.cx + 0.5) * sx - 0.5;
  out.cy = (K.cy + 0.5) * sy - 0.5;
  out.width = width;
  out.height = height;
  if (out.cx < 0.0) out.cx = 0.0;
  if (out.cy < 0.0) out.cy = 0.0;
  return out;
}

RefinementState RefineMultiscale(const ImageRGB& image,
                                 const DepthMap& depth_init,
                                 const Intrinsics& intrinsics,
                                 const RefinementConfig& config) {
  config.Validate();
  depth_init.Validate();
  if (depth_init.width != config.base_width ||
      depth_init.height != config.base_height) {
    throw InvalidInputError("refinement: depth init must be at base resolution");
  }

  RefinementState state;
  state.depth = depth_init;
  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    state.scale_index = iteration;
    const int w = state.depth.width, h = state.depth.height;
    const ImageRGB scaled_image =
        (w == image.width && h == image.height)
            ? image
            : ResizeImageArea(image, w, h);
    const Intrinsics scaled_K = IntrinsicsForSize(intrinsics, w, h);
    try {
      const LightField field =
          ComputeLightField(state.depth, scaled_K, config.mu);
      const NormalMap normals_in = NormalsFromDepth(state.depth, scaled_K);
      std::vector<double> trace;
      state.normals =
          RefineIteration(scaled_image, field, normals_in, config, &trace);
      for (size_t s = 0; s < trace.size(); ++s) {
        state.energy_steps.push_back({iteration, int(s), trace[s]});
        state.energy_trace.push_back(trace[s]);
      }
      const double anchor = state.depth.MedianValid();
      IntegrationResult integrated =
          IntegrateNormals(state.normals, scaled_K, anchor);
      state.depth = std::move(integrated.depth);
    } catch (const std::runtime_error& e) {
      throw SolverError("refinement iteration " + std::to_string(iteration) +
                        ": " + e.what());
    }
    state.iteration_depths.push_back(state.depth);
    state.iteration_normals.push_back(state.normals);

    if (iteration + 1 < config.iterations) {
      const int next_w = std::min(2 * state.depth.width, intrinsics.width);
      const int next_h = std::min(2 * state.depth.height, intrinsics.height);
      if (next_w != state.depth.width || next_h != state.depth.height) {
        state.depth = ResizeDepthBilinear(state.depth, next_w, next_h);
      }
    }
  }
  return state;
}

double LossGt(const std::vector<DepthMap>& pred_depths,
              const std::vector<NormalMap>& pred_normals,
              const DepthMap& gt_depth, const NormalMap& gt_normals) {
  if (pred_depths.size() != pred_normals.size() || pred_depths.empty()) {
    throw InvalidInputError("gt loss: prediction lists must align");
  }
  double total = 0.0;
  for (size_t i = 0; i < pred_depths.size(); ++i) {
    const DepthMap& pred_d = pred_depths[i];
    const NormalMap& pred_n = pred_normals[i];
    const DepthMap gt_d = (gt_depth.width == pred_d.width &&
                           gt_depth.height == pred_d.height)
                              ? gt_depth
                              : ResizeDepthArea(gt_depth, pred_d.width,
                                                pred_d.height);
    const NormalMap gt_n = (gt_normals.width == pred_n.width &&
                            gt_normals.height == pred_n.height)
                               ? gt_normals
                               : ResizeNormalsBilinear(gt_normals, pred_n.width,
                                                       pred_n.height);
    const double median_pred = pred_d.MedianValid();
    if (!(median_pred > 0.0)) {
      throw InvalidInputError("gt loss: non-positive prediction median");
    }
    const double alpha = gt_d.MedianValid() / median_pred;

    double depth_sum = 0.0;
    size_t depth_n = 0;
    for (size_t p = 0; p < pred_d.values.size(); ++p) {
      if (!pred_d.validity[p] || !gt_d.validity[p]) continue;
      depth_sum += std::abs(gt_d.values[p] - alpha * pred_d.values[p]);
      ++depth_n;
    }
    double normal_sum = 0.0;
    size_t normal_n = 0;
    for (size_t p = 0; p < pred_n.vectors.size(); ++p) {
      if (!pred_n.validity[p] || !gt_n.validity[p]) continue;
      normal_sum += (gt_n.vectors[p] - pred_n.vectors[p]).cwiseAbs().sum();
      ++normal_n;
    }
    if (depth_n == 0 || normal_n == 0) {
      throw EmptySupportError("gt loss: empty overlap with ground truth");
    }
    total += normal_sum / double(normal_n) + depth_sum / double(depth_n);
  }
  return total;
}

double LossDfn(const std::vector<DepthMap>& integrated_depths,
               const std::vector<NormalMap>& input_normals,
               const Intrinsics& intrinsics) {
  if (integrated_depths.size() != input_normals.size()) {
    throw InvalidInputError("dfn loss: lists must align");
  }
  double total = 0.0;
  for (size_t i = 0; i < integrated_depths.size(); ++i) {
    const DepthMap& depth = integrated_depths[i];
    const NormalMap& normals = input_normals[i];
    const Intrinsics K = IntrinsicsForSize(intrinsics, depth.width,
                                           depth.height);
    const NormalMap recomputed = NormalsFromDepth(depth, K);
    double sum = 0.0;
    size_t n = 0;
    for (size_t p = 0; p < normals.vectors.size(); ++p) {
      if (!normals.validity[p] || !recomputed.validity[p]) continue;
      sum += (recomputed.vectors[p] - normals.vectors[p]).cwiseAbs().sum();
      ++n;
    }
    if (n > 0) total += sum / double(n);
  }
  return total;
}

double PhaseLoss(int phase, const PhaseLossComponents& components,
                 double lambda1, double lambda2) {
  switch (phase) {
    case 1:
      return components.loss_gt + lambda1 * components.loss_norm;
    case 2:
      return components.loss_dfn;
    case 3:
      return components.loss_gt + lambda1 * components.loss_norm +
             lambda2 * components.loss_dfn;
    default:
      throw InvalidInputError("phase loss: phase must be 1, 2 or 3");
  }
}

}  // namespace colrec
