#pragma once

#include "colrec/illumination.hpp"
#include "colrec/integration.hpp"
#include "colrec/types.hpp"

#include <vector>

namespace colrec {

struct RefinementConfig {
  int iterations = 4;        // n in "n x NR"
  int base_width = 16;       // resolution of the first iteration
  int base_height = 16;
  double w_shading = 1.0;
  double w_prior = 0.005;
  double w_smooth = 0.05;
  double lambda1 = 0.1;      // phase-loss weight on the normal consistency
  double lambda2 = 0.5;      // phase-loss weight on the depth-from-normal term
  int max_optimizer_steps = 200;
  double mu = 2.0;           // light-field attenuation exponent

  void Validate() const;
};

struct EnergyStep {
  int iteration = 0;
  int step = 0;
  double energy = 0.0;
};

struct RefinementState {
  NormalMap normals;
  DepthMap depth;
  int scale_index = 0;
  std::vector<double> energy_trace;           // accepted energies, all scales
  std::vector<EnergyStep> energy_steps;       // per-iteration breakdown
  std::vector<DepthMap> iteration_depths;     // one per iteration
  std::vector<NormalMap> iteration_normals;
};

/// One normal-refinement pass: projected gradient descent with backtracking
/// on the shading + prior + smoothness energy, normals constrained to the
/// unit sphere. The appended energy trace is monotone non-increasing.
NormalMap RefineIteration(const ImageRGB& image, const LightField& field,
                          const NormalMap& normals_in,
                          const RefinementConfig& config,
                          std::vector<double>* energy_trace = nullptr);

/// Shading + prior + smoothness energy of a candidate normal map (the
/// objective RefineIteration descends).
double RefinementEnergy(const ImageRGB& image, const LightField& field,
                        const NormalMap& normals, const NormalMap& normals_in,
                        double albedo, const RefinementConfig& config);

/// The n x NR recursion: per scale, light field from current depth, normals
/// from depth, refinement, integration anchored to the current median depth,
/// then x2 upsampling (capped at the input resolution).
RefinementState RefineMultiscale(const ImageRGB& image,
                                 const DepthMap& depth_init,
                                 const Intrinsics& intrinsics,
                                 const RefinementConfig& config);

/// Supervised refinement loss: per-iteration L1 on normals plus L1 on
/// median-rescaled depth, ground truth resampled to each prediction.
double LossGt(const std::vector<DepthMap>& pred_depths,
              const std::vector<NormalMap>& pred_normals,
              const DepthMap& gt_depth, const NormalMap& gt_normals);

/// Depth-from-normal consistency: L1 between the input normals and the
/// normals recomputed from each integrated depth.
double LossDfn(const std::vector<DepthMap>& integrated_depths,
               const std::vector<NormalMap>& input_normals,
               const Intrinsics& intrinsics);

struct PhaseLossComponents {
  double loss_gt = 0.0;
  double loss_norm = 0.0;
  double loss_dfn = 0.0;
};

/// Three-phase schedule: 1) gt + l1*norm, 2) dfn, 3) gt + l1*norm + l2*dfn.
double PhaseLoss(int phase, const PhaseLossComponents& components,
                 double lambda1, double lambda2);

/// Intrinsics consistent with a resampled image of the given size.
Intrinsics IntrinsicsForSize(const Intrinsics& K, int width, int height);

}  // namespace colrec
