#pragma once

// Generalized steepest descent over direction space.
//
// From the current direction d_k with finite h, the point z = x* + h d_k is
// pushed along -grad V(z); the rays through z - beta grad V(z) give candidate
// directions u_beta, and the one with the smallest finite h becomes d_{k+1}.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyascreen/hfun.hpp"

namespace lyascreen {

struct GsdConfig {
  int beta_count = 48;
  // Bounds of the log-spaced schedule, in units of h_k / ||grad V(z_k)||.
  double beta_lo = 1e-6;
  double beta_hi = 1e2;
  // Gradient threshold relative to 1 + |V(z)|.
  double grad_tol = 1e-8;
  // Near x* the gradient of any smooth candidate is small; a vanishing
  // gradient also needs ||grad V(z)|| ||z - x*|| <= grad_scale_tol |V(z) - V(x*)|.
  double grad_scale_tol = 1e-6;
  double stall_tol = 1e-10;
  double h_floor = 1e-5;
  int max_iters = 200;
  // Maximum function evaluations of the bracketed refinement around the best sample.
  int refine_evals = 60;
  bool stop_on_non_increasing = true;

  double gradient_threshold(double v) const { return grad_tol * (1.0 + std::abs(v)); }
  // grad_norm at z, radius = ||z - x*||, rise = V(z) - V(x*).
  bool gradient_vanished(double grad_norm, double value, double radius, double rise) const {
    return grad_norm <= gradient_threshold(value) &&
           grad_norm * radius <= grad_scale_tol * std::abs(rise);
  }
  void validate() const;
};

class InvalidStart : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BetaSample {
  double beta;
  std::vector<double> direction;
  HValue h;
  std::string error;
};

struct DescentResult {
  enum class Status { Improved, NoImprovingBeta, LeftFiniteRegion, NonIncreasing, BelowResolution };

  Status status = Status::NoImprovingBeta;
  double beta = 0.0;
  std::vector<double> direction;  // u_beta for the chosen beta
  HValue h;
  // h restricted to u_beta over the sampled schedule, including refinement points.
  std::vector<BetaSample> table;
  bool schedule_extended = false;
  // Some u_beta has k_d(gamma) <= V(x*) near the equilibrium.
  std::optional<BetaSample> non_increasing;
  // Some u_beta has k_d' < 0 within 10 gamma_floor but no value drop: its
  // first critical point lies below the resolution of the ray scan.
  std::optional<BetaSample> below_resolution;
};

const char* to_string(DescentResult::Status s);

DescentResult descend_step(const HEvaluator& eval, std::span<const double> d_k, const HValue& h_k,
                           const GsdConfig& cfg);

struct GsdStep {
  int k = 0;
  std::vector<double> d;
  double h = 0.0;
  std::vector<double> z;
  std::vector<double> grad;
  double grad_norm = 0.0;
  double value = 0.0;  // V(z)
  std::optional<double> beta;
  std::vector<double> next;  // u_beta chosen from this iterate
};

enum class Termination {
  GradientVanished,
  Stalled,
  HBelowFloor,
  MaxIters,
  LeftFiniteRegion,
  NonIncreasingFound,
};

const char* to_string(Termination t);

struct GsdTrace {
  std::vector<GsdStep> steps;
  Termination termination = Termination::MaxIters;
  // GradientVanished: the point z. Otherwise the last direction visited, or
  // the offending direction for NonIncreasingFound.
  std::vector<double> witness;
  double witness_grad_norm = 0.0;
  double witness_gamma = 0.0;  // NonIncreasingFound, or HBelowFloor with below_resolution
  // HBelowFloor reached through a u_beta whose root is below the ray scan's
  // resolution; its ray is not strictly increasing near x*.
  bool below_resolution = false;
};

GsdTrace run_gsd(const HEvaluator& eval, std::span<const double> d0, const GsdConfig& cfg);
GsdTrace run_gsd(const ScalarField& field, std::span<const double> d0, const GsdConfig& cfg,
                 const RayConfig& ray_cfg);

}  // namespace lyascreen
