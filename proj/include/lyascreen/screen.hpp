#pragma once

// Screening pipelines built on the h function: the necessary-condition test,
// the local positive definiteness heuristic and sampling of V-dot.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lyascreen/expr.hpp"
#include "lyascreen/grid.hpp"
#include "lyascreen/gsd.hpp"
#include "lyascreen/hfun.hpp"

namespace lyascreen {

enum class VerdictTag {
  RuledOut,
  PassedNecessaryCondition,
  NotPositiveDefinite,
  InfimumZeroSuspected,
  Inconclusive,
};

const char* to_string(VerdictTag t);

enum class PassEvidence { AllInfinite, NoMinimizerFound };

const char* to_string(PassEvidence e);

struct Provenance {
  double delta = 0.0;              // initial grid spacing
  int rounds = 0;                  // grid passes performed
  double gamma_max = 0.0;
  double grad_tol = 0.0;
  int traces_run = 0;
  std::vector<int> grid_steps;     // lattice steps per face of each pass
};

struct Verdict {
  VerdictTag tag = VerdictTag::Inconclusive;
  std::optional<PassEvidence> evidence;  // PassedNecessaryCondition only
  // RuledOut: the point z. NotPositiveDefinite: the offending direction.
  // InfimumZeroSuspected: the last direction of the descent.
  std::vector<double> witness;
  double grad_norm = 0.0;      // RuledOut: freshly recomputed ||grad V(z)||
  double witness_gamma = 0.0;  // NotPositiveDefinite: gamma; InfimumZeroSuspected: last h
  std::string reason;          // Inconclusive
  Provenance provenance;
  std::vector<std::string> warnings;
  std::optional<HMap> map;      // grid of the last pass
  std::optional<GsdTrace> trace;
};

struct ScreenConfig {
  double delta = 0.05;
  // Total grid passes, each halving the spacing of the previous one.
  int rounds = 2;
  RayConfig ray;
  GsdConfig gsd;
  unsigned threads = 0;
};

Verdict necessary_condition_test(const ScalarField& field, const ScreenConfig& cfg);

// Advisory growth check of V on spheres of radius 10, 100 and gamma_max.
std::vector<std::string> coercivity_warnings(const ScalarField& field, const DirectionGrid& grid,
                                             double gamma_max);

class LpdDomain {
 public:
  enum class Kind { AllSpace, Box, Ball };

  static LpdDomain all_space(int dimension);
  static LpdDomain box(std::vector<double> lower, std::vector<double> upper);
  static LpdDomain ball(std::vector<double> center, double radius);

  Kind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<double>& center() const { return center_; }
  double radius() const { return radius_; }

  bool interior(std::span<const double> x) const;
  // sup { gamma > 0 : x + gamma d in the domain }; +inf for AllSpace.
  double reach(std::span<const double> x, std::span<const double> dir) const;

 private:
  Kind kind_ = Kind::AllSpace;
  int dimension_ = 0;
  std::vector<double> lower_, upper_, center_;
  double radius_ = 0.0;
};

const char* to_string(LpdDomain::Kind k);

enum class LpdTag { NotLPD, NoViolationFound };

const char* to_string(LpdTag t);

struct LpdVerdict {
  LpdTag tag = LpdTag::NoViolationFound;
  std::vector<double> witness;  // NotLPD: direction whose ray fails strict increase
  double witness_gamma = 0.0;
  double delta = 0.0;
  double gamma_max = 0.0;
  int traces_run = 0;
  std::vector<std::string> warnings;
  std::optional<HMap> map;
  std::optional<GsdTrace> trace;
};

struct LpdConfig {
  double delta = 0.05;
  RayConfig ray;
  GsdConfig gsd;
  unsigned threads = 0;
};

LpdVerdict local_positive_definiteness(const ScalarField& field, const LpdDomain& domain,
                                       const LpdConfig& cfg);

// Right-hand side f of x' = f(x).
class VectorField {
 public:
  explicit VectorField(std::vector<Expression> components);

  int dimension() const { return static_cast<int>(components_.size()); }
  const std::vector<Expression>& components() const { return components_; }
  std::vector<double> eval(std::span<const double> x) const;

 private:
  std::vector<Expression> components_;
};

// Sample sources are additive: random points, a tensor grid and explicit points.
struct SampleSpec {
  std::size_t random_count = 0;
  double radius = 1.0;  // half-width of the box around x* for random and grid samples
  std::uint64_t seed = 0;
  int grid_per_axis = 0;  // 0 disables the grid, otherwise at least 2
  std::vector<std::vector<double>> points;
};

struct VdotSample {
  std::vector<double> x;
  double vdot = 0.0;
  std::string error;
};

struct VdotReport {
  std::vector<VdotSample> violations;  // V-dot(x) >= 0
  std::vector<VdotSample> failures;    // evaluation errors
  std::size_t evaluated = 0;
  std::size_t excluded = 0;  // samples equal to x*
  std::vector<std::string> warnings;
};

double vdot(const ScalarField& field, const VectorField& f, std::span<const double> x);

VdotReport vdot_sample(const ScalarField& field, const VectorField& f, const SampleSpec& spec);

}  // namespace lyascreen
