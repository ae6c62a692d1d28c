#pragma once

// The h function: for a direction d, the smallest gamma > 0 at which
// k_d(gamma) = V(x* + gamma d) has a critical point.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lyascreen/expr.hpp"

namespace lyascreen {

// Candidate V together with the equilibrium it is meant to certify.
class ScalarField {
 public:
  ScalarField(Expression expression, std::vector<double> equilibrium);

  const Expression& expression() const { return expression_; }
  int dimension() const { return expression_.dimension(); }
  std::span<const double> equilibrium() const { return equilibrium_; }
  double value_at_equilibrium() const { return value_at_equilibrium_; }
  // Non-fatal observations made at construction (gradient at x*, abs()).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Expression expression_;
  std::vector<double> equilibrium_;
  double value_at_equilibrium_ = 0.0;
  std::vector<std::string> warnings_;
};

struct RayConfig {
  double gamma_max = 1e3;
  // Coarse scan step; 0 selects gamma_max / 1e5.
  double delta_gamma = 0.0;
  double gamma_floor = 1e-6;
  // Relative bracket width at which bisection hands over to Newton polishing.
  double root_tol = 1e-10;
  // |k''| threshold, relative to 1 + |k|, for the inflection class.
  double curvature_tol = 1e-8;
  // |k'| threshold, relative to 1 + |k|, for a tangential zero.
  double touch_tol = 1e-8;
  // Ratio between consecutive samples of the geometric prefix that runs
  // from gamma_floor up to the first coarse step.
  double near_ratio = 1.01;

  double step() const { return delta_gamma > 0.0 ? delta_gamma : gamma_max / 1e5; }
  // Same sample budget over a shorter truncation radius.
  RayConfig truncated_to(double radius) const;
  void validate() const;  // throws std::invalid_argument
};

enum class RootClass { StrictLocalMax, Inflection, Valley };

const char* to_string(RootClass c);

struct HValue {
  enum class Kind { Finite, InfiniteTruncated, NotIncreasingAtOrigin };

  Kind kind = Kind::InfiniteTruncated;
  // Finite: the root. InfiniteTruncated: truncation radius used.
  // NotIncreasingAtOrigin: the witness gamma.
  double gamma = 0.0;
  RootClass root_class = RootClass::StrictLocalMax;  // meaningful when Finite
  double curvature = 0.0;                           // k'' at the root
  // NotIncreasingAtOrigin only: k_d(gamma) <= V(x*) was observed, so V itself
  // fails positive definiteness along d. Otherwise only the slope failed,
  // which is also what a first root below gamma_floor looks like.
  bool value_drop = false;
  // NotIncreasingAtOrigin only: (k_d(gamma) - V(x*)) / gamma^2 at the witness,
  // used to rank witnesses.
  double rise = 0.0;
  std::size_t samples_used = 0;

  bool finite() const { return kind == Kind::Finite; }
  // Finite root, or +inf otherwise; handy for minimisation.
  double value_or_inf() const {
    return finite() ? gamma : std::numeric_limits<double>::infinity();
  }

  static HValue make_finite(double gamma, RootClass c, double curvature, std::size_t samples);
  static HValue make_infinite(double radius, std::size_t samples);
  static HValue make_not_increasing(double gamma, double rise, bool value_drop,
                                    std::size_t samples);
};

const char* to_string(HValue::Kind k);

// Scan record for diagnostics and for checking minimality from the outside.
struct ScanSample {
  double gamma;
  double kprime;
};

// Classify a root from the curvature at that point.
RootClass classify_root(double kdoubleprime, double k, const RayConfig& cfg);

HValue h_of(const ScalarField& field, std::span<const double> dir, const RayConfig& cfg,
            double reach = std::numeric_limits<double>::infinity(),
            std::vector<ScanSample>* record = nullptr);

std::vector<double> z_of(const ScalarField& field, std::span<const double> dir, const HValue& h);

struct RayProfileRow {
  double gamma;
  double k = 0.0;
  double kprime = 0.0;
  double kdoubleprime = 0.0;
  bool ok = true;
  std::string error;
};

std::vector<RayProfileRow> ray_profile(const ScalarField& field, std::span<const double> dir,
                                       const RayConfig& cfg, int count);

// Reach of the ray x* + gamma d inside the admissible domain; +inf for R^n.
using ReachFunction = std::function<double(std::span<const double> dir)>;

// h evaluation bound to a field, a ray configuration and an optional domain.
// Shared by the grid, descent and screening stages.
class HEvaluator {
 public:
  HEvaluator(const ScalarField& field, RayConfig cfg, ReachFunction reach = {});

  HValue operator()(std::span<const double> dir) const;
  double reach(std::span<const double> dir) const;

  const ScalarField& field() const { return *field_; }
  const RayConfig& config() const { return cfg_; }

 private:
  const ScalarField* field_;
  RayConfig cfg_;
  ReachFunction reach_;
};

// Helpers shared across modules.
double norm2(std::span<const double> v);
std::vector<double> normalized(std::span<const double> v);

}  // namespace lyascreen
