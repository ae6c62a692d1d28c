#include "lyascreen/screen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lyascreen {

const char* to_string(VerdictTag t) {
  switch (t) {
    case VerdictTag::RuledOut: return "RuledOut";
    case VerdictTag::PassedNecessaryCondition: return "PassedNecessaryCondition";
    case VerdictTag::NotPositiveDefinite: return "NotPositiveDefinite";
    case VerdictTag::InfimumZeroSuspected: return "InfimumZeroSuspected";
    case VerdictTag::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* to_string(PassEvidence e) {
  switch (e) {
    case PassEvidence::AllInfinite: return "AllInfinite";
    case PassEvidence::NoMinimizerFound: return "NoMinimizerFound";
  }
  return "?";
}

const char* to_string(LpdDomain::Kind k) {
  switch (k) {
    case LpdDomain::Kind::AllSpace: return "AllSpace";
    case LpdDomain::Kind::Box: return "Box";
    case LpdDomain::Kind::Ball: return "Ball";
  }
  return "?";
}

const char* to_string(LpdTag t) {
  switch (t) {
    case LpdTag::NotLPD: return "NotLPD";
    case LpdTag::NoViolationFound: return "NoViolationFound";
  }
  return "?";
}

namespace {

std::string format_vector(std::span<const double> v) {
  std::ostringstream os;
  os.precision(10);
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

// Up to `limit` grid directions, evenly strided through traversal order.
std::vector<std::vector<double>> sample_directions(const DirectionGrid& grid, std::size_t limit) {
  const auto points = grid.points();
  std::vector<std::vector<double>> out;
  const std::size_t stride = std::max<std::size_t>(1, points.size() / limit);
  for (std::size_t i = 0; i < points.size(); i += stride) out.push_back(points[i].dir);
  return out;
}

}  // namespace

std::vector<std::string> coercivity_warnings(const ScalarField& field, const DirectionGrid& grid,
                                             double gamma_max) {
  std::vector<double> radii{10.0, 100.0, gamma_max};
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  const auto dirs = sample_directions(grid, 64);
  const auto x = field.equilibrium();
  std::vector<std::string> warnings;
  double previous = field.value_at_equilibrium();
  double previous_radius = 0.0;
  std::vector<double> p(x.size());
  // Growth below this relative margin between radii is treated as a plateau.
  constexpr double growth_tol = 1e-2;
  for (double r : radii) {
    double lowest = std::numeric_limits<double>::infinity();
    bool failed = false;
    for (const auto& d : dirs) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = x[i] + r * d[i];
      try {
        lowest = std::min(lowest, field.expression().eval(p));
      } catch (const EvalDomainError&) {
        failed = true;
      }
    }
    std::ostringstream os;
    os.precision(6);
    if (failed) {
      os << "coercivity check: V could not be evaluated everywhere on the sphere of radius " << r;
      warnings.push_back(os.str());
    } else if (!(lowest - previous > growth_tol * (1.0 + std::abs(previous)))) {
      os << "coercivity check: min V over sampled directions does not grow from radius "
         << previous_radius << " (" << previous << ") to " << r << " (" << lowest << ")";
      warnings.push_back(os.str());
    }
    if (!failed) previous = lowest;
    previous_radius = r;
  }
  return warnings;
}

Verdict necessary_condition_test(const ScalarField& field, const ScreenConfig& cfg) {
  if (cfg.rounds < 1) throw std::invalid_argument("at least one grid round is required");
  cfg.ray.validate();
  cfg.gsd.validate();

  Verdict v;
  v.provenance.delta = cfg.delta;
  v.provenance.gamma_max = cfg.ray.gamma_max;
  v.provenance.grad_tol = cfg.gsd.grad_tol;
  v.warnings = field.warnings();

  const HEvaluator eval(field, cfg.ray);
  DirectionGrid grid(field.dimension(), cfg.delta);
  for (auto& w : coercivity_warnings(field, grid, cfg.ray.gamma_max)) {
    v.warnings.push_back(std::move(w));
  }

  // A one-dimensional grid has nothing to refine.
  const int rounds = field.dimension() == 1 ? 1 : cfg.rounds;
  for (int round = 0; round < rounds; ++round) {
    if (round > 0) grid = grid.refined();
    ScanReport scan = scan_for_finite_h(eval, grid, cfg.threads);
    v.provenance.rounds = round + 1;
    v.provenance.grid_steps.push_back(grid.steps());

    if (!scan.failures.empty()) {
      std::ostringstream os;
      os << scan.failures.size() << " grid direction(s) failed to evaluate; first: "
         << scan.map.rows[scan.failures.front()].error;
      v.warnings.push_back(os.str());
    }

    if (scan.not_increasing) {
      const HMapRow& row = scan.map.rows[*scan.not_increasing];
      v.tag = VerdictTag::NotPositiveDefinite;
      v.witness = row.point.dir;
      v.witness_gamma = row.h.gamma;
      if (!row.h.value_drop) {
        v.warnings.push_back(
            "k_d is not strictly increasing near x* along the witness, but V stays above "
            "V(x*) at the sampled radii");
      }
      v.map = std::move(scan.map);
      return v;
    }

    if (scan.min_finite) {
      const std::vector<double> start = scan.map.rows[*scan.min_finite].point.dir;
      v.map = std::move(scan.map);
      GsdTrace trace = run_gsd(eval, start, cfg.gsd);
      v.provenance.traces_run = 1;
      switch (trace.termination) {
        case Termination::GradientVanished: {
          // Re-derive the witness from scratch before reporting it.
          const std::vector<double> g = field.expression().grad(trace.witness);
          std::vector<double> offset(trace.witness.size());
          for (std::size_t i = 0; i < offset.size(); ++i) {
            offset[i] = trace.witness[i] - field.equilibrium()[i];
          }
          const double value = field.expression().eval(trace.witness);
          v.witness = trace.witness;
          v.grad_norm = norm2(g);
          if (v.grad_norm <= 2.0 * cfg.gsd.gradient_threshold(value) &&
              norm2(offset) > cfg.ray.gamma_floor) {
            v.tag = VerdictTag::RuledOut;
          } else {
            v.tag = VerdictTag::Inconclusive;
            v.reason = "vanishing-gradient witness failed independent recheck";
          }
          break;
        }
        case Termination::HBelowFloor:
          v.tag = VerdictTag::InfimumZeroSuspected;
          v.witness = trace.witness;
          v.witness_gamma = trace.steps.back().h;
          if (trace.below_resolution) v.witness_gamma = trace.witness_gamma;
          v.warnings.push_back(
              "h decreases toward 0 along the descent without a vanishing gradient; no finite "
              "local minimum on this path, other basins are not excluded");
          break;
        case Termination::NonIncreasingFound:
          v.tag = VerdictTag::NotPositiveDefinite;
          v.witness = trace.witness;
          v.witness_gamma = trace.witness_gamma;
          break;
        case Termination::Stalled:
        case Termination::MaxIters:
        case Termination::LeftFiniteRegion:
          v.tag = VerdictTag::Inconclusive;
          v.reason = std::string("descent terminated ") + to_string(trace.termination) +
                     " at direction " + format_vector(trace.witness);
          break;
      }
      v.trace = std::move(trace);
      return v;
    }

    if (!scan.all_infinite) {
      v.tag = VerdictTag::Inconclusive;
      v.reason = "EvaluationFailure";
      v.map = std::move(scan.map);
      return v;
    }
    v.map = std::move(scan.map);
  }

  v.tag = VerdictTag::PassedNecessaryCondition;
  v.evidence = PassEvidence::AllInfinite;
  std::ostringstream os;
  os << "no critical point of k_d within radius " << cfg.ray.gamma_max
     << " along any grid direction";
  v.warnings.push_back(os.str());
  return v;
}

LpdDomain LpdDomain::all_space(int dimension) {
  if (dimension < 1) throw std::invalid_argument("domain dimension must be positive");
  LpdDomain d;
  d.kind_ = Kind::AllSpace;
  d.dimension_ = dimension;
  return d;
}

LpdDomain LpdDomain::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("box bounds must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw std::invalid_argument("box requires lower < upper");
  }
  LpdDomain d;
  d.kind_ = Kind::Box;
  d.dimension_ = static_cast<int>(lower.size());
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

LpdDomain LpdDomain::ball(std::vector<double> center, double radius) {
  if (center.empty()) throw std::invalid_argument("ball center must be non-empty");
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  LpdDomain d;
  d.kind_ = Kind::Ball;
  d.dimension_ = static_cast<int>(center.size());
  d.center_ = std::move(center);
  d.radius_ = radius;
  return d;
}

bool LpdDomain::interior(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dimension_)) return false;
  switch (kind_) {
    case Kind::AllSpace:
      return true;
    case Kind::Box:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > lower_[i] && x[i] < upper_[i])) return false;
      }
      return true;
    case Kind::Ball: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - center_[i]) * (x[i] - center_[i]);
      return std::sqrt(s) < radius_;
    }
  }
  return false;
}

double LpdDomain::reach(std::span<const double> x, std::span<const double> dir) const {
  switch (kind_) {
    case Kind::AllSpace:
      return std::numeric_limits<double>::infinity();
    case Kind::Box: {
      double r = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (dir[i] > 0.0) r = std::min(r, (upper_[i] - x[i]) / dir[i]);
        if (dir[i] < 0.0) r = std::min(r, (lower_[i] - x[i]) / dir[i]);
      }
      return r;
    }
    case Kind::Ball: {
      // |x - c + gamma d|^2 = r^2 with |d| = 1.
      double b = 0.0;
      double c = -radius_ * radius_;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double o = x[i] - center_[i];
        b += o * dir[i];
        c += o * o;
      }
      return -b + std::sqrt(b * b - c);
    }
  }
  return 0.0;
}

LpdVerdict local_positive_definiteness(const ScalarField& field, const LpdDomain& domain,
                                       const LpdConfig& cfg) {
  if (domain.dimension() != field.dimension()) {
    throw std::invalid_argument("domain dimension does not match the candidate");
  }
  if (!domain.interior(field.equilibrium())) {
    throw std::invalid_argument("equilibrium must lie strictly inside the domain");
  }
  const std::vector<double> x(field.equilibrium().begin(), field.equilibrium().end());
  const HEvaluator eval(field, cfg.ray,
                        [domain, x](std::span<const double> d) { return domain.reach(x, d); });

  LpdVerdict v;
  v.delta = cfg.delta;
  v.gamma_max = cfg.ray.gamma_max;
  v.warnings = field.warnings();

  ScanReport scan = scan_for_finite_h(eval, DirectionGrid(field.dimension(), cfg.delta),
                                      cfg.threads);
  if (!scan.failures.empty()) {
    std::ostringstream os;
    os << scan.failures.size() << " grid direction(s) failed to evaluate; first: "
       << scan.map.rows[scan.failures.front()].error;
    v.warnings.push_back(os.str());
  }
  if (scan.not_increasing) {
    const HMapRow& row = scan.map.rows[*scan.not_increasing];
    v.tag = LpdTag::NotLPD;
    v.witness = row.point.dir;
    v.witness_gamma = row.h.gamma;
    v.map = std::move(scan.map);
    return v;
  }
  if (scan.min_finite) {
    const std::vector<double> start = scan.map.rows[*scan.min_finite].point.dir;
    GsdConfig gsd = cfg.gsd;
    gsd.stop_on_non_increasing = true;
    GsdTrace trace = run_gsd(eval, start, gsd);
    v.traces_run = 1;
    const bool slope_failure =
        trace.termination == Termination::HBelowFloor && trace.below_resolution;
    if (trace.termination == Termination::NonIncreasingFound || slope_failure) {
      v.tag = LpdTag::NotLPD;
      v.witness = trace.witness;
      v.witness_gamma = trace.witness_gamma;
    }
    v.trace = std::move(trace);
  }
  v.map = std::move(scan.map);
  return v;
}

VectorField::VectorField(std::vector<Expression> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("vector field needs components");
  const int n = static_cast<int>(components_.size());
  for (const auto& c : components_) {
    if (c.dimension() != n) {
      throw std::invalid_argument("vector field component dimension does not match its length");
    }
  }
}

std::vector<double> VectorField::eval(std::span<const double> x) const {
  std::vector<double> out;
  out.reserve(components_.size());
  for (const auto& c : components_) out.push_back(c.eval(x));
  return out;
}

double vdot(const ScalarField& field, const VectorField& f, std::span<const double> x) {
  const std::vector<double> g = field.expression().grad(x);
  const std::vector<double> fx = f.eval(x);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * fx[i];
  return s;
}

VdotReport vdot_sample(const ScalarField& field, const VectorField& f, const SampleSpec& spec) {
  if (f.dimension() != field.dimension()) {
    throw std::invalid_argument("vector field dimension does not match the candidate");
  }
  if (spec.grid_per_axis == 1 || spec.grid_per_axis < 0) {
    throw std::invalid_argument("grid sampling needs at least 2 points per axis");
  }
  if ((spec.random_count > 0 || spec.grid_per_axis > 0) && !(spec.radius > 0.0)) {
    throw std::invalid_argument("sampling radius must be positive");
  }
  const auto x = field.equilibrium();
  const std::size_t n = x.size();

  VdotReport report;
  try {
    const auto f0 = f.eval(x);
    if (norm2(f0) > 1e-8) {
      report.warnings.push_back("f(x*) = " + format_vector(f0) +
                                " is not zero; x* is not an equilibrium");
    }
  } catch (const EvalDomainError& e) {
    report.warnings.push_back(std::string("f could not be evaluated at x*: ") + e.what());
  }

  std::vector<std::vector<double>> samples;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t s = 0; s < spec.random_count; ++s) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = x[i] + spec.radius * unit(rng);
    samples.push_back(std::move(p));
  }
  if (spec.grid_per_axis > 0) {
    const int m = spec.grid_per_axis;
    std::vector<int> idx(n, 0);
    for (;;) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = x[i] + spec.radius * (-1.0 + 2.0 * idx[i] / (m - 1));
      }
      samples.push_back(std::move(p));
      std::size_t pos = n;
      while (pos > 0) {
        if (++idx[pos - 1] < m) break;
        idx[pos - 1] = 0;
        --pos;
      }
      if (pos == 0) break;
    }
  }
  for (const auto& p : spec.points) {
    if (p.size() != n) throw std::invalid_argument("sample point has wrong dimension");
    samples.push_back(p);
  }

  for (auto& p : samples) {
    if (std::equal(p.begin(), p.end(), x.begin())) {
      ++report.excluded;
      continue;
    }
    ++report.evaluated;
    VdotSample s;
    try {
      s.vdot = vdot(field, f, p);
    } catch (const EvalDomainError& e) {
      s.error = e.what();
      s.x = std::move(p);
      report.failures.push_back(std::move(s));
      continue;
    }
    if (s.vdot >= 0.0) {
      s.x = std::move(p);
      report.violations.push_back(std::move(s));
    }
  }
  return report;
}

}  // namespace lyascreen
