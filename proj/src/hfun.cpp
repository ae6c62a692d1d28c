#include "lyascreen/hfun.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lyascreen {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> normalized(std::span<const double> v) {
  const double n = norm2(v);
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

ScalarField::ScalarField(Expression expression, std::vector<double> equilibrium)
    : expression_(std::move(expression)), equilibrium_(std::move(equilibrium)) {
  if (equilibrium_.size() != static_cast<std::size_t>(expression_.dimension())) {
    throw std::invalid_argument("equilibrium has " + std::to_string(equilibrium_.size()) +
                                " coordinates, expected " +
                                std::to_string(expression_.dimension()));
  }
  value_at_equilibrium_ = expression_.eval(equilibrium_);
  const double g = norm2(expression_.grad(equilibrium_));
  if (g > 1e-6) {
    std::ostringstream os;
    os << "gradient of V at the equilibrium has norm " << g
       << "; a positive definite candidate has a critical point there";
    warnings_.push_back(os.str());
  }
  if (!expression_.is_smooth()) {
    warnings_.push_back(
        "candidate contains abs(), which is not continuously differentiable; h values may be "
        "unreliable");
  }
}

RayConfig RayConfig::truncated_to(double radius) const {
  RayConfig out = *this;
  if (radius < gamma_max) {
    out.delta_gamma = step() * radius / gamma_max;
    out.gamma_max = radius;
  }
  return out;
}

void RayConfig::validate() const {
  if (!(gamma_max > 0.0)) throw std::invalid_argument("gamma_max must be positive");
  if (!(gamma_floor > 0.0)) throw std::invalid_argument("gamma_floor must be positive");
  if (!(step() > 0.0)) throw std::invalid_argument("delta_gamma must be positive");
  if (!(gamma_floor < step() && step() < gamma_max)) {
    throw std::invalid_argument("ray configuration requires gamma_floor < delta_gamma < gamma_max");
  }
  if (!(root_tol > 0.0) || !(curvature_tol > 0.0) || !(touch_tol > 0.0)) {
    throw std::invalid_argument("ray tolerances must be positive");
  }
  if (!(near_ratio > 1.0)) throw std::invalid_argument("near_ratio must exceed 1");
}

const char* to_string(RootClass c) {
  switch (c) {
    case RootClass::StrictLocalMax: return "StrictLocalMax";
    case RootClass::Inflection: return "Inflection";
    case RootClass::Valley: return "Valley";
  }
  return "?";
}

const char* to_string(HValue::Kind k) {
  switch (k) {
    case HValue::Kind::Finite: return "Finite";
    case HValue::Kind::InfiniteTruncated: return "InfiniteTruncated";
    case HValue::Kind::NotIncreasingAtOrigin: return "NotIncreasingAtOrigin";
  }
  return "?";
}

HValue HValue::make_finite(double gamma, RootClass c, double curvature, std::size_t samples) {
  HValue h;
  h.kind = Kind::Finite;
  h.gamma = gamma;
  h.root_class = c;
  h.curvature = curvature;
  h.samples_used = samples;
  return h;
}

HValue HValue::make_infinite(double radius, std::size_t samples) {
  HValue h;
  h.kind = Kind::InfiniteTruncated;
  h.gamma = radius;
  h.samples_used = samples;
  return h;
}

HValue HValue::make_not_increasing(double gamma, double rise, bool value_drop,
                                  std::size_t samples) {
  HValue h;
  h.kind = Kind::NotIncreasingAtOrigin;
  h.gamma = gamma;
  h.rise = rise;
  h.value_drop = value_drop;
  h.samples_used = samples;
  return h;
}

RootClass classify_root(double kdoubleprime, double k, const RayConfig& cfg) {
  const double tol = cfg.curvature_tol * (1.0 + std::abs(k));
  if (kdoubleprime < -tol) return RootClass::StrictLocalMax;
  if (kdoubleprime > tol) return RootClass::Valley;
  return RootClass::Inflection;
}

namespace {

// Evaluates k_d and its derivatives along one ray, counting evaluations.
class Ray {
 public:
  Ray(const ScalarField& field, std::span<const double> dir)
      : expr_(field.expression()),
        base_(field.equilibrium()),
        dir_(dir),
        p1_(dir.size()),
        p2_(dir.size()) {}

  struct Jet1 {
    double k;
    double k1;
  };

  Jet1 first(double gamma) {
    ++count_;
    try {
      for (std::size_t i = 0; i < dir_.size(); ++i) {
        p1_[i] = Dual1(base_[i] + gamma * dir_[i], dir_[i]);
      }
      const Dual1 r = expr_.evaluate<Dual1>(p1_, s1_);
      return {r.value, r.d1};
    } catch (const EvalDomainError& e) {
      rethrow(e, gamma);
    }
  }

  RayJet second(double gamma) {
    ++count_;
    try {
      for (std::size_t i = 0; i < dir_.size(); ++i) {
        p2_[i] = Dual2(base_[i] + gamma * dir_[i], dir_[i], 0.0);
      }
      const Dual2 r = expr_.evaluate<Dual2>(p2_, s2_);
      return {r.value, r.d1, r.d2};
    } catch (const EvalDomainError& e) {
      rethrow(e, gamma);
    }
  }

  std::size_t count() const { return count_; }

 private:
  [[noreturn]] static void rethrow(const EvalDomainError& e, double gamma) {
    std::ostringstream os;
    os.precision(17);
    os << e.what() << " at gamma=" << gamma;
    throw EvalDomainError(os.str(), e.subexpression());
  }

  const Expression& expr_;
  std::span<const double> base_;
  std::span<const double> dir_;
  std::vector<Dual1> p1_;
  std::vector<Dual2> p2_;
  std::vector<Dual1> s1_;
  std::vector<Dual2> s2_;
  std::size_t count_ = 0;
};

struct Root {
  double gamma;
  RayJet jet;
};

// k'(a) > 0 >= k'(b): bisect to root_tol, then polish with guarded Newton steps.
Root refine_crossing(Ray& ray, double a, double b, const RayConfig& cfg) {
  double fa = ray.first(a).k1;
  double fb = ray.first(b).k1;
  for (int it = 0; it < 200 && (b - a) > cfg.root_tol * std::max(1.0, b); ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double fm = ray.first(mid).k1;
    if (fm > 0.0) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
      fb = fm;
    }
  }
  double x = std::abs(fa) < std::abs(fb) ? a : b;
  RayJet jx = ray.second(x);
  for (int it = 0; it < 4 && jx.d1 != 0.0 && jx.d2 != 0.0; ++it) {
    const double next = x - jx.d1 / jx.d2;
    if (!(next >= a && next <= b)) break;
    const RayJet jn = ray.second(next);
    if (!(std::abs(jn.d1) < std::abs(jx.d1))) break;
    x = next;
    jx = jn;
  }
  return {x, jx};
}

// Locate the minimum of k' on [a, b], where the interior sample is lowest.
Root refine_minimum(Ray& ray, double a, double b, const RayConfig& cfg) {
  const RayJet ja = ray.second(a);
  const RayJet jb = ray.second(b);
  const double width_tol = cfg.root_tol * std::max(1.0, b);
  if (ja.d2 < 0.0 && jb.d2 > 0.0) {
    for (int it = 0; it < 200 && (b - a) > width_tol; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (ray.second(mid).d2 < 0.0) {
        a = mid;
      } else {
        b = mid;
      }
    }
  } else {
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = ray.first(c).k1;
    double fd = ray.first(d).k1;
    for (int it = 0; it < 200 && (b - a) > width_tol; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = ray.first(c).k1;
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = ray.first(d).k1;
      }
    }
  }
  const double x = 0.5 * (a + b);
  return {x, ray.second(x)};
}

bool not_increasing(double k, double k1, double k0) {
  return k1 < 0.0 || k < k0 || (k == k0 && k1 <= 0.0);
}

}  // namespace

HValue h_of(const ScalarField& field, std::span<const double> dir, const RayConfig& cfg0,
            double reach, std::vector<ScanSample>* record) {
  cfg0.validate();
  if (dir.size() != static_cast<std::size_t>(field.dimension())) {
    throw std::invalid_argument("direction has wrong dimension");
  }
  if (std::abs(norm2(dir) - 1.0) > 1e-12) {
    throw std::invalid_argument("direction must have unit 2-norm");
  }
  if (!(reach > 0.0)) throw std::invalid_argument("reach must be positive");

  const RayConfig cfg = cfg0.truncated_to(std::min(reach, cfg0.gamma_max));
  const double radius = cfg.gamma_max;
  const double floor = std::min(cfg.gamma_floor, 0.5 * radius);
  const double step = cfg.step();
  const double k0 = field.value_at_equilibrium();
  auto touch_threshold = [&](double k) { return cfg.touch_tol * (1.0 + std::abs(k)); };

  Ray ray(field, dir);
  std::optional<Root> root;
  bool non_increasing_start = false;
  bool start_drop = false;
  double start_rise = 0.0;

  struct Sample {
    double gamma;
    double k;
    double k1;
  };
  std::optional<Sample> prev;
  std::optional<Sample> prev2;

  double gamma = floor;
  bool geometric = true;
  std::size_t linear_index = 0;
  for (;;) {
    const auto jet = ray.first(gamma);
    const Sample s{gamma, jet.k, jet.k1};
    if (record) record->push_back({gamma, jet.k1});

    if (!prev) {
      if (s.k1 <= 0.0) {
        non_increasing_start = true;
        start_drop = s.k <= k0;
        start_rise = (s.k - k0) / (s.gamma * s.gamma);
        break;
      }
    } else if (s.k1 <= 0.0) {
      // A sample at a tangential zero can read slightly negative; it is a
      // touch when the next sample is positive again.
      if (s.k1 >= -touch_threshold(s.k) && s.gamma < radius) {
        const double ahead = std::min(s.gamma + step, radius);
        if (ray.first(ahead).k1 > 0.0) {
          const Root m = refine_minimum(ray, prev->gamma, ahead, cfg);
          if (std::abs(m.jet.d1) <= touch_threshold(m.jet.value)) {
            root = m;
            break;
          }
        }
      }
      root = refine_crossing(ray, prev->gamma, s.gamma, cfg);
      break;
    } else if (prev2 && prev->k1 < prev2->k1 && prev->k1 <= s.k1) {
      const Root m = refine_minimum(ray, prev2->gamma, s.gamma, cfg);
      if (std::abs(m.jet.d1) <= touch_threshold(m.jet.value)) {
        root = m;
        break;
      }
      if (m.jet.d1 < 0.0) {
        root = refine_crossing(ray, prev2->gamma, m.gamma, cfg);
        break;
      }
    }
    prev2 = prev;
    prev = s;

    if (gamma >= radius) break;
    double next;
    if (geometric && gamma * cfg.near_ratio < floor + step) {
      next = gamma * cfg.near_ratio;
    } else {
      geometric = false;
      next = floor + static_cast<double>(++linear_index) * step;
    }
    gamma = std::min(next, radius);
  }

  // Strict increase at the origin, below the first critical point.
  if (non_increasing_start) {
    return HValue::make_not_increasing(floor, start_rise, start_drop, ray.count());
  }
  for (int j = 8; j >= 0; --j) {
    const double g = 10.0 * cfg.gamma_floor / static_cast<double>(1 << j);
    if (g > radius) continue;
    if (root && g >= root->gamma) continue;
    const auto jet = ray.first(g);
    if (not_increasing(jet.k, jet.k1, k0)) {
      return HValue::make_not_increasing(g, (jet.k - k0) / (g * g), jet.k <= k0, ray.count());
    }
  }

  if (root) {
    return HValue::make_finite(root->gamma, classify_root(root->jet.d2, root->jet.value, cfg),
                               root->jet.d2, ray.count());
  }
  return HValue::make_infinite(radius, ray.count());
}

std::vector<double> z_of(const ScalarField& field, std::span<const double> dir, const HValue& h) {
  if (!h.finite()) throw std::invalid_argument("z_d requires a finite h value");
  if (dir.size() != static_cast<std::size_t>(field.dimension())) {
    throw std::invalid_argument("direction has wrong dimension");
  }
  std::vector<double> z(dir.size());
  const auto x = field.equilibrium();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + h.gamma * dir[i];
  return z;
}

std::vector<RayProfileRow> ray_profile(const ScalarField& field, std::span<const double> dir,
                                       const RayConfig& cfg, int count) {
  if (count < 2) throw std::invalid_argument("ray profile needs at least two samples");
  if (!(cfg.gamma_max > 0.0)) throw std::invalid_argument("gamma_max must be positive");
  std::vector<RayProfileRow> rows;
  rows.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    RayProfileRow row;
    row.gamma = j == count - 1 ? cfg.gamma_max
                               : cfg.gamma_max * static_cast<double>(j) / (count - 1);
    try {
      const RayJet jet = field.expression().directional_derivatives(field.equilibrium(), dir,
                                                                    row.gamma);
      row.k = jet.value;
      row.kprime = jet.d1;
      row.kdoubleprime = jet.d2;
    } catch (const EvalDomainError& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

HEvaluator::HEvaluator(const ScalarField& field, RayConfig cfg, ReachFunction reach)
    : field_(&field), cfg_(cfg), reach_(std::move(reach)) {
  cfg_.validate();
}

double HEvaluator::reach(std::span<const double> dir) const {
  return reach_ ? reach_(dir) : std::numeric_limits<double>::infinity();
}

HValue HEvaluator::operator()(std::span<const double> dir) const {
  return h_of(*field_, dir, cfg_, reach(dir));
}

}  // namespace lyascreen
