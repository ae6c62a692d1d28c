#include "lyascreen/gsd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/minima.hpp>

namespace lyascreen {

void GsdConfig::validate() const {
  if (beta_count < 2) throw std::invalid_argument("beta_count must be at least 2");
  if (!(beta_lo > 0.0 && beta_lo < beta_hi)) {
    throw std::invalid_argument("beta schedule requires 0 < beta_lo < beta_hi");
  }
  if (!(grad_tol > 0.0) || !(grad_scale_tol > 0.0) || !(stall_tol > 0.0) || !(h_floor > 0.0)) {
    throw std::invalid_argument("descent tolerances must be positive");
  }
  if (max_iters < 0) throw std::invalid_argument("max_iters must be non-negative");
}

const char* to_string(DescentResult::Status s) {
  switch (s) {
    case DescentResult::Status::Improved: return "Improved";
    case DescentResult::Status::NoImprovingBeta: return "NoImprovingBeta";
    case DescentResult::Status::LeftFiniteRegion: return "LeftFiniteRegion";
    case DescentResult::Status::NonIncreasing: return "NonIncreasing";
    case DescentResult::Status::BelowResolution: return "BelowResolution";
  }
  return "?";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::GradientVanished: return "GradientVanished";
    case Termination::Stalled: return "Stalled";
    case Termination::HBelowFloor: return "HBelowFloor";
    case Termination::MaxIters: return "MaxIters";
    case Termination::LeftFiniteRegion: return "LeftFiniteRegion";
    case Termination::NonIncreasingFound: return "NonIncreasingFound";
  }
  return "?";
}

namespace {

struct Anchor {
  std::vector<double> z;
  std::vector<double> grad;
  double grad_norm;
  double value;
};

Anchor anchor_at(const ScalarField& field, std::span<const double> d, double h) {
  Anchor a;
  a.z.resize(d.size());
  const auto x = field.equilibrium();
  for (std::size_t i = 0; i < d.size(); ++i) a.z[i] = x[i] + h * d[i];
  a.grad = field.expression().grad(a.z);
  a.grad_norm = norm2(a.grad);
  a.value = field.expression().eval(a.z);
  return a;
}

class LineSearch {
 public:
  LineSearch(const HEvaluator& eval, const Anchor& anchor, double h_k)
      : eval_(eval), anchor_(anchor), h_k_(h_k), scale_(h_k / anchor.grad_norm) {}

  // beta is dimensionless here; the physical step is beta * h_k / ||grad||.
  BetaSample sample(double beta) {
    BetaSample s;
    s.beta = beta * scale_;
    const auto x = eval_.field().equilibrium();
    std::vector<double> w(anchor_.z.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = anchor_.z[i] - s.beta * anchor_.grad[i] - x[i];
    }
    if (!(norm2(w) > 0.0)) {
      s.error = "u_beta undefined: z - beta grad V(z) hits the equilibrium";
      return s;
    }
    s.direction = normalized(w);
    try {
      s.h = eval_(s.direction);
    } catch (const EvalDomainError& e) {
      s.error = e.what();
    }
    return s;
  }

  double h_k() const { return h_k_; }

 private:
  const HEvaluator& eval_;
  const Anchor& anchor_;
  double h_k_;
  double scale_;
};

bool improves(const BetaSample& s, double h_k) {
  return s.error.empty() && s.h.finite() && s.h.gamma < h_k;
}

}  // namespace

DescentResult descend_step(const HEvaluator& eval, std::span<const double> d_k, const HValue& h_k,
                           const GsdConfig& cfg) {
  cfg.validate();
  if (!h_k.finite()) throw std::invalid_argument("descend_step needs a finite h at d_k");
  const Anchor anchor = anchor_at(eval.field(), d_k, h_k.gamma);
  if (cfg.gradient_vanished(anchor.grad_norm, anchor.value, h_k.gamma,
                            anchor.value - eval.field().value_at_equilibrium())) {
    throw std::invalid_argument("descend_step called with a vanishing gradient at z_d");
  }

  LineSearch search(eval, anchor, h_k.gamma);
  DescentResult result;

  const double ratio = std::pow(cfg.beta_hi / cfg.beta_lo, 1.0 / (cfg.beta_count - 1));
  std::vector<double> schedule;
  for (int j = 0; j < cfg.beta_count; ++j) {
    schedule.push_back(j == cfg.beta_count - 1 ? cfg.beta_hi
                                               : cfg.beta_lo * std::pow(ratio, j));
  }

  std::vector<BetaSample> samples;
  auto evaluate_schedule = [&](const std::vector<double>& betas) {
    for (double b : betas) samples.push_back(search.sample(b));
    std::sort(samples.begin(), samples.end(),
              [](const BetaSample& a, const BetaSample& b) { return a.beta < b.beta; });
  };
  evaluate_schedule(schedule);

  auto first_improving = [&] {
    return std::any_of(samples.begin(), samples.end(),
                       [&](const BetaSample& s) { return improves(s, h_k.gamma); });
  };
  if (!first_improving()) {
    // One retry with the schedule extended 1e3x towards beta = 0.
    std::vector<double> extra;
    for (double b = cfg.beta_lo / ratio; b >= cfg.beta_lo * 1e-3 * (1.0 - 1e-12); b /= ratio) {
      extra.push_back(b);
    }
    evaluate_schedule(extra);
    result.schedule_extended = true;
  }

  for (const auto& s : samples) {
    if (!s.error.empty() || s.h.kind != HValue::Kind::NotIncreasingAtOrigin) continue;
    auto& slot = s.h.value_drop ? result.non_increasing : result.below_resolution;
    if (!slot) slot = s;
  }
  if (result.non_increasing && cfg.stop_on_non_increasing) {
    result.status = DescentResult::Status::NonIncreasing;
    result.table = std::move(samples);
    return result;
  }
  if (result.below_resolution) {
    result.status = DescentResult::Status::BelowResolution;
    result.direction = result.below_resolution->direction;
    result.h = result.below_resolution->h;
    result.table = std::move(samples);
    return result;
  }

  if (!first_improving()) {
    const bool all_infinite = std::all_of(samples.begin(), samples.end(), [](const BetaSample& s) {
      return !s.error.empty() || s.h.kind == HValue::Kind::InfiniteTruncated;
    });
    const bool any_valid = std::any_of(samples.begin(), samples.end(),
                                       [](const BetaSample& s) { return s.error.empty(); });
    result.status = all_infinite && any_valid ? DescentResult::Status::LeftFiniteRegion
                                              : DescentResult::Status::NoImprovingBeta;
    result.table = std::move(samples);
    return result;
  }

  // Best sample; within stall_tol of the minimum the smallest beta wins.
  double best_h = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (improves(s, h_k.gamma)) best_h = std::min(best_h, s.h.gamma);
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (improves(samples[i], h_k.gamma) && samples[i].h.gamma - best_h <= cfg.stall_tol * best_h) {
      best = i;
      break;
    }
  }

  // Bracketed Brent refinement on the dimensionless beta around the best sample.
  const double inv_scale = 1.0 / (h_k.gamma / anchor.grad_norm);
  const double center = samples[best].beta * inv_scale;
  const double lo = best > 0 ? samples[best - 1].beta * inv_scale : center / ratio;
  const double hi = best + 1 < samples.size() ? samples[best + 1].beta * inv_scale : center * ratio;
  std::vector<BetaSample> refined;
  const double penalty = 2.0 * h_k.gamma;
  auto objective = [&](double b) {
    BetaSample s = search.sample(b);
    const double v = improves(s, h_k.gamma) ? s.h.gamma : penalty;
    refined.push_back(std::move(s));
    return v;
  };
  std::uintmax_t max_iter = static_cast<std::uintmax_t>(std::max(cfg.refine_evals, 0));
  if (max_iter > 0 && lo < hi) {
    boost::math::tools::brent_find_minima(objective, lo, hi, std::numeric_limits<double>::digits,
                                          max_iter);
  }

  BetaSample chosen = samples[best];
  for (const auto& s : refined) {
    if (improves(s, h_k.gamma) && s.h.gamma < chosen.h.gamma) chosen = s;
  }
  samples.insert(samples.end(), std::make_move_iterator(refined.begin()),
                 std::make_move_iterator(refined.end()));
  std::sort(samples.begin(), samples.end(),
            [](const BetaSample& a, const BetaSample& b) { return a.beta < b.beta; });

  result.status = DescentResult::Status::Improved;
  result.beta = chosen.beta;
  result.direction = chosen.direction;
  result.h = chosen.h;
  result.table = std::move(samples);
  return result;
}

GsdTrace run_gsd(const HEvaluator& eval, std::span<const double> d0, const GsdConfig& cfg) {
  cfg.validate();
  const HValue h0 = eval(d0);
  if (!h0.finite()) {
    throw InvalidStart(std::string("descent start has h of kind ") + to_string(h0.kind));
  }

  GsdTrace trace;
  std::vector<double> d(d0.begin(), d0.end());
  HValue h = h0;
  bool stalled = false;

  for (int k = 0;; ++k) {
    const Anchor a = anchor_at(eval.field(), d, h.gamma);
    GsdStep step;
    step.k = k;
    step.d = d;
    step.h = h.gamma;
    step.z = a.z;
    step.grad = a.grad;
    step.grad_norm = a.grad_norm;
    step.value = a.value;
    trace.steps.push_back(step);
    trace.witness = d;
    trace.witness_grad_norm = a.grad_norm;

    auto finish = [&](Termination t) {
      trace.termination = t;
      return trace;
    };
    if (cfg.gradient_vanished(a.grad_norm, a.value, h.gamma,
                              a.value - eval.field().value_at_equilibrium())) {
      trace.witness = a.z;
      return finish(Termination::GradientVanished);
    }
    if (h.gamma < cfg.h_floor) return finish(Termination::HBelowFloor);
    if (stalled) return finish(Termination::Stalled);
    if (k >= cfg.max_iters) return finish(Termination::MaxIters);

    DescentResult r = descend_step(eval, d, h, cfg);
    switch (r.status) {
      case DescentResult::Status::NoImprovingBeta:
        return finish(Termination::Stalled);
      case DescentResult::Status::LeftFiniteRegion:
        return finish(Termination::LeftFiniteRegion);
      case DescentResult::Status::NonIncreasing:
        trace.witness = r.non_increasing->direction;
        trace.witness_gamma = r.non_increasing->h.gamma;
        return finish(Termination::NonIncreasingFound);
      case DescentResult::Status::BelowResolution:
        trace.witness = r.direction;
        trace.witness_gamma = r.h.gamma;
        trace.below_resolution = true;
        return finish(Termination::HBelowFloor);
      case DescentResult::Status::Improved:
        break;
    }
    trace.steps.back().beta = r.beta;
    trace.steps.back().next = r.direction;
    if ((h.gamma - r.h.gamma) / h.gamma < cfg.stall_tol) stalled = true;
    d = r.direction;
    h = r.h;
  }
}

GsdTrace run_gsd(const ScalarField& field, std::span<const double> d0, const GsdConfig& cfg,
                 const RayConfig& ray_cfg) {
  return run_gsd(HEvaluator(field, ray_cfg), d0, cfg);
}

}  // namespace lyascreen
