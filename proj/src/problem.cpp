#include "lyascreen/problem.hpp"

#include <set>

#include "json.hpp"
#include "lyascreen/io.hpp"

namespace lyascreen {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw InputError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("key '") + key + "' in " + where + " has the wrong type");
  }
}

std::vector<double> vector_of(const json& obj, const char* key, const std::string& where) {
  std::vector<double> v;
  read_opt(obj, key, v, where);
  return v;
}

LpdDomain parse_domain(const json& d, int n) {
  if (!d.is_object()) throw InputError("domain must be an object");
  std::string kind;
  read_opt(d, "kind", kind, "domain");
  try {
    if (kind == "all") {
      reject_unknown(d, {"kind"}, "domain");
      return LpdDomain::all_space(n);
    }
    if (kind == "box") {
      reject_unknown(d, {"kind", "lower", "upper"}, "domain");
      auto lo = vector_of(d, "lower", "domain");
      auto hi = vector_of(d, "upper", "domain");
      if (lo.size() != static_cast<std::size_t>(n)) {
        throw InputError("box bounds must have one entry per coordinate");
      }
      return LpdDomain::box(std::move(lo), std::move(hi));
    }
    if (kind == "ball") {
      reject_unknown(d, {"kind", "center", "radius"}, "domain");
      auto c = vector_of(d, "center", "domain");
      double r = 0.0;
      read_opt(d, "radius", r, "domain");
      if (c.size() != static_cast<std::size_t>(n)) {
        throw InputError("ball center must have one entry per coordinate");
      }
      return LpdDomain::ball(std::move(c), r);
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("invalid domain: ") + e.what());
  }
  throw InputError("domain kind must be one of all, box, ball");
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("spec must be a JSON object");
  reject_unknown(j,
                 {"dimension", "candidate", "equilibrium", "vector_field", "domain", "delta",
                  "rounds", "ray", "gsd", "samples"},
                 "spec");

  ProblemSpec s;
  read_opt(j, "dimension", s.dimension, "spec");
  read_opt(j, "candidate", s.candidate, "spec");
  if (s.dimension < 1) throw InputError("dimension must be a positive integer");
  if (s.candidate.empty()) throw InputError("candidate expression is required");

  s.equilibrium = vector_of(j, "equilibrium", "spec");
  if (s.equilibrium.empty()) s.equilibrium.assign(static_cast<std::size_t>(s.dimension), 0.0);
  if (s.equilibrium.size() != static_cast<std::size_t>(s.dimension)) {
    throw InputError("equilibrium must have " + std::to_string(s.dimension) + " coordinates");
  }

  read_opt(j, "vector_field", s.vector_field, "spec");
  if (!s.vector_field.empty() && s.vector_field.size() != static_cast<std::size_t>(s.dimension)) {
    throw InputError("vector_field must have 0 or " + std::to_string(s.dimension) + " entries");
  }
  if (j.contains("domain")) s.domain = parse_domain(j.at("domain"), s.dimension);

  read_opt(j, "delta", s.delta, "spec");
  read_opt(j, "rounds", s.rounds, "spec");
  if (s.dimension > 1 && !(s.delta > 0.0 && s.delta <= 2.0)) {
    throw InputError("delta must lie in (0, 2]");
  }
  if (s.rounds < 1) throw InputError("rounds must be at least 1");

  if (j.contains("ray")) {
    const json& r = j.at("ray");
    if (!r.is_object()) throw InputError("ray must be an object");
    reject_unknown(r,
                   {"gamma_max", "delta_gamma", "gamma_floor", "root_tol", "curvature_tol",
                    "touch_tol", "near_ratio"},
                   "ray");
    read_opt(r, "gamma_max", s.ray.gamma_max, "ray");
    read_opt(r, "delta_gamma", s.ray.delta_gamma, "ray");
    read_opt(r, "gamma_floor", s.ray.gamma_floor, "ray");
    read_opt(r, "root_tol", s.ray.root_tol, "ray");
    read_opt(r, "curvature_tol", s.ray.curvature_tol, "ray");
    read_opt(r, "touch_tol", s.ray.touch_tol, "ray");
    read_opt(r, "near_ratio", s.ray.near_ratio, "ray");
  }
  if (j.contains("gsd")) {
    const json& g = j.at("gsd");
    if (!g.is_object()) throw InputError("gsd must be an object");
    reject_unknown(g,
                   {"beta_count", "beta_lo", "beta_hi", "grad_tol", "grad_scale_tol", "stall_tol",
                    "h_floor", "max_iters", "refine_evals"},
                   "gsd");
    read_opt(g, "beta_count", s.gsd.beta_count, "gsd");
    read_opt(g, "beta_lo", s.gsd.beta_lo, "gsd");
    read_opt(g, "beta_hi", s.gsd.beta_hi, "gsd");
    read_opt(g, "grad_tol", s.gsd.grad_tol, "gsd");
    read_opt(g, "grad_scale_tol", s.gsd.grad_scale_tol, "gsd");
    read_opt(g, "stall_tol", s.gsd.stall_tol, "gsd");
    read_opt(g, "h_floor", s.gsd.h_floor, "gsd");
    read_opt(g, "max_iters", s.gsd.max_iters, "gsd");
    read_opt(g, "refine_evals", s.gsd.refine_evals, "gsd");
  }
  if (j.contains("samples")) {
    const json& m = j.at("samples");
    if (!m.is_object()) throw InputError("samples must be an object");
    reject_unknown(m, {"random", "radius", "seed", "grid_per_axis", "points"}, "samples");
    read_opt(m, "random", s.samples.random_count, "samples");
    read_opt(m, "radius", s.samples.radius, "samples");
    read_opt(m, "seed", s.samples.seed, "samples");
    read_opt(m, "grid_per_axis", s.samples.grid_per_axis, "samples");
    read_opt(m, "points", s.samples.points, "samples");
  }

  try {
    s.ray.validate();
    s.gsd.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  // Surface expression errors at load time.
  Expression::parse(s.candidate, s.dimension);
  for (const auto& f : s.vector_field) Expression::parse(f, s.dimension);
  return s;
}

ProblemSpec load_problem(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw InputError(e.what());
  }
  return parse_problem(text);
}

ScalarField make_field(const ProblemSpec& spec) {
  return ScalarField(Expression::parse(spec.candidate, spec.dimension), spec.equilibrium);
}

std::optional<VectorField> make_vector_field(const ProblemSpec& spec) {
  if (spec.vector_field.empty()) return std::nullopt;
  std::vector<Expression> comps;
  for (const auto& f : spec.vector_field) comps.push_back(Expression::parse(f, spec.dimension));
  return VectorField(std::move(comps));
}

}  // namespace lyascreen
