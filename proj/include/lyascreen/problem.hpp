#pragma once

// Problem description files (JSON).
//
//   {
//     "dimension": 2,
//     "candidate": "x1^6/6 - 13*x1^4/4 + 18*x1^2 + x2^2",
//     "equilibrium": [0, 0],                 optional, defaults to the origin
//     "vector_field": ["-x1^3", "-x2"],      optional, one entry per coordinate
//     "domain": {"kind": "box", "lower": [-1, -1], "upper": [1, 1]},
//               {"kind": "ball", "center": [0, 0], "radius": 1}, or {"kind": "all"}
//     "delta": 0.05, "rounds": 2,
//     "ray": {"gamma_max": 1000, "delta_gamma": 0.01, "gamma_floor": 1e-6, "root_tol": 1e-10,
//             "curvature_tol": 1e-8, "touch_tol": 1e-8},
//     "gsd": {"beta_count": 48, "beta_lo": 1e-6, "beta_hi": 100, "grad_tol": 1e-8,
//             "grad_scale_tol": 1e-6, "stall_tol": 1e-10, "h_floor": 1e-5, "max_iters": 200},
//     "samples": {"random": 1000, "radius": 4, "seed": 1, "grid_per_axis": 0,
//                 "points": [[2.5]]}
//   }
//
// Unknown keys are rejected so that typos do not silently fall back to defaults.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyascreen/expr.hpp"
#include "lyascreen/gsd.hpp"
#include "lyascreen/hfun.hpp"
#include "lyascreen/screen.hpp"

namespace lyascreen {

class InputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  int dimension = 0;
  std::string candidate;
  std::vector<double> equilibrium;
  std::vector<std::string> vector_field;
  std::optional<LpdDomain> domain;
  double delta = 0.05;
  int rounds = 2;
  RayConfig ray;
  GsdConfig gsd;
  SampleSpec samples;
};

// Throws InputError on malformed JSON or invalid values, ParseError on bad expressions.
ProblemSpec parse_problem(const std::string& json_text);
ProblemSpec load_problem(const std::string& path);

ScalarField make_field(const ProblemSpec& spec);
std::optional<VectorField> make_vector_field(const ProblemSpec& spec);

}  // namespace lyascreen
