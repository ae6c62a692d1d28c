#include "lyascreen/cli.hpp"

#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "lyascreen/io.hpp"
#include "lyascreen/problem.hpp"

namespace lyascreen {

int exit_code_for(VerdictTag tag) {
  switch (tag) {
    case VerdictTag::PassedNecessaryCondition: return exit_code::ok;
    case VerdictTag::RuledOut: return exit_code::ruled_out;
    case VerdictTag::NotPositiveDefinite: return exit_code::not_positive_definite;
    case VerdictTag::InfimumZeroSuspected: return exit_code::infimum_zero;
    case VerdictTag::Inconclusive: return exit_code::inconclusive;
  }
  return exit_code::runtime_error;
}

int exit_code_for(LpdTag tag) {
  return tag == LpdTag::NotLPD ? exit_code::not_positive_definite : exit_code::ok;
}

namespace {

struct CommonOptions {
  std::string spec;
  std::string out;
  std::optional<double> delta;
  std::optional<double> gamma_max;
  unsigned threads = 0;
};

struct RayOptions {
  std::string dir;
  int count = 1001;
};

struct VdotOptions {
  std::optional<std::size_t> samples;
  std::optional<double> radius;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_per_axis;
  std::vector<std::string> points;
};

std::vector<double> parse_point(const std::string& text, int n, const char* what) {
  std::vector<double> v;
  std::string cell;
  std::istringstream is(text);
  while (std::getline(is, cell, ',')) {
    try {
      v.push_back(parse_double(cell));
    } catch (const FormatError&) {
      throw InputError(std::string(what) + " '" + text + "' is not a comma-separated vector");
    }
  }
  if (v.size() != static_cast<std::size_t>(n)) {
    throw InputError(std::string(what) + " must have " + std::to_string(n) + " components");
  }
  return v;
}

ProblemSpec load_with_overrides(const CommonOptions& o) {
  ProblemSpec spec = load_problem(o.spec);
  if (o.delta) spec.delta = *o.delta;
  if (o.gamma_max) spec.ray.gamma_max = *o.gamma_max;
  if (spec.dimension > 1 && !(spec.delta > 0.0 && spec.delta <= 2.0)) {
    throw InputError("delta must lie in (0, 2]");
  }
  try {
    spec.ray.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return spec;
}

ScalarField field_of(const ProblemSpec& spec) {
  try {
    return make_field(spec);
  } catch (const EvalDomainError& e) {
    throw InputError(std::string("candidate cannot be evaluated at the equilibrium: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

std::filesystem::path prepare_out(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

template <class Writer>
void write_stream(const std::filesystem::path& path, Writer&& w) {
  std::ostringstream os;
  w(os);
  write_file(path.string(), os.str());
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

int cmd_screen(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load_with_overrides(o);
  const ScalarField field = field_of(spec);
  ScreenConfig cfg;
  cfg.delta = spec.delta;
  cfg.rounds = spec.rounds;
  cfg.ray = spec.ray;
  cfg.gsd = spec.gsd;
  cfg.threads = o.threads;
  const Verdict v = necessary_condition_test(field, cfg);

  const auto dir = prepare_out(o.out);
  write_file((dir / "verdict.json").string(), verdict_to_json(v, field.expression().to_string()));
  if (v.map) write_stream(dir / "hmap.csv", [&](std::ostream& os) { write_hmap_csv(os, *v.map); });
  if (v.trace) write_file((dir / "gsd_trace.json").string(), trace_to_json(*v.trace));

  out << to_string(v.tag);
  if (v.evidence) out << " (" << to_string(*v.evidence) << ")";
  if (!v.witness.empty()) {
    out << " witness=(";
    for (std::size_t i = 0; i < v.witness.size(); ++i) {
      out << (i ? "," : "") << format_double(v.witness[i]);
    }
    out << ")";
  }
  if (v.tag == VerdictTag::RuledOut) out << " grad_norm=" << format_double(v.grad_norm);
  if (!v.reason.empty()) out << " reason=" << v.reason;
  out << '\n';
  print_warnings(err, v.warnings);
  return exit_code_for(v.tag);
}

int cmd_hmap(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load_with_overrides(o);
  const ScalarField field = field_of(spec);
  const HMap map = h_map(field, spec.delta, spec.ray, o.threads);
  const auto flags = discontinuity_probe(map);

  const auto dir = prepare_out(o.out);
  write_stream(dir / "hmap.csv", [&](std::ostream& os) { write_hmap_csv(os, map); });
  if (map.dimension == 2) {
    write_stream(dir / "locus.csv", [&](std::ostream& os) { write_locus_csv(os, map); });
  }
  write_stream(dir / "discontinuities.csv", [&](std::ostream& os) {
    os << "a,b,case,straddles_infinite\n";
    for (const auto& f : flags) {
      os << f.a << ',' << f.b << ',' << to_string(f.suspected) << ','
         << (f.straddles_infinite ? 1 : 0) << '\n';
    }
  });

  std::size_t finite = 0, failed = 0;
  const HMapRow* best = nullptr;
  for (const auto& row : map.rows) {
    if (row.failed()) {
      ++failed;
    } else if (row.h.finite()) {
      ++finite;
      if (!best || row.h.gamma < best->h.gamma) best = &row;
    }
  }
  out << map.rows.size() << " directions, " << finite << " finite, " << failed << " failed";
  if (best) out << ", min h=" << format_double(best->h.gamma);
  out << ", " << flags.size() << " discontinuity flag(s)\n";
  print_warnings(err, field.warnings());
  return exit_code::ok;
}

int cmd_ray(const CommonOptions& o, const RayOptions& r, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load_with_overrides(o);
  const ScalarField field = field_of(spec);
  const auto raw = parse_point(r.dir, spec.dimension, "--dir");
  std::vector<double> d;
  try {
    d = normalized(raw);
  } catch (const std::invalid_argument&) {
    throw InputError("--dir must be non-zero");
  }
  if (r.count < 2) throw InputError("--count must be at least 2");
  const auto rows = ray_profile(field, d, spec.ray, r.count);

  const auto dir = prepare_out(o.out);
  write_stream(dir / "ray.csv", [&](std::ostream& os) { write_ray_csv(os, rows); });

  try {
    const HValue h = h_of(field, d, spec.ray);
    out << "h=" << (h.finite() ? format_double(h.gamma) : std::string("inf")) << ' '
        << to_string(h.kind);
    if (h.finite()) out << ' ' << to_string(h.root_class);
    out << '\n';
  } catch (const EvalDomainError& e) {
    out << "h undetermined: " << e.what() << '\n';
  }
  print_warnings(err, field.warnings());
  return exit_code::ok;
}

int cmd_lpd(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load_with_overrides(o);
  const ScalarField field = field_of(spec);
  const LpdDomain domain = spec.domain ? *spec.domain : LpdDomain::all_space(spec.dimension);
  if (!domain.interior(field.equilibrium())) {
    throw InputError("equilibrium must lie strictly inside the domain");
  }
  LpdConfig cfg;
  cfg.delta = spec.delta;
  cfg.ray = spec.ray;
  cfg.gsd = spec.gsd;
  cfg.threads = o.threads;
  const LpdVerdict v = local_positive_definiteness(field, domain, cfg);

  const auto dir = prepare_out(o.out);
  write_file((dir / "lpd_verdict.json").string(),
             lpd_verdict_to_json(v, field.expression().to_string(), domain));
  if (v.map) write_stream(dir / "hmap.csv", [&](std::ostream& os) { write_hmap_csv(os, *v.map); });
  if (v.trace) write_file((dir / "gsd_trace.json").string(), trace_to_json(*v.trace));

  out << to_string(v.tag);
  if (!v.witness.empty()) {
    out << " witness=(";
    for (std::size_t i = 0; i < v.witness.size(); ++i) {
      out << (i ? "," : "") << format_double(v.witness[i]);
    }
    out << ")";
  }
  out << '\n';
  print_warnings(err, v.warnings);
  return exit_code_for(v.tag);
}

int cmd_vdot(const CommonOptions& o, const VdotOptions& vo, std::ostream& out, std::ostream& err) {
  ProblemSpec spec = load_with_overrides(o);
  const ScalarField field = field_of(spec);
  const auto f = make_vector_field(spec);
  if (!f) throw InputError("vdot needs a vector_field in the spec");
  SampleSpec s = spec.samples;
  if (vo.samples) s.random_count = *vo.samples;
  if (vo.radius) s.radius = *vo.radius;
  if (vo.seed) s.seed = *vo.seed;
  if (vo.grid_per_axis) s.grid_per_axis = *vo.grid_per_axis;
  for (const auto& p : vo.points) s.points.push_back(parse_point(p, spec.dimension, "--point"));
  if (s.random_count == 0 && s.grid_per_axis == 0 && s.points.empty()) {
    throw InputError("no samples requested");
  }
  VdotReport report;
  try {
    report = vdot_sample(field, *f, s);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  const auto dir = prepare_out(o.out);
  write_stream(dir / "violations.csv", [&](std::ostream& os) { write_violations_csv(os, report); });
  out << report.evaluated << " samples, " << report.violations.size() << " violation(s), "
      << report.failures.size() << " evaluation failure(s)";
  if (report.violations.empty()) out << "; no violation found at sampled points (not a proof)";
  out << '\n';
  print_warnings(err, field.warnings());
  print_warnings(err, report.warnings);
  return report.violations.empty() ? exit_code::ok : exit_code::vdot_violations;
}

const char* parse_error_kind(const lyascreen::ParseError& e) {
  if (dynamic_cast<const SyntaxError*>(&e)) return "SyntaxError";
  if (dynamic_cast<const UnknownIdentifier*>(&e)) return "UnknownIdentifier";
  if (dynamic_cast<const VariableOutOfRange*>(&e)) return "VariableOutOfRange";
  return "ParseError";
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--spec", o.spec, "Problem description (JSON)")->required();
  cmd->add_option("--out", o.out, "Output directory")->required();
  cmd->add_option("--delta", o.delta, "Grid spacing on the infinity-norm sphere");
  cmd->add_option("--gamma-max", o.gamma_max, "Ray truncation radius");
  cmd->add_option("--threads", o.threads, "Worker threads for grid evaluation (0 = all cores)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Screen Lyapunov function candidates through the h function", "lyascreen"};
  app.require_subcommand(1);

  CommonOptions common;
  RayOptions ray;
  VdotOptions vdot;

  auto* screen = app.add_subcommand("screen", "Necessary-condition test and verdict");
  auto* hmap = app.add_subcommand("hmap", "h over the direction grid, z_d locus for n = 2");
  auto* ray_cmd = app.add_subcommand("ray", "k_d, k_d', k_d'' along one direction");
  auto* lpd = app.add_subcommand("lpd", "Local positive definiteness heuristic");
  auto* vdot_cmd = app.add_subcommand("vdot", "Sample V-dot for sign violations");
  for (auto* c : {screen, hmap, ray_cmd, lpd, vdot_cmd}) add_common(c, common);
  ray_cmd->add_option("--dir", ray.dir, "Direction as comma-separated components")->required();
  ray_cmd->add_option("--count", ray.count, "Number of evenly spaced samples on [0, gamma_max]");
  vdot_cmd->add_option("--samples", vdot.samples, "Uniform random samples in the box around x*");
  vdot_cmd->add_option("--radius", vdot.radius, "Half-width of the sampling box");
  vdot_cmd->add_option("--seed", vdot.seed, "Random seed");
  vdot_cmd->add_option("--grid-per-axis", vdot.grid_per_axis, "Tensor grid points per axis");
  vdot_cmd->add_option("--point", vdot.points, "Explicit sample point (repeatable)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::input_error;
  }

  try {
    if (*screen) return cmd_screen(common, out, err);
    if (*hmap) return cmd_hmap(common, out, err);
    if (*ray_cmd) return cmd_ray(common, ray, out, err);
    if (*lpd) return cmd_lpd(common, out, err);
    if (*vdot_cmd) return cmd_vdot(common, vdot, out, err);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return exit_code::input_error;
  } catch (const lyascreen::ParseError& e) {
    err << "input error: " << parse_error_kind(e) << " at position " << e.position() << ": "
        << e.what() << '\n';
    return exit_code::input_error;
  } catch (const InvalidDelta& e) {
    err << "input error: " << e.what() << '\n';
    return exit_code::input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::runtime_error;
  }
  return exit_code::input_error;
}

}  // namespace lyascreen
