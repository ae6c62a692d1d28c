#include "lyascreen/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace lyascreen {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  // strtod rather than stod: subnormal results set ERANGE but are exact round trips.
  if (s.empty() || std::isspace(static_cast<unsigned char>(s.front()))) {
    throw FormatError("not a number: '" + s + "'");
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw FormatError("not a number: '" + s + "'");
  if (errno == ERANGE && std::isinf(v)) throw FormatError("number out of range: '" + s + "'");
  if (static_cast<std::size_t>(end - s.c_str()) != s.size()) {
    throw FormatError("trailing characters in number: '" + s + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string class_label(const HMapRow& row) {
  if (row.failed()) return "EvaluationError";
  if (row.h.finite()) return to_string(row.h.root_class);
  return to_string(row.h.kind);
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}

Termination termination_from(const std::string& s) {
  for (Termination t : {Termination::GradientVanished, Termination::Stalled,
                        Termination::HBelowFloor, Termination::MaxIters,
                        Termination::LeftFiniteRegion, Termination::NonIncreasingFound}) {
    if (s == to_string(t)) return t;
  }
  throw FormatError("unknown termination '" + s + "'");
}

VerdictTag tag_from(const std::string& s) {
  for (VerdictTag t : {VerdictTag::RuledOut, VerdictTag::PassedNecessaryCondition,
                       VerdictTag::NotPositiveDefinite, VerdictTag::InfimumZeroSuspected,
                       VerdictTag::Inconclusive}) {
    if (s == to_string(t)) return t;
  }
  throw FormatError("unknown verdict tag '" + s + "'");
}

}  // namespace

void write_hmap_csv(std::ostream& os, const HMap& map) {
  const int n = map.dimension;
  std::vector<std::string> header;
  for (int i = 1; i <= n; ++i) header.push_back("dir_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) header.push_back("raw_" + std::to_string(i));
  if (n == 2) header.push_back("theta");
  header.push_back("h");
  header.push_back("class");
  for (int i = 1; i <= n; ++i) header.push_back("z_" + std::to_string(i));
  write_row(os, header);

  for (const auto& row : map.rows) {
    std::vector<std::string> cells;
    for (double v : row.point.dir) cells.push_back(format_double(v));
    for (double v : row.point.raw) cells.push_back(format_double(v));
    if (n == 2) cells.push_back(row.theta ? format_double(*row.theta) : "");
    double h = std::numeric_limits<double>::quiet_NaN();
    if (!row.failed()) {
      h = row.h.kind == HValue::Kind::InfiniteTruncated ? std::numeric_limits<double>::infinity()
                                                        : row.h.gamma;
    }
    cells.push_back(format_double(h));
    cells.push_back(class_label(row));
    for (int i = 0; i < n; ++i) {
      cells.push_back(row.z.empty() ? "" : format_double(row.z[static_cast<std::size_t>(i)]));
    }
    write_row(os, cells);
  }
}

std::vector<HMapRecord> read_hmap_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty h-map file");
  const auto header = split_csv_line(line);
  const auto n = static_cast<std::size_t>(
      std::count_if(header.begin(), header.end(),
                    [](const std::string& h) { return h.rfind("dir_", 0) == 0; }));
  const bool has_theta = std::find(header.begin(), header.end(), "theta") != header.end();
  const std::size_t width = 3 * n + 2 + (has_theta ? 1 : 0);
  if (n == 0 || header.size() != width) throw FormatError("unexpected h-map header");

  std::vector<HMapRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != width) throw FormatError("h-map row has wrong width");
    HMapRecord r;
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) r.dir.push_back(parse_double(cells[c++]));
    for (std::size_t i = 0; i < n; ++i) r.raw.push_back(parse_double(cells[c++]));
    if (has_theta) {
      if (!cells[c].empty()) r.theta = parse_double(cells[c]);
      ++c;
    }
    r.h = parse_double(cells[c++]);
    r.cls = cells[c++];
    if (!cells[c].empty()) {
      for (std::size_t i = 0; i < n; ++i) r.z.push_back(parse_double(cells[c++]));
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_locus_csv(std::ostream& os, const HMap& map) {
  if (map.dimension != 2) throw std::invalid_argument("locus output needs a planar map");
  std::vector<const HMapRow*> finite;
  for (const auto& row : map.rows) {
    if (!row.failed() && row.h.finite()) finite.push_back(&row);
  }
  std::stable_sort(finite.begin(), finite.end(),
                   [](const HMapRow* a, const HMapRow* b) { return *a->theta < *b->theta; });
  os << "theta,z_1,z_2\n";
  for (const HMapRow* row : finite) {
    write_row(os, {format_double(*row->theta), format_double(row->z[0]),
                   format_double(row->z[1])});
  }
}

void write_ray_csv(std::ostream& os, const std::vector<RayProfileRow>& rows) {
  os << "gamma,k,kprime,kdoubleprime\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    write_row(os, {format_double(r.gamma), format_double(r.ok ? r.k : nan),
                   format_double(r.ok ? r.kprime : nan),
                   format_double(r.ok ? r.kdoubleprime : nan)});
  }
}

std::vector<RayProfileRow> read_ray_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "gamma,k,kprime,kdoubleprime") {
    throw FormatError("unexpected ray profile header");
  }
  std::vector<RayProfileRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) throw FormatError("ray profile row has wrong width");
    RayProfileRow r;
    r.gamma = parse_double(cells[0]);
    r.k = parse_double(cells[1]);
    r.kprime = parse_double(cells[2]);
    r.kdoubleprime = parse_double(cells[3]);
    r.ok = !std::isnan(r.k);
    rows.push_back(r);
  }
  return rows;
}

void write_violations_csv(std::ostream& os, const VdotReport& report) {
  const std::size_t n = !report.violations.empty() ? report.violations.front().x.size()
                        : !report.failures.empty() ? report.failures.front().x.size()
                                                   : 0;
  std::vector<std::string> header;
  for (std::size_t i = 1; i <= n; ++i) header.push_back("x_" + std::to_string(i));
  header.push_back("vdot");
  header.push_back("error");
  write_row(os, header);
  auto emit = [&](const VdotSample& s, double value) {
    std::vector<std::string> cells;
    for (double v : s.x) cells.push_back(format_double(v));
    cells.push_back(format_double(value));
    std::string err = s.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    cells.push_back(err);
    write_row(os, cells);
  };
  for (const auto& s : report.violations) emit(s, s.vdot);
  for (const auto& s : report.failures) emit(s, std::numeric_limits<double>::quiet_NaN());
}

std::string trace_to_json(const GsdTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    json j;
    j["k"] = s.k;
    j["d"] = s.d;
    j["h"] = s.h;
    j["z"] = s.z;
    j["grad"] = s.grad;
    j["grad_norm"] = s.grad_norm;
    j["value"] = s.value;
    j["beta"] = s.beta ? json(*s.beta) : json(nullptr);
    j["next"] = s.next;
    steps.push_back(std::move(j));
  }
  json out;
  out["steps"] = std::move(steps);
  out["termination"] = to_string(trace.termination);
  out["witness"] = trace.witness;
  out["witness_grad_norm"] = trace.witness_grad_norm;
  out["witness_gamma"] = trace.witness_gamma;
  out["below_resolution"] = trace.below_resolution;
  return out.dump(2) + "\n";
}

GsdTrace trace_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    GsdTrace t;
    for (const auto& s : j.at("steps")) {
      GsdStep step;
      step.k = s.at("k").get<int>();
      step.d = s.at("d").get<std::vector<double>>();
      step.h = s.at("h").get<double>();
      step.z = s.at("z").get<std::vector<double>>();
      step.grad = s.at("grad").get<std::vector<double>>();
      step.grad_norm = s.at("grad_norm").get<double>();
      step.value = s.at("value").get<double>();
      if (!s.at("beta").is_null()) step.beta = s.at("beta").get<double>();
      step.next = s.at("next").get<std::vector<double>>();
      t.steps.push_back(std::move(step));
    }
    t.termination = termination_from(j.at("termination").get<std::string>());
    t.witness = j.at("witness").get<std::vector<double>>();
    t.witness_grad_norm = j.at("witness_grad_norm").get<double>();
    t.witness_gamma = j.at("witness_gamma").get<double>();
    t.below_resolution = j.at("below_resolution").get<bool>();
    return t;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed trace JSON: ") + e.what());
  }
}

std::string verdict_to_json(const Verdict& v, const std::string& candidate) {
  json out;
  out["tag"] = to_string(v.tag);
  if (v.evidence) out["evidence"] = to_string(*v.evidence);
  out["candidate"] = candidate;
  out["witness"] = v.witness;
  out["grad_norm"] = v.grad_norm;
  out["witness_gamma"] = v.witness_gamma;
  if (!v.reason.empty()) out["reason"] = v.reason;
  out["provenance"] = {
      {"delta", v.provenance.delta},
      {"rounds", v.provenance.rounds},
      {"gamma_max", v.provenance.gamma_max},
      {"grad_tol", v.provenance.grad_tol},
      {"traces_run", v.provenance.traces_run},
      {"grid_steps", v.provenance.grid_steps},
  };
  if (v.trace) out["termination"] = to_string(v.trace->termination);
  out["warnings"] = v.warnings;
  return out.dump(2) + "\n";
}

Verdict verdict_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    Verdict v;
    v.tag = tag_from(j.at("tag").get<std::string>());
    if (j.contains("evidence")) {
      const auto e = j.at("evidence").get<std::string>();
      if (e == "AllInfinite") {
        v.evidence = PassEvidence::AllInfinite;
      } else if (e == "NoMinimizerFound") {
        v.evidence = PassEvidence::NoMinimizerFound;
      } else {
        throw FormatError("unknown evidence '" + e + "'");
      }
    }
    v.witness = j.at("witness").get<std::vector<double>>();
    v.grad_norm = j.at("grad_norm").get<double>();
    v.witness_gamma = j.at("witness_gamma").get<double>();
    if (j.contains("reason")) v.reason = j.at("reason").get<std::string>();
    const auto& p = j.at("provenance");
    v.provenance.delta = p.at("delta").get<double>();
    v.provenance.rounds = p.at("rounds").get<int>();
    v.provenance.gamma_max = p.at("gamma_max").get<double>();
    v.provenance.grad_tol = p.at("grad_tol").get<double>();
    v.provenance.traces_run = p.at("traces_run").get<int>();
    v.provenance.grid_steps = p.at("grid_steps").get<std::vector<int>>();
    v.warnings = j.at("warnings").get<std::vector<std::string>>();
    return v;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed verdict JSON: ") + e.what());
  }
}

std::string lpd_verdict_to_json(const LpdVerdict& v, const std::string& candidate,
                                const LpdDomain& domain) {
  json out;
  out["tag"] = to_string(v.tag);
  out["candidate"] = candidate;
  out["domain"] = to_string(domain.kind());
  out["witness"] = v.witness;
  out["witness_gamma"] = v.witness_gamma;
  out["provenance"] = {{"delta", v.delta}, {"gamma_max", v.gamma_max},
                       {"traces_run", v.traces_run}};
  if (v.trace) out["termination"] = to_string(v.trace->termination);
  out["warnings"] = v.warnings;
  return out.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace lyascreen
