#pragma once

// CSV and JSON artifacts, with readers for each format.
//
// CSV numbers use 17 significant digits; JSON numbers use the shortest text
// that round-trips to the same double.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lyascreen/grid.hpp"
#include "lyascreen/gsd.hpp"
#include "lyascreen/hfun.hpp"
#include "lyascreen/screen.hpp"

namespace lyascreen {

class FormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double v);  // %.17g, with inf / -inf / nan spelled out
double parse_double(const std::string& s);

// dir_1..dir_n, raw_1..raw_n, [theta,] h, class, z_1..z_n
void write_hmap_csv(std::ostream& os, const HMap& map);

struct HMapRecord {
  std::vector<double> dir;
  std::vector<double> raw;
  std::optional<double> theta;
  double h = 0.0;
  std::string cls;
  std::vector<double> z;  // empty unless h is finite
};

std::vector<HMapRecord> read_hmap_csv(std::istream& is);

// theta, z_1, z_2 for the finite rows of a planar map, sorted by theta.
void write_locus_csv(std::ostream& os, const HMap& map);

void write_ray_csv(std::ostream& os, const std::vector<RayProfileRow>& rows);
std::vector<RayProfileRow> read_ray_csv(std::istream& is);

void write_violations_csv(std::ostream& os, const VdotReport& report);

// Reading these back yields the serialized subset of the original fields.
std::string trace_to_json(const GsdTrace& trace);
GsdTrace trace_from_json(const std::string& text);

std::string verdict_to_json(const Verdict& v, const std::string& candidate);
Verdict verdict_from_json(const std::string& text);

std::string lpd_verdict_to_json(const LpdVerdict& v, const std::string& candidate,
                                const LpdDomain& domain);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace lyascreen
