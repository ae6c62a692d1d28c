#pragma once

// Direction grids on the infinity-norm unit sphere and whole-sphere h maps.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lyascreen/hfun.hpp"

namespace lyascreen {

class InvalidDelta : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GridPoint {
  std::vector<int> lattice;   // integer coordinates in [0, steps]
  std::vector<double> raw;    // point on the infinity-norm sphere
  std::vector<double> dir;    // raw / ||raw||_2
};

// Each coordinate of a face takes the values -1 + 2k/steps, k = 0..steps,
// so neighbours are at most delta apart. Faces are visited in the order
// +x1, -x1, +x2, -x2, ...; a point shared by several faces is emitted by the
// first of them.
class DirectionGrid {
 public:
  DirectionGrid(int dimension, double delta);
  static DirectionGrid with_steps(int dimension, int steps);

  int dimension() const { return dimension_; }
  int steps() const { return steps_; }
  double spacing() const { return 2.0 / steps_; }
  // Grid with every spacing halved; its points are a superset of this one's.
  DirectionGrid refined() const { return with_steps(dimension_, steps_ * 2); }

  std::vector<GridPoint> points() const;
  std::size_t size() const;

 private:
  DirectionGrid(int dimension, int steps, bool);

  int dimension_;
  int steps_;
};

std::vector<std::vector<double>> grid_directions(int dimension, double delta);

struct HMapRow {
  GridPoint point;
  std::optional<double> theta;  // n = 2 only, in [0, 2 pi)
  HValue h;
  std::vector<double> z;        // empty unless h is finite
  std::string error;            // evaluation failure, h is meaningless when set
  bool failed() const { return !error.empty(); }
};

struct HMap {
  int dimension = 0;
  int steps = 0;
  std::vector<HMapRow> rows;

  double spacing() const { return 2.0 / steps; }
};

// Rows are evaluated on `threads` workers and assembled in traversal order.
HMap h_map(const HEvaluator& eval, const DirectionGrid& grid, unsigned threads = 0);
HMap h_map(const ScalarField& field, double delta, const RayConfig& cfg, unsigned threads = 0);

struct ScanReport {
  HMap map;
  std::optional<std::size_t> first_finite;    // traversal order
  std::optional<std::size_t> min_finite;      // smallest h, earliest on ties
  // Most pronounced non-increasing direction: value drops first, then the
  // lowest rise, then traversal order.
  std::optional<std::size_t> not_increasing;
  std::vector<std::size_t> failures;
  bool all_infinite = false;
};

ScanReport scan_for_finite_h(const HEvaluator& eval, const DirectionGrid& grid,
                             unsigned threads = 0);
ScanReport scan_for_finite_h(const ScalarField& field, double delta, const RayConfig& cfg,
                             unsigned threads = 0);

enum class DiscontinuityCase { Case1, Case2, Unclassified };
const char* to_string(DiscontinuityCase c);

struct DiscontinuityFlag {
  std::size_t a;
  std::size_t b;
  DiscontinuityCase suspected;
  bool straddles_infinite;
};

struct ProbeConfig {
  double jump_factor = 10.0;
  // A pair is Case1 when its smaller finite h is below this fraction of the
  // median finite h over the map.
  double case1_fraction = 0.1;
};

// Adjacent pairs differ by one lattice step in one coordinate.
std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs(const HMap& map);
std::vector<DiscontinuityFlag> discontinuity_probe(const HMap& map, const ProbeConfig& cfg = {});

unsigned resolve_threads(unsigned requested);

}  // namespace lyascreen
