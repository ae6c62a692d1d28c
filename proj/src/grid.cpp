#include "lyascreen/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

namespace lyascreen {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

DirectionGrid::DirectionGrid(int dimension, int steps, bool) : dimension_(dimension), steps_(steps) {}

DirectionGrid::DirectionGrid(int dimension, double delta) : dimension_(dimension), steps_(2) {
  if (dimension < 1) throw std::invalid_argument("grid dimension must be positive");
  if (dimension == 1) return;
  if (!(delta > 0.0 && delta <= 2.0)) {
    throw InvalidDelta("grid spacing must lie in (0, 2]");
  }
  const double s = std::ceil(2.0 / delta - 1e-9);
  if (s > 1e7) throw InvalidDelta("grid spacing is too small");
  steps_ = static_cast<int>(s);
}

DirectionGrid DirectionGrid::with_steps(int dimension, int steps) {
  if (dimension < 1) throw std::invalid_argument("grid dimension must be positive");
  if (steps < 1) throw InvalidDelta("grid needs at least one step per face");
  return DirectionGrid(dimension, dimension == 1 ? 2 : steps, true);
}

std::size_t DirectionGrid::size() const {
  if (dimension_ == 1) return 2;
  double outer = std::pow(steps_ + 1.0, dimension_);
  double inner = std::pow(steps_ - 1.0, dimension_);
  return static_cast<std::size_t>(outer - inner);
}

namespace {

GridPoint make_point(std::vector<int> lattice, int steps) {
  GridPoint p;
  p.raw.resize(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    p.raw[i] = static_cast<double>(2 * lattice[i] - steps) / steps;
  }
  p.dir = normalized(p.raw);
  p.lattice = std::move(lattice);
  return p;
}

}  // namespace

std::vector<GridPoint> DirectionGrid::points() const {
  std::vector<GridPoint> out;
  const int n = dimension_;
  const int m = steps_;
  if (n == 1) {
    out.push_back(make_point({m}, m));
    out.push_back(make_point({0}, m));
    return out;
  }
  out.reserve(size());
  std::vector<int> lattice(static_cast<std::size_t>(n));
  std::vector<int> free_coords;
  for (int face = 0; face < n; ++face) {
    free_coords.clear();
    for (int j = 0; j < n; ++j) {
      if (j != face) free_coords.push_back(j);
    }
    for (int sign : {+1, -1}) {
      lattice.assign(static_cast<std::size_t>(n), 0);
      lattice[static_cast<std::size_t>(face)] = sign > 0 ? m : 0;
      // Odometer over the free coordinates; the first one is most significant.
      for (;;) {
        bool owned_earlier = false;
        for (int j = 0; j < face; ++j) {
          const int v = lattice[static_cast<std::size_t>(j)];
          if (v == 0 || v == m) {
            owned_earlier = true;
            break;
          }
        }
        if (!owned_earlier) out.push_back(make_point(lattice, m));

        int pos = static_cast<int>(free_coords.size()) - 1;
        while (pos >= 0) {
          auto& c = lattice[static_cast<std::size_t>(free_coords[static_cast<std::size_t>(pos)])];
          if (c < m) {
            ++c;
            break;
          }
          c = 0;
          --pos;
        }
        if (pos < 0) break;
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> grid_directions(int dimension, double delta) {
  std::vector<std::vector<double>> dirs;
  for (auto& p : DirectionGrid(dimension, delta).points()) dirs.push_back(std::move(p.dir));
  return dirs;
}

HMap h_map(const HEvaluator& eval, const DirectionGrid& grid, unsigned threads) {
  if (grid.dimension() != eval.field().dimension()) {
    throw std::invalid_argument("grid dimension does not match the field");
  }
  HMap map;
  map.dimension = grid.dimension();
  map.steps = grid.steps();
  std::vector<GridPoint> points = grid.points();
  map.rows.resize(points.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      HMapRow& row = map.rows[i];
      row.point = std::move(points[i]);
      if (map.dimension == 2) {
        double t = std::atan2(row.point.dir[1], row.point.dir[0]);
        if (t < 0.0) t += 2.0 * std::numbers::pi;
        row.theta = t;
      }
      try {
        row.h = eval(row.point.dir);
        if (row.h.finite()) row.z = z_of(eval.field(), row.point.dir, row.h);
      } catch (const EvalDomainError& e) {
        row.error = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };

  const unsigned n_threads =
      std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(points.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);
  return map;
}

HMap h_map(const ScalarField& field, double delta, const RayConfig& cfg, unsigned threads) {
  return h_map(HEvaluator(field, cfg), DirectionGrid(field.dimension(), delta), threads);
}

ScanReport scan_for_finite_h(const HEvaluator& eval, const DirectionGrid& grid, unsigned threads) {
  ScanReport report;
  report.map = h_map(eval, grid, threads);
  bool all_infinite = !report.map.rows.empty();
  for (std::size_t i = 0; i < report.map.rows.size(); ++i) {
    const HMapRow& row = report.map.rows[i];
    if (row.failed()) {
      report.failures.push_back(i);
      all_infinite = false;
      continue;
    }
    switch (row.h.kind) {
      case HValue::Kind::Finite:
        all_infinite = false;
        if (!report.first_finite) report.first_finite = i;
        if (!report.min_finite || row.h.gamma < report.map.rows[*report.min_finite].h.gamma) {
          report.min_finite = i;
        }
        break;
      case HValue::Kind::NotIncreasingAtOrigin: {
        all_infinite = false;
        // Prefer value drops, then the steepest one; ties keep traversal order.
        auto stronger = [](const HValue& a, const HValue& b) {
          if (a.value_drop != b.value_drop) return a.value_drop;
          return a.rise < b.rise;
        };
        if (!report.not_increasing || stronger(row.h, report.map.rows[*report.not_increasing].h)) {
          report.not_increasing = i;
        }
        break;
      }
      case HValue::Kind::InfiniteTruncated:
        break;
    }
  }
  report.all_infinite = all_infinite;
  return report;
}

ScanReport scan_for_finite_h(const ScalarField& field, double delta, const RayConfig& cfg,
                             unsigned threads) {
  return scan_for_finite_h(HEvaluator(field, cfg), DirectionGrid(field.dimension(), delta),
                           threads);
}

const char* to_string(DiscontinuityCase c) {
  switch (c) {
    case DiscontinuityCase::Case1: return "Case1";
    case DiscontinuityCase::Case2: return "Case2";
    case DiscontinuityCase::Unclassified: return "Unclassified";
  }
  return "?";
}

std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs(const HMap& map) {
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t i = 0; i < map.rows.size(); ++i) index.emplace(map.rows[i].point.lattice, i);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < map.rows.size(); ++i) {
    std::vector<int> probe = map.rows[i].point.lattice;
    for (std::size_t j = 0; j < probe.size(); ++j) {
      if (probe[j] >= map.steps) continue;
      ++probe[j];
      if (auto it = index.find(probe); it != index.end()) {
        pairs.emplace_back(std::min(i, it->second), std::max(i, it->second));
      }
      --probe[j];
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

std::vector<DiscontinuityFlag> discontinuity_probe(const HMap& map, const ProbeConfig& cfg) {
  const auto pairs = adjacent_pairs(map);
  auto finite = [&](std::size_t i) { return !map.rows[i].failed() && map.rows[i].h.finite(); };
  auto infinite = [&](std::size_t i) {
    return !map.rows[i].failed() && map.rows[i].h.kind == HValue::Kind::InfiniteTruncated;
  };

  std::vector<double> finite_h;
  for (std::size_t i = 0; i < map.rows.size(); ++i) {
    if (finite(i)) finite_h.push_back(map.rows[i].h.gamma);
  }
  const double median_h = median(finite_h);

  // Jumps incident to each row, over finite-finite pairs.
  std::vector<std::vector<std::size_t>> incident(map.rows.size());
  std::vector<double> jumps(pairs.size(), -1.0);
  std::vector<double> all_jumps;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    if (finite(a) && finite(b)) {
      jumps[p] = std::abs(map.rows[a].h.gamma - map.rows[b].h.gamma);
      all_jumps.push_back(jumps[p]);
      incident[a].push_back(p);
      incident[b].push_back(p);
    }
  }
  const double global_jump = median(all_jumps);

  std::vector<DiscontinuityFlag> flags;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    bool flagged = false;
    bool straddle = false;
    if (jumps[p] >= 0.0) {
      std::vector<double> local;
      for (std::size_t end : {a, b}) {
        for (std::size_t q : incident[end]) {
          if (q != p) local.push_back(jumps[q]);
        }
      }
      const double slope = local.empty() ? global_jump : median(local);
      const double scale = std::max(map.rows[a].h.gamma, map.rows[b].h.gamma);
      flagged = jumps[p] > cfg.jump_factor * std::max(slope, 1e-9 * scale);
    } else if ((finite(a) && infinite(b)) || (infinite(a) && finite(b))) {
      flagged = true;
      straddle = true;
    }
    if (!flagged) continue;

    double smaller = std::numeric_limits<double>::infinity();
    bool inflection = false;
    for (std::size_t end : {a, b}) {
      if (!finite(end)) continue;
      smaller = std::min(smaller, map.rows[end].h.gamma);
      inflection = inflection || map.rows[end].h.root_class == RootClass::Inflection;
    }
    DiscontinuityCase c = DiscontinuityCase::Unclassified;
    if (smaller < cfg.case1_fraction * median_h) {
      c = DiscontinuityCase::Case1;
    } else if (inflection) {
      c = DiscontinuityCase::Case2;
    }
    flags.push_back({a, b, c, straddle});
  }
  return flags;
}

}  // namespace lyascreen
