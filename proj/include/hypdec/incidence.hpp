#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hypdec/common.hpp"
#include "hypdec/rng.hpp"

namespace hypdec::incidence {

struct Line {
  Vec3 point;
  Vec3 dir;  // unit
};

// Directionally delta-separated lines (directions compared up to sign).
struct LineFamily {
  std::vector<Line> lines;
  double delta = 0;
  void validate() const;
  double direction_separation() const;
  // max count of directions within one delta-ball on the sphere
  int direction_multiplicity() const;
};

// Per line: sorted parameters t of delta-ball centers on the line
// (center = point + t*dir). Balls lie inside the unit ball with margin
// delta, so each ball sits inside the delta-tube around its line.
struct Shading {
  double delta = 0;
  std::vector<std::vector<double>> centers;

  // covered 1D measure of the union of [t-delta, t+delta] on a window
  double covered_length(int line, double lo, double hi) const;
};

// Parameter range with |point + t dir| <= 1 - margin.
std::pair<double, double> chord(const Line& l, double margin = 0);

LineFamily make_bush(double delta, int count, CounterRng& rng);
LineFamily make_brush(double delta, int count, CounterRng& rng);
LineFamily make_parallel(double delta, int count, CounterRng& rng);
LineFamily make_random(double delta, int count, CounterRng& rng);

enum class ShadingKind { full, half, concentrated, random_half };
Shading make_shading(const LineFamily& fam, ShadingKind kind, CounterRng& rng,
                     double eps1 = 0.5);

struct TwoEndsReport {
  bool pass = false;
  bool vacuous = false;  // some line carries no shading
  double lambda = 0;     // min per-line density
  int worst_line = -1;
  double worst_fraction = 0;
};
// Scans every segment of length delta^{eps1} at delta/2 steps; a segment
// holding more than CY * delta^{eps2} of the line's shading fails.
TwoEndsReport two_ends_check(const LineFamily& fam, const Shading& y,
                             double eps1, double eps2, double CY);

// Rasterized volumes on a delta/2 voxel grid (voxel-center membership).
double union_volume(const LineFamily& fam, const Shading& y);
double per_line_volume_sum(const LineFamily& fam, const Shading& y);
double union_volume_mc(const LineFamily& fam, const Shading& y, int samples,
                       CounterRng& rng);

struct FurstenbergReport {
  double c = 0;
  bool pass = false;
  double union_vol = 0;
  double sum_vol = 0;
  double lambda = 0;
};
// c = |union Y| / (delta^eps * lambda * sum |Y(l)|)  (n = 3 exponent).
// Refuses families whose shading fails the two-ends test.
FurstenbergReport furstenberg_ratio(const LineFamily& fam, const Shading& y,
                                    double eps, double eps1, double eps2,
                                    double CY, double c_min = 1e-2);

struct PruneReport {
  double removed_fraction = 0;
  size_t total_voxels = 0;
  size_t kept_voxels = 0;
};
// Keeps voxels of the union met by at most mu lines.
PruneReport prune_multiplicity(const LineFamily& fam, const Shading& y,
                               double mu);
double prune_mu_formula(double delta, double eps1, int m, double lambda);

void save_family(const LineFamily& fam, const Shading& y,
                 const std::string& path);
std::pair<LineFamily, Shading> load_family(const std::string& path);

}  // namespace hypdec::incidence
