#pragma once

#include <string>
#include <vector>

#include "hypdec/engine.hpp"
#include "hypdec/field.hpp"
#include "hypdec/geom.hpp"
#include "hypdec/report.hpp"
#include "hypdec/rng.hpp"
#include "hypdec/wavepacket.hpp"

namespace hypdec::decouple {

using field::FreqDensity;
using report::RatioReport;

enum class EnsembleKind {
  random_phase,
  focusing,
  line_concentrated,
  bush,
  single_cap
};
EnsembleKind parse_ensemble(const std::string& name);
std::string ensemble_name(EnsembleKind k);

// Candidate inputs for the estimators, supported inside `target`. All
// randomness flows through the counter RNG, so a (seed, scenario, R, trial)
// tuple pins the density bit for bit.
FreqDensity generate(EnsembleKind kind, double R, const geom::Square& target,
                     int n, CounterRng& rng);

// Index rectangle of grid cells inside an axis-parallel square (half-open).
engine::IndexBox index_box(const FreqDensity& f, const geom::Square& sq);

// Pullback of f under the surface-preserving rescaling centered at c with
// factor d: g(u) = f(c + d u) on a grid of new_n samples. Requires the
// mapped points to land on f's grid.
FreqDensity rescale_density(const FreqDensity& f, Vec2 c, double d, int new_n);

// --- estimators -----------------------------------------------------------

// lhs = int |Ef1 Ef2|^2, rhs = prod_j sum over R^{-1/2}-caps of ||Ef_cap||_4^2.
RatioReport bilinear_l2_ratio(const FreqDensity& f1, const FreqDensity& f2,
                              const geom::Square& tau1, const geom::Square& tau2,
                              double R, const geom::Band& band = {});

// lhs over a disjoint ball union, rhs = sqrt(M1 M2) * prod_j
// (sum_T ||Ef_T||_4^4)^{1/2} with M_j the max per-ball tube count.
RatioReport refined_ratio(const wavepacket::WavePacketDecomp& d1,
                          const wavepacket::WavePacketDecomp& d2,
                          const std::vector<wavepacket::Tube>& tubes1,
                          const std::vector<wavepacket::Tube>& tubes2,
                          const field::BallUnion& X, double R);

// lhs = ||Ef||_4; rhs from the admissible dyadic cover, plus the
// square-only companion rhs for contrast (params: rhs_square).
RatioReport linear_dyadic_ratio(const FreqDensity& f, double R);

// Planar bilinear estimate for densities on curve neighborhoods: both
// sides are single 2D torus integrals (no x3).
RatioReport bilinear_restriction_2d(const FreqDensity& f1, const FreqDensity& f2,
                                    Vec2 normal1, Vec2 normal2, double delta,
                                    double min_sin = 0.25);

enum class SquareFnMode { planes, caps_at_scale };
struct SquareFnResult {
  RatioReport forward;   // lhs / rhs
  double reverse = 0;    // rhs / lhs
};
// Square-function comparison between a pair and its strip decomposition.
// planes: strips of size (R^{-1/2}, R^{-1/4}) in the canonical direction.
// caps_at_scale: strips (r/K2, r) of r-squares in general position, over a
// ball region Q; requires d sqrt(R) r K2 >= threshold.
struct SquareFnParams {
  SquareFnMode mode = SquareFnMode::planes;
  double K2 = 4;
  double threshold = 1.0;
  const field::BallUnion* Q = nullptr;
};
SquareFnResult square_function_ratio(const FreqDensity& f1, const FreqDensity& f2,
                                     const geom::Square& a1, const geom::Square& a2,
                                     double R, const SquareFnParams& params);

enum class PairRule { nonadjacent, almost_adjacent };

// Pointwise square root of sum over strip pairs of |Ef_s Ef_s'|, sampled on
// the requested grid. Strips partition the rectangle along its long axis.
field::SpatialField g_function(const FreqDensity& f, const geom::PlaneRect& rect,
                               int K1, double R, const field::GridSpec& grid,
                               PairRule rule = PairRule::nonadjacent);

enum class PairLabel { narrow, broad, unlabeled };
struct NarrowBroadResult {
  PairLabel label = PairLabel::unlabeled;
  double narrow_term = 0;
  double broad_term = 0;
};
// Compares the recoupled square-function term against the non-adjacent
// pair term over a ball region. K1-squares refine the sides; K2 sets the
// strip eccentricity. Pairs failing d sqrt(R) r K2 >= threshold stay
// unlabeled.
NarrowBroadResult classify_narrow_broad(const FreqDensity& f1,
                                        const FreqDensity& f2,
                                        const geom::Square& a1,
                                        const geom::Square& a2,
                                        const field::BallUnion& Q, double R,
                                        int K1, double K2,
                                        double threshold = 1.0,
                                        double broad_factor = 1.0);

// Strip decomposition used by the square-function machinery: grid points of
// `sq` split by their coordinate along `perp` into `count` bands.
std::vector<FreqDensity> strip_pieces(const FreqDensity& f, const geom::Square& sq,
                                      Vec2 axis, int count);

}  // namespace hypdec::decouple
