#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hypdec/field.hpp"

namespace hypdec::engine {

using field::FreqDensity;

// Inclusive index rectangle of grid samples.
struct IndexBox {
  int i0 = 0, i1 = -1, j0 = 0, j1 = -1;
  bool empty() const { return i1 < i0 || j1 < j0; }
  int wx() const { return i1 - i0 + 1; }
  int wy() const { return j1 - j0 + 1; }
};

IndexBox support_box(const FreqDensity& f, double tol = 0.0);
IndexBox full_box(const FreqDensity& f);

// Range (max - min) of the surface phase over the box.
double phase_range(const FreqDensity& f, const IndexBox& box);
// Range of the quadratic remainder of the phase around the box center.
double remainder_range(const FreqDensity& f, const IndexBox& box);

// Trapezoid plan for the x3 direction over [-x3_half, x3_half]. dx3 is
// chosen so the stated bandwidth cannot alias onto the sampling frequency.
struct SlicePlan {
  double x3_lo = 0, dx3 = 0;
  int count = 0;
  double x3(int k) const { return x3_lo + k * dx3; }
  double weight(int k) const {
    return (k == 0 || k == count - 1) ? 0.5 * dx3 : dx3;
  }
};
SlicePlan make_slices(double x3_half, double bandwidth, double max_dx3 = 1.4,
                      int min_count = 17);

// Torus spacing of the coarse evaluation grid at fold size M.
inline double coarse_spacing(const FreqDensity& f, int M) {
  return 2.0 * kPi / (M * f.h());
}
inline double torus_period(const FreqDensity& f) { return 2.0 * kPi / f.h(); }

// Exact field samples of (f restricted to box) * e^{i x3 Phi} at the coarse
// grid x = (k1, k2) * P/M, k in [0,M)^2. out must hold M*M values.
// M must exceed every index spread occurring in the integrand for the
// subsequent torus quadrature to be exact.
void folded_slice(const FreqDensity& f, const IndexBox& box, double x3, int M,
                  cd* out);

// Same but with the box-center modulation and the linear part of the phase
// removed: |out| traces |Ef| along sheared coordinates, and varies only on
// the scale of the box. Used for per-cap / per-packet norms.
void sheared_slice(const FreqDensity& f, const IndexBox& box, double x3, int M,
                   cd* out);

// L^p norm (not the p-th power) of Ef over torus x [-x3_half, x3_half] for
// a density supported in `box`. p = 2 uses Parseval per slice.
double localized_lp(const FreqDensity& f, const IndexBox& box, double R,
                    double p, double x3_half = -1);

struct PairIntegralOpts {
  const field::BallUnion* mask = nullptr;
  double max_dx3 = 0;   // 0 = bandwidth-driven with a truncation guard
  double x3_half = -1;  // default R
};

// int |Ef1 * Ef2|^2 over torus x [-x3_half, x3_half], optionally masked.
double bilinear_l2_integral(const FreqDensity& f1, const FreqDensity& f2,
                            double R, const PairIntegralOpts& opts = {});

// int |Ef|^p over torus x [-R, R], optionally masked.
double power_integral(const FreqDensity& f, double R, double p,
                      const field::BallUnion* mask = nullptr);

// int |Ef|^p w(x) dx over torus x [-x3_half, x3_half] with a decay weight.
double weighted_power_integral(const FreqDensity& f, double R, double p,
                               const field::BallWeight& w, double x3_half);

// Common-grid sweep over several component densities (restrictions of one
// parent grid). For each slice the callback receives exact coarse samples of
// every component field on the same x grid. Slices run in parallel; the
// callback must write only to per-slice state.
struct SweepSpec {
  int M = 0;
  SlicePlan slices;
};
SweepSpec plan_sweep(std::span<const FreqDensity* const> comps, double R,
                     double band_factor = 4.0, double max_dx3 = 1.4,
                     double x3_half = -1);
void multi_sweep(
    std::span<const FreqDensity* const> comps, const SweepSpec& spec,
    const std::function<void(int slice, double x3, double weight,
                             const std::vector<const cd*>&)>& visit);

// Box-restriction variant: components are index-box restrictions of one
// parent density (valid whenever the regions are axis-parallel and aligned
// to grid cells).
SweepSpec plan_sweep_boxes(const FreqDensity& f, std::span<const IndexBox> boxes,
                           double R, double band_factor = 4.0,
                           double max_dx3 = 1.4, double x3_half = -1);
void multi_sweep_boxes(
    const FreqDensity& f, std::span<const IndexBox> boxes, const SweepSpec& spec,
    const std::function<void(int slice, double x3, double weight,
                             const std::vector<const cd*>&)>& visit);

// Index range of grid cells with centers in [x0,x1) x [y0,y1).
IndexBox index_range(const FreqDensity& f, double x0, double x1, double y0,
                     double y1);

// Min-image displacement on the x-bar torus.
double torus_delta(double d, double period);

}  // namespace hypdec::engine
