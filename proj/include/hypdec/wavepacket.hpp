#pragma once

#include <string>
#include <vector>

#include "hypdec/engine.hpp"
#include "hypdec/field.hpp"

namespace hypdec::wavepacket {

using engine::IndexBox;
using field::FreqDensity;

// Discrete packet lattice attached to a density grid at scale R.
// Frequency caps have side R^{-1/2} (cap_cells grid cells); translation
// cells have side vstep * dx on the dual torus, commensurate with the grid.
struct Lattice {
  int n = 0;
  double R = 0;
  double eps0 = 0;
  double h = 0;
  int cap_cells = 0;   // grid cells per cap side
  int caps_per_side = 0;
  int cap_lo = 0;      // first cap index (includes boundary overhang)
  int vstep = 0;       // dual-grid cells per translation step
  int vcount = 0;      // translations per side
  int window_modes = 0;  // spectral half-width Q of the translation window

  double dx() const { return 2 * kPi / (n * h); }
  double vspacing() const { return vstep * dx(); }
  double period() const { return 2 * kPi / h; }
  double cap_side() const { return cap_cells * h; }
  double tube_radius() const { return std::pow(R, 0.5 + eps0); }
  Vec2 cap_center(int ti, int tj) const {
    double s = cap_side();
    return {-1 + (ti + 0.5) * s, -1 + (tj + 0.5) * s};
  }
  // translation center reduced to [-P/2, P/2)
  Vec2 v_center(int vi, int vj) const;
};

struct CapBlock {
  int ti = 0, tj = 0;
  Vec2 center;
  IndexBox box;         // grid support of f * phi_cap
  std::vector<cd> g;    // row-major over box
  double l2sq = 0;      // ||f phi_cap||_2^2
};

struct Tube {
  int block = -1;
  int theta_i = 0, theta_j = 0;
  int vi = 0, vj = 0;
  Vec2 cap_center;
  Vec2 v_center;
  Vec2 grad;      // phase gradient at the cap center
  double radius = 0;
  double R = 0;
  double l2sq = 0;

  Vec3 direction() const { return {1, grad.x, grad.y}; }
  // tube cross-section center at height x3
  Vec2 axis_at(double x3) const { return v_center - grad * x3; }
};

struct Ball {
  Vec3 center;
  double radius = 0;
};

class WavePacketDecomp {
 public:
  // eps0 in {0, 0.02} by default convention; mass_cut drops packets with
  // ||f_T||_2^2 below mass_cut * ||f||_2^2 from significant_tubes().
  static WavePacketDecomp build(const FreqDensity& f, double R,
                                double eps0 = 0.02);

  const Lattice& lattice() const { return lat_; }
  const std::vector<CapBlock>& blocks() const { return blocks_; }
  const FreqDensity& parent() const { return *parent_; }

  // Packet density f_{theta,v}: small separable convolution of the cap
  // block against the translation window kernel. Exact grid support is the
  // cap box widened by window_modes cells.
  FreqDensity packet(int block, int vi, int vj) const;
  double packet_mass(int block, int vi, int vj) const;  // ||f_T||_2^2
  Tube tube(int block, int vi, int vj) const;

  // All tubes with mass >= frac * ||f||_2^2.
  std::vector<Tube> significant_tubes(double frac) const;

  // ||f - sum_caps (f phi_cap)||_2 / ||f||_2 (cap partition residual).
  double cap_partition_residual() const;
  // || sum_v f_{theta,v} - f phi_theta ||_2 for one cap (full v sum).
  double packet_sum_residual(int block) const;
  // sum over all (theta, v) of ||f_T||_2^2.
  double total_packet_mass() const;
  // min pairwise distance of {direction()} over caps carrying mass.
  double direction_separation() const;
  // max pointwise overlap of same-direction tubes (lattice geometry).
  int direction_overlap() const;

  // fraction of || . ||_2^2 of a packet outside the tripled cap
  double support_leak(int block, int vi, int vj) const;

 private:
  const FreqDensity* parent_ = nullptr;
  Lattice lat_;
  std::vector<CapBlock> blocks_;
  std::vector<cd> window_kernel_;   // kappa[q], q in [-Q, Q], index q+Q
  std::vector<double> window_;      // normalized 1D window samples, n
  double parent_l2sq_ = 0;
};

// Exact count of tubes meeting a ball of radius R^{1/2} (torus metric in
// the transverse plane).
int tube_ball_multiplicity(const std::vector<Tube>& tubes, const Ball& q,
                           double period);
bool tube_meets_ball(const Tube& t, const Ball& q, double period);

// Tube segmentation and shading against a union of balls.
struct TubeShading {
  int tube_index = -1;
  double segment_length = 0;
  int dyadic_density = 0;      // lambda class: floor(log2(|J cap X| / |T|))
  int dyadic_count = 0;        // beta class: floor(log2(#J in the class))
  std::vector<int> segments;   // segment ids in the selected class
  std::vector<std::pair<double, double>> covered;  // x3 intervals (Y(T))
};
std::vector<TubeShading> segment_and_shade(const std::vector<Tube>& tubes,
                                           const field::BallUnion& X,
                                           double r, double eps,
                                           double period);

void export_tubes_csv(const std::vector<Tube>& tubes, const std::string& path);

}  // namespace hypdec::wavepacket
