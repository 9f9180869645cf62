#pragma once
// Frequency-space decomposition machinery on the integer lattice: smooth lcm
// scales, the Fourier plateau bump and its lattice samplings, band pieces and
// their differences, major arcs, a three-way spectral split on a finite
// torus, dyadic-cube averages, and the associated identity and bound audits.

#include "latvar/circle.hpp"

namespace latvar {

// s_j = lcm{1, ..., 2^j}, exact; doubly exponential growth, so budgeted.
int64_t smooth_lcm(int j, int j_budget = 4);

// 1-D Fourier-side plateau: 1 on [-1/3, 1/3], 0 outside [-2/3, 2/3], smooth
// transition in between; tensor product over coordinates for vectors.
double psi_hat_plateau(double xi);
double psi_hat_tensor(const std::vector<double>& xi);

// Samples of the plateau's inverse transform psi on a step-1/256 grid,
// computed once per process by a large cosine transform.  The tail envelope
// must decay below 1e-9 on three consecutive dyadic shells inside the cached
// range or construction fails; beyond the cached radius psi reads as 0 with
// a leftover mass of about 1e-9.
class PsiCache {
 public:
  static const PsiCache& instance();

  double eval(double t) const;  // cubic interpolation between samples
  double certified_radius() const { return radius_; }
  double sample(int64_t k) const;  // psi(|k| / kSamplesPerUnit)
  int64_t max_index() const { return static_cast<int64_t>(samples_.size()) - 1; }

  static constexpr int kSamplesPerUnit = 256;

 private:
  PsiCache();
  std::vector<double> samples_;
  double radius_ = 0.0;
};

double psi_eval(double t);
double psi_eval(const std::vector<double>& x);  // product over coordinates

// Lattice sampling (s/J)^n psi(x/J) on (sZ)^n, truncated at the certified
// radius; requires J > s.  The support shrinks further when the full lattice
// would not fit max_points, as long as the dropped l1 mass summed over axes
// stays below kPsiSampleTailTol; otherwise the budget is rejected.
inline constexpr double kPsiSampleTailTol = 5e-5;
GridFunction psi_sJ(int64_t s, int64_t J, int n, int64_t max_points = 2'000'000);
// sum over x in Z of (1/J) psi(x/J); equals 1 up to truncation for J >= 1
double psi_mass_1d(int64_t J, int64_t max_terms = 20'000'000);

// Fourier transform of psi_{s,J} on Z^n via Poisson summation: the sum of
// psi_hat over the finitely many surviving shifted frequencies.
double psi_hat_periodized_1d(int64_t s, int64_t J, double xi);
cplx psi_hat_torus(int64_t s, int64_t J, const std::vector<double>& xi);

// Band piece: psi_{s_j, 2^{l-j}}.  Validity needs 2^{l-j} > s_j; the cap
// j <= J_l = floor(log2 l) - 2 applies to the split's band range, while
// difference audits range over every l where both pieces exist.
struct BandPiece {
  int l = 0;
  int j = 0;
  int64_t s = 1;
  int64_t J = 1;
};
int band_count(int l);  // J_l
BandPiece band_piece(int l, int j);
double band_hat_1d(const BandPiece& b, double xi);
bool band_delta_defined(int l, int j);
// hat of (Psi_{l,j+1} - Psi_{l,j}) at a 1-D frequency
double band_delta_hat_1d(int l, int j, double xi);

// max over the grid of sum_{l} |hat(delta Psi_{l,j})(xi)|^2, levels from the
// first l with both pieces defined up to l_max.
struct SquareFunctionAudit {
  int j = 0;
  int l_first = 0;
  int l_max = 0;
  double max_sum = 0.0;
  std::vector<double> sums;  // per grid point
};
SquareFunctionAudit square_function_audit(int j, int l_max, const std::vector<double>& xi_grid,
                                          Exec exec = Exec::kParallel);

// ---------------------------------------------------------------------------
// Dense model on the finite torus (Z_N)^n, used for low-dimension identity
// checks only.

struct TorusFunction {
  int n = 1;
  int64_t N = 1;  // power of two
  std::vector<cplx> values;  // size N^n, last axis fastest

  static TorusFunction zeros(int n, int64_t N);
  int64_t count() const { return static_cast<int64_t>(values.size()); }
  double l2norm() const;
};

double torus_max_abs_diff(const TorusFunction& a, const TorusFunction& b);
TorusFunction torus_fft(const TorusFunction& f);    // unnormalized forward
TorusFunction torus_ifft(const TorusFunction& F);   // forward-inverse = identity
// multiply hat(f) pointwise by m(k/N) and transform back
TorusFunction apply_frequency_multiplier(const TorusFunction& f,
                                         const std::function<cplx(const std::vector<double>&)>& m);

// f = low + mid + high: low = f * Psi_{l,0}, mid = sum of the band
// differences up to J_l, high = f minus the widest band piece.
struct SpectralSplit {
  TorusFunction low, mid, high;
  int l = 0;
  int bands = 0;  // J_l
};
SpectralSplit spectral_split(const TorusFunction& f, int l);

// major arcs: every coordinate of xi within 2^{j-l} of a multiple of 1/s_j
bool major_arc_member(const std::vector<double>& xi, int j, int l);
// zero out every grid frequency inside the arcs (exact rational membership)
TorusFunction spectral_project_minor(const TorusFunction& f, int j, int l);

// ---------------------------------------------------------------------------
// Dyadic cube averages on sparse functions.

// E_l f: mean over the side-2^l dyadic cube containing each point,
// materialized on the cubes meeting supp f.
GridFunction dyadic_average(const GridFunction& f, int l, int64_t max_points = 20'000'000);
// D_m f = E_m f - E_{m-1} f
GridFunction dyadic_difference(const GridFunction& f, int m, int64_t max_points = 20'000'000);

// || lambda sqrt(jump count of l -> E_l f(x)) ||_p / ||f||_p without
// materializing the averages: walks the cube tree over supp f and aggregates
// identical value profiles with multiplicities.
struct MartingaleJumpAudit {
  double p = 2.0;
  int levels = 0;
  std::vector<double> lambdas;
  std::vector<double> max_ratio;  // per lambda, over the ensemble
  double overall = 0.0;
};
MartingaleJumpAudit martingale_jump_audit(const std::vector<GridFunction>& ensemble, int levels,
                                          const std::vector<double>& lambdas, double p);

// total mass of Psi_{l,0} convolved with the by_count kernel at lambda = 2^l;
// the mass of a convolution is the product of the factor masses, so this
// audits the psi truncation against the exact value 1.
double smoothed_kernel_mass(const IntegralForm& f, const Cutoff& cutoff, int l,
                            const EnumOptions& opts = {});

// ---------------------------------------------------------------------------
// Wave-packet audit of the single-average bound on minor-arc frequencies.
// Packets are Gaussians modulated to centers sampled away from the arcs; the
// observed value is the root mean square of the kernel multiplier under the
// packet's frequency profile, compared against the reference constant
// max(2^{-j(c-2)}, 2^{-l d eta}).

struct WavePacketAuditRow {
  int64_t lambda = 0;
  double ratio = 0.0;
};
struct WavePacketAudit {
  int j = 0;
  int l = 0;
  double reference = 0.0;
  double observed = 0.0;  // max over lambdas
  double control = 0.0;   // packet centered on an arc, expected near 1
  double leakage = 0.0;   // worst packet mass fraction inside the arcs
  bool valid = false;     // leakage < 1%
  std::vector<WavePacketAuditRow> rows;
};
WavePacketAudit single_average_bound_audit(const IntegralForm& f, const Cutoff& cutoff, int j,
                                           int l, const std::vector<int64_t>& lambdas,
                                           int packets, int samples_per_packet, uint64_t seed,
                                           Exec exec = Exec::kParallel);

}  // namespace latvar
