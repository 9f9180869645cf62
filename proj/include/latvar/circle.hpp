#pragma once
// Rational-point exponential sums, surface-measure Fourier transforms with a
// slab Monte Carlo estimator and an analytic sphere oracle, and the
// exact-versus-main-term multiplier comparison machinery.

#include "latvar/ops.hpp"

namespace latvar {

// reduced residues mod q (q = 1 yields {0})
std::vector<int64_t> reduced_residues(int64_t q);

int64_t pow_mod(int64_t base, int exp, int64_t q);

// F_q(a,b) = q^{-n} sum_{m in Z_q^n} e((a f(m) + b.m)/q).  Diagonal forms are
// evaluated as a product of n one-dimensional sums in O(n q); the direct
// q^n reference is kept for cross-checks.
cplx weyl_sum(const IntegralForm& f, int64_t q, int64_t a, const Point& b);
cplx weyl_sum_direct(const IntegralForm& f, int64_t q, int64_t a, const Point& b,
                     int64_t max_ops = 200'000'000);

struct WeylAuditRow {
  int64_t q = 0;
  double max_modulus = 0.0;  // over all a in U_q and the sampled b
  double scaled = 0.0;       // max_modulus * q^c
};
std::vector<WeylAuditRow> weyl_bound_audit(const IntegralForm& f, const std::vector<int64_t>& qs,
                                           int b_samples, uint64_t seed,
                                           Exec exec = Exec::kParallel);

// ---------------------------------------------------------------------------
// Surface measure dsigma = cutoff * d(surface area) / |grad f| on {f = level},
// Fourier-transformed by Monte Carlo over the slab |f - level| < epsilon.

struct SurfaceEstimate {
  cplx value{0.0, 0.0};
  double se_re = 0.0, se_im = 0.0;
  int64_t samples = 0;
  int64_t hits = 0;
  double epsilon = 0.0;
  double se_combined() const { return std::sqrt(se_re * se_re + se_im * se_im); }
};

struct SurfaceMeasure {
  IntegralForm form;
  Cutoff cutoff;
  double level = 1.0;     // 1 for level sets, 0 for zero sets
  double epsilon = 0.01;  // slab half-width
  uint64_t seed = 1;

  // Importance-samples a radial shell bracketing the slab when the form is
  // definite diagonal (the box sampler wastes essentially every draw there);
  // falls back to the box otherwise.  ft_box stays available as the
  // uniform-sampling reference.
  SurfaceEstimate ft(const std::vector<double>& xi, int64_t samples,
                     Exec exec = Exec::kParallel) const;
  SurfaceEstimate ft_box(const std::vector<double>& xi, int64_t samples,
                         Exec exec = Exec::kParallel) const;
  bool shell_sampler_available() const;
};

// FT of the unit-sphere surface measure in R^n at radius rho; closed forms
// for n = 3 and 5, cyl_bessel_j otherwise.  For the sum of n squares the
// level-one surface measure equals half of this (|grad| = 2 on the sphere).
double sphere_ft_analytic(int n, double rho);
double sphere_area(int n);

// radial major-arc bump: 1 for |q xi| <= 1/2, 0 for |q xi| >= 1
double zeta_hat(int64_t q, const std::vector<double>& xi);

// multiplier of a normalized kernel at frequency xi: sum w_y e(-y.xi)
cplx kernel_multiplier(const Kernel& k, const std::vector<double>& xi,
                       Exec exec = Exec::kSerial);

// ---------------------------------------------------------------------------
// Main-term approximations.  For each q only the integer vector closest to
// q*xi survives the zeta bump; its residue selects the exponential-sum factor.

struct MainTermOptions {
  int64_t q_max = 0;            // 0 -> ceil(lambda^{1/(2d)})
  bool analytic_sphere = true;  // use the Bessel oracle when the form allows
  int64_t mc_samples = 200'000; // slab budget when it does not
  double epsilon = 0.01;
  uint64_t seed = 1;
};

// per-q contributions; the main term is their sum
std::vector<cplx> main_term_contributions(const IntegralForm& f, const Cutoff& cutoff,
                                          int64_t lambda, const std::vector<double>& xi,
                                          const MainTermOptions& opts);
cplx multiplier_main_term(const IntegralForm& f, const Cutoff& cutoff, int64_t lambda,
                          const std::vector<double>& xi, const MainTermOptions& opts = {});

// Zero-set variant: no e_q(-lambda a) phase and the measure argument dilates
// by lambda instead of lambda^{1/d}.
cplx variety_main_term(const IntegralForm& f, const Cutoff& cutoff, int64_t lambda,
                       const std::vector<double>& xi, const MainTermOptions& opts = {});

struct MultiplierScanRow {
  int64_t lambda = 0;
  int64_t q_max = 0;
  double sup_error = 0.0;
};
struct MultiplierScan {
  std::vector<MultiplierScanRow> rows;
  std::vector<std::vector<double>> xi_samples;  // shared across lambdas
  LineFit error_fit;                            // log sup_error vs log lambda
  double eta = 0.0;                             // reference exponent
  bool strictly_decreasing = false;
};
MultiplierScan multiplier_error_scan(const IntegralForm& f, const Cutoff& cutoff,
                                     const std::vector<int64_t>& lambdas, int xi_count,
                                     uint64_t seed, const MainTermOptions& opts = {},
                                     Exec exec = Exec::kParallel);

}  // namespace latvar
