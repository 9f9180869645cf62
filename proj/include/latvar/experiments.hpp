#pragma once
// Top-level empirical audits: variation-norm and jump-norm ratios over seeded
// ensembles, the jump-to-variation bridge on finite sequences, the variety
// analog, the exact shift-system transference demo, and log-log decay fits.

#include <string>

#include "latvar/decomp.hpp"
#include "latvar/seminorms.hpp"

namespace latvar {

enum class EnsembleKind { kDelta, kRandomSparse, kRademacherBox, kWavePacket };

const char* ensemble_kind_name(EnsembleKind k);
EnsembleKind ensemble_kind_from_name(const std::string& name);

// Seeded test-function family.  delta is the unit mass at the origin;
// random_sparse scatters gaussian values on `support` random points;
// rademacher_box fills the box [-box_radius, box_radius]^n with signs;
// wave_packet modulates a gaussian envelope with a random frequency.
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::kRandomSparse;
  int members = 8;
  int support = 16;
  int box_radius = 8;
  uint64_t seed = 1;
};

std::vector<GridFunction> make_ensemble(const EnsembleSpec& spec, int n);

struct ExperimentConfig {
  IntegralForm form = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  Cutoff cutoff;
  bool variety = false;  // use the variety zero-set average instead
  double ratio = 2.0;    // lacunarity constant
  int64_t start = 1;
  int count = 4;
  RegularValueSet values = RegularValueSet::naturals();
  EnsembleSpec ensemble;
  double r = 3.0;
  double p = 2.0;
  std::vector<double> jump_grid;  // empty: relative dyadic grid per member
  int64_t window = 32;  // transference window radius
  int cases = 8;        // transference case count
  int probes = 20;      // transference probe points per case
  EnumOptions enum_opts;
  Exec exec = Exec::kParallel;

  // flat key=value rendering with sorted keys; the report hash is the
  // fnv1a64 of this text, so identical configs hash identically
  std::string canonical() const;
  uint64_t hash() const;
  // the variation bounds need r > max{p, p'}; out-of-range r is flagged in
  // the report, not fatal
  bool r_in_admissible_range() const;
};

struct Report {
  std::string experiment;
  uint64_t config_hash = 0;
  uint64_t seed = 0;
  std::vector<int64_t> lambdas;
  std::vector<double> ratios;  // per member, in member order
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double q90_ratio = 0.0;
  double c_constant = 0.0;
  double eta_constant = 0.0;
  bool r_range_ok = true;
  std::vector<std::string> notes;

  std::string to_text() const;  // byte-stable rendering
};

// ||V_r(A_{lambda_l} f)||_p / ||f||_p per ensemble member.
Report variation_norm_experiment(const ExperimentConfig& cfg);

// sup over the lambda grid of ||lambda sqrt(jump count)||_p / ||f||_p.  With
// an empty grid each member sweeps lambda = M 2^{-t} for the family sup
// amplitude M, widening the sweep when the sup lands on an edge.
Report jump_norm_experiment(const ExperimentConfig& cfg);

// variation report for the variety average (forces the variety flag)
Report variety_experiment(const ExperimentConfig& cfg);

// V_r against the dyadic jump aggregate (sum over levels of lambda^2 times
// the jump count)^{1/2} on finite sequences; constant sequences read as 0.
struct BridgeResult {
  double r = 0.0;
  int levels = 0;
  std::vector<double> ratios;
  double max_ratio = 0.0;
};
BridgeResult jump_bridge_check(const std::vector<SampleSequence>& seqs, double r);

// Shift-system transference: gamma_x(m) = f(x - m) on the window box turns
// the orbit average at T^m x into a lattice average of gamma at m, so the
// two computations must agree exactly.  Integer comparison runs on the
// unnormalized solution sums when the kernel weights are uniform.
struct TransferenceCase {
  uint64_t member = 0;
  int64_t lambda = 0;
  int probes = 0;
  bool int_exact = true;
  double max_float_diff = 0.0;
  double max_variation_diff = 0.0;
};
struct TransferenceReport {
  uint64_t config_hash = 0;
  int64_t window = 0;
  std::vector<int64_t> lambdas;
  std::vector<TransferenceCase> cases;
  bool all_int_exact = true;
  double max_float_diff = 0.0;
  double max_variation_diff = 0.0;
  bool int_path_available = true;
};
TransferenceReport ergodic_shift_demo(const ExperimentConfig& cfg);

// ordinary least squares on (log x, log y); needs >= 3 positive points
LineFit decay_fit(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace latvar
