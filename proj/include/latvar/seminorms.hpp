#pragma once
// r-variation and jump-counting seminorms on finite sample sequences, their
// brute-force oracles, and pointwise fields over families of averages.

#include "latvar/ops.hpp"

namespace latvar {

// Finite sequence sampled at strictly increasing parameters.
struct SampleSequence {
  std::vector<double> index;
  std::vector<cplx> value;

  size_t size() const { return value.size(); }
  void validate() const;
  static SampleSequence from_reals(const std::vector<double>& vals);
};

// V_r = sup over subsequences of the l^r norm of consecutive differences;
// r = infinity takes the largest single difference instead.
struct VariationResult {
  double value = 0.0;
  double r = 0.0;
  std::vector<int> witness;  // maximizing subsequence, lexicographically least
};

// O(L^2) dynamic program over chain suffixes; exact for finite sequences.
VariationResult variation_exact(const SampleSequence& seq, double r);
// Exhaustive subsequence scan, L <= 14.  Oracle for the DP.
VariationResult variation_bruteforce(const SampleSequence& seq, double r);

// Largest M admitting u_1 < v_1 <= u_2 < ... <= u_M < v_M with
// |a(v_l) - a(u_l)| > lambda (strict).
struct JumpResult {
  int64_t count = 0;
  double lambda = 0.0;
  std::vector<std::pair<int, int>> witness;
};

// One left-to-right scan: inside the current window take the point farthest
// from the new sample; on exceedance record the pair and restart the window
// at the current index.
JumpResult jump_count(const SampleSequence& seq, double lambda);
// Memoized exhaustive search over interleaved pair systems, L <= 12.
JumpResult jump_bruteforce(const SampleSequence& seq, double lambda);

// Value-only forms for bulk scans: no witnesses, no per-call allocation,
// results identical to the witness-producing versions.
double variation_value(const SampleSequence& seq, double r);
int64_t jump_count_value(const SampleSequence& seq, double lambda);

// Pointwise fields over an average family (values read as 0 off-support).
// Computed by one streaming pass over the union of supports.
SortedField variation_field(const AverageFamily& fam, double r);
SortedField jump_field(const AverageFamily& fam, double lambda);

// || lambda * sqrt(jump count) ||_p over the union of supports.
double jump_functional(const AverageFamily& fam, double lambda, double p);
// Same functional for several thresholds in a single pass over the family;
// entry i matches jump_functional(fam, lambdas[i], p) exactly.
std::vector<double> jump_functional(const AverageFamily& fam,
                                    const std::vector<double>& lambdas, double p);

// l^p norm of a sparse function, p >= 1 or infinity.
double lp_norm(const GridFunction& f, double p);
double lp_norm(const SortedField& f, double p);

// union of supports across the family, sorted
std::vector<Point> family_support(const AverageFamily& fam);
// the sampled sequence seen at one point
SampleSequence family_sequence_at(const AverageFamily& fam, const Point& x);

}  // namespace latvar
