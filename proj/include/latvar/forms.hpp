#pragma once
// Integral forms with exact evaluation, the rank-derived constants that drive
// every decay exponent downstream, smooth radial cutoffs, and the arithmetic
// progressions of admissible values the averages run over.

#include <optional>
#include <vector>

#include "latvar/core.hpp"

namespace latvar {

// Homogeneous integral form of degree d in n variables.  Monomials are stored
// explicitly; diagonal forms (sum of c_i x_i^d) are recognized and unlock the
// fast enumeration and factored exponential-sum paths.
struct IntegralForm {
  struct Term {
    std::vector<int> exp;  // size n, entries >= 0, sum == d
    int64_t coeff = 0;
  };

  int n = 0;
  int d = 0;
  std::vector<Term> terms;
  std::optional<int> rank_override;  // for non-diagonal forms

  bool diagonal = false;
  std::vector<int64_t> diag = {};  // size n when diagonal; zeros allowed

  static IntegralForm diagonal_form(std::vector<int64_t> coeffs, int degree);
  static IntegralForm from_terms(int n, int d, std::vector<Term> terms);

  bool positive_definite_diagonal() const;  // diagonal, d even, all coeffs > 0
  std::string describe() const;
};

// Exact integer evaluation; throws BudgetError instead of wrapping around.
int64_t eval_form(const IntegralForm& f, const Point& x);

// Real evaluation and gradient, used by the regularity witness search and the
// surface-measure sampler.
double eval_form_real(const IntegralForm& f, const std::vector<double>& x);
std::vector<double> grad_form_real(const IntegralForm& f, const std::vector<double>& x);

// Rank of a diagonal form is the count of nonzero coefficients; non-diagonal
// forms must carry an explicit override.
int birch_rank(const IntegralForm& f);

// c = rank / ((d-1) 2^{d-1}) and eta = (c/2 - 1) / (6d), kept exact.
struct BirchData {
  int rank = 0;
  Rational c;
  Rational eta;
  bool rank_exceeds_threshold = false;  // rank > (d-1) 2^d
};
BirchData birch_constants(const IntegralForm& f);

// Shared transition profile: 1 for t <= 0, 0 for t >= 1, exp(1 - 1/(1-t^2))
// in between.  Also used by the frequency plateaus in the circle and
// decomposition modules so every smooth bump in the project matches.
double smooth_step(double t);

// Radial cutoff: 1 inside radius r1, 0 outside r2, smooth_step in between.
struct Cutoff {
  double r1 = 1.2;
  double r2 = 1.9;

  Cutoff() = default;
  Cutoff(double inner, double outer) : r1(inner), r2(outer) {
    require(0 < inner && inner < outer, "cutoff needs 0 < r1 < r2");
  }
  double radial(double rho) const;
  double eval(const std::vector<double>& x) const;
  // phi(y / scale) for a lattice point y
  double eval_scaled(const Point& y, double scale) const;
};

// Arithmetic progression {offset + modulus * k : k >= 0} of admissible
// average parameters; the default is all of N.
struct RegularValueSet {
  int64_t offset = 1;
  int64_t modulus = 1;

  static RegularValueSet naturals() { return {1, 1}; }
  static RegularValueSet progression(int64_t offset, int64_t modulus);
  bool contains(int64_t v) const;
  int64_t first() const { return offset; }
  int64_t next_at_least(int64_t v) const;  // least member >= v
};

// Regularity check: rank threshold plus a nonsingular real solution of f = 1
// strictly inside the cutoff support.  A failed search is reported as
// exhausted, which is weaker than the provable negatives.
struct PhiRegularity {
  enum class Status {
    kRegular,           // threshold holds and a witness was found
    kRankTooSmall,      // rank <= (d-1) 2^d, provably not regular
    kProvenNoSolution,  // no real solution of f = 1 can meet supp(cutoff)
    kSearchExhausted    // threshold holds but no witness found in budget
  };
  Status status = Status::kSearchExhausted;
  std::vector<double> witness;  // nonempty iff kRegular
  std::string note;

  bool regular() const { return status == Status::kRegular; }
};
PhiRegularity phi_regular_check(const IntegralForm& f, const Cutoff& cutoff,
                                uint64_t seed = 1, int ray_samples = 2048);

}  // namespace latvar
