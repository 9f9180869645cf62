#pragma once
// Exact enumeration of lattice solution sets: level sets f(y) = lambda for
// definite diagonal forms (meet-in-the-middle), a plain box-scan reference
// used as the oracle in tests, and zero sets of indefinite forms inside the
// positive box [1..lambda]^n.

#include <vector>

#include "latvar/forms.hpp"

namespace latvar {

struct SolutionSet {
  int dim = 0;
  int64_t lambda = 0;
  std::vector<Point> points;     // sorted lexicographically
  std::vector<double> weights;   // cutoff weights, aligned with points
  double weighted_count = 0.0;   // sum of weights, accumulated in sorted order

  int64_t count() const { return static_cast<int64_t>(points.size()); }
};

struct EnumOptions {
  Exec exec = Exec::kParallel;
  int64_t max_points = 20'000'000;   // stored solutions
  int64_t max_ops = 8'000'000'000;   // visited partial states
};

// Level set {f(y) = lambda} for positive-definite diagonal forms of even
// degree.  Coordinates are split in half; partial sums of the right half are
// indexed once and the left half streams against them.
SolutionSet enumerate_solutions(const IntegralForm& f, int64_t lambda, const Cutoff& cutoff,
                                const EnumOptions& opts = {});

// Reference enumerator: scans the full box |y_i| <= radius.  Slow by design;
// the tests use it to certify enumerate_solutions.
SolutionSet enumerate_box_scan(const IntegralForm& f, int64_t lambda, const Cutoff& cutoff,
                               int64_t radius, const EnumOptions& opts = {});

// Zero set {P(y) = 0, y in [1..lambda]^n} for indefinite forms.  Diagonal
// quadratics with exactly one negative coefficient get a meet-in-the-middle
// path; anything else falls back to a budgeted box scan.
SolutionSet enumerate_variety_zero(const IntegralForm& f, int64_t lambda,
                                   const EnumOptions& opts = {});

// Weighted solution count r(lambda) = sum of cutoff values over the level set.
double counting_function(const IntegralForm& f, int64_t lambda, const Cutoff& cutoff,
                         const EnumOptions& opts = {});

// log-log regression of counts against lambda (zero counts are skipped).
LineFit counting_exponent_fit(const std::vector<int64_t>& lambdas,
                              const std::vector<int64_t>& counts);

}  // namespace latvar
