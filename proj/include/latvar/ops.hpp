#pragma once
// Averaging operators: normalized kernels on solution sets, sparse
// convolution against finitely supported functions, lacunary parameter
// sequences, and whole-family application with a streaming union scan.

#include <unordered_map>

#include "latvar/lattice.hpp"

namespace latvar {

// Sparse function stored as aligned (sorted points, values) arrays.  Output
// format of the convolution; cheaper to merge and scan than a hash map.
struct SortedField {
  std::vector<Point> points;  // strictly increasing lexicographically
  std::vector<cplx> values;

  int dim() const { return points.empty() ? dim_hint : points.front().n; }
  size_t size() const { return points.size(); }
  cplx at(const Point& x) const;  // 0 off support
  double l2norm() const;
  double max_abs() const;
  GridFunction to_grid() const;
  static SortedField from_grid(const GridFunction& g);

  int dim_hint = 1;
};

// Sparse convolution kernel supported on a solution set.  by_count divides by
// the weighted count r(lambda); by_power divides by lambda^{n/d - 1}.
struct Kernel {
  enum class Normalization { kByCount, kByPower };

  int dim = 0;
  int64_t lambda = 0;
  Normalization norm = Normalization::kByCount;
  std::vector<Point> points;     // sorted; zero-weight solutions dropped
  std::vector<double> weights;   // normalized
  std::unordered_map<Point, double, PointHash> lookup;

  double mass() const;           // sum of weights in sorted order
  int64_t support_linf() const;  // max sup-norm over support
};

Kernel make_form_kernel(const IntegralForm& f, int64_t lambda, const Cutoff& cutoff,
                        Kernel::Normalization norm, const EnumOptions& opts = {});

// Uniform kernel on the variety zero set (by_count) or the same points divided
// by lambda^{n-d} (by_power).
Kernel make_variety_kernel(const IntegralForm& f, int64_t lambda,
                           Kernel::Normalization norm = Kernel::Normalization::kByCount,
                           const EnumOptions& opts = {});

// (K * f)(x) = sum_y K(y) f(x - y) over the full output support.  The output
// point space is cut into a fixed number of intervals merged independently,
// so the contribution order per point never depends on the thread count and
// serial and parallel runs agree bit for bit.
SortedField apply_kernel(const Kernel& k, const GridFunction& f, Exec exec = Exec::kParallel);
// Plain hash-scatter evaluation kept as the reference implementation.
SortedField apply_kernel_reference(const Kernel& k, const GridFunction& f);
GridFunction apply_kernel_grid(const Kernel& k, const GridFunction& f,
                               Exec exec = Exec::kParallel);

// Same sum evaluated at chosen points only (kernel-order gather).
cplx apply_kernel_at(const Kernel& k, const GridFunction& f, const Point& x);
std::vector<cplx> apply_kernel_at(const Kernel& k, const GridFunction& f,
                                  const std::vector<Point>& xs, Exec exec = Exec::kParallel);

// Lacunary parameter sequence inside a value set: each entry is the least
// admissible value >= ratio * previous.
struct LacunarySequence {
  double ratio = 2.0;
  RegularValueSet values;
  std::vector<int64_t> lambdas;
};
LacunarySequence lacunary_sequence(double ratio, int64_t start, const RegularValueSet& values,
                                   int count, int64_t max_value = 1'000'000'000);
// explicit list variant; validates admissibility and the lacunarity ratio
LacunarySequence lacunary_from_list(double ratio, const RegularValueSet& values,
                                    std::vector<int64_t> lambdas);

// A_{lambda_l} f for every member lambda_l of the family.
struct AverageFamily {
  std::vector<int64_t> lambdas;
  std::vector<SortedField> averaged;
};

AverageFamily family_apply(const std::vector<Kernel>& kernels, const GridFunction& f,
                           Exec exec = Exec::kParallel);

// Visits every point of the union of supports once, in sorted order, passing
// the sampled column (A_{lambda_0} f(x), ..., A_{lambda_{k-1}} f(x)) with
// zeros filled in off-support.  Streaming: nothing is materialized.
void family_scan(const AverageFamily& fam,
                 const std::function<void(const Point&, const cplx*)>& visit);

// pointwise sup of moduli over the family, as a sparse field
SortedField family_sup_field(const AverageFamily& fam);

// Kernels for a whole lacunary family (enumeration shared per lambda).
std::vector<Kernel> form_kernel_family(const IntegralForm& f, const LacunarySequence& seq,
                                       const Cutoff& cutoff, Kernel::Normalization norm,
                                       const EnumOptions& opts = {});
std::vector<Kernel> variety_kernel_family(const IntegralForm& f, const LacunarySequence& seq,
                                          Kernel::Normalization norm = Kernel::Normalization::kByCount,
                                          const EnumOptions& opts = {});

}  // namespace latvar
