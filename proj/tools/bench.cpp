// Timing comparison between the serial reference paths and the OpenMP
// kernels, with a bitwise-equality check on each pair of results.

#include <chrono>
#include <cstdio>
#include <string>

#include "latvar/circle.hpp"
#include "latvar/decomp.hpp"

using namespace latvar;

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-34s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name.c_str(),
              serial_ms, parallel_ms, parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0,
              equal ? "results identical" : "RESULTS DIFFER");
}

}  // namespace

int main() {
  const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  const Cutoff cutoff;

  {
    const int64_t lambda = 4096;
    auto t0 = std::chrono::steady_clock::now();
    const SolutionSet serial = enumerate_solutions(five, lambda, cutoff, {Exec::kSerial});
    const double ts = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const SolutionSet parallel = enumerate_solutions(five, lambda, cutoff, {Exec::kParallel});
    const double tp = ms_since(t0);
    report("enumeration (lambda 4096)", ts, tp, serial.points == parallel.points);
  }

  {
    const Kernel k = make_form_kernel(five, 400, cutoff, Kernel::Normalization::kByCount);
    RngStream rng(1, "bench-conv", 0);
    GridFunction f(5);
    for (int i = 0; i < 64; ++i) {
      Point p = Point::zero(5);
      for (int c = 0; c < 5; ++c) {
        p.c[static_cast<size_t>(c)] = static_cast<int32_t>(rng.uniform_int(-10, 10));
      }
      f.add(p, rng.gaussian_cplx());
    }
    auto t0 = std::chrono::steady_clock::now();
    const SortedField serial = apply_kernel(k, f, Exec::kSerial);
    const double ts = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const SortedField parallel = apply_kernel(k, f, Exec::kParallel);
    const double tp = ms_since(t0);
    report("convolution merge (lambda 400)", ts, tp,
           serial.points == parallel.points && serial.values == parallel.values);

    t0 = std::chrono::steady_clock::now();
    const SortedField ref = apply_kernel_reference(k, f);
    const double tr = ms_since(t0);
    double gap = 0.0;
    for (size_t i = 0; i < ref.values.size(); ++i) {
      gap = std::max(gap, std::abs(ref.values[i] - parallel.values[i]));
    }
    std::printf("%-34s hash-scatter reference %9.2f ms   max value gap %.2e\n",
                "convolution reference", tr, gap);
  }

  {
    SurfaceMeasure sm;
    sm.form = five;
    std::vector<double> xi(5, 0.0);
    xi[0] = 1.25;
    auto t0 = std::chrono::steady_clock::now();
    const SurfaceEstimate serial = sm.ft(xi, 1'000'000, Exec::kSerial);
    const double ts = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const SurfaceEstimate parallel = sm.ft(xi, 1'000'000, Exec::kParallel);
    const double tp = ms_since(t0);
    report("surface transform (1e6 samples)", ts, tp, serial.value == parallel.value);
  }

  {
    std::vector<int64_t> qs;
    for (int64_t q = 2; q <= 60; ++q) qs.push_back(q);
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = weyl_bound_audit(five, qs, 10, 1, Exec::kSerial);
    const double ts = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const auto parallel = weyl_bound_audit(five, qs, 10, 1, Exec::kParallel);
    const double tp = ms_since(t0);
    bool equal = serial.size() == parallel.size();
    for (size_t i = 0; equal && i < serial.size(); ++i) {
      equal = serial[i].q == parallel[i].q && serial[i].max_modulus == parallel[i].max_modulus &&
              serial[i].scaled == parallel[i].scaled;
    }
    report("exponential sum table (q <= 60)", ts, tp, equal);
  }

  {
    std::vector<double> grid;
    for (int kk = 0; kk < 256; ++kk) grid.push_back((double(kk) + 0.5) / 256.0 - 0.5);
    auto t0 = std::chrono::steady_clock::now();
    const SquareFunctionAudit serial = square_function_audit(1, 24, grid, Exec::kSerial);
    const double ts = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const SquareFunctionAudit parallel = square_function_audit(1, 24, grid, Exec::kParallel);
    const double tp = ms_since(t0);
    report("square-function audit (j=1)", ts, tp, serial.sums == parallel.sums);
  }

  return 0;
}
