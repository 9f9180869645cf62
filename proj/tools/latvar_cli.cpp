// Unified command-line entry point: form inspection, lattice enumeration,
// averaging, seminorms, exponential-sum and multiplier scans, decomposition
// audits, config-driven experiments, and the oracle selftest suite.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <functional>
#include <iostream>

#include "latvar/io.hpp"

using namespace latvar;

namespace {

constexpr const char* kToolVersion = "latvar 1.0.0";

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << error_record_json("validation", e.what()) << "\n";
    return 1;
  } catch (const BudgetError& e) {
    std::cerr << error_record_json("budget", e.what()) << "\n";
    return 2;
  } catch (const ToleranceError& e) {
    std::cerr << error_record_json("tolerance", e.what()) << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << error_record_json("internal", e.what()) << "\n";
    return 1;
  }
}

IntegralForm form_from_flags(const std::vector<int64_t>& coeffs, int degree) {
  if (coeffs.empty()) return IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  return IntegralForm::diagonal_form(coeffs, degree);
}

std::vector<double> midpoint_grid(int count) {
  std::vector<double> g;
  for (int k = 0; k < count; ++k) g.push_back((double(k) + 0.5) / double(count) - 0.5);
  return g;
}

// ---------------------------------------------------------------------------
// selftest: oracle equivalences and identities, one pass/fail line each.

struct SelftestState {
  int failed = 0;
  void check(const std::string& name, const std::function<std::string()>& fn) {
    std::string detail;
    bool ok = false;
    try {
      detail = fn();
      ok = true;
    } catch (const std::exception& e) {
      detail = e.what();
    }
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
};

std::string selftest_variation_oracle(bool quick) {
  const int trials = quick ? 150 : 1000;
  const std::vector<double> rs = {1.0, 1.5, 2.0, 3.0,
                                  std::numeric_limits<double>::infinity()};
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(7, "selftest-var", static_cast<uint64_t>(t));
    const int len = static_cast<int>(rng.uniform_int(2, 10));
    std::vector<double> vals;
    for (int i = 0; i < len; ++i) vals.push_back(rng.uniform(-5.0, 5.0));
    const SampleSequence seq = SampleSequence::from_reals(vals);
    for (double r : rs) {
      const double a = variation_exact(seq, r).value;
      const double b = variation_bruteforce(seq, r).value;
      worst = std::max(worst, std::abs(a - b));
    }
  }
  require_tol(worst <= 1e-10, "variation oracle mismatch");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max |dp - brute| = %.3g over %d sequences", worst, trials);
  return buf;
}

std::string selftest_jump_oracle(bool quick) {
  const int trials = quick ? 150 : 1000;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(7, "selftest-jump", static_cast<uint64_t>(t));
    const int len = static_cast<int>(rng.uniform_int(2, 12));
    std::vector<double> vals;
    for (int i = 0; i < len; ++i) vals.push_back(rng.uniform(-5.0, 5.0));
    const SampleSequence seq = SampleSequence::from_reals(vals);
    for (double lam : {0.5, 1.0, 2.0}) {
      const int64_t a = jump_count(seq, lam).count;
      const int64_t b = jump_bruteforce(seq, lam).count;
      require_tol(a == b, "jump count oracle mismatch");
    }
  }
  return "greedy count equals exhaustive count on " + std::to_string(trials) + " sequences";
}

std::string selftest_enumeration(bool quick) {
  const IntegralForm four = IntegralForm::diagonal_form({1, 1, 1, 1}, 2);
  const Cutoff cutoff;
  const int64_t top = quick ? 20 : 40;
  for (int64_t lam = 1; lam <= top; ++lam) {
    const int64_t radius =
        static_cast<int64_t>(std::ceil(cutoff.r2 * std::sqrt(double(lam)))) + 1;
    const SolutionSet a = enumerate_solutions(four, lam, cutoff);
    const SolutionSet b = enumerate_box_scan(four, lam, cutoff, radius);
    require_tol(a.points == b.points, "solution sets differ at lambda " + std::to_string(lam));
  }
  return "meet-in-the-middle equals box scan for lambda <= " + std::to_string(top);
}

std::string selftest_jacobi(bool quick) {
  const IntegralForm four = IntegralForm::diagonal_form({1, 1, 1, 1}, 2);
  const Cutoff wide(10.0, 11.0);  // count every solution with weight 1
  const int64_t top = quick ? 60 : 200;
  for (int64_t lam = 1; lam <= top; ++lam) {
    int64_t jacobi = 0;
    for (int64_t dv = 1; dv <= lam; ++dv) {
      if (lam % dv == 0 && dv % 4 != 0) jacobi += dv;
    }
    const double counted = counting_function(four, lam, wide);
    require_tol(std::llround(counted) == 8 * jacobi,
                "four-square count mismatch at lambda " + std::to_string(lam));
  }
  return "four-square counts match the divisor-sum formula for lambda <= " + std::to_string(top);
}

std::string selftest_count_slope(bool quick) {
  const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  const Cutoff cutoff;
  std::vector<int64_t> lambdas, counts;
  for (int e = 6; e <= (quick ? 10 : 12); ++e) {
    const int64_t lam = int64_t(1) << e;
    lambdas.push_back(lam);
    counts.push_back(std::llround(counting_function(five, lam, cutoff)));
  }
  const LineFit fit = counting_exponent_fit(lambdas, counts);
  require_tol(std::abs(fit.slope - 1.5) <= 0.1, "five-square count slope off");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "log-log slope %.4f (expect 1.5 +- 0.1)", fit.slope);
  return buf;
}

std::string selftest_weyl_direct(bool quick) {
  double worst = 0.0;
  const int64_t qtop = quick ? 8 : 12;
  for (int degree : {2, 3}) {
    const IntegralForm f = IntegralForm::diagonal_form({1, 1, 2}, degree);
    for (int64_t q = 2; q <= qtop; ++q) {
      RngStream rng(7, "selftest-weyl", static_cast<uint64_t>(64 * q + degree));
      for (int64_t a : reduced_residues(q)) {
        Point b = Point::zero(3);
        for (int i = 0; i < 3; ++i) {
          b.c[static_cast<size_t>(i)] = static_cast<int32_t>(rng.uniform_int(0, q - 1));
        }
        const cplx u = weyl_sum(f, q, a, b);
        const cplx v = weyl_sum_direct(f, q, a, b);
        worst = std::max(worst, std::abs(u - v));
      }
    }
  }
  require_tol(worst <= 1e-12, "factored and direct normalized sums disagree");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max factored-direct gap %.3g", worst);
  return buf;
}

std::string selftest_weyl_modulus(bool quick) {
  const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  double worst = 0.0;
  for (int64_t q = 3; q <= (quick ? 25 : 99); q += 2) {
    RngStream rng(7, "selftest-weyl-mod", static_cast<uint64_t>(q));
    for (int64_t a : reduced_residues(q)) {
      for (int rep = 0; rep < 3; ++rep) {
        Point b = Point::zero(5);
        for (int i = 0; i < 5; ++i) {
          b.c[static_cast<size_t>(i)] = static_cast<int32_t>(rng.uniform_int(0, q - 1));
        }
        const double expect = std::pow(double(q), -2.5);
        worst = std::max(worst, std::abs(std::abs(weyl_sum(five, q, a, b)) - expect));
      }
    }
  }
  require_tol(worst <= 1e-9, "odd-modulus normalized sum modulus off");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max | |F_q| - q^{-5/2} | = %.3g", worst);
  return buf;
}

std::string selftest_surface_mass(bool quick) {
  const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  SurfaceMeasure sm;
  sm.form = five;
  const int64_t samples = quick ? 200'000 : 1'000'000;
  const SurfaceEstimate est = sm.ft(std::vector<double>(5, 0.0), samples);
  const double truth = 4.0 * kPi * kPi / 3.0;
  const double err = std::abs(est.value.real() - truth);
  require_tol(err <= 0.04 * truth + 3.0 * est.se_combined(), "surface mass off");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mass %.4f vs 4pi^2/3 = %.4f (se %.2g)", est.value.real(),
                truth, est.se_combined());
  return buf;
}

std::string selftest_surface_analytic(bool quick) {
  const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  SurfaceMeasure sm;
  sm.form = five;
  const int64_t samples = quick ? 200'000 : 1'000'000;
  double worst_sigma = 0.0;
  RngStream rng(7, "selftest-surface", 0);
  for (int k = 0; k < 5; ++k) {
    const double rho = rng.uniform(0.2, 5.0);
    std::vector<double> xi(5, 0.0);
    xi[0] = rho;
    const SurfaceEstimate est = sm.ft(xi, samples);
    const double truth = sphere_ft_analytic(5, rho) / 2.0;
    const double se = std::max(est.se_combined(), 1e-12);
    worst_sigma = std::max(worst_sigma, std::abs(est.value.real() - truth) / se);
  }
  require_tol(worst_sigma <= 3.0, "analytic sphere transform outside 3 standard errors");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "worst deviation %.2f standard errors", worst_sigma);
  return buf;
}

std::string selftest_psi_mass(bool) {
  const double m2 = psi_mass_1d(2);
  const double m4 = psi_mass_1d(4);
  require_tol(std::abs(m2 - 1.0) <= 1e-6 && std::abs(m4 - 1.0) <= 1e-6,
              "sampled bump mass differs from 1");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "|mass - 1| = %.2g (J=2), %.2g (J=4)", std::abs(m2 - 1.0),
                std::abs(m4 - 1.0));
  return buf;
}

std::string selftest_poisson_vs_dft(bool) {
  double worst = 0.0;
  for (const auto& [s, J] : std::vector<std::pair<int64_t, int64_t>>{{1, 4}, {2, 8}}) {
    const GridFunction g = psi_sJ(s, J, 1);
    for (int k = 0; k < 16; ++k) {
      const double xi = (double(k) + 0.5) / 16.0 - 0.5;
      cplx direct{0.0, 0.0};
      for (const Point& p : g.sorted_support()) {
        direct += g.at(p) * unit_phase(-double(p.c[0]) * xi);
      }
      worst = std::max(worst, std::abs(direct - psi_hat_torus(s, J, {xi})));
    }
  }
  require_tol(worst <= 1e-6, "Poisson route disagrees with the direct transform");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max route gap %.3g", worst);
  return buf;
}

std::string selftest_split(bool) {
  TorusFunction f = TorusFunction::zeros(1, 256);
  RngStream rng(7, "selftest-split", 0);
  for (cplx& v : f.values) v = rng.gaussian_cplx();
  const SpectralSplit sp = spectral_split(f, 8);
  double worst = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i) {
    const cplx sum = sp.low.values[i] + sp.mid.values[i] + sp.high.values[i];
    worst = std::max(worst, std::abs(sum - f.values[i]));
  }
  require_tol(worst <= 1e-10, "three-way split does not telescope");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max |low+mid+high - f| = %.3g", worst);
  return buf;
}

std::string selftest_dyadic(bool) {
  RngStream rng(7, "selftest-dyadic", 0);
  GridFunction f(2);
  for (int i = 0; i < 40; ++i) {
    Point p = Point::zero(2);
    p.c[0] = static_cast<int32_t>(rng.uniform_int(-16, 16));
    p.c[1] = static_cast<int32_t>(rng.uniform_int(-16, 16));
    f.add(p, rng.gaussian_cplx());
  }
  // coarse of fine equals coarse: E_3(E_2 f) = E_3 f
  const GridFunction nested = dyadic_average(dyadic_average(f, 2), 3);
  const GridFunction e3 = dyadic_average(f, 3);
  const double nest_gap = max_abs_diff(nested, e3);
  // sum of D_m for m = 1..3 equals E_3 f - f
  GridFunction acc(2);
  for (int m = 1; m <= 3; ++m) {
    const GridFunction d = dyadic_difference(f, m);
    for (const Point& p : d.sorted_support()) acc.add(p, d.at(p));
  }
  GridFunction target(2);
  for (const Point& p : e3.sorted_support()) target.set(p, e3.at(p));
  for (const Point& p : f.sorted_support()) target.set(p, target.at(p) - f.at(p));
  const double tel_gap = max_abs_diff(acc, target);
  require_tol(nest_gap <= 1e-12 && tel_gap <= 1e-12, "cube average identities violated");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "nesting gap %.3g, telescoping gap %.3g", nest_gap, tel_gap);
  return buf;
}

std::string selftest_projection(bool) {
  TorusFunction f = TorusFunction::zeros(1, 512);
  RngStream rng(7, "selftest-proj", 0);
  for (cplx& v : f.values) v = rng.gaussian_cplx();
  const TorusFunction p1 = spectral_project_minor(f, 1, 8);
  const TorusFunction p2 = spectral_project_minor(p1, 1, 8);
  const double idem = torus_max_abs_diff(p1, p2);
  const TorusFunction hat = torus_fft(p1);
  double on_arc = 0.0;
  for (int64_t k = 0; k < hat.count(); ++k) {
    if (major_arc_member({double(k) / double(f.N)}, 1, 8)) {
      on_arc = std::max(on_arc, std::abs(hat.values[static_cast<size_t>(k)]));
    }
  }
  require_tol(idem <= 1e-10 && on_arc <= 1e-9, "minor-arc projection misbehaves");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "idempotence gap %.3g, arc residue %.3g", idem, on_arc);
  return buf;
}

std::string selftest_convolution(bool) {
  const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  const Kernel k = make_form_kernel(five, 20, Cutoff(), Kernel::Normalization::kByCount);
  RngStream rng(7, "selftest-conv", 0);
  GridFunction f(5);
  for (int i = 0; i < 12; ++i) {
    Point p = Point::zero(5);
    for (int c = 0; c < 5; ++c) p.c[static_cast<size_t>(c)] = static_cast<int32_t>(rng.uniform_int(-6, 6));
    f.add(p, rng.gaussian_cplx());
  }
  const SortedField a = apply_kernel(k, f, Exec::kParallel);
  const SortedField b = apply_kernel(k, f, Exec::kSerial);
  require_tol(a.points == b.points && a.values == b.values,
              "parallel and serial convolution differ");
  const SortedField ref = apply_kernel_reference(k, f);
  require_tol(a.points == ref.points, "merge and reference supports differ");
  double worst = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - ref.values[i]));
  }
  require_tol(worst <= 1e-12, "merge and reference values differ");
  char buf[80];
  std::snprintf(buf, sizeof(buf), "serial == parallel bitwise; reference gap %.3g", worst);
  return buf;
}

std::string selftest_transference(bool quick) {
  ExperimentConfig cfg;
  cfg.ratio = 2.0;
  cfg.start = 1;
  cfg.count = 3;
  cfg.window = 40;
  cfg.cases = quick ? 5 : 10;
  cfg.probes = 8;
  cfg.ensemble.support = 24;
  cfg.ensemble.seed = 7;
  const TransferenceReport rep = ergodic_shift_demo(cfg);
  require_tol(rep.all_int_exact, "integer transference identity broken");
  require_tol(rep.max_float_diff <= 1e-12, "float transference identity off");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "integer sums identical; float gap %.3g over %zu cases",
                rep.max_float_diff, rep.cases.size());
  return buf;
}

std::string selftest_kernel_mass(bool) {
  const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
  const double mass = smoothed_kernel_mass(five, Cutoff(), 4);
  require_tol(std::abs(mass - 1.0) <= 1e-5, "smoothed kernel mass differs from 1");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "|mass - 1| = %.3g at level 4", std::abs(mass - 1.0));
  return buf;
}

std::string selftest_martingale(bool) {
  RngStream rng(7, "selftest-mart", 0);
  GridFunction f(2);
  for (int i = 0; i < 20; ++i) {
    Point p = Point::zero(2);
    p.c[0] = static_cast<int32_t>(rng.uniform_int(-8, 8));
    p.c[1] = static_cast<int32_t>(rng.uniform_int(-8, 8));
    f.add(p, cplx{rng.uniform(-1.0, 1.0), 0.0});
  }
  const double big = 4.0 * f.max_abs() + 1.0;
  const MartingaleJumpAudit audit = martingale_jump_audit({f}, 3, {big}, 2.0);
  require_tol(audit.overall == 0.0, "jump count positive above the amplitude");
  const MartingaleJumpAudit small = martingale_jump_audit({f}, 3, {1e-6}, 2.0);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "zero above amplitude; ratio %.3f at tiny threshold",
                small.overall);
  return buf;
}

std::string selftest_lacunary(bool) {
  const LacunarySequence a = lacunary_sequence(2.0, 1, RegularValueSet::naturals(), 4);
  require_tol((a.lambdas == std::vector<int64_t>{1, 2, 4, 8}), "doubling sequence wrong");
  const LacunarySequence b =
      lacunary_sequence(2.0, 1, RegularValueSet::progression(1, 3), 4);
  require_tol((b.lambdas == std::vector<int64_t>{1, 4, 10, 22}), "progression sequence wrong");
  const LacunarySequence c = lacunary_sequence(1.5, 4, RegularValueSet::naturals(), 3);
  require_tol((c.lambdas == std::vector<int64_t>{4, 6, 9}), "ratio-1.5 sequence wrong");
  return "three frozen sequences reproduced";
}

std::string selftest_bridge(bool) {
  std::vector<SampleSequence> seqs;
  seqs.push_back(SampleSequence::from_reals({1.0, 1.0, 1.0, 1.0}));
  seqs.push_back(SampleSequence::from_reals({0.0, 1.0, 0.0, 1.0}));
  const BridgeResult br = jump_bridge_check(seqs, 3.0);
  require_tol(br.ratios[0] == 0.0, "constant sequence must give ratio 0");
  require_tol(br.ratios[1] > 0.0 && std::isfinite(br.ratios[1]), "alternating ratio bad");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "constant -> 0, alternating -> %.4f", br.ratios[1]);
  return buf;
}

int cmd_selftest(bool quick) {
  SelftestState st;
  st.check("variation dp vs exhaustive", [&] { return selftest_variation_oracle(quick); });
  st.check("jump greedy vs exhaustive", [&] { return selftest_jump_oracle(quick); });
  st.check("enumeration vs box scan", [&] { return selftest_enumeration(quick); });
  st.check("four-square divisor formula", [&] { return selftest_jacobi(quick); });
  st.check("five-square count growth", [&] { return selftest_count_slope(quick); });
  st.check("factored vs direct normalized sums", [&] { return selftest_weyl_direct(quick); });
  st.check("odd-modulus sum magnitude", [&] { return selftest_weyl_modulus(quick); });
  st.check("surface measure mass", [&] { return selftest_surface_mass(quick); });
  st.check("surface transform vs Bessel formula", [&] { return selftest_surface_analytic(quick); });
  st.check("sampled bump mass", [&] { return selftest_psi_mass(quick); });
  st.check("Poisson route vs direct transform", [&] { return selftest_poisson_vs_dft(quick); });
  st.check("three-way split telescoping", [&] { return selftest_split(quick); });
  st.check("cube average identities", [&] { return selftest_dyadic(quick); });
  st.check("minor-arc projection", [&] { return selftest_projection(quick); });
  st.check("convolution merge vs reference", [&] { return selftest_convolution(quick); });
  st.check("shift transference identity", [&] { return selftest_transference(quick); });
  st.check("smoothed kernel mass", [&] { return selftest_kernel_mass(quick); });
  st.check("martingale jump thresholds", [&] { return selftest_martingale(quick); });
  st.check("lacunary sequence oracles", [&] { return selftest_lacunary(quick); });
  st.check("jump-to-variation bridge", [&] { return selftest_bridge(quick); });
  if (st.failed > 0) {
    std::printf("%d check(s) failed\n", st.failed);
    throw ToleranceError(std::to_string(st.failed) + " selftest check(s) failed");
  }
  std::printf("all checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical workbench for averages over lattice level sets"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker pool size (0 = machine parallelism)");
  uint64_t seed = 1;
  app.add_option("--seed", seed, "root seed for all random streams");

  std::vector<int64_t> coeffs;
  int degree = 2;

  auto* forms_cmd = app.add_subcommand("forms", "describe a diagonal form and its constants");
  forms_cmd->add_option("--coeffs", coeffs, "diagonal coefficients (default five squares)");
  forms_cmd->add_option("--degree", degree, "form degree");

  auto* lattice_cmd = app.add_subcommand("lattice", "enumerate a level set or variety zero set");
  int64_t lambda = 25;
  bool variety = false;
  std::string out_path;
  lattice_cmd->add_option("--coeffs", coeffs, "diagonal coefficients");
  lattice_cmd->add_option("--degree", degree, "form degree");
  lattice_cmd->add_option("--lambda", lambda, "level");
  lattice_cmd->add_flag("--variety", variety, "enumerate the zero set in [1, lambda]^n");
  lattice_cmd->add_option("--out", out_path, "write the points as CSV");

  auto* ops_cmd = app.add_subcommand("ops", "apply one average to a function");
  std::string input_path;
  std::string norm_name = "count";
  ops_cmd->add_option("--coeffs", coeffs, "diagonal coefficients");
  ops_cmd->add_option("--degree", degree, "form degree");
  ops_cmd->add_option("--lambda", lambda, "level");
  ops_cmd->add_flag("--variety", variety, "use the variety average");
  ops_cmd->add_option("--norm", norm_name, "normalization: count or power");
  ops_cmd->add_option("--input", input_path, "input grid CSV (default: delta at 0)");
  ops_cmd->add_option("--out", out_path, "output field CSV");

  auto* semi_cmd = app.add_subcommand("seminorm", "variation and jump counts of a sequence");
  double r_exp = 3.0;
  std::vector<double> jump_lambdas;
  semi_cmd->add_option("--input", input_path, "sequence CSV (lambda,value_re,value_im)")
      ->required();
  semi_cmd->add_option("--r", r_exp, "variation exponent (inf for the sup form)");
  semi_cmd->add_option("--jump", jump_lambdas, "jump thresholds");

  auto* circle_cmd = app.add_subcommand("circle", "exponential-sum audit or multiplier scan");
  std::string circle_mode = "weyl";
  int64_t q_max = 25;
  std::vector<int64_t> scan_lambdas = {64, 256, 1024};
  int xi_count = 50;
  circle_cmd->add_option("--mode", circle_mode, "weyl or scan");
  circle_cmd->add_option("--coeffs", coeffs, "diagonal coefficients");
  circle_cmd->add_option("--degree", degree, "form degree");
  circle_cmd->add_option("--qmax", q_max, "largest modulus for the weyl audit");
  circle_cmd->add_option("--lambdas", scan_lambdas, "levels for the multiplier scan");
  circle_cmd->add_option("--xi", xi_count, "sampled frequencies per level");

  auto* decomp_cmd = app.add_subcommand("decomp", "decomposition audits");
  std::string decomp_mode = "square";
  int band_j = 0;
  int l_max = 24;
  int split_l = 8;
  int64_t torus_n = 1024;
  decomp_cmd->add_option("--mode", decomp_mode, "square, split, or mass");
  decomp_cmd->add_option("--j", band_j, "band index for the square audit");
  decomp_cmd->add_option("--lmax", l_max, "upper level for the square audit");
  decomp_cmd->add_option("--l", split_l, "split or mass level");
  decomp_cmd->add_option("--N", torus_n, "torus size for the split demo");
  decomp_cmd->add_option("--coeffs", coeffs, "diagonal coefficients (mass mode)");
  decomp_cmd->add_option("--degree", degree, "form degree (mass mode)");

  auto* exp_cmd = app.add_subcommand("experiment", "config-driven experiments");
  exp_cmd->require_subcommand(1);
  auto* exp_run = exp_cmd->add_subcommand("run", "run an experiment from a config file");
  std::string config_path, report_path = "report.json";
  exp_run->add_option("--config", config_path, "flat key=value config file")->required();
  exp_run->add_option("--out", report_path, "output report JSON");
  auto* exp_cmp = exp_cmd->add_subcommand("compare", "stability delta between two reports");
  std::string path_a, path_b;
  exp_cmp->add_option("--a", path_a, "first report")->required();
  exp_cmp->add_option("--b", path_b, "second report")->required();

  auto* selftest_cmd = app.add_subcommand("selftest", "oracle and identity suite");
  bool quick = false;
  selftest_cmd->add_flag("--quick", quick, "reduced trial counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << error_record_json("validation", "argument parsing failed") << "\n";
    return 1;
  }

  if (threads > 0) set_threads(threads);

  return run_guarded([&] {
    if (*forms_cmd) {
      const IntegralForm f = form_from_flags(coeffs, degree);
      const BirchData birch = birch_constants(f);
      std::printf("form: %s\n", f.describe().c_str());
      std::printf("rank: %d (threshold rank > (d-1) 2^d %s)\n", birch.rank,
                  birch.rank_exceeds_threshold ? "holds" : "fails");
      std::printf("c = %s = %.6f\n", birch.c.str().c_str(), birch.c.to_double());
      std::printf("eta = %s = %.6f\n", birch.eta.str().c_str(), birch.eta.to_double());
      const PhiRegularity reg = phi_regular_check(f, Cutoff(), seed);
      std::printf("regularity: %s%s\n", reg.regular() ? "regular" : "not certified",
                  reg.note.empty() ? "" : (" (" + reg.note + ")").c_str());
      return;
    }
    if (*lattice_cmd) {
      const IntegralForm f = form_from_flags(coeffs, degree);
      const SolutionSet sol = variety ? enumerate_variety_zero(f, lambda)
                                      : enumerate_solutions(f, lambda, Cutoff());
      std::printf("lambda = %lld: %zu points, weighted count %.6f\n",
                  static_cast<long long>(lambda), sol.points.size(), sol.weighted_count);
      if (!out_path.empty()) {
        RunManifest man;
        man.tool_version = kToolVersion;
        man.subcommand = "lattice";
        man.seed = seed;
        man.config["lambda"] = std::to_string(lambda);
        man.config["form"] = f.describe();
        man.config["variety"] = variety ? "1" : "0";
        man.outputs = {out_path};
        write_points_csv(out_path, sol.points, f.n, man.hash_hex());
        std::printf("wrote %s\n", out_path.c_str());
      }
      return;
    }
    if (*ops_cmd) {
      const IntegralForm f = form_from_flags(coeffs, degree);
      const Kernel::Normalization nm = norm_name == "power" ? Kernel::Normalization::kByPower
                                                            : Kernel::Normalization::kByCount;
      const Kernel k = variety ? make_variety_kernel(f, lambda, nm)
                               : make_form_kernel(f, lambda, Cutoff(), nm);
      GridFunction g(f.n);
      if (input_path.empty()) {
        g.set(Point::zero(f.n), cplx{1.0, 0.0});
      } else {
        g = read_grid_csv(input_path);
        require(g.dim() == f.n, "input dimension does not match the form");
      }
      const SortedField result = apply_kernel(k, g);
      std::printf("kernel: %zu points, mass %.12f\n", k.points.size(), k.mass());
      std::printf("output: %zu points, l2 norm %.12f\n", result.size(), result.l2norm());
      if (!out_path.empty()) {
        RunManifest man;
        man.tool_version = kToolVersion;
        man.subcommand = "ops";
        man.seed = seed;
        man.config["lambda"] = std::to_string(lambda);
        man.config["form"] = f.describe();
        man.config["norm"] = norm_name;
        man.config["variety"] = variety ? "1" : "0";
        man.config["input"] = input_path;
        man.outputs = {out_path};
        write_field_csv(out_path, result, man.hash_hex());
        std::printf("wrote %s\n", out_path.c_str());
      }
      return;
    }
    if (*semi_cmd) {
      const SampleSequence s = read_sequence_csv(input_path);
      const double r_used = std::isfinite(r_exp) ? r_exp : std::numeric_limits<double>::infinity();
      const VariationResult v = variation_exact(s, r_used);
      std::printf("V_%g = %.12f (witness length %zu)\n", r_used, v.value, v.witness.size());
      for (double lam : jump_lambdas) {
        const JumpResult jr = jump_count(s, lam);
        std::printf("jumps above %g: %lld\n", lam, static_cast<long long>(jr.count));
      }
      return;
    }
    if (*circle_cmd) {
      const IntegralForm f = form_from_flags(coeffs, degree);
      if (circle_mode == "weyl") {
        std::vector<int64_t> qs;
        for (int64_t q = 2; q <= q_max; ++q) qs.push_back(q);
        const std::vector<WeylAuditRow> rows = weyl_bound_audit(f, qs, 5, seed);
        double worst = 0.0;
        for (const WeylAuditRow& row : rows) {
          std::printf("q=%lld max|F_q|=%.3e scaled=%.4f\n", static_cast<long long>(row.q),
                      row.max_modulus, row.scaled);
          worst = std::max(worst, row.scaled);
        }
        std::printf("max q^c |F_q| over the table: %.4f\n", worst);
      } else if (circle_mode == "scan") {
        const MultiplierScan scan =
            multiplier_error_scan(f, Cutoff(), scan_lambdas, xi_count, seed);
        for (const MultiplierScanRow& row : scan.rows) {
          std::printf("lambda=%lld q_max=%lld sup_error=%.6e\n",
                      static_cast<long long>(row.lambda), static_cast<long long>(row.q_max),
                      row.sup_error);
        }
        std::printf("log-log slope %.4f (strictly decreasing: %s)\n", scan.error_fit.slope,
                    scan.strictly_decreasing ? "yes" : "no");
      } else {
        throw ValidationError("unknown circle mode: " + circle_mode);
      }
      return;
    }
    if (*decomp_cmd) {
      if (decomp_mode == "square") {
        const SquareFunctionAudit audit =
            square_function_audit(band_j, l_max, midpoint_grid(256));
        std::printf("j=%d levels [%d, %d]: max grid sum %.8f\n", audit.j, audit.l_first,
                    audit.l_max, audit.max_sum);
      } else if (decomp_mode == "split") {
        TorusFunction f = TorusFunction::zeros(1, torus_n);
        RngStream rng(seed, "cli-split", 0);
        for (cplx& v : f.values) v = rng.gaussian_cplx();
        const SpectralSplit sp = spectral_split(f, split_l);
        TorusFunction sum = sp.low;
        for (size_t i = 0; i < sum.values.size(); ++i) {
          sum.values[i] += sp.mid.values[i] + sp.high.values[i];
        }
        std::printf("l=%d bands=%d: |f - (low+mid+high)|_max = %.3e\n", sp.l, sp.bands,
                    torus_max_abs_diff(sum, f));
        std::printf("l2: f %.6f low %.6f mid %.6f high %.6f\n", f.l2norm(), sp.low.l2norm(),
                    sp.mid.l2norm(), sp.high.l2norm());
      } else if (decomp_mode == "mass") {
        const IntegralForm f = form_from_flags(coeffs, degree);
        const double mass = smoothed_kernel_mass(f, Cutoff(), split_l);
        std::printf("smoothed kernel mass at level %d: %.10f (deviation %.3e)\n", split_l, mass,
                    std::abs(mass - 1.0));
      } else {
        throw ValidationError("unknown decomp mode: " + decomp_mode);
      }
      return;
    }
    if (*exp_run) {
      const KeyValueConfig kv = KeyValueConfig::from_file(config_path);
      ExperimentConfig cfg = experiment_config_from_kv(kv);
      const std::string kind = kv.get_string("experiment", "variation");
      RunManifest man;
      man.tool_version = kToolVersion;
      man.subcommand = "experiment run";
      man.seed = cfg.ensemble.seed;
      man.config = kv.entries();
      man.outputs = {report_path};
      if (kind == "transfer") {
        const TransferenceReport rep = ergodic_shift_demo(cfg);
        nlohmann::ordered_json j;
        j["manifest"] = nlohmann::ordered_json::parse(man.to_json());
        j["manifest_hash"] = man.hash_hex();
        nlohmann::ordered_json metrics;
        metrics["all_int_exact"] = rep.all_int_exact;
        metrics["max_float_diff"] = rep.max_float_diff;
        metrics["max_variation_diff"] = rep.max_variation_diff;
        metrics["cases"] = rep.cases.size();
        j["metrics"] = metrics;
        j["references"] = nlohmann::ordered_json::object();
        j["pass"] = rep.all_int_exact && rep.max_float_diff <= 1e-12;
        write_text_file(report_path, j.dump(2) + "\n");
        std::printf("transference: int exact %s, float gap %.3e\n",
                    rep.all_int_exact ? "yes" : "no", rep.max_float_diff);
      } else {
        Report rep;
        if (kind == "variation") {
          rep = variation_norm_experiment(cfg);
        } else if (kind == "jump") {
          rep = jump_norm_experiment(cfg);
        } else if (kind == "variety") {
          rep = variety_experiment(cfg);
        } else {
          throw ValidationError("unknown experiment kind: " + kind);
        }
        const bool pass = std::isfinite(rep.max_ratio);
        write_text_file(report_path, experiment_report_json(man, rep, pass) + "\n");
        std::printf("%s: max ratio %.6f over %zu members\n", rep.experiment.c_str(),
                    rep.max_ratio, rep.ratios.size());
      }
      std::printf("wrote %s\n", report_path.c_str());
      return;
    }
    if (*exp_cmp) {
      const nlohmann::json a = nlohmann::json::parse(read_text_file(path_a));
      const nlohmann::json b = nlohmann::json::parse(read_text_file(path_b));
      const double ma = a.at("metrics").at("max_ratio").get<double>();
      const double mb = b.at("metrics").at("max_ratio").get<double>();
      const double rel = ma == 0.0 ? (mb == 0.0 ? 0.0 : 1.0) : std::abs(mb - ma) / ma;
      std::printf("max ratio: %.6f vs %.6f, relative delta %.2f%%\n", ma, mb, 100.0 * rel);
      std::printf("stability: %s (threshold 25%%)\n", rel < 0.25 ? "ok" : "unstable");
      return;
    }
    if (*selftest_cmd) {
      cmd_selftest(quick);
      return;
    }
  });
}
