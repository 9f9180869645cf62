#include "latvar/circle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace latvar {

std::vector<int64_t> reduced_residues(int64_t q) {
  require(q >= 1, "modulus must be positive");
  if (q == 1) return {0};
  std::vector<int64_t> out;
  for (int64_t a = 1; a < q; ++a) {
    if (std::gcd(a, q) == 1) out.push_back(a);
  }
  return out;
}

int64_t pow_mod(int64_t base, int exp, int64_t q) {
  require(q >= 1 && exp >= 0, "pow_mod needs positive modulus and exponent");
  base %= q;
  if (base < 0) base += q;
  int64_t acc = 1 % q;
  while (exp > 0) {
    if (exp & 1) acc = static_cast<int64_t>(static_cast<__int128>(acc) * base % q);
    base = static_cast<int64_t>(static_cast<__int128>(base) * base % q);
    exp >>= 1;
  }
  return acc;
}

namespace {

int64_t mod_pos(int64_t v, int64_t q) {
  int64_t r = v % q;
  return r < 0 ? r + q : r;
}

void check_residue(int64_t q, int64_t a) {
  require(q >= 1, "modulus must be positive");
  if (q == 1) {
    require(a == 0, "the only residue mod 1 is 0");
  } else {
    require(a >= 1 && a < q && std::gcd(a, q) == 1, "a must be a reduced residue mod q");
  }
}

std::vector<cplx> phase_table(int64_t q) {
  std::vector<cplx> tab(static_cast<size_t>(q));
  for (int64_t k = 0; k < q; ++k) {
    tab[static_cast<size_t>(k)] = unit_phase(static_cast<double>(k) / static_cast<double>(q));
  }
  return tab;
}

}  // namespace

cplx weyl_sum(const IntegralForm& f, int64_t q, int64_t a, const Point& b) {
  check_residue(q, a);
  require(b.n == f.n, "frequency vector dimension mismatch");
  if (!f.diagonal) return weyl_sum_direct(f, q, a, b);
  const auto tab = phase_table(q);
  cplx acc{1.0, 0.0};
  for (int i = 0; i < f.n; ++i) {
    const int64_t ci = mod_pos(f.diag[static_cast<size_t>(i)], q);
    const int64_t bi = mod_pos(b.c[static_cast<size_t>(i)], q);
    const int64_t aci = static_cast<int64_t>(static_cast<__int128>(mod_pos(a, q)) * ci % q);
    cplx s{0.0, 0.0};
    for (int64_t m = 0; m < q; ++m) {
      const int64_t md = pow_mod(m, f.d, q);
      const int64_t t = static_cast<int64_t>(
          (static_cast<__int128>(aci) * md + static_cast<__int128>(bi) * m) % q);
      s += tab[static_cast<size_t>(t)];
    }
    acc *= s / static_cast<double>(q);
  }
  return acc;
}

cplx weyl_sum_direct(const IntegralForm& f, int64_t q, int64_t a, const Point& b,
                     int64_t max_ops) {
  check_residue(q, a);
  require(b.n == f.n, "frequency vector dimension mismatch");
  double cells = 1.0;
  for (int i = 0; i < f.n; ++i) cells *= static_cast<double>(q);
  require_budget(cells <= static_cast<double>(max_ops), "direct exponential sum exceeds budget");
  const auto tab = phase_table(q);
  Point m = Point::zero(f.n);
  cplx total{0.0, 0.0};
  while (true) {
    int64_t t = mod_pos(checked_mul(mod_pos(a, q), mod_pos(eval_form(f, m), q)), q);
    for (int i = 0; i < f.n; ++i) {
      t = mod_pos(t + mod_pos(b.c[static_cast<size_t>(i)], q) * m.c[static_cast<size_t>(i)], q);
    }
    total += tab[static_cast<size_t>(t)];
    int i = 0;
    while (i < f.n) {
      if (++m.c[static_cast<size_t>(i)] < q) break;
      m.c[static_cast<size_t>(i)] = 0;
      ++i;
    }
    if (i == f.n) break;
  }
  for (int i = 0; i < f.n; ++i) total /= static_cast<double>(q);
  return total;
}

std::vector<WeylAuditRow> weyl_bound_audit(const IntegralForm& f, const std::vector<int64_t>& qs,
                                           int b_samples, uint64_t seed, Exec exec) {
  require(b_samples >= 0, "b_samples must be nonnegative");
  const double c = birch_constants(f).c.to_double();
  std::vector<WeylAuditRow> rows(qs.size());
  parallel_for(exec, static_cast<int64_t>(qs.size()), [&](int64_t i) {
    const int64_t q = qs[static_cast<size_t>(i)];
    RngStream rng(seed, "weyl-audit", static_cast<uint64_t>(q));
    std::vector<Point> bs;
    bs.push_back(Point::zero(f.n));
    for (int s = 0; s < b_samples; ++s) {
      Point b = Point::zero(f.n);
      for (int k = 0; k < f.n; ++k) {
        b.c[static_cast<size_t>(k)] = static_cast<int32_t>(rng.uniform_int(0, q - 1));
      }
      bs.push_back(b);
    }
    double best = 0.0;
    for (int64_t a : reduced_residues(q)) {
      for (const Point& b : bs) best = std::max(best, std::abs(weyl_sum(f, q, a, b)));
    }
    rows[static_cast<size_t>(i)] = {q, best, best * std::pow(static_cast<double>(q), c)};
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Monte Carlo surface-measure transforms.

namespace {

constexpr int64_t kMcBlock = 65536;

struct BlockStats {
  double sum_re = 0.0, sum_im = 0.0;
  double sq_re = 0.0, sq_im = 0.0;
  int64_t hits = 0;
};

SurfaceEstimate reduce_blocks(const std::vector<BlockStats>& blocks, int64_t total,
                              double epsilon) {
  double sr = 0.0, si = 0.0, qr = 0.0, qi = 0.0;
  int64_t hits = 0;
  for (const BlockStats& b : blocks) {
    sr += b.sum_re;
    si += b.sum_im;
    qr += b.sq_re;
    qi += b.sq_im;
    hits += b.hits;
  }
  const double nd = static_cast<double>(total);
  SurfaceEstimate est;
  est.value = cplx{sr / nd, si / nd};
  if (total > 1) {
    const double vr = std::max(0.0, (qr - nd * est.value.real() * est.value.real()) / (nd - 1.0));
    const double vi = std::max(0.0, (qi - nd * est.value.imag() * est.value.imag()) / (nd - 1.0));
    est.se_re = std::sqrt(vr / nd);
    est.se_im = std::sqrt(vi / nd);
  }
  est.samples = total;
  est.hits = hits;
  est.epsilon = epsilon;
  return est;
}

}  // namespace

bool SurfaceMeasure::shell_sampler_available() const {
  return level == 1.0 && form.positive_definite_diagonal();
}

SurfaceEstimate SurfaceMeasure::ft_box(const std::vector<double>& xi, int64_t samples,
                                       Exec exec) const {
  require(static_cast<int>(xi.size()) == form.n, "frequency dimension mismatch");
  require(samples > 0 && epsilon > 0.0, "need positive sample count and slab width");
  const int n = form.n;
  const bool unit_box = level == 0.0;
  const double lo = unit_box ? 0.0 : -cutoff.r2;
  const double hi = unit_box ? 1.0 : cutoff.r2;
  double volume = 1.0;
  for (int i = 0; i < n; ++i) volume *= hi - lo;
  const int64_t nblocks = (samples + kMcBlock - 1) / kMcBlock;
  std::vector<BlockStats> blocks(static_cast<size_t>(nblocks));
  parallel_for(exec, nblocks, [&](int64_t bi) {
    RngStream rng(seed, "surface-box", static_cast<uint64_t>(bi));
    BlockStats st;
    const int64_t begin = bi * kMcBlock;
    const int64_t end = std::min(samples, begin + kMcBlock);
    std::vector<double> y(static_cast<size_t>(n));
    for (int64_t s = begin; s < end; ++s) {
      for (int i = 0; i < n; ++i) y[static_cast<size_t>(i)] = rng.uniform(lo, hi);
      const double fv = eval_form_real(form, y);
      double xr = 0.0, xi_ = 0.0;
      if (std::abs(fv - level) < epsilon) {
        ++st.hits;
        const double w = unit_box ? 1.0 : cutoff.eval(y);
        if (w != 0.0) {
          double dot = 0.0;
          for (int i = 0; i < n; ++i) dot += xi[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
          const cplx val = unit_phase(-dot) * (w * volume / (2.0 * epsilon));
          xr = val.real();
          xi_ = val.imag();
        }
      }
      st.sum_re += xr;
      st.sum_im += xi_;
      st.sq_re += xr * xr;
      st.sq_im += xi_ * xi_;
    }
    blocks[static_cast<size_t>(bi)] = st;
  });
  return reduce_blocks(blocks, samples, epsilon);
}

SurfaceEstimate SurfaceMeasure::ft(const std::vector<double>& xi, int64_t samples,
                                   Exec exec) const {
  if (!shell_sampler_available()) return ft_box(xi, samples, exec);
  require(static_cast<int>(xi.size()) == form.n, "frequency dimension mismatch");
  require(samples > 0 && epsilon > 0.0 && epsilon < 1.0, "need samples and slab width in (0,1)");
  const int n = form.n;
  const int d = form.d;
  double cmin = kInf, cmax = 0.0;
  for (int64_t c : form.diag) {
    cmin = std::min(cmin, static_cast<double>(c));
    cmax = std::max(cmax, static_cast<double>(c));
  }
  // Direction-wise bounds m <= f(u) <= M on the unit sphere bracket the slab
  // between two radii; sampling that shell instead of the whole box turns
  // nearly every draw into a hit.
  const double mdir = cmin * std::pow(static_cast<double>(n), 1.0 - d / 2.0);
  const double big = cmax;
  const double rho_lo = std::pow((1.0 - epsilon) / big, 1.0 / d);
  const double rho_hi = std::min(cutoff.r2, std::pow((1.0 + epsilon) / mdir, 1.0 / d));
  if (rho_lo >= rho_hi) {
    SurfaceEstimate empty;
    empty.samples = samples;
    empty.epsilon = epsilon;
    return empty;  // the slab misses the cutoff support entirely
  }
  const double area = sphere_area(n);
  const int64_t nblocks = (samples + kMcBlock - 1) / kMcBlock;
  std::vector<BlockStats> blocks(static_cast<size_t>(nblocks));
  parallel_for(exec, nblocks, [&](int64_t bi) {
    RngStream rng(seed, "surface-shell", static_cast<uint64_t>(bi));
    BlockStats st;
    const int64_t begin = bi * kMcBlock;
    const int64_t end = std::min(samples, begin + kMcBlock);
    std::vector<double> y(static_cast<size_t>(n));
    for (int64_t s = begin; s < end; ++s) {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (int i = 0; i < n; ++i) {
          y[static_cast<size_t>(i)] = rng.gaussian();
          norm += y[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
        }
        norm = std::sqrt(norm);
      } while (norm < 1e-12);
      const double rho = rng.uniform(rho_lo, rho_hi);
      for (int i = 0; i < n; ++i) y[static_cast<size_t>(i)] *= rho / norm;
      const double fv = eval_form_real(form, y);
      double xr = 0.0, xi_ = 0.0;
      if (std::abs(fv - level) < epsilon) {
        ++st.hits;
        const double w = cutoff.eval(y);
        if (w != 0.0) {
          double dot = 0.0;
          for (int i = 0; i < n; ++i) dot += xi[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
          const double inv_density = (rho_hi - rho_lo) * area * std::pow(rho, n - 1);
          const cplx val = unit_phase(-dot) * (w * inv_density / (2.0 * epsilon));
          xr = val.real();
          xi_ = val.imag();
        }
      }
      st.sum_re += xr;
      st.sum_im += xi_;
      st.sq_re += xr * xr;
      st.sq_im += xi_ * xi_;
    }
    blocks[static_cast<size_t>(bi)] = st;
  });
  return reduce_blocks(blocks, samples, epsilon);
}

double sphere_area(int n) {
  require(n >= 1, "dimension must be positive");
  return 2.0 * std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0);
}

double sphere_ft_analytic(int n, double rho) {
  require(n >= 1 && rho >= 0.0, "need positive dimension and nonnegative radius");
  if (rho < 1e-9) return sphere_area(n);
  const double z = 2.0 * kPi * rho;
  if (n == 1) return 2.0 * std::cos(z);
  if (n == 3) return 2.0 * std::sin(z) / rho;
  if (n == 5) {
    // sin(z)/z - cos(z) loses all digits to cancellation near z = 0, so a
    // short series takes over below z = 1/2 (truncation error under 3e-9).
    const double zz = z * z;
    const double s = (z < 0.5)
                         ? zz / 3.0 - zz * zz / 30.0 + zz * zz * zz / 840.0
                         : std::sin(z) / z - std::cos(z);
    const double j32 = std::sqrt(2.0 / (kPi * z)) * s;
    return 2.0 * kPi * std::pow(rho, -1.5) * j32;
  }
  const double nu = (n - 2) / 2.0;
  return 2.0 * kPi * std::pow(rho, -nu) * std::cyl_bessel_j(nu, z);
}

double zeta_hat(int64_t q, const std::vector<double>& xi) {
  require(q >= 1, "modulus must be positive");
  double norm2 = 0.0;
  for (double v : xi) norm2 += v * v;
  const double r = static_cast<double>(q) * std::sqrt(norm2);
  return smooth_step(2.0 * r - 1.0);
}

cplx kernel_multiplier(const Kernel& k, const std::vector<double>& xi, Exec exec) {
  require(static_cast<int>(xi.size()) == k.dim, "frequency dimension mismatch");
  constexpr int64_t kChunk = 4096;
  const int64_t npts = static_cast<int64_t>(k.points.size());
  const int64_t nchunks = (npts + kChunk - 1) / kChunk;
  std::vector<cplx> partial(static_cast<size_t>(nchunks), cplx{0.0, 0.0});
  parallel_for(exec, nchunks, [&](int64_t ci) {
    cplx acc{0.0, 0.0};
    const int64_t begin = ci * kChunk;
    const int64_t end = std::min(npts, begin + kChunk);
    for (int64_t j = begin; j < end; ++j) {
      const Point& y = k.points[static_cast<size_t>(j)];
      double dot = 0.0;
      for (int i = 0; i < k.dim; ++i) {
        dot += xi[static_cast<size_t>(i)] * static_cast<double>(y.c[static_cast<size_t>(i)]);
      }
      acc += k.weights[static_cast<size_t>(j)] * unit_phase(-dot);
    }
    partial[static_cast<size_t>(ci)] = acc;
  });
  cplx total{0.0, 0.0};
  for (const cplx& p : partial) total += p;
  return total;
}

// ---------------------------------------------------------------------------
// Main terms.

namespace {

bool is_unit_sphere_form(const IntegralForm& f) {
  if (!f.diagonal || f.d != 2) return false;
  for (int64_t c : f.diag) {
    if (c != 1) return false;
  }
  return true;
}

int64_t default_q_max(int64_t lambda, int d) {
  return static_cast<int64_t>(
      std::ceil(std::pow(static_cast<double>(lambda), 1.0 / (2.0 * d))));
}

uint64_t mix_seed(uint64_t seed, int64_t q) {
  return seed ^ (0x9e3779b97f4a7c15ull * static_cast<uint64_t>(q));
}

std::vector<cplx> main_term_terms(const IntegralForm& f, const Cutoff& cutoff, int64_t lambda,
                                  const std::vector<double>& xi, const MainTermOptions& opts,
                                  bool variety) {
  require(static_cast<int>(xi.size()) == f.n, "frequency dimension mismatch");
  require(lambda >= 1, "lambda must be positive");
  const int64_t q_max = opts.q_max > 0 ? opts.q_max : default_q_max(lambda, f.d);
  const double dil = variety ? static_cast<double>(lambda)
                             : std::pow(static_cast<double>(lambda), 1.0 / f.d);
  const bool analytic = !variety && opts.analytic_sphere && is_unit_sphere_form(f);
  std::vector<cplx> terms;
  terms.reserve(static_cast<size_t>(q_max));
  for (int64_t q = 1; q <= q_max; ++q) {
    // Only the integer vector nearest q*xi survives the bump around 0.
    std::vector<double> shifted(xi.size());
    Point bres = Point::zero(f.n);
    for (int i = 0; i < f.n; ++i) {
      const int64_t bstar = std::llround(static_cast<double>(q) * xi[static_cast<size_t>(i)]);
      shifted[static_cast<size_t>(i)] =
          xi[static_cast<size_t>(i)] - static_cast<double>(bstar) / static_cast<double>(q);
      bres.c[static_cast<size_t>(i)] = static_cast<int32_t>(mod_pos(bstar, q));
    }
    const double zfac = zeta_hat(q, shifted);
    if (zfac == 0.0) {
      terms.push_back(cplx{0.0, 0.0});
      continue;
    }
    const auto tab = phase_table(q);
    cplx arith{0.0, 0.0};
    for (int64_t a : reduced_residues(q)) {
      cplx fq = weyl_sum(f, q, a, bres);
      if (!variety) fq *= tab[static_cast<size_t>(mod_pos(-lambda * a, q))];
      arith += fq;
    }
    std::vector<double> sarg(xi.size());
    for (size_t i = 0; i < xi.size(); ++i) sarg[i] = dil * shifted[i];
    cplx sigma;
    if (analytic) {
      double norm2 = 0.0;
      for (double v : sarg) norm2 += v * v;
      sigma = cplx{sphere_ft_analytic(f.n, std::sqrt(norm2)) / 2.0, 0.0};
    } else {
      SurfaceMeasure sm;
      sm.form = f;
      sm.cutoff = cutoff;
      sm.level = variety ? 0.0 : 1.0;
      sm.epsilon = opts.epsilon;
      sm.seed = mix_seed(opts.seed, q);
      sigma = sm.ft(sarg, opts.mc_samples, Exec::kSerial).value;
    }
    terms.push_back(arith * zfac * sigma);
  }
  return terms;
}

}  // namespace

std::vector<cplx> main_term_contributions(const IntegralForm& f, const Cutoff& cutoff,
                                          int64_t lambda, const std::vector<double>& xi,
                                          const MainTermOptions& opts) {
  return main_term_terms(f, cutoff, lambda, xi, opts, false);
}

cplx multiplier_main_term(const IntegralForm& f, const Cutoff& cutoff, int64_t lambda,
                          const std::vector<double>& xi, const MainTermOptions& opts) {
  cplx total{0.0, 0.0};
  for (const cplx& t : main_term_terms(f, cutoff, lambda, xi, opts, false)) total += t;
  return total;
}

cplx variety_main_term(const IntegralForm& f, const Cutoff& cutoff, int64_t lambda,
                       const std::vector<double>& xi, const MainTermOptions& opts) {
  cplx total{0.0, 0.0};
  for (const cplx& t : main_term_terms(f, cutoff, lambda, xi, opts, true)) total += t;
  return total;
}

MultiplierScan multiplier_error_scan(const IntegralForm& f, const Cutoff& cutoff,
                                     const std::vector<int64_t>& lambdas, int xi_count,
                                     uint64_t seed, const MainTermOptions& opts, Exec exec) {
  require(!lambdas.empty() && xi_count > 0, "need lambdas and frequency samples");
  MultiplierScan scan;
  const BirchData birch = birch_constants(f);
  scan.eta = birch.eta.to_double();
  // Frequencies mix small jitters of low rationals b/q (where the arithmetic
  // factors peak) with uniform draws from the fundamental cell.
  RngStream rng(seed, "xi-mix", 0);
  for (int s = 0; s < xi_count; ++s) {
    std::vector<double> xi(static_cast<size_t>(f.n));
    if (s % 2 == 0) {
      const int64_t q = rng.uniform_int(1, 5);
      for (int i = 0; i < f.n; ++i) {
        const int64_t b = rng.uniform_int(-q, q);
        double v = static_cast<double>(b) / static_cast<double>(q) + rng.uniform(-0.02, 0.02);
        v -= std::round(v);  // wrap into [-1/2, 1/2]
        xi[static_cast<size_t>(i)] = v;
      }
    } else {
      for (int i = 0; i < f.n; ++i) xi[static_cast<size_t>(i)] = rng.uniform(-0.5, 0.5);
    }
    scan.xi_samples.push_back(std::move(xi));
  }
  std::vector<double> log_lambda, log_err;
  for (int64_t lambda : lambdas) {
    Kernel k = make_form_kernel(f, lambda, cutoff, Kernel::Normalization::kByPower);
    MainTermOptions local = opts;
    if (local.q_max == 0) local.q_max = default_q_max(lambda, f.d);
    std::vector<double> errs(scan.xi_samples.size(), 0.0);
    parallel_for(exec, static_cast<int64_t>(scan.xi_samples.size()), [&](int64_t i) {
      const auto& xi = scan.xi_samples[static_cast<size_t>(i)];
      const cplx exact = kernel_multiplier(k, xi, Exec::kSerial);
      const cplx approx = multiplier_main_term(f, cutoff, lambda, xi, local);
      errs[static_cast<size_t>(i)] = std::abs(exact - approx);
    });
    const double sup = *std::max_element(errs.begin(), errs.end());
    scan.rows.push_back({lambda, local.q_max, sup});
    log_lambda.push_back(std::log(static_cast<double>(lambda)));
    log_err.push_back(std::log(std::max(sup, 1e-300)));
  }
  scan.error_fit = fit_line(log_lambda, log_err);
  scan.strictly_decreasing = true;
  for (size_t i = 1; i < scan.rows.size(); ++i) {
    if (scan.rows[i].sup_error >= scan.rows[i - 1].sup_error) scan.strictly_decreasing = false;
  }
  return scan;
}

}  // namespace latvar
