#include "latvar/decomp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>

#include "latvar/seminorms.hpp"

namespace latvar {

namespace {

// FFTW plan creation and destruction are not thread safe; execution is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

constexpr int64_t kPsiTransformLength = int64_t(1) << 22;  // implicit DFT length
constexpr int64_t kPsiHalf = kPsiTransformLength / 2;
constexpr uint64_t kPsiCacheMagic = 0x7073692d76312e30ull;

// Optional sample file under LATVAR_PSI_CACHE_DIR; a stale or truncated file
// falls back to recomputation and the certification below guards the values.
std::string psi_cache_path() {
  const char* dir = std::getenv("LATVAR_PSI_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return "";
  return std::string(dir) + "/psi_samples_v1.bin";
}

bool load_psi_samples(const std::string& path, std::vector<double>& samples) {
  std::ifstream is(path, std::ios::binary);
  if (!is.good()) return false;
  uint64_t magic = 0;
  int64_t count = 0;
  is.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!is.good() || magic != kPsiCacheMagic || count != kPsiHalf + 1) return false;
  samples.resize(static_cast<size_t>(count));
  is.read(reinterpret_cast<char*>(samples.data()),
          static_cast<std::streamsize>(sizeof(double) * samples.size()));
  return is.good();
}

void store_psi_samples(const std::string& path, const std::vector<double>& samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os.good()) return;  // caching is best effort
  const int64_t count = static_cast<int64_t>(samples.size());
  os.write(reinterpret_cast<const char*>(&kPsiCacheMagic), sizeof(kPsiCacheMagic));
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  os.write(reinterpret_cast<const char*>(samples.data()),
           static_cast<std::streamsize>(sizeof(double) * samples.size()));
}

}  // namespace

int64_t smooth_lcm(int j, int j_budget) {
  require(j >= 0, "smooth scale index must be nonnegative");
  require_budget(j <= j_budget, "smooth scale exceeds the lcm growth budget");
  int64_t acc = 1;
  const int64_t top = int64_t(1) << j;
  for (int64_t v = 2; v <= top; ++v) acc = checked_mul(acc / std::gcd(acc, v), v);
  return acc;
}

double psi_hat_plateau(double xi) {
  return smooth_step(3.0 * std::abs(xi) - 1.0);
}

double psi_hat_tensor(const std::vector<double>& xi) {
  double acc = 1.0;
  for (double v : xi) {
    acc *= psi_hat_plateau(v);
    if (acc == 0.0) return 0.0;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Plateau inverse transform, sampled once per process.
//
// The sum dxi * sum_m h(m dxi) e(m dxi t) equals the periodization of psi
// with period S = 1/dxi, so sampling h at step 1/16384 and running one large
// cosine transform yields psi on [0, 8192] with image pollution far below
// 1e-12.  The plateau is even, so a REDFT00 covers the whole sum.

const PsiCache& PsiCache::instance() {
  static const PsiCache cache;
  return cache;
}

PsiCache::PsiCache() {
  const std::string cache_path = psi_cache_path();
  if (cache_path.empty() || !load_psi_samples(cache_path, samples_)) {
    const double span = double(kPsiTransformLength) / kSamplesPerUnit;  // 16384
    const double dxi = 1.0 / span;

    std::vector<double> in(static_cast<size_t>(kPsiHalf) + 1, 0.0);
    std::vector<double> out(static_cast<size_t>(kPsiHalf) + 1, 0.0);
    for (int64_t m = 0; m <= kPsiHalf; ++m) {
      const double xi = double(m) * dxi;
      if (xi >= 2.0 / 3.0) break;
      in[static_cast<size_t>(m)] = psi_hat_plateau(xi);
    }
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      plan = fftw_plan_r2r_1d(static_cast<int>(kPsiHalf) + 1, in.data(), out.data(),
                              FFTW_REDFT00, FFTW_ESTIMATE);
    }
    require(plan != nullptr, "cosine transform plan creation failed");
    fftw_execute(plan);
    {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      fftw_destroy_plan(plan);
    }

    samples_.resize(out.size());
    for (size_t k = 0; k < out.size(); ++k) samples_[k] = out[k] * dxi;
    if (!cache_path.empty()) store_psi_samples(cache_path, samples_);
  }
  radius_ = double(max_index()) / kSamplesPerUnit;  // 8192

  // Certify the decay: three consecutive dyadic shells under 1e-9.
  for (int64_t lo = 1024; lo < 8192; lo *= 2) {
    const int64_t hi = std::min<int64_t>(2 * lo, max_index() / kSamplesPerUnit);
    double env = 0.0;
    for (int64_t k = lo * kSamplesPerUnit; k < hi * kSamplesPerUnit; ++k) {
      env = std::max(env, std::abs(samples_[static_cast<size_t>(k)]));
    }
    if (env >= 1e-9) {
      throw ToleranceError("plateau transform tail failed the envelope certification");
    }
  }
}

double PsiCache::sample(int64_t k) const {
  const int64_t a = std::llabs(k);  // psi is even
  if (a > max_index()) return 0.0;
  return samples_[static_cast<size_t>(a)];
}

double PsiCache::eval(double t) const {
  const double u = std::abs(t) * kSamplesPerUnit;
  if (u >= double(max_index())) return 0.0;
  const int64_t i = static_cast<int64_t>(u);
  const double fr = u - double(i);
  if (fr < 1e-9) return sample(i);
  if (fr > 1.0 - 1e-9) return sample(i + 1);
  // Catmull-Rom through the four surrounding samples; the even extension
  // covers i = 0 and sample() zero-fills past the cached range.
  const double pm1 = sample(i - 1);
  const double p0 = sample(i);
  const double p1 = sample(i + 1);
  const double p2 = sample(i + 2);
  return 0.5 * (2.0 * p0 + (-pm1 + p1) * fr + (2.0 * pm1 - 5.0 * p0 + 4.0 * p1 - p2) * fr * fr +
                (-pm1 + 3.0 * p0 - 3.0 * p1 + p2) * fr * fr * fr);
}

double psi_eval(double t) { return PsiCache::instance().eval(t); }

double psi_eval(const std::vector<double>& x) {
  double acc = 1.0;
  for (double v : x) acc *= psi_eval(v);
  return acc;
}

GridFunction psi_sJ(int64_t s, int64_t J, int n, int64_t max_points) {
  require(s >= 1 && J > s, "lattice sampling needs J > s >= 1");
  require(n >= 1 && n <= kMaxDim, "dimension out of range");
  const PsiCache& cache = PsiCache::instance();
  const double scale = double(s) / double(J);
  const int64_t full = static_cast<int64_t>(cache.certified_radius() * double(J)) / s;

  // widest per-axis count whose n-fold product fits the budget
  int64_t per_budget = static_cast<int64_t>(
      std::floor(std::pow(std::max(0.0, double(max_points)), 1.0 / double(n))));
  while (per_budget > 0 && std::pow(double(per_budget), double(n)) > double(max_points)) {
    --per_budget;
  }
  const int64_t half = std::min(full, (per_budget - 1) / 2);
  require_budget(half >= 0, "sampled kernel exceeds the point budget");

  double dropped = 0.0;
  for (int64_t k = half + 1; k <= full; ++k) {
    dropped += 2.0 * scale * std::abs(cache.eval(double(k * s) / double(J)));
    if (double(n) * dropped > kPsiSampleTailTol) break;
  }
  require_budget(double(n) * dropped <= kPsiSampleTailTol,
                 "sampled kernel exceeds the point budget");
  const int64_t per_axis = 2 * half + 1;
  std::vector<double> axis(static_cast<size_t>(per_axis));
  for (int64_t k = -half; k <= half; ++k) {
    axis[static_cast<size_t>(k + half)] = scale * cache.eval(double(k * s) / double(J));
  }

  GridFunction g(n);
  std::vector<int64_t> idx(static_cast<size_t>(n), 0);
  while (true) {
    double v = 1.0;
    Point p = Point::zero(n);
    for (int i = 0; i < n; ++i) {
      v *= axis[static_cast<size_t>(idx[static_cast<size_t>(i)])];
      p.c[static_cast<size_t>(i)] =
          static_cast<int32_t>((idx[static_cast<size_t>(i)] - half) * s);
    }
    if (v != 0.0) g.set(p, cplx{v, 0.0});
    int i = n - 1;
    while (i >= 0) {
      if (++idx[static_cast<size_t>(i)] < per_axis) break;
      idx[static_cast<size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return g;
}

double psi_mass_1d(int64_t J, int64_t max_terms) {
  require(J >= 1, "scale must be positive");
  const PsiCache& cache = PsiCache::instance();
  const int64_t half = static_cast<int64_t>(cache.certified_radius() * double(J));
  require_budget(2 * half + 1 <= max_terms, "mass summation exceeds the term budget");
  double acc = cache.eval(0.0);
  for (int64_t x = 1; x <= half; ++x) acc += 2.0 * cache.eval(double(x) / double(J));
  return acc / double(J);
}

double psi_hat_periodized_1d(int64_t s, int64_t J, double xi) {
  require(s >= 1 && J > s, "periodized transform needs J > s >= 1");
  const double sx = double(s) * xi;
  const int64_t m0 = std::llround(-sx);
  const double ratio = double(J) / double(s);
  double acc = 0.0;
  for (int64_t m = m0 - 2; m <= m0 + 2; ++m) {
    acc += psi_hat_plateau(ratio * (double(m) + sx));
  }
  return acc;
}

cplx psi_hat_torus(int64_t s, int64_t J, const std::vector<double>& xi) {
  double acc = 1.0;
  for (double v : xi) acc *= psi_hat_periodized_1d(s, J, v);
  return cplx{acc, 0.0};
}

int band_count(int l) {
  require(l >= 4, "band range defined for l >= 4");
  int fl = 0;
  while ((1 << (fl + 1)) <= l) ++fl;
  return fl - 2;
}

BandPiece band_piece(int l, int j) {
  require(l >= 1 && j >= 0, "band piece indices out of range");
  require(l - j >= 1 && l - j <= 40, "band scale out of range");
  BandPiece b;
  b.l = l;
  b.j = j;
  b.s = smooth_lcm(j);
  b.J = int64_t(1) << (l - j);
  require(b.J > b.s, "band piece needs 2^(l-j) > s_j");
  return b;
}

double band_hat_1d(const BandPiece& b, double xi) {
  return psi_hat_periodized_1d(b.s, b.J, xi);
}

bool band_delta_defined(int l, int j) {
  if (j < 0 || j > 3 || l - j < 2) return false;
  const int64_t sj = smooth_lcm(j);
  const int64_t sj1 = smooth_lcm(j + 1);
  return (int64_t(1) << (l - j)) > sj && (int64_t(1) << (l - j - 1)) > sj1;
}

double band_delta_hat_1d(int l, int j, double xi) {
  require(band_delta_defined(l, j), "band difference undefined at this (l, j)");
  return psi_hat_periodized_1d(smooth_lcm(j + 1), int64_t(1) << (l - j - 1), xi) -
         psi_hat_periodized_1d(smooth_lcm(j), int64_t(1) << (l - j), xi);
}

SquareFunctionAudit square_function_audit(int j, int l_max, const std::vector<double>& xi_grid,
                                          Exec exec) {
  require(j >= 0 && j <= 3, "audit capped at j <= 3");
  require(l_max >= (1 << j) + 4, "need l_max >= 2^j + 4");
  require(!xi_grid.empty(), "empty frequency grid");
  SquareFunctionAudit audit;
  audit.j = j;
  audit.l_max = l_max;
  int l_first = std::max(1, 1 << j);
  while (l_first <= l_max && !band_delta_defined(l_first, j)) ++l_first;
  require(l_first <= l_max, "no defined band difference below l_max");
  audit.l_first = l_first;
  audit.sums.resize(xi_grid.size(), 0.0);
  parallel_for(exec, static_cast<int64_t>(xi_grid.size()), [&](int64_t i) {
    double acc = 0.0;
    for (int l = l_first; l <= l_max; ++l) {
      const double d = band_delta_hat_1d(l, j, xi_grid[static_cast<size_t>(i)]);
      acc += d * d;
    }
    audit.sums[static_cast<size_t>(i)] = acc;
  });
  audit.max_sum = *std::max_element(audit.sums.begin(), audit.sums.end());
  return audit;
}

// ---------------------------------------------------------------------------
// Finite torus model.

TorusFunction TorusFunction::zeros(int n, int64_t N) {
  require(n >= 1 && n <= 3, "torus model limited to n <= 3");
  require(N >= 2 && (N & (N - 1)) == 0, "torus size must be a power of two");
  int64_t total = 1;
  for (int i = 0; i < n; ++i) total = checked_mul(total, N);
  require_budget(total <= (int64_t(1) << 22), "torus grid exceeds the memory budget");
  TorusFunction f;
  f.n = n;
  f.N = N;
  f.values.assign(static_cast<size_t>(total), cplx{0.0, 0.0});
  return f;
}

double TorusFunction::l2norm() const {
  double s = 0.0;
  for (const cplx& v : values) s += std::norm(v);
  return std::sqrt(s);
}

double torus_max_abs_diff(const TorusFunction& a, const TorusFunction& b) {
  require(a.n == b.n && a.N == b.N, "torus shapes differ");
  double m = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

namespace {

TorusFunction torus_transform(const TorusFunction& f, int sign) {
  TorusFunction out = f;
  std::vector<int> dims(static_cast<size_t>(f.n), static_cast<int>(f.N));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft(f.n, dims.data(),
                         reinterpret_cast<fftw_complex*>(const_cast<cplx*>(f.values.data())),
                         reinterpret_cast<fftw_complex*>(out.values.data()), sign, FFTW_ESTIMATE);
  }
  require(plan != nullptr, "torus transform plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

TorusFunction torus_fft(const TorusFunction& f) { return torus_transform(f, FFTW_FORWARD); }

TorusFunction torus_ifft(const TorusFunction& F) {
  TorusFunction out = torus_transform(F, FFTW_BACKWARD);
  const double scale = 1.0 / double(out.count());
  for (cplx& v : out.values) v *= scale;
  return out;
}

TorusFunction apply_frequency_multiplier(const TorusFunction& f,
                                         const std::function<cplx(const std::vector<double>&)>& m) {
  TorusFunction F = torus_fft(f);
  std::vector<double> xi(static_cast<size_t>(f.n));
  for (int64_t flat = 0; flat < F.count(); ++flat) {
    int64_t rest = flat;
    for (int i = f.n - 1; i >= 0; --i) {
      xi[static_cast<size_t>(i)] = double(rest % f.N) / double(f.N);
      rest /= f.N;
    }
    F.values[static_cast<size_t>(flat)] *= m(xi);
  }
  return torus_ifft(F);
}

SpectralSplit spectral_split(const TorusFunction& f, int l) {
  require(l >= 8, "split needs l >= 8 so at least one band difference exists");
  const int Jl = band_count(l);
  std::vector<BandPiece> pieces;
  for (int j = 0; j <= Jl; ++j) pieces.push_back(band_piece(l, j));

  // per-axis tables of the 1-D transforms at the grid frequencies
  std::vector<std::vector<double>> table(static_cast<size_t>(Jl) + 1,
                                         std::vector<double>(static_cast<size_t>(f.N)));
  for (int j = 0; j <= Jl; ++j) {
    for (int64_t k = 0; k < f.N; ++k) {
      table[static_cast<size_t>(j)][static_cast<size_t>(k)] =
          band_hat_1d(pieces[static_cast<size_t>(j)], double(k) / double(f.N));
    }
  }

  TorusFunction F = torus_fft(f);
  TorusFunction Flow = F, Fmid = F, Ftop = F;
  std::vector<int64_t> kidx(static_cast<size_t>(f.n));
  std::vector<double> hat(static_cast<size_t>(Jl) + 1);
  for (int64_t flat = 0; flat < F.count(); ++flat) {
    int64_t rest = flat;
    for (int i = f.n - 1; i >= 0; --i) {
      kidx[static_cast<size_t>(i)] = rest % f.N;
      rest /= f.N;
    }
    for (int j = 0; j <= Jl; ++j) {
      double prod = 1.0;
      for (int i = 0; i < f.n; ++i) {
        prod *= table[static_cast<size_t>(j)][static_cast<size_t>(kidx[static_cast<size_t>(i)])];
      }
      hat[static_cast<size_t>(j)] = prod;
    }
    double delta_sum = 0.0;
    for (int j = 0; j < Jl; ++j) {
      delta_sum += hat[static_cast<size_t>(j) + 1] - hat[static_cast<size_t>(j)];
    }
    Flow.values[static_cast<size_t>(flat)] *= hat[0];
    Fmid.values[static_cast<size_t>(flat)] *= delta_sum;
    Ftop.values[static_cast<size_t>(flat)] *= hat[static_cast<size_t>(Jl)];
  }

  SpectralSplit split;
  split.l = l;
  split.bands = Jl;
  split.low = torus_ifft(Flow);
  split.mid = torus_ifft(Fmid);
  TorusFunction top = torus_ifft(Ftop);
  split.high = f;
  for (size_t i = 0; i < split.high.values.size(); ++i) split.high.values[i] -= top.values[i];
  return split;
}

bool major_arc_member(const std::vector<double>& xi, int j, int l) {
  require((1 << j) <= l, "arc parameters need 2^j <= l");
  const int64_t s = smooth_lcm(j);
  const double width = std::ldexp(1.0, j - l);
  for (double v : xi) {
    const double scaled = v * double(s);
    const double dist = std::abs(scaled - std::round(scaled)) / double(s);
    if (dist > width) return false;
  }
  return true;
}

TorusFunction spectral_project_minor(const TorusFunction& f, int j, int l) {
  require((1 << j) <= l, "arc parameters need 2^j <= l");
  require(l <= 40, "arc width exponent out of range");
  const int64_t s = smooth_lcm(j);
  // coordinate k/N is within 2^{j-l} of a multiple of 1/s iff the symmetric
  // residue r of k*s mod N satisfies |r| 2^l <= 2^j N s; all quantities are
  // integers, so the membership test is exact
  std::vector<bool> in_arc(static_cast<size_t>(f.N));
  const int64_t rhs = checked_mul(int64_t(1) << j, checked_mul(f.N, s));
  for (int64_t k = 0; k < f.N; ++k) {
    int64_t r = (k * s) % f.N;
    if (r > f.N / 2) r -= f.N;
    in_arc[static_cast<size_t>(k)] = checked_mul(std::llabs(r), int64_t(1) << l) <= rhs;
  }
  TorusFunction F = torus_fft(f);
  for (int64_t flat = 0; flat < F.count(); ++flat) {
    int64_t rest = flat;
    bool member = true;
    for (int i = 0; i < f.n; ++i) {
      if (!in_arc[static_cast<size_t>(rest % f.N)]) member = false;
      rest /= f.N;
    }
    if (member) F.values[static_cast<size_t>(flat)] = cplx{0.0, 0.0};
  }
  return torus_ifft(F);
}

// ---------------------------------------------------------------------------
// Dyadic cube averages.

namespace {

Point cube_key(const Point& p, int l) {
  Point k = Point::zero(p.n);
  for (int i = 0; i < p.n; ++i) {
    k.c[static_cast<size_t>(i)] =
        static_cast<int32_t>(static_cast<int64_t>(p.c[static_cast<size_t>(i)]) >> l);
  }
  return k;
}

}  // namespace

GridFunction dyadic_average(const GridFunction& f, int l, int64_t max_points) {
  require(l >= 0 && l * f.dim() <= 60, "cube level out of range");
  if (l == 0) return f;  // level-0 cubes are single points

  // cube sums in (key, point) order for a thread-count-independent result
  std::vector<std::pair<Point, Point>> tagged;
  tagged.reserve(f.support_size());
  for (const Point& p : f.sorted_support()) tagged.emplace_back(cube_key(p, l), p);
  std::sort(tagged.begin(), tagged.end());

  std::vector<std::pair<Point, cplx>> cubes;
  for (size_t i = 0; i < tagged.size();) {
    size_t jx = i;
    cplx sum{0.0, 0.0};
    while (jx < tagged.size() && tagged[jx].first == tagged[i].first) {
      sum += f.at(tagged[jx].second);
      ++jx;
    }
    cubes.emplace_back(tagged[i].first, sum);
    i = jx;
  }

  const double cells = std::ldexp(1.0, l * f.dim());
  require_budget(double(cubes.size()) * cells <= double(max_points),
                 "cube materialization exceeds the point budget");

  GridFunction out(f.dim());
  const int64_t side = int64_t(1) << l;
  std::vector<int64_t> off(static_cast<size_t>(f.dim()), 0);
  for (const auto& [key, sum] : cubes) {
    const cplx mean = sum / cells;  // division by a power of two is exact
    if (mean == cplx{0.0, 0.0}) continue;
    std::fill(off.begin(), off.end(), 0);
    while (true) {
      Point p = Point::zero(f.dim());
      for (int i = 0; i < f.dim(); ++i) {
        p.c[static_cast<size_t>(i)] = static_cast<int32_t>(
            (static_cast<int64_t>(key.c[static_cast<size_t>(i)]) << l) +
            off[static_cast<size_t>(i)]);
      }
      out.set(p, mean);
      int i = f.dim() - 1;
      while (i >= 0) {
        if (++off[static_cast<size_t>(i)] < side) break;
        off[static_cast<size_t>(i)] = 0;
        --i;
      }
      if (i < 0) break;
    }
  }
  return out;
}

GridFunction dyadic_difference(const GridFunction& f, int m, int64_t max_points) {
  require(m >= 1, "difference level must be >= 1");
  GridFunction em = dyadic_average(f, m, max_points);
  GridFunction em1 = dyadic_average(f, m - 1, max_points);
  GridFunction out(f.dim());
  for (const Point& p : em.sorted_support()) out.set(p, em.at(p));
  for (const Point& p : em1.sorted_support()) out.set(p, out.at(p) - em1.at(p));
  return out;
}

// ---------------------------------------------------------------------------
// Martingale jump audit over the cube tree.  The sequence l -> E_l f(x) takes
// one value profile per descending cube chain, so walking the tree once and
// weighting each profile by the number of lattice points it covers evaluates
// the norm without materializing any average.

namespace {

void martingale_walk(int level, int n, const std::vector<Point>& pts,
                     const std::vector<cplx>& vals, std::vector<cplx>& stack,
                     const std::function<void(const std::vector<cplx>&, double)>& emit) {
  cplx sum{0.0, 0.0};
  for (const cplx& v : vals) sum += v;
  const double cells = std::ldexp(1.0, level * n);
  stack.push_back(sum / cells);
  if (level == 0) {
    emit(stack, 1.0);
  } else {
    std::map<Point, std::pair<std::vector<Point>, std::vector<cplx>>> children;
    for (size_t i = 0; i < pts.size(); ++i) {
      auto& slot = children[cube_key(pts[i], level - 1)];
      slot.first.push_back(pts[i]);
      slot.second.push_back(vals[i]);
    }
    for (const auto& kv : children) {
      martingale_walk(level - 1, n, kv.second.first, kv.second.second, stack, emit);
    }
    const double empties = std::ldexp(1.0, n) - double(children.size());
    if (empties > 0.0) {
      // one shared profile for every point of the uncovered child cubes
      for (int t = 0; t < level; ++t) stack.push_back(cplx{0.0, 0.0});
      emit(stack, empties * std::ldexp(1.0, (level - 1) * n));
      for (int t = 0; t < level; ++t) stack.pop_back();
    }
  }
  stack.pop_back();
}

}  // namespace

MartingaleJumpAudit martingale_jump_audit(const std::vector<GridFunction>& ensemble, int levels,
                                          const std::vector<double>& lambdas, double p) {
  require(p > 1.0 && !std::isinf(p), "exponent must satisfy 1 < p < infinity");
  require(levels >= 1 && !ensemble.empty() && !lambdas.empty(),
          "need levels, ensemble members, and thresholds");
  MartingaleJumpAudit audit;
  audit.p = p;
  audit.levels = levels;
  audit.lambdas = lambdas;
  audit.max_ratio.assign(lambdas.size(), 0.0);

  for (const GridFunction& f : ensemble) {
    require(levels * f.dim() <= 60, "cube level out of range");
    const double fnorm = lp_norm(f, p);
    if (fnorm == 0.0) continue;

    // aggregate sum of multiplicity * count^{p/2} per threshold
    std::vector<double> agg(lambdas.size(), 0.0);
    SampleSequence seq;
    for (int t = 0; t <= levels; ++t) seq.index.push_back(double(t));
    seq.value.resize(static_cast<size_t>(levels) + 1);
    auto emit = [&](const std::vector<cplx>& profile, double mult) {
      // profile runs from the top level down; the sequence ascends
      for (size_t t = 0; t < profile.size(); ++t) {
        seq.value[t] = profile[profile.size() - 1 - t];
      }
      for (size_t li = 0; li < lambdas.size(); ++li) {
        const int64_t c = jump_count(seq, lambdas[li]).count;
        if (c > 0) agg[li] += mult * std::pow(double(c), p / 2.0);
      }
    };

    std::map<Point, std::pair<std::vector<Point>, std::vector<cplx>>> tops;
    for (const Point& pt : f.sorted_support()) {
      auto& slot = tops[cube_key(pt, levels)];
      slot.first.push_back(pt);
      slot.second.push_back(f.at(pt));
    }
    std::vector<cplx> stack;
    for (const auto& kv : tops) {
      martingale_walk(levels, f.dim(), kv.second.first, kv.second.second, stack, emit);
    }

    for (size_t li = 0; li < lambdas.size(); ++li) {
      const double ratio = lambdas[li] * std::pow(agg[li], 1.0 / p) / fnorm;
      audit.max_ratio[li] = std::max(audit.max_ratio[li], ratio);
    }
  }
  audit.overall = *std::max_element(audit.max_ratio.begin(), audit.max_ratio.end());
  return audit;
}

double smoothed_kernel_mass(const IntegralForm& f, const Cutoff& cutoff, int l,
                            const EnumOptions& opts) {
  require(l >= 1 && l <= 20, "kernel level out of range");
  const int64_t lambda = int64_t(1) << l;
  Kernel k = make_form_kernel(f, lambda, cutoff, Kernel::Normalization::kByCount, opts);
  // The total mass of a convolution of finitely supported kernels is the
  // product of the factor masses, and the smoothing factor is a tensor
  // product, so the n-dimensional sum collapses to 1-D sums.
  const double m1 = psi_mass_1d(lambda);
  double mass = k.mass();
  for (int i = 0; i < f.n; ++i) mass *= m1;
  return mass;
}

// ---------------------------------------------------------------------------
// Wave-packet audit.

namespace {

// fraction of a Gaussian frequency profile centered at xi lying within the
// 1-D arc set {u : dist(u, (1/s)Z) <= delta}
double arc_mass_1d(double xi, double sigma, int64_t s, double delta) {
  double acc = 0.0;
  const double inv = 1.0 / (sigma * std::sqrt(2.0));
  for (int64_t t = static_cast<int64_t>(std::floor((xi - 1.0) * double(s)));
       t <= static_cast<int64_t>(std::ceil((xi + 1.0) * double(s))); ++t) {
    const double c = double(t) / double(s);
    acc += 0.5 * (std::erf((c + delta - xi) * inv) - std::erf((c - delta - xi) * inv));
  }
  return std::min(acc, 1.0);
}

}  // namespace

WavePacketAudit single_average_bound_audit(const IntegralForm& f, const Cutoff& cutoff, int j,
                                           int l, const std::vector<int64_t>& lambdas,
                                           int packets, int samples_per_packet, uint64_t seed,
                                           Exec exec) {
  require((1 << j) <= l, "audit parameters need 2^j <= l");
  require(j <= 3 && l <= 24, "audit capped at j <= 3 and l <= 24");
  require(!lambdas.empty() && packets >= 1 && samples_per_packet >= 1,
          "need lambdas, packets, and samples");
  for (int64_t lam : lambdas) {
    const double root = std::pow(double(lam), 1.0 / f.d);
    require(root >= std::ldexp(1.0, l) * (1.0 - 1e-9) &&
                root <= std::ldexp(1.0, l + 1) * (1.0 + 1e-9),
            "lambda^(1/d) must lie in [2^l, 2^(l+1)]");
  }

  const BirchData birch = birch_constants(f);
  WavePacketAudit audit;
  audit.j = j;
  audit.l = l;
  audit.reference = std::max(std::pow(2.0, -double(j) * (birch.c.to_double() - 2.0)),
                             std::pow(2.0, -double(l * f.d) * birch.eta.to_double()));

  const int64_t s = smooth_lcm(j);
  const double delta = std::ldexp(1.0, j - l);
  // real-space Gaussian wide enough that the frequency profile keeps about
  // four standard deviations away from arcs at distance 2 delta
  const double width = 4.0 * std::ldexp(1.0, l - j) / (2.0 * kPi);
  const double sigma_u = 1.0 / (2.0 * std::sqrt(2.0) * kPi * width);

  // centers rejection-sampled outside the doubled arcs
  std::vector<std::vector<double>> centers;
  for (int k = 0; k < packets; ++k) {
    RngStream rng(seed, "wave-packet-center", static_cast<uint64_t>(k));
    std::vector<double> xi(static_cast<size_t>(f.n));
    bool ok = false;
    for (int tries = 0; tries < 10000 && !ok; ++tries) {
      bool inside = true;
      for (double& v : xi) v = rng.uniform(-0.5, 0.5);
      for (double v : xi) {
        const double scaled = v * double(s);
        if (std::abs(scaled - std::round(scaled)) / double(s) > 2.0 * delta) inside = false;
      }
      ok = !inside;
    }
    require(ok, "packet center sampling failed to leave the arcs");
    centers.push_back(xi);
  }

  for (const auto& c : centers) {
    double leak = 1.0;
    for (double v : c) leak *= arc_mass_1d(v, sigma_u, s, delta);
    audit.leakage = std::max(audit.leakage, leak);
  }
  audit.valid = audit.leakage < 0.01;

  // frequency samples drawn once, shared across lambdas
  std::vector<std::vector<double>> evals;
  for (int k = 0; k < packets; ++k) {
    RngStream rng(seed, "wave-packet-offsets", static_cast<uint64_t>(k));
    for (int t = 0; t < samples_per_packet; ++t) {
      std::vector<double> xi = centers[static_cast<size_t>(k)];
      for (double& v : xi) v += sigma_u * rng.gaussian();
      evals.push_back(std::move(xi));
    }
  }
  std::vector<std::vector<double>> control_evals;
  {
    RngStream rng(seed, "wave-packet-control", 0);
    for (int t = 0; t < samples_per_packet; ++t) {
      std::vector<double> xi(static_cast<size_t>(f.n), 0.0);
      for (double& v : xi) v += sigma_u * rng.gaussian();
      control_evals.push_back(std::move(xi));
    }
  }

  for (size_t li = 0; li < lambdas.size(); ++li) {
    Kernel k = make_form_kernel(f, lambdas[li], cutoff, Kernel::Normalization::kByCount);
    require_budget(double(k.points.size()) * double(evals.size() + control_evals.size()) <= 4e9,
                   "multiplier evaluation exceeds the operation budget");
    std::vector<double> sq(evals.size());
    parallel_for(exec, static_cast<int64_t>(evals.size()), [&](int64_t i) {
      sq[static_cast<size_t>(i)] =
          std::norm(kernel_multiplier(k, evals[static_cast<size_t>(i)], Exec::kSerial));
    });
    double mean = 0.0;
    for (double v : sq) mean += v;
    mean /= double(sq.size());
    audit.rows.push_back({lambdas[li], std::sqrt(mean)});
    if (li == 0) {
      double cmean = 0.0;
      for (const auto& xi : control_evals) cmean += std::norm(kernel_multiplier(k, xi));
      audit.control = std::sqrt(cmean / double(control_evals.size()));
    }
  }
  for (const auto& row : audit.rows) audit.observed = std::max(audit.observed, row.ratio);
  return audit;
}

}  // namespace latvar
