#include "latvar/core.hpp"

#include <omp.h>

namespace latvar {

// ---------------------------------------------------------------------------
// RNG

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {
inline uint64_t splitmix_step(uint64_t& x) {
  uint64_t z = (x += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

RngStream::RngStream(uint64_t seed, std::string_view label, uint64_t counter) {
  // Mix the three identifiers through two rounds so that nearby counters and
  // labels land in unrelated states.
  uint64_t x = seed;
  uint64_t a = splitmix_step(x);
  x = a ^ fnv1a64(label);
  a = splitmix_step(x);
  x = a ^ (counter * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull);
  splitmix_step(x);
  state_ = x;
}

uint64_t RngStream::next_u64() { return splitmix_step(state_); }

double RngStream::uniform01() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) { return a + (b - a) * uniform01(); }

int64_t RngStream::uniform_int(int64_t lo, int64_t hi) {
  require(lo <= hi, "uniform_int: empty range");
  uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  // rejection sampling keeps the draw exactly uniform
  uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return lo + static_cast<int64_t>(v % span);
}

double RngStream::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u clamped away from zero so the log stays finite
  double u = uniform01();
  if (u < 1e-300) u = 1e-300;
  double v = uniform01();
  double r = std::sqrt(-2.0 * std::log(u));
  spare_ = r * std::sin(2.0 * kPi * v);
  have_spare_ = true;
  return r * std::cos(2.0 * kPi * v);
}

cplx RngStream::gaussian_cplx() {
  double re = gaussian();
  double im = gaussian();
  return {re, im};
}

// ---------------------------------------------------------------------------
// Execution

int max_threads() { return omp_get_max_threads(); }
void set_threads(int t) {
  require(t >= 1, "thread count must be >= 1");
  omp_set_num_threads(t);
}

void parallel_for(Exec exec, int64_t count, const std::function<void(int64_t)>& body) {
  if (exec == Exec::kSerial) {
    for (int64_t i = 0; i < count; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < count; ++i) body(i);
}

// ---------------------------------------------------------------------------
// Rational

int64_t gcd64(int64_t a, int64_t b) {
  a = std::abs(a);
  b = std::abs(b);
  while (b) {
    int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational::Rational(int64_t n, int64_t d) {
  require(d != 0, "rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  int64_t g = gcd64(n, d);
  if (g == 0) g = 1;
  num = n / g;
  den = d / g;
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(checked_add(checked_mul(num, o.den), checked_mul(o.num, den)),
                  checked_mul(den, o.den));
}
Rational Rational::operator-(const Rational& o) const {
  return *this + Rational(-o.num, o.den);
}
Rational Rational::operator*(const Rational& o) const {
  return Rational(checked_mul(num, o.num), checked_mul(den, o.den));
}
Rational Rational::operator/(const Rational& o) const {
  require(o.num != 0, "rational division by zero");
  return Rational(checked_mul(num, o.den), checked_mul(den, o.num));
}
bool Rational::operator<(const Rational& o) const {
  return checked_mul(num, o.den) < checked_mul(o.num, den);
}
std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

// ---------------------------------------------------------------------------
// Checked arithmetic

int64_t checked_add(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw BudgetError("int64 addition overflow");
  return r;
}
int64_t checked_mul(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw BudgetError("int64 multiplication overflow");
  return r;
}
int64_t checked_pow(int64_t base, int exp) {
  require(exp >= 0, "checked_pow: negative exponent");
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

// ---------------------------------------------------------------------------
// Least squares

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() >= 2, "fit_line needs >= 2 samples");
  double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double det = n * sxx - sx * sx;
  require(std::abs(det) > 1e-12 * (1.0 + n * sxx), "fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  for (size_t i = 0; i < xs.size(); ++i)
    f.max_abs_residual =
        std::max(f.max_abs_residual, std::abs(ys[i] - f.slope * xs[i] - f.intercept));
  return f;
}

}  // namespace latvar
