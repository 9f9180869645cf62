#pragma once
// Shared plumbing: lattice points, sparse grid functions, deterministic RNG
// streams, the error taxonomy used for CLI exit codes, and small numeric
// helpers (rationals, line fits, checked integer arithmetic).

#include <array>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace latvar {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// e(t) = exp(2 pi i t)
inline cplx unit_phase(double t) {
  double a = 2.0 * kPi * t;
  return {std::cos(a), std::sin(a)};
}

// ---------------------------------------------------------------------------
// Error taxonomy.  The CLI maps these to exit codes: validation 1, budget 2,
// numerical tolerance 3.  Library code throws; tools catch.

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ToleranceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}
inline void require_budget(bool cond, const std::string& msg) {
  if (!cond) throw BudgetError(msg);
}
inline void require_tol(bool cond, const std::string& msg) {
  if (!cond) throw ToleranceError(msg);
}

// ---------------------------------------------------------------------------
// Lattice points.  Fixed-capacity coordinates keep Point hashable and cheap
// to copy; dimensions above kMaxDim are rejected up front.

inline constexpr int kMaxDim = 8;

struct Point {
  std::array<int32_t, kMaxDim> c{};
  int32_t n = 0;

  static Point zero(int dim) {
    require(dim >= 1 && dim <= kMaxDim, "point dimension out of range");
    Point p;
    p.n = dim;
    return p;
  }
  static Point of(std::initializer_list<int32_t> xs) {
    return from(std::vector<int32_t>(xs));
  }
  static Point from(const std::vector<int32_t>& xs) {
    Point p = zero(static_cast<int>(xs.size()));
    std::copy(xs.begin(), xs.end(), p.c.begin());
    return p;
  }
  int32_t operator[](int i) const { return c[i]; }
  int32_t& operator[](int i) { return c[i]; }

  bool operator==(const Point& o) const {
    if (n != o.n) return false;
    for (int i = 0; i < n; ++i)
      if (c[i] != o.c[i]) return false;
    return true;
  }
  bool operator!=(const Point& o) const { return !(*this == o); }
  // lexicographic; the canonical iteration order everywhere
  bool operator<(const Point& o) const {
    for (int i = 0; i < n; ++i)
      if (c[i] != o.c[i]) return c[i] < o.c[i];
    return false;
  }
  Point operator+(const Point& o) const {
    Point r = *this;
    for (int i = 0; i < n; ++i) r.c[i] += o.c[i];
    return r;
  }
  Point operator-(const Point& o) const {
    Point r = *this;
    for (int i = 0; i < n; ++i) r.c[i] -= o.c[i];
    return r;
  }
  int64_t linf() const {
    int64_t m = 0;
    for (int i = 0; i < n; ++i) m = std::max<int64_t>(m, std::abs(c[i]));
    return m;
  }
  int64_t norm2sq() const {
    int64_t s = 0;
    for (int i = 0; i < n; ++i) s += int64_t(c[i]) * c[i];
    return s;
  }
};

struct PointHash {
  size_t operator()(const Point& p) const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (int i = 0; i < p.n; ++i) {
      h ^= static_cast<uint32_t>(p.c[i]);
      h *= 0x100000001b3ull;
    }
    return static_cast<size_t>(h);
  }
};

// ---------------------------------------------------------------------------
// Sparse complex-valued function on Z^n.  Absent points read as zero.  The
// sorted support view is cached and rebuilt lazily after writes so that all
// reductions run in one canonical (lexicographic) order.

class GridFunction {
 public:
  explicit GridFunction(int dim) : dim_(dim) {
    require(dim >= 1 && dim <= kMaxDim, "grid function dimension out of range");
  }

  int dim() const { return dim_; }
  size_t support_size() const { return data_.size(); }

  cplx at(const Point& p) const {
    auto it = data_.find(p);
    return it == data_.end() ? cplx{0.0, 0.0} : it->second;
  }
  void set(const Point& p, cplx v) {
    check_dim(p);
    dirty_ = true;
    if (v == cplx{0.0, 0.0})
      data_.erase(p);
    else
      data_[p] = v;
  }
  void add(const Point& p, cplx v) {
    check_dim(p);
    dirty_ = true;
    auto [it, fresh] = data_.emplace(p, v);
    if (!fresh) it->second += v;
    if (it->second == cplx{0.0, 0.0}) data_.erase(it);
  }
  // removes entries that landed on exact zero after accumulation
  void prune_zeros() {
    dirty_ = true;
    for (auto it = data_.begin(); it != data_.end();)
      it = (it->second == cplx{0.0, 0.0}) ? data_.erase(it) : std::next(it);
  }

  const std::vector<Point>& sorted_support() const {
    if (dirty_) {
      support_.clear();
      support_.reserve(data_.size());
      for (const auto& kv : data_) support_.push_back(kv.first);
      std::sort(support_.begin(), support_.end());
      dirty_ = false;
    }
    return support_;
  }

  double l2norm() const {
    double s = 0.0;
    for (const Point& p : sorted_support()) s += std::norm(at(p));
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (const Point& p : sorted_support()) m = std::max(m, std::abs(at(p)));
    return m;
  }

 private:
  void check_dim(const Point& p) const {
    require(p.n == dim_, "point dimension does not match grid function");
  }
  int dim_;
  std::unordered_map<Point, cplx, PointHash> data_;
  mutable std::vector<Point> support_;
  mutable bool dirty_ = true;
};

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (const Point& p : a.sorted_support()) m = std::max(m, std::abs(a.at(p) - b.at(p)));
  for (const Point& p : b.sorted_support()) m = std::max(m, std::abs(a.at(p) - b.at(p)));
  return m;
}

// ---------------------------------------------------------------------------
// Deterministic RNG.  One global 64-bit seed; independent streams are derived
// from (seed, label, counter) so that parallel work can draw reproducible
// numbers regardless of thread scheduling.  SplitMix64 underneath.

uint64_t fnv1a64(std::string_view s);

class RngStream {
 public:
  RngStream(uint64_t seed, std::string_view label, uint64_t counter = 0);
  uint64_t next_u64();
  double uniform01();                    // [0,1)
  double uniform(double a, double b);    // [a,b)
  int64_t uniform_int(int64_t lo, int64_t hi);  // inclusive ends
  double gaussian();
  cplx gaussian_cplx();                  // independent N(0,1) parts

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Execution policy.  Hot kernels ship in two flavours: a serial reference and
// an OpenMP version.  Both must produce identical bytes; tests compare them
// and the bench tool times them.

enum class Exec { kSerial, kParallel };

int max_threads();
void set_threads(int t);

// Parallel loop with static scheduling.  The body must write only to its own
// index slot; callers combine results in index order afterwards.
void parallel_for(Exec exec, int64_t count, const std::function<void(int64_t)>& body);

// ---------------------------------------------------------------------------
// Exact rationals (int64 numerator/denominator, normalized, den > 0).

struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  Rational() = default;
  Rational(int64_t n, int64_t d);
  static Rational integer(int64_t n) { return Rational(n, 1); }

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const;
  double to_double() const { return double(num) / double(den); }
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Overflow-checked int64 arithmetic (enumeration and form evaluation must
// fail loudly instead of wrapping).

int64_t checked_add(int64_t a, int64_t b);
int64_t checked_mul(int64_t a, int64_t b);
int64_t checked_pow(int64_t base, int exp);

// ---------------------------------------------------------------------------
// Ordinary least squares for log-log decay fits.

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

int64_t gcd64(int64_t a, int64_t b);

}  // namespace latvar
