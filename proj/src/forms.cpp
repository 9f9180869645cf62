#include "latvar/forms.hpp"

#include <sstream>

namespace latvar {

IntegralForm IntegralForm::diagonal_form(std::vector<int64_t> coeffs, int degree) {
  IntegralForm f;
  f.n = static_cast<int>(coeffs.size());
  require(f.n >= 1 && f.n <= kMaxDim, "form dimension out of range");
  require(degree >= 1, "form degree must be >= 1");
  f.d = degree;
  f.diagonal = true;
  f.diag = std::move(coeffs);
  for (int i = 0; i < f.n; ++i) {
    if (f.diag[i] == 0) continue;
    Term t;
    t.exp.assign(f.n, 0);
    t.exp[i] = degree;
    t.coeff = f.diag[i];
    f.terms.push_back(std::move(t));
  }
  return f;
}

IntegralForm IntegralForm::from_terms(int n, int d, std::vector<Term> terms) {
  IntegralForm f;
  require(n >= 1 && n <= kMaxDim, "form dimension out of range");
  require(d >= 1, "form degree must be >= 1");
  f.n = n;
  f.d = d;
  f.terms = std::move(terms);
  for (const Term& t : f.terms) {
    require(static_cast<int>(t.exp.size()) == n, "term exponent size mismatch");
    int total = 0;
    for (int e : t.exp) {
      require(e >= 0, "negative exponent");
      total += e;
    }
    require(total == d, "form is not homogeneous of the declared degree");
  }
  // detect diagonal shape
  f.diagonal = true;
  f.diag.assign(n, 0);
  for (const Term& t : f.terms) {
    int hot = -1;
    for (int i = 0; i < n; ++i)
      if (t.exp[i] != 0) {
        if (hot != -1 || t.exp[i] != d) {
          f.diagonal = false;
          break;
        }
        hot = i;
      }
    if (!f.diagonal) break;
    require(hot >= 0 && f.diag[hot] == 0, "repeated diagonal monomial");
    f.diag[hot] = t.coeff;
  }
  if (!f.diagonal) f.diag.clear();
  return f;
}

bool IntegralForm::positive_definite_diagonal() const {
  if (!diagonal || d % 2 != 0) return false;
  for (int64_t c : diag)
    if (c <= 0) return false;
  return true;
}

std::string IntegralForm::describe() const {
  std::ostringstream os;
  if (diagonal) {
    os << "diag[";
    for (int i = 0; i < n; ++i) os << (i ? "," : "") << diag[i];
    os << "]^" << d;
  } else {
    os << terms.size() << " terms, n=" << n << ", d=" << d;
  }
  return os.str();
}

int64_t eval_form(const IntegralForm& f, const Point& x) {
  require(x.n == f.n, "point dimension does not match form");
  int64_t acc = 0;
  if (f.diagonal) {
    for (int i = 0; i < f.n; ++i) {
      if (f.diag[i] == 0) continue;
      acc = checked_add(acc, checked_mul(f.diag[i], checked_pow(x[i], f.d)));
    }
    return acc;
  }
  for (const auto& t : f.terms) {
    int64_t m = t.coeff;
    for (int i = 0; i < f.n; ++i)
      if (t.exp[i]) m = checked_mul(m, checked_pow(x[i], t.exp[i]));
    acc = checked_add(acc, m);
  }
  return acc;
}

double eval_form_real(const IntegralForm& f, const std::vector<double>& x) {
  require(static_cast<int>(x.size()) == f.n, "point dimension does not match form");
  double acc = 0.0;
  for (const auto& t : f.terms) {
    double m = double(t.coeff);
    for (int i = 0; i < f.n; ++i)
      for (int k = 0; k < t.exp[i]; ++k) m *= x[i];
    acc += m;
  }
  return acc;
}

std::vector<double> grad_form_real(const IntegralForm& f, const std::vector<double>& x) {
  require(static_cast<int>(x.size()) == f.n, "point dimension does not match form");
  std::vector<double> g(f.n, 0.0);
  for (const auto& t : f.terms) {
    for (int j = 0; j < f.n; ++j) {
      if (t.exp[j] == 0) continue;
      double m = double(t.coeff) * t.exp[j];
      for (int i = 0; i < f.n; ++i) {
        int e = t.exp[i] - (i == j ? 1 : 0);
        for (int k = 0; k < e; ++k) m *= x[i];
      }
      g[j] += m;
    }
  }
  return g;
}

int birch_rank(const IntegralForm& f) {
  if (f.rank_override) {
    require(*f.rank_override >= 0, "negative rank override");
    return *f.rank_override;
  }
  require(f.diagonal,
          "rank is derived for diagonal forms only; supply an explicit override otherwise");
  int r = 0;
  for (int64_t c : f.diag)
    if (c != 0) ++r;
  return r;
}

BirchData birch_constants(const IntegralForm& f) {
  require(f.d >= 2, "constants need degree >= 2");
  BirchData b;
  b.rank = birch_rank(f);
  int64_t denom = checked_mul(f.d - 1, int64_t(1) << (f.d - 1));
  b.c = Rational(b.rank, denom);
  // eta = (c/2 - 1) / (6d) = (rank - 2 denom) / (12 d denom)
  b.eta = (b.c / Rational::integer(2) - Rational::integer(1)) / Rational::integer(6 * f.d);
  b.rank_exceeds_threshold = Rational::integer(2) < b.c;
  return b;
}

double smooth_step(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

double Cutoff::radial(double rho) const {
  return smooth_step((rho - r1) / (r2 - r1));
}

double Cutoff::eval(const std::vector<double>& x) const {
  double s = 0.0;
  for (double v : x) s += v * v;
  return radial(std::sqrt(s));
}

double Cutoff::eval_scaled(const Point& y, double scale) const {
  require(scale > 0.0, "cutoff scale must be positive");
  return radial(std::sqrt(double(y.norm2sq())) / scale);
}

RegularValueSet RegularValueSet::progression(int64_t offset, int64_t modulus) {
  require(offset >= 1 && modulus >= 1, "value set needs offset >= 1 and modulus >= 1");
  return {offset, modulus};
}

bool RegularValueSet::contains(int64_t v) const {
  return v >= offset && (v - offset) % modulus == 0;
}

int64_t RegularValueSet::next_at_least(int64_t v) const {
  if (v <= offset) return offset;
  int64_t k = (v - offset + modulus - 1) / modulus;
  return checked_add(offset, checked_mul(k, modulus));
}

namespace {

// Largest |coefficient| gives a lower bound for the distance from the origin
// to {f = 1} when the form is definite: |f(x)| <= max|c| * |x|^d for diagonal
// forms with even degree (power-mean inequality).
bool provably_misses_support(const IntegralForm& f, const Cutoff& cutoff) {
  if (!f.diagonal || f.d % 2 != 0) return false;
  bool all_nonpos = true;
  int64_t max_abs = 0;
  for (int64_t c : f.diag) {
    if (c > 0) all_nonpos = false;
    max_abs = std::max(max_abs, std::abs(c));
  }
  if (all_nonpos) return true;  // f <= 0 everywhere, f = 1 unsolvable
  bool all_nonneg = true;
  for (int64_t c : f.diag)
    if (c < 0) all_nonneg = false;
  if (!all_nonneg) return false;  // indefinite, level set unbounded
  double min_radius = std::pow(1.0 / double(max_abs), 1.0 / double(f.d));
  return min_radius >= cutoff.r2;
}

std::optional<std::vector<double>> try_ray(const IntegralForm& f, const Cutoff& cutoff,
                                           const std::vector<double>& dir) {
  double v = eval_form_real(f, dir);
  if (!(v > 1e-12)) return std::nullopt;
  double t = std::pow(1.0 / v, 1.0 / double(f.d));
  std::vector<double> x(dir.size());
  double norm = 0.0;
  for (size_t i = 0; i < dir.size(); ++i) {
    x[i] = t * dir[i];
    norm += x[i] * x[i];
  }
  if (std::sqrt(norm) >= cutoff.r2) return std::nullopt;  // cutoff vanishes there
  std::vector<double> g = grad_form_real(f, x);
  double gg = 0.0;
  for (double gi : g) gg += gi * gi;
  if (std::sqrt(gg) < 1e-8) return std::nullopt;  // singular point
  return x;
}

}  // namespace

PhiRegularity phi_regular_check(const IntegralForm& f, const Cutoff& cutoff,
                                uint64_t seed, int ray_samples) {
  PhiRegularity out;
  BirchData b = birch_constants(f);
  int64_t threshold = checked_mul(f.d - 1, int64_t(1) << f.d);
  if (b.rank <= threshold) {
    out.status = PhiRegularity::Status::kRankTooSmall;
    out.note = "rank " + std::to_string(b.rank) + " does not exceed (d-1)2^d = " +
               std::to_string(threshold);
    return out;
  }
  if (provably_misses_support(f, cutoff)) {
    out.status = PhiRegularity::Status::kProvenNoSolution;
    out.note = "level set of f = 1 provably avoids the open support of the cutoff";
    return out;
  }
  // coordinate rays first (deterministic), then random directions
  for (int sgn : {1, -1}) {
    for (int i = 0; i < f.n; ++i) {
      std::vector<double> dir(f.n, 0.0);
      dir[i] = double(sgn);
      if (auto w = try_ray(f, cutoff, dir)) {
        out.status = PhiRegularity::Status::kRegular;
        out.witness = *w;
        return out;
      }
    }
  }
  RngStream rng(seed, "phi-regular-rays");
  for (int s = 0; s < ray_samples; ++s) {
    std::vector<double> dir(f.n);
    double norm = 0.0;
    for (double& v : dir) {
      v = rng.gaussian();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    for (double& v : dir) v /= norm;
    if (auto w = try_ray(f, cutoff, dir)) {
      out.status = PhiRegularity::Status::kRegular;
      out.witness = *w;
      return out;
    }
  }
  out.status = PhiRegularity::Status::kSearchExhausted;
  out.note = "no nonsingular witness of f = 1 found inside the cutoff support "
             "(search budget " + std::to_string(ray_samples) + " rays)";
  return out;
}

}  // namespace latvar
