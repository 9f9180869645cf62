#include "latvar/seminorms.hpp"

namespace latvar {

void SampleSequence::validate() const {
  require(index.size() == value.size(), "sample sequence index/value size mismatch");
  for (size_t i = 1; i < index.size(); ++i)
    require(index[i - 1] < index[i], "sample sequence parameters must increase strictly");
}

SampleSequence SampleSequence::from_reals(const std::vector<double>& vals) {
  SampleSequence s;
  for (size_t i = 0; i < vals.size(); ++i) {
    s.index.push_back(double(i));
    s.value.emplace_back(vals[i], 0.0);
  }
  return s;
}

namespace {

void check_r(double r) {
  require(r >= 1.0, "variation exponent must satisfy r >= 1 (infinity allowed)");
}

double inc_pow(const SampleSequence& s, int i, int j, double r) {
  const double a = std::abs(s.value[j] - s.value[i]);
  if (r == 1.0) return a;
  if (r == 2.0) return a * a;
  if (r == 3.0) return a * a * a;  // hot path in the field scans
  return std::pow(a, r);
}

VariationResult variation_sup_of_pairs(const SampleSequence& seq) {
  // r = infinity: best single difference, first pair in lexicographic order
  VariationResult out;
  out.r = kInf;
  int L = static_cast<int>(seq.size());
  for (int i = 0; i < L; ++i)
    for (int j = i + 1; j < L; ++j) {
      double v = std::abs(seq.value[j] - seq.value[i]);
      if (v > out.value) {
        out.value = v;
        out.witness = {i, j};
      }
    }
  if (out.value == 0.0) out.witness.clear();
  return out;
}

// value-only dynamic program with caller-owned scratch; arithmetic matches
// variation_exact step for step so field scans and per-point recomputation
// agree bitwise
double variation_value_core(const SampleSequence& seq, double r, std::vector<double>& suffix) {
  int L = static_cast<int>(seq.size());
  if (L < 2) return 0.0;
  suffix.assign(static_cast<size_t>(L), 0.0);
  for (int i = L - 2; i >= 0; --i) {
    double best = 0.0;
    for (int j = i + 1; j < L; ++j) best = std::max(best, inc_pow(seq, i, j, r) + suffix[j]);
    suffix[static_cast<size_t>(i)] = best;
  }
  double total = 0.0;
  for (int i = 0; i < L; ++i) total = std::max(total, suffix[static_cast<size_t>(i)]);
  return std::pow(total, 1.0 / r);
}

}  // namespace

VariationResult variation_exact(const SampleSequence& seq, double r) {
  seq.validate();
  check_r(r);
  if (std::isinf(r)) return variation_sup_of_pairs(seq);

  VariationResult out;
  out.r = r;
  int L = static_cast<int>(seq.size());
  if (L < 2) return out;

  // suffix[i] = best sum of |increment|^r over chains starting at i
  std::vector<double> suffix(L, 0.0);
  for (int i = L - 2; i >= 0; --i) {
    double best = 0.0;
    for (int j = i + 1; j < L; ++j) best = std::max(best, inc_pow(seq, i, j, r) + suffix[j]);
    suffix[i] = best;
  }
  double total = 0.0;
  for (int i = 0; i < L; ++i) total = std::max(total, suffix[i]);
  out.value = std::pow(total, 1.0 / r);
  if (total == 0.0) return out;

  // front-greedy reconstruction yields the lexicographically least maximizer
  int i = 0;
  while (suffix[i] != total) ++i;
  out.witness.push_back(i);
  while (suffix[i] != 0.0) {
    for (int j = i + 1; j < L; ++j) {
      if (inc_pow(seq, i, j, r) + suffix[j] == suffix[i]) {
        out.witness.push_back(j);
        i = j;
        break;
      }
    }
  }
  return out;
}

VariationResult variation_bruteforce(const SampleSequence& seq, double r) {
  seq.validate();
  check_r(r);
  int L = static_cast<int>(seq.size());
  require_budget(L <= 14, "brute-force variation limited to length 14");
  if (std::isinf(r)) return variation_sup_of_pairs(seq);

  VariationResult out;
  out.r = r;
  if (L < 2) return out;

  double best = 0.0;
  std::vector<int> best_idx;
  std::vector<int> idx;
  for (uint32_t mask = 1; mask < (1u << L); ++mask) {
    if (__builtin_popcount(mask) < 2) continue;
    idx.clear();
    for (int i = 0; i < L; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    double sum = 0.0;
    for (size_t t = 1; t < idx.size(); ++t) sum += inc_pow(seq, idx[t - 1], idx[t], r);
    if (sum > best || (sum == best && sum > 0.0 &&
                       (best_idx.empty() || idx < best_idx))) {
      best = sum;
      best_idx = idx;
    }
  }
  out.value = std::pow(best, 1.0 / r);
  if (best > 0.0) out.witness = best_idx;
  return out;
}

double variation_value(const SampleSequence& seq, double r) {
  seq.validate();
  check_r(r);
  if (std::isinf(r)) return variation_sup_of_pairs(seq).value;
  static thread_local std::vector<double> scratch;
  return variation_value_core(seq, r, scratch);
}

int64_t jump_count_value(const SampleSequence& seq, double lambda) {
  seq.validate();
  require(lambda > 0.0, "jump threshold must be positive");
  const double l2 = lambda * lambda;
  const int L = static_cast<int>(seq.size());
  int64_t count = 0;
  int start = 0;
  for (int j = 1; j < L; ++j) {
    for (int u = start; u < j; ++u) {
      if (std::norm(seq.value[j] - seq.value[u]) > l2) {
        ++count;
        start = j;
        break;
      }
    }
  }
  return count;
}

JumpResult jump_count(const SampleSequence& seq, double lambda) {
  seq.validate();
  require(lambda > 0.0, "jump threshold must be positive");
  JumpResult out;
  out.lambda = lambda;
  int L = static_cast<int>(seq.size());
  int start = 0;
  for (int j = 1; j < L; ++j) {
    int best_u = -1;
    double best_gap = lambda * lambda;  // need strict excess; squares avoid hypot
    for (int u = start; u < j; ++u) {
      double gap = std::norm(seq.value[j] - seq.value[u]);
      if (gap > best_gap) {
        best_gap = gap;
        best_u = u;
      }
    }
    if (best_u >= 0) {
      out.witness.emplace_back(best_u, j);
      ++out.count;
      start = j;  // the closing index may open the next pair
    }
  }
  return out;
}

JumpResult jump_bruteforce(const SampleSequence& seq, double lambda) {
  seq.validate();
  require(lambda > 0.0, "jump threshold must be positive");
  int L = static_cast<int>(seq.size());
  require_budget(L <= 12, "brute-force jump count limited to length 12");

  JumpResult out;
  out.lambda = lambda;
  if (L < 2) return out;

  // memo[s] = most pairs packed into indices >= s
  const double l2 = lambda * lambda;
  std::vector<int64_t> memo(L + 1, -1);
  std::function<int64_t(int)> solve = [&](int s) -> int64_t {
    if (memo[s] >= 0) return memo[s];
    int64_t best = 0;
    for (int u = s; u < L; ++u)
      for (int v = u + 1; v < L; ++v)
        if (std::norm(seq.value[v] - seq.value[u]) > l2)
          best = std::max(best, 1 + solve(v));
    return memo[s] = best;
  };
  out.count = solve(0);

  // lexicographically least witness: earliest admissible pair preserving the optimum
  int s = 0;
  while (static_cast<int64_t>(out.witness.size()) < out.count) {
    bool took = false;
    for (int u = s; u < L && !took; ++u)
      for (int v = u + 1; v < L && !took; ++v)
        if (std::norm(seq.value[v] - seq.value[u]) > l2 &&
            1 + solve(v) == solve(s)) {
          out.witness.emplace_back(u, v);
          s = v;
          took = true;
        }
  }
  return out;
}

std::vector<Point> family_support(const AverageFamily& fam) {
  std::vector<Point> pts;
  family_scan(fam, [&](const Point& p, const cplx*) { pts.push_back(p); });
  return pts;
}

SampleSequence family_sequence_at(const AverageFamily& fam, const Point& x) {
  SampleSequence s;
  for (size_t l = 0; l < fam.averaged.size(); ++l) {
    s.index.push_back(double(fam.lambdas[l]));
    s.value.push_back(fam.averaged[l].at(x));
  }
  return s;
}

namespace {

SortedField field_over_support(const AverageFamily& fam,
                               const std::function<double(const SampleSequence&)>& fn) {
  SampleSequence seq;
  for (int64_t lam : fam.lambdas) seq.index.push_back(double(lam));
  seq.value.resize(fam.lambdas.size());
  SortedField out;
  out.dim_hint = fam.averaged.empty() ? 1 : fam.averaged.front().dim();
  family_scan(fam, [&](const Point& p, const cplx* col) {
    std::copy(col, col + seq.value.size(), seq.value.begin());
    const double v = fn(seq);
    if (v != 0.0) {
      out.points.push_back(p);
      out.values.push_back(cplx{v, 0.0});
    }
  });
  return out;
}

}  // namespace

SortedField variation_field(const AverageFamily& fam, double r) {
  check_r(r);
  if (std::isinf(r)) {
    return field_over_support(
        fam, [](const SampleSequence& s) { return variation_sup_of_pairs(s).value; });
  }
  SampleSequence seq;
  for (int64_t lam : fam.lambdas) seq.index.push_back(double(lam));
  seq.value.resize(fam.lambdas.size());
  std::vector<double> suffix;
  SortedField out;
  out.dim_hint = fam.averaged.empty() ? 1 : fam.averaged.front().dim();
  family_scan(fam, [&](const Point& p, const cplx* col) {
    std::copy(col, col + seq.value.size(), seq.value.begin());
    const double v = variation_value_core(seq, r, suffix);
    if (v != 0.0) {
      out.points.push_back(p);
      out.values.push_back(cplx{v, 0.0});
    }
  });
  return out;
}

SortedField jump_field(const AverageFamily& fam, double lambda) {
  return field_over_support(fam, [lambda](const SampleSequence& s) {
    return double(jump_count(s, lambda).count);
  });
}

double jump_functional(const AverageFamily& fam, double lambda, double p) {
  return jump_functional(fam, std::vector<double>{lambda}, p).front();
}

std::vector<double> jump_functional(const AverageFamily& fam,
                                    const std::vector<double>& lambdas, double p) {
  require(!lambdas.empty(), "need at least one jump threshold");
  for (double lam : lambdas) require(lam > 0.0, "jump threshold must be positive");
  const bool sup_norm = std::isinf(p);
  if (!sup_norm) require(p >= 1.0, "norm exponent must satisfy p >= 1");

  const int L = static_cast<int>(fam.lambdas.size());
  const size_t nt = lambdas.size();
  std::vector<double> thr2(nt);
  for (size_t t = 0; t < nt; ++t) thr2[t] = lambdas[t] * lambdas[t];

  // squared increments shared by every threshold; the count per threshold
  // needs only existence of an excess inside the window, so the scan can
  // leave the window at the first one
  std::vector<double> gap2(static_cast<size_t>(L) * static_cast<size_t>(L));
  std::vector<double> agg(nt, 0.0);
  family_scan(fam, [&](const Point&, const cplx* col) {
    for (int u = 0; u < L; ++u)
      for (int j = u + 1; j < L; ++j)
        gap2[static_cast<size_t>(u) * static_cast<size_t>(L) + static_cast<size_t>(j)] =
            std::norm(col[j] - col[u]);
    for (size_t t = 0; t < nt; ++t) {
      const double l2 = thr2[t];
      int64_t count = 0;
      int start = 0;
      for (int j = 1; j < L; ++j) {
        for (int u = start; u < j; ++u) {
          if (gap2[static_cast<size_t>(u) * static_cast<size_t>(L) + static_cast<size_t>(j)] >
              l2) {
            ++count;
            start = j;
            break;
          }
        }
      }
      if (count == 0) continue;
      if (sup_norm) {
        agg[t] = std::max(agg[t], std::sqrt(double(count)));
      } else if (p == 2.0) {
        agg[t] += double(count);
      } else {
        agg[t] += std::pow(double(count), p / 2.0);
      }
    }
  });
  std::vector<double> out(nt);
  for (size_t t = 0; t < nt; ++t) {
    out[t] = sup_norm ? lambdas[t] * agg[t] : lambdas[t] * std::pow(agg[t], 1.0 / p);
  }
  return out;
}

double lp_norm(const GridFunction& f, double p) {
  if (std::isinf(p)) return f.max_abs();
  require(p >= 1.0, "norm exponent must satisfy p >= 1");
  double s = 0.0;
  for (const Point& x : f.sorted_support()) s += std::pow(std::abs(f.at(x)), p);
  return std::pow(s, 1.0 / p);
}

double lp_norm(const SortedField& f, double p) {
  if (std::isinf(p)) return f.max_abs();
  require(p >= 1.0, "norm exponent must satisfy p >= 1");
  double s = 0.0;
  for (const cplx& v : f.values) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace latvar
