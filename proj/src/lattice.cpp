#include "latvar/lattice.hpp"

#include <atomic>

namespace latvar {

namespace {

// largest b >= 0 with coeff * b^d <= lambda (coeff > 0, d even)
int64_t coord_bound(int64_t coeff, int d, int64_t lambda) {
  if (lambda < 0) return -1;
  int64_t b = static_cast<int64_t>(std::floor(std::pow(double(lambda) / double(coeff), 1.0 / d)));
  b = std::max<int64_t>(b, 0);
  while (checked_mul(coeff, checked_pow(b + 1, d)) <= lambda) ++b;
  while (b > 0 && checked_mul(coeff, checked_pow(b, d)) > lambda) --b;
  return b;
}

struct HalfTable {
  // partial values of the right-half coordinates, sorted by value
  std::vector<int64_t> values;
  std::vector<std::vector<int32_t>> tuples;  // aligned with values
};

void enumerate_half(const std::vector<int64_t>& coeffs, int d, int64_t budget_left,
                    std::vector<int32_t>& cur, int idx, int64_t partial,
                    const std::function<void(int64_t, const std::vector<int32_t>&)>& emit,
                    std::atomic<int64_t>& ops, int64_t max_ops) {
  if (idx == static_cast<int>(coeffs.size())) {
    emit(partial, cur);
    return;
  }
  if (++ops > max_ops) throw BudgetError("enumeration op budget exceeded");
  int64_t b = coord_bound(coeffs[idx], d, budget_left - partial);
  for (int64_t v = -b; v <= b; ++v) {
    cur[idx] = static_cast<int32_t>(v);
    int64_t term = checked_mul(coeffs[idx], checked_pow(v, d));
    enumerate_half(coeffs, d, budget_left, cur, idx + 1, partial + term, emit, ops, max_ops);
  }
}

void finalize(SolutionSet& out, const IntegralForm& f, const Cutoff& cutoff, bool unit_weights) {
  std::sort(out.points.begin(), out.points.end());
  double scale = std::pow(double(std::max<int64_t>(out.lambda, 1)), 1.0 / f.d);
  out.weights.resize(out.points.size());
  out.weighted_count = 0.0;
  for (size_t i = 0; i < out.points.size(); ++i) {
    out.weights[i] = unit_weights ? 1.0 : cutoff.eval_scaled(out.points[i], scale);
    out.weighted_count += out.weights[i];
  }
}

}  // namespace

SolutionSet enumerate_solutions(const IntegralForm& f, int64_t lambda, const Cutoff& cutoff,
                                const EnumOptions& opts) {
  require(lambda >= 1, "lambda must be >= 1");
  require(f.positive_definite_diagonal(),
          "enumerate_solutions needs a positive-definite diagonal form of even degree; "
          "use enumerate_box_scan with an explicit radius otherwise");

  SolutionSet out;
  out.dim = f.n;
  out.lambda = lambda;

  int right = f.n / 2;
  int left = f.n - right;
  std::vector<int64_t> lcoef(f.diag.begin(), f.diag.begin() + left);
  std::vector<int64_t> rcoef(f.diag.begin() + left, f.diag.end());

  std::atomic<int64_t> ops{0};

  HalfTable table;
  if (right == 0) {
    table.values.push_back(0);
    table.tuples.push_back({});
  } else {
    std::vector<std::pair<int64_t, std::vector<int32_t>>> rows;
    std::vector<int32_t> cur(right);
    enumerate_half(rcoef, f.d, lambda, cur, 0, 0,
                   [&](int64_t v, const std::vector<int32_t>& t) {
                     rows.emplace_back(v, t);
                     require_budget(static_cast<int64_t>(rows.size()) <= opts.max_ops,
                                    "right-half table exceeds op budget");
                   },
                   ops, opts.max_ops);
    std::sort(rows.begin(), rows.end());
    table.values.reserve(rows.size());
    table.tuples.reserve(rows.size());
    for (auto& r : rows) {
      table.values.push_back(r.first);
      table.tuples.push_back(std::move(r.second));
    }
  }

  // The left half streams in parallel, one chunk per leading-coordinate value;
  // chunk outputs are concatenated in chunk order and sorted once at the end,
  // so the result does not depend on the thread count.
  int64_t b1 = coord_bound(lcoef[0], f.d, lambda);
  int64_t chunks = 2 * b1 + 1;
  std::vector<std::vector<Point>> found(chunks);

  parallel_for(opts.exec, chunks, [&](int64_t ci) {
    int64_t x1 = ci - b1;
    int64_t head = checked_mul(lcoef[0], checked_pow(x1, f.d));
    if (head > lambda) return;
    std::vector<int64_t> restc(lcoef.begin() + 1, lcoef.end());
    std::vector<int32_t> cur(restc.size());
    std::atomic<int64_t> local_ops{0};
    enumerate_half(restc, f.d, lambda, cur, 0, 0,
                   [&](int64_t v, const std::vector<int32_t>& t) {
                     int64_t need = lambda - head - v;
                     if (need < 0) return;
                     auto lo = std::lower_bound(table.values.begin(), table.values.end(), need);
                     for (auto it = lo; it != table.values.end() && *it == need; ++it) {
                       size_t idx = static_cast<size_t>(it - table.values.begin());
                       Point p = Point::zero(f.n);
                       p[0] = static_cast<int32_t>(x1);
                       for (size_t j = 0; j < t.size(); ++j) p[1 + j] = t[j];
                       for (int j = 0; j < right; ++j) p[left + j] = table.tuples[idx][j];
                       found[ci].push_back(p);
                     }
                   },
                   local_ops, opts.max_ops);
  });

  for (auto& chunk : found) {
    require_budget(static_cast<int64_t>(out.points.size() + chunk.size()) <= opts.max_points,
                   "solution count exceeds point budget");
    out.points.insert(out.points.end(), chunk.begin(), chunk.end());
  }
  finalize(out, f, cutoff, /*unit_weights=*/false);
  return out;
}

SolutionSet enumerate_box_scan(const IntegralForm& f, int64_t lambda, const Cutoff& cutoff,
                               int64_t radius, const EnumOptions& opts) {
  require(radius >= 0, "negative scan radius");
  int64_t side = 2 * radius + 1;
  double volume = std::pow(double(side), f.n);
  require_budget(volume <= double(opts.max_ops), "box scan volume exceeds op budget");

  SolutionSet out;
  out.dim = f.n;
  out.lambda = lambda;

  int64_t total = 1;
  for (int i = 0; i < f.n; ++i) total = checked_mul(total, side);
  std::vector<std::vector<Point>> found;
  int64_t chunks = side;
  found.resize(chunks);
  int64_t inner = total / side;
  parallel_for(opts.exec, chunks, [&](int64_t ci) {
    Point p = Point::zero(f.n);
    p[0] = static_cast<int32_t>(ci - radius);
    for (int64_t k = 0; k < inner; ++k) {
      int64_t rem = k;
      for (int i = f.n - 1; i >= 1; --i) {
        p[i] = static_cast<int32_t>(rem % side - radius);
        rem /= side;
      }
      if (eval_form(f, p) == lambda) found[ci].push_back(p);
    }
  });
  for (auto& chunk : found) {
    require_budget(static_cast<int64_t>(out.points.size() + chunk.size()) <= opts.max_points,
                   "solution count exceeds point budget");
    out.points.insert(out.points.end(), chunk.begin(), chunk.end());
  }
  finalize(out, f, cutoff, /*unit_weights=*/false);
  return out;
}

namespace {

// variety fast path: diagonal quadratic with exactly one negative coefficient
SolutionSet variety_quadratic_mitm(const IntegralForm& f, int64_t lambda, int neg,
                                   const EnumOptions& opts) {
  SolutionSet out;
  out.dim = f.n;
  out.lambda = lambda;

  std::vector<int> pos_idx;
  for (int i = 0; i < f.n; ++i)
    if (i != neg) pos_idx.push_back(i);
  int p = static_cast<int>(pos_idx.size());
  int left = (p + 1) / 2;
  int right = p - left;

  // right-half table over [1..lambda]^right, sorted by value
  std::vector<std::pair<int64_t, std::vector<int32_t>>> rows;
  {
    std::vector<int32_t> cur(right);
    std::function<void(int, int64_t)> rec = [&](int idx, int64_t partial) {
      if (idx == right) {
        rows.emplace_back(partial, cur);
        return;
      }
      int64_t c = f.diag[pos_idx[left + idx]];
      for (int64_t v = 1; v <= lambda; ++v) {
        int64_t t = partial + checked_mul(c, v * v);
        cur[idx] = static_cast<int32_t>(v);
        rec(idx + 1, t);
      }
    };
    rec(0, 0);
  }
  std::sort(rows.begin(), rows.end());
  std::vector<int64_t> rvals;
  rvals.reserve(rows.size());
  for (auto& r : rows) rvals.push_back(r.first);

  int64_t negc = -f.diag[neg];
  std::vector<std::vector<Point>> found(lambda);
  parallel_for(opts.exec, lambda, [&](int64_t xi) {
    int64_t xneg = xi + 1;
    int64_t target = checked_mul(negc, xneg * xneg);
    std::vector<int32_t> cur(left);
    std::function<void(int, int64_t)> rec = [&](int idx, int64_t partial) {
      if (partial > target) return;
      if (idx == left) {
        int64_t need = target - partial;
        auto lo = std::lower_bound(rvals.begin(), rvals.end(), need);
        for (auto it = lo; it != rvals.end() && *it == need; ++it) {
          size_t k = static_cast<size_t>(it - rvals.begin());
          Point pt = Point::zero(f.n);
          for (int j = 0; j < left; ++j) pt[pos_idx[j]] = cur[j];
          for (int j = 0; j < right; ++j) pt[pos_idx[left + j]] = rows[k].second[j];
          pt[neg] = static_cast<int32_t>(xneg);
          found[xi].push_back(pt);
        }
        return;
      }
      int64_t c = f.diag[pos_idx[idx]];
      for (int64_t v = 1; v <= lambda; ++v) {
        int64_t t = partial + checked_mul(c, v * v);
        if (t > target) break;
        cur[idx] = static_cast<int32_t>(v);
        rec(idx + 1, t);
      }
    };
    rec(0, 0);
  });
  for (auto& chunk : found) {
    require_budget(static_cast<int64_t>(out.points.size() + chunk.size()) <= opts.max_points,
                   "variety solution count exceeds point budget");
    out.points.insert(out.points.end(), chunk.begin(), chunk.end());
  }
  Cutoff unused;
  finalize(out, f, unused, /*unit_weights=*/true);
  return out;
}

}  // namespace

SolutionSet enumerate_variety_zero(const IntegralForm& f, int64_t lambda,
                                   const EnumOptions& opts) {
  require(lambda >= 1, "lambda must be >= 1");

  if (f.diagonal && f.d == 2) {
    int neg = -1, negs = 0, poss = 0;
    for (int i = 0; i < f.n; ++i) {
      if (f.diag[i] < 0) {
        neg = i;
        ++negs;
      } else if (f.diag[i] > 0) {
        ++poss;
      }
    }
    if (negs == 1 && poss == f.n - 1) return variety_quadratic_mitm(f, lambda, neg, opts);
  }

  // general fallback: scan [1..lambda]^n
  double volume = std::pow(double(lambda), f.n);
  require_budget(volume <= double(opts.max_ops), "variety box scan exceeds op budget");
  SolutionSet out;
  out.dim = f.n;
  out.lambda = lambda;
  int64_t inner = 1;
  for (int i = 1; i < f.n; ++i) inner = checked_mul(inner, lambda);
  std::vector<std::vector<Point>> found(lambda);
  parallel_for(opts.exec, lambda, [&](int64_t ci) {
    Point p = Point::zero(f.n);
    p[0] = static_cast<int32_t>(ci + 1);
    for (int64_t k = 0; k < inner; ++k) {
      int64_t rem = k;
      for (int i = f.n - 1; i >= 1; --i) {
        p[i] = static_cast<int32_t>(rem % lambda + 1);
        rem /= lambda;
      }
      if (eval_form(f, p) == 0) found[ci].push_back(p);
    }
  });
  for (auto& chunk : found) {
    require_budget(static_cast<int64_t>(out.points.size() + chunk.size()) <= opts.max_points,
                   "variety solution count exceeds point budget");
    out.points.insert(out.points.end(), chunk.begin(), chunk.end());
  }
  Cutoff unused;
  finalize(out, f, unused, /*unit_weights=*/true);
  return out;
}

double counting_function(const IntegralForm& f, int64_t lambda, const Cutoff& cutoff,
                         const EnumOptions& opts) {
  return enumerate_solutions(f, lambda, cutoff, opts).weighted_count;
}

LineFit counting_exponent_fit(const std::vector<int64_t>& lambdas,
                              const std::vector<int64_t>& counts) {
  require(lambdas.size() == counts.size(), "mismatched fit inputs");
  std::vector<double> xs, ys;
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (counts[i] <= 0) continue;
    xs.push_back(std::log(double(lambdas[i])));
    ys.push_back(std::log(double(counts[i])));
  }
  require(xs.size() >= 2, "need >= 2 nonzero counts for the exponent fit");
  return fit_line(xs, ys);
}

}  // namespace latvar
