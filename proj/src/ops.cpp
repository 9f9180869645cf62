#include "latvar/ops.hpp"

#include <algorithm>
#include <queue>

namespace latvar {

cplx SortedField::at(const Point& x) const {
  auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.end() || !(*it == x)) return cplx{0.0, 0.0};
  return values[static_cast<size_t>(it - points.begin())];
}

double SortedField::l2norm() const {
  double s = 0.0;
  for (const cplx& v : values) s += std::norm(v);
  return std::sqrt(s);
}

double SortedField::max_abs() const {
  double m = 0.0;
  for (const cplx& v : values) m = std::max(m, std::abs(v));
  return m;
}

GridFunction SortedField::to_grid() const {
  GridFunction g(dim());
  for (size_t i = 0; i < points.size(); ++i) g.set(points[i], values[i]);
  return g;
}

SortedField SortedField::from_grid(const GridFunction& g) {
  SortedField s;
  s.dim_hint = g.dim();
  s.points = g.sorted_support();
  s.values.reserve(s.points.size());
  for (const Point& p : s.points) s.values.push_back(g.at(p));
  return s;
}

double Kernel::mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

int64_t Kernel::support_linf() const {
  int64_t m = 0;
  for (const Point& p : points) m = std::max(m, p.linf());
  return m;
}

namespace {

Kernel kernel_from_set(const SolutionSet& set, int n, int d, int64_t lambda,
                       Kernel::Normalization norm, bool variety) {
  Kernel k;
  k.dim = n;
  k.lambda = lambda;
  k.norm = norm;

  double divisor;
  if (norm == Kernel::Normalization::kByCount) {
    require(set.weighted_count > 0.0,
            "by_count normalization needs a nonempty weighted solution set at lambda=" +
                std::to_string(lambda));
    divisor = set.weighted_count;
  } else {
    // by_power: lambda^{n/d-1} for level sets, lambda^{n-d} for zero sets
    double expo = variety ? double(n - d) : double(n) / d - 1.0;
    divisor = std::pow(double(lambda), expo);
  }

  k.points.reserve(set.points.size());
  k.weights.reserve(set.points.size());
  for (size_t i = 0; i < set.points.size(); ++i) {
    if (set.weights[i] == 0.0) continue;
    k.points.push_back(set.points[i]);
    k.weights.push_back(set.weights[i] / divisor);
  }
  k.lookup.reserve(k.points.size() * 2);
  for (size_t i = 0; i < k.points.size(); ++i) k.lookup.emplace(k.points[i], k.weights[i]);
  return k;
}

}  // namespace

Kernel make_form_kernel(const IntegralForm& f, int64_t lambda, const Cutoff& cutoff,
                        Kernel::Normalization norm, const EnumOptions& opts) {
  SolutionSet set = enumerate_solutions(f, lambda, cutoff, opts);
  return kernel_from_set(set, f.n, f.d, lambda, norm, /*variety=*/false);
}

Kernel make_variety_kernel(const IntegralForm& f, int64_t lambda, Kernel::Normalization norm,
                           const EnumOptions& opts) {
  SolutionSet set = enumerate_variety_zero(f, lambda, opts);
  return kernel_from_set(set, f.n, f.d, lambda, norm, /*variety=*/true);
}

// ---------------------------------------------------------------------------
// Convolution by multiway merge.  The output is the union of kernel translates
// by the support of f; each translate is already sorted, so merging the
// translated streams produces the result in order with no hashing.  The point
// space is partitioned into kConvChunks intervals processed independently;
// within a point, contributions combine in (f point, kernel index) order.

namespace {

constexpr int kConvChunks = 16;

struct MergeEntry {
  Point p;
  int stream;
  int64_t idx;
};

struct MergeEntryGreater {
  bool operator()(const MergeEntry& a, const MergeEntry& b) const {
    if (a.p < b.p) return false;
    if (b.p < a.p) return true;
    return a.stream > b.stream;
  }
};

// evenly spaced interior splitters from a sample of stream points
std::vector<Point> choose_splitters(const std::vector<Point>& fs, const Kernel& k) {
  std::vector<Point> sample;
  const int64_t npts = static_cast<int64_t>(k.points.size());
  const int64_t per = std::max<int64_t>(1, npts / 8);
  for (const Point& z : fs) {
    for (int64_t j = per / 2; j < npts; j += per) {
      sample.push_back(k.points[static_cast<size_t>(j)] + z);
    }
  }
  std::sort(sample.begin(), sample.end());
  std::vector<Point> splitters;
  if (sample.size() < 2 * kConvChunks) return splitters;
  for (int c = 1; c < kConvChunks; ++c) {
    Point cand = sample[sample.size() * static_cast<size_t>(c) / kConvChunks];
    if (splitters.empty() || splitters.back() < cand) splitters.push_back(cand);
  }
  return splitters;
}

}  // namespace

SortedField apply_kernel(const Kernel& k, const GridFunction& f, Exec exec) {
  require(k.dim == f.dim(), "kernel and function dimensions differ");
  SortedField out;
  out.dim_hint = f.dim();
  const std::vector<Point>& fs = f.sorted_support();
  if (fs.empty() || k.points.empty()) return out;

  std::vector<cplx> fvals;
  fvals.reserve(fs.size());
  for (const Point& z : fs) fvals.push_back(f.at(z));

  const std::vector<Point> splitters = choose_splitters(fs, k);
  const int nchunks = static_cast<int>(splitters.size()) + 1;
  const int nstreams = static_cast<int>(fs.size());
  const int64_t npts = static_cast<int64_t>(k.points.size());

  // stream s covers kernel indices [bounds[s][c], bounds[s][c+1]) in chunk c
  std::vector<std::vector<int64_t>> bounds(static_cast<size_t>(nstreams));
  for (int s = 0; s < nstreams; ++s) {
    auto& b = bounds[static_cast<size_t>(s)];
    b.push_back(0);
    for (const Point& sp : splitters) {
      const Point local = sp - fs[static_cast<size_t>(s)];
      auto it = std::lower_bound(k.points.begin(), k.points.end(), local);
      b.push_back(it - k.points.begin());
    }
    b.push_back(npts);
  }

  std::vector<std::vector<Point>> chunk_pts(static_cast<size_t>(nchunks));
  std::vector<std::vector<cplx>> chunk_vals(static_cast<size_t>(nchunks));
  parallel_for(exec, nchunks, [&](int64_t c) {
    std::priority_queue<MergeEntry, std::vector<MergeEntry>, MergeEntryGreater> pq;
    for (int s = 0; s < nstreams; ++s) {
      const int64_t begin = bounds[static_cast<size_t>(s)][static_cast<size_t>(c)];
      if (begin < bounds[static_cast<size_t>(s)][static_cast<size_t>(c) + 1]) {
        pq.push({k.points[static_cast<size_t>(begin)] + fs[static_cast<size_t>(s)], s, begin});
      }
    }
    auto& pts = chunk_pts[static_cast<size_t>(c)];
    auto& vals = chunk_vals[static_cast<size_t>(c)];
    bool open = false;
    Point cur = Point::zero(k.dim);
    cplx acc{0.0, 0.0};
    while (!pq.empty()) {
      const MergeEntry e = pq.top();
      pq.pop();
      if (!open || !(e.p == cur)) {
        if (open && acc != cplx{0.0, 0.0}) {
          pts.push_back(cur);
          vals.push_back(acc);
        }
        cur = e.p;
        acc = cplx{0.0, 0.0};
        open = true;
      }
      acc += k.weights[static_cast<size_t>(e.idx)] * fvals[static_cast<size_t>(e.stream)];
      const int64_t next = e.idx + 1;
      if (next < bounds[static_cast<size_t>(e.stream)][static_cast<size_t>(c) + 1]) {
        pq.push({k.points[static_cast<size_t>(next)] + fs[static_cast<size_t>(e.stream)],
                 e.stream, next});
      }
    }
    if (open && acc != cplx{0.0, 0.0}) {
      pts.push_back(cur);
      vals.push_back(acc);
    }
  });

  size_t total = 0;
  for (const auto& v : chunk_pts) total += v.size();
  out.points.reserve(total);
  out.values.reserve(total);
  for (int c = 0; c < nchunks; ++c) {
    out.points.insert(out.points.end(), chunk_pts[static_cast<size_t>(c)].begin(),
                      chunk_pts[static_cast<size_t>(c)].end());
    out.values.insert(out.values.end(), chunk_vals[static_cast<size_t>(c)].begin(),
                      chunk_vals[static_cast<size_t>(c)].end());
  }
  return out;
}

SortedField apply_kernel_reference(const Kernel& k, const GridFunction& f) {
  require(k.dim == f.dim(), "kernel and function dimensions differ");
  std::unordered_map<Point, cplx, PointHash> acc;
  acc.reserve(k.points.size() * 2);
  for (const Point& z : f.sorted_support()) {
    const cplx fv = f.at(z);
    for (size_t j = 0; j < k.points.size(); ++j) {
      acc[k.points[j] + z] += k.weights[j] * fv;
    }
  }
  SortedField out;
  out.dim_hint = f.dim();
  out.points.reserve(acc.size());
  for (const auto& kv : acc) {
    if (kv.second != cplx{0.0, 0.0}) out.points.push_back(kv.first);
  }
  std::sort(out.points.begin(), out.points.end());
  out.values.reserve(out.points.size());
  for (const Point& p : out.points) out.values.push_back(acc[p]);
  return out;
}

GridFunction apply_kernel_grid(const Kernel& k, const GridFunction& f, Exec exec) {
  return apply_kernel(k, f, exec).to_grid();
}

cplx apply_kernel_at(const Kernel& k, const GridFunction& f, const Point& x) {
  require(k.dim == f.dim(), "kernel and function dimensions differ");
  cplx acc{0.0, 0.0};
  for (size_t j = 0; j < k.points.size(); ++j) acc += k.weights[j] * f.at(x - k.points[j]);
  return acc;
}

std::vector<cplx> apply_kernel_at(const Kernel& k, const GridFunction& f,
                                  const std::vector<Point>& xs, Exec exec) {
  std::vector<cplx> out(xs.size());
  parallel_for(exec, static_cast<int64_t>(xs.size()),
               [&](int64_t i) { out[i] = apply_kernel_at(k, f, xs[i]); });
  return out;
}

LacunarySequence lacunary_sequence(double ratio, int64_t start, const RegularValueSet& values,
                                   int count, int64_t max_value) {
  require(ratio > 1.0, "lacunarity ratio must exceed 1");
  require(count >= 1, "sequence length must be >= 1");
  LacunarySequence seq;
  seq.ratio = ratio;
  seq.values = values;
  int64_t cur = values.next_at_least(start);
  for (int i = 0; i < count; ++i) {
    require_budget(cur <= max_value, "lacunary sequence exceeds max value budget");
    seq.lambdas.push_back(cur);
    if (i + 1 == count) break;
    // least admissible value v with v >= ratio * cur
    int64_t next = values.next_at_least(cur + 1);
    while (double(next) < ratio * double(cur)) {
      next = values.next_at_least(next + 1);
      require_budget(next <= max_value, "lacunary sequence exceeds max value budget");
    }
    cur = next;
  }
  return seq;
}

LacunarySequence lacunary_from_list(double ratio, const RegularValueSet& values,
                                    std::vector<int64_t> lambdas) {
  require(ratio > 1.0, "lacunarity ratio must exceed 1");
  require(!lambdas.empty(), "empty lacunary list");
  for (size_t i = 0; i < lambdas.size(); ++i) {
    require(values.contains(lambdas[i]),
            "list entry " + std::to_string(lambdas[i]) + " is not an admissible value");
    if (i > 0)
      require(double(lambdas[i]) >= ratio * double(lambdas[i - 1]),
              "list violates the lacunarity ratio");
  }
  LacunarySequence seq;
  seq.ratio = ratio;
  seq.values = values;
  seq.lambdas = std::move(lambdas);
  return seq;
}

AverageFamily family_apply(const std::vector<Kernel>& kernels, const GridFunction& f,
                           Exec exec) {
  require(!kernels.empty(), "empty kernel family");
  AverageFamily fam;
  for (const Kernel& k : kernels) {
    fam.lambdas.push_back(k.lambda);
    fam.averaged.push_back(apply_kernel(k, f, exec));
  }
  return fam;
}

void family_scan(const AverageFamily& fam,
                 const std::function<void(const Point&, const cplx*)>& visit) {
  const int nf = static_cast<int>(fam.averaged.size());
  require(nf > 0, "empty average family");
  std::vector<size_t> pos(static_cast<size_t>(nf), 0);
  std::vector<cplx> column(static_cast<size_t>(nf));
  std::priority_queue<MergeEntry, std::vector<MergeEntry>, MergeEntryGreater> pq;
  for (int s = 0; s < nf; ++s) {
    if (!fam.averaged[static_cast<size_t>(s)].points.empty()) {
      pq.push({fam.averaged[static_cast<size_t>(s)].points[0], s, 0});
    }
  }
  while (!pq.empty()) {
    const Point cur = pq.top().p;
    std::fill(column.begin(), column.end(), cplx{0.0, 0.0});
    while (!pq.empty() && pq.top().p == cur) {
      const MergeEntry e = pq.top();
      pq.pop();
      const SortedField& g = fam.averaged[static_cast<size_t>(e.stream)];
      column[static_cast<size_t>(e.stream)] = g.values[static_cast<size_t>(e.idx)];
      const int64_t next = e.idx + 1;
      if (next < static_cast<int64_t>(g.points.size())) {
        pq.push({g.points[static_cast<size_t>(next)], e.stream, next});
      }
    }
    visit(cur, column.data());
  }
}

SortedField family_sup_field(const AverageFamily& fam) {
  SortedField out;
  out.dim_hint = fam.averaged.empty() ? 1 : fam.averaged.front().dim();
  const size_t nf = fam.averaged.size();
  family_scan(fam, [&](const Point& p, const cplx* col) {
    double m = 0.0;
    for (size_t l = 0; l < nf; ++l) m = std::max(m, std::abs(col[l]));
    if (m > 0.0) {
      out.points.push_back(p);
      out.values.push_back(cplx{m, 0.0});
    }
  });
  return out;
}

std::vector<Kernel> form_kernel_family(const IntegralForm& f, const LacunarySequence& seq,
                                       const Cutoff& cutoff, Kernel::Normalization norm,
                                       const EnumOptions& opts) {
  std::vector<Kernel> ks;
  ks.reserve(seq.lambdas.size());
  for (int64_t lam : seq.lambdas) ks.push_back(make_form_kernel(f, lam, cutoff, norm, opts));
  return ks;
}

std::vector<Kernel> variety_kernel_family(const IntegralForm& f, const LacunarySequence& seq,
                                          Kernel::Normalization norm, const EnumOptions& opts) {
  std::vector<Kernel> ks;
  ks.reserve(seq.lambdas.size());
  for (int64_t lam : seq.lambdas) ks.push_back(make_variety_kernel(f, lam, norm, opts));
  return ks;
}

}  // namespace latvar
