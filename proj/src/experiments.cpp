#include "latvar/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace latvar {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_hex(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

const char* ensemble_kind_name(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::kDelta:
      return "delta";
    case EnsembleKind::kRandomSparse:
      return "random_sparse";
    case EnsembleKind::kRademacherBox:
      return "rademacher_box";
    case EnsembleKind::kWavePacket:
      return "wave_packet";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_name(const std::string& name) {
  if (name == "delta") return EnsembleKind::kDelta;
  if (name == "random_sparse") return EnsembleKind::kRandomSparse;
  if (name == "rademacher_box") return EnsembleKind::kRademacherBox;
  if (name == "wave_packet") return EnsembleKind::kWavePacket;
  throw ValidationError("unknown ensemble kind: " + name);
}

std::vector<GridFunction> make_ensemble(const EnsembleSpec& spec, int n) {
  require(spec.members >= 1, "ensemble needs at least one member");
  require(spec.support >= 1 && spec.box_radius >= 0, "ensemble geometry out of range");
  std::vector<GridFunction> out;
  out.reserve(static_cast<size_t>(spec.members));
  const int64_t R = spec.box_radius;
  for (int i = 0; i < spec.members; ++i) {
    RngStream rng(spec.seed, "ensemble", static_cast<uint64_t>(i));
    GridFunction f(n);
    switch (spec.kind) {
      case EnsembleKind::kDelta: {
        f.set(Point::zero(n), cplx{1.0, 0.0});
        break;
      }
      case EnsembleKind::kRandomSparse: {
        for (int s = 0; s < spec.support; ++s) {
          Point p = Point::zero(n);
          for (int c = 0; c < n; ++c) {
            p.c[static_cast<size_t>(c)] = static_cast<int32_t>(rng.uniform_int(-R, R));
          }
          f.add(p, cplx{rng.gaussian(), 0.0});
        }
        break;
      }
      case EnsembleKind::kRademacherBox:
      case EnsembleKind::kWavePacket: {
        double cells = 1.0;
        for (int c = 0; c < n; ++c) cells *= double(2 * R + 1);
        require_budget(cells <= 200000.0, "ensemble box exceeds the point budget");
        std::vector<double> xi(static_cast<size_t>(n), 0.0);
        double width = std::max(1.0, double(R) / 2.0);
        if (spec.kind == EnsembleKind::kWavePacket) {
          for (double& v : xi) v = rng.uniform(-0.5, 0.5);
        }
        std::vector<int64_t> idx(static_cast<size_t>(n), -R);
        while (true) {
          Point p = Point::zero(n);
          double rho2 = 0.0;
          double phase = 0.0;
          for (int c = 0; c < n; ++c) {
            const int64_t v = idx[static_cast<size_t>(c)];
            p.c[static_cast<size_t>(c)] = static_cast<int32_t>(v);
            rho2 += double(v * v);
            phase += xi[static_cast<size_t>(c)] * double(v);
          }
          if (spec.kind == EnsembleKind::kRademacherBox) {
            f.set(p, cplx{rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0, 0.0});
          } else {
            f.set(p, std::exp(-kPi * rho2 / (width * width)) * unit_phase(phase));
          }
          int c = n - 1;
          while (c >= 0) {
            if (++idx[static_cast<size_t>(c)] <= R) break;
            idx[static_cast<size_t>(c)] = -R;
            --c;
          }
          if (c < 0) break;
        }
        break;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "cases=" << cases << "\n";
  os << "count=" << count << "\n";
  os << "cutoff.r1=" << fmt_double(cutoff.r1) << "\n";
  os << "cutoff.r2=" << fmt_double(cutoff.r2) << "\n";
  os << "ensemble.box_radius=" << ensemble.box_radius << "\n";
  os << "ensemble.kind=" << ensemble_kind_name(ensemble.kind) << "\n";
  os << "ensemble.members=" << ensemble.members << "\n";
  os << "ensemble.seed=" << ensemble.seed << "\n";
  os << "ensemble.support=" << ensemble.support << "\n";
  os << "form=" << form.describe() << "\n";
  os << "jump_grid=";
  for (size_t i = 0; i < jump_grid.size(); ++i) {
    if (i) os << ",";
    os << fmt_double(jump_grid[i]);
  }
  os << "\n";
  os << "p=" << fmt_double(p) << "\n";
  os << "probes=" << probes << "\n";
  os << "r=" << fmt_double(r) << "\n";
  os << "ratio=" << fmt_double(ratio) << "\n";
  os << "start=" << start << "\n";
  os << "values.modulus=" << values.modulus << "\n";
  os << "values.offset=" << values.offset << "\n";
  os << "variety=" << (variety ? 1 : 0) << "\n";
  os << "window=" << window << "\n";
  return os.str();
}

uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

bool ExperimentConfig::r_in_admissible_range() const {
  require(p > 1.0, "exponent p must exceed 1");
  const double conj = p / (p - 1.0);
  return r > std::max(p, conj);
}

std::string Report::to_text() const {
  std::ostringstream os;
  os << "experiment=" << experiment << "\n";
  os << "config_hash=" << fmt_hex(config_hash) << "\n";
  os << "seed=" << seed << "\n";
  os << "lambdas=";
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (i) os << ",";
    os << lambdas[i];
  }
  os << "\n";
  os << "max_ratio=" << fmt_double(max_ratio) << "\n";
  os << "median_ratio=" << fmt_double(median_ratio) << "\n";
  os << "q90_ratio=" << fmt_double(q90_ratio) << "\n";
  os << "c_constant=" << fmt_double(c_constant) << "\n";
  os << "eta_constant=" << fmt_double(eta_constant) << "\n";
  os << "r_range_ok=" << (r_range_ok ? 1 : 0) << "\n";
  for (const std::string& n : notes) os << "note=" << n << "\n";
  for (double v : ratios) os << "ratio=" << fmt_double(v) << "\n";
  return os.str();
}

namespace {

std::vector<Kernel> build_family(const ExperimentConfig& cfg, const LacunarySequence& seq) {
  if (cfg.variety) {
    return variety_kernel_family(cfg.form, seq, Kernel::Normalization::kByCount, cfg.enum_opts);
  }
  return form_kernel_family(cfg.form, seq, cfg.cutoff, Kernel::Normalization::kByCount,
                            cfg.enum_opts);
}

void finish_report(Report& rep) {
  std::vector<double> sorted = rep.ratios;
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty()) {
    rep.max_ratio = sorted.back();
    const size_t k = sorted.size();
    rep.median_ratio = (k % 2 == 1) ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
    rep.q90_ratio = sorted[(k - 1) * 9 / 10];
  }
}

Report base_report(const ExperimentConfig& cfg, const std::string& name,
                   const LacunarySequence& seq) {
  Report rep;
  rep.experiment = name;
  rep.config_hash = cfg.hash();
  rep.seed = cfg.ensemble.seed;
  rep.lambdas = seq.lambdas;
  const BirchData birch = birch_constants(cfg.form);
  rep.c_constant = birch.c.to_double();
  rep.eta_constant = birch.eta.to_double();
  rep.r_range_ok = cfg.r_in_admissible_range();
  if (!rep.r_range_ok) rep.notes.push_back("r outside the admissible range r > max{p, p'}");
  return rep;
}

}  // namespace

Report variation_norm_experiment(const ExperimentConfig& cfg) {
  const LacunarySequence seq =
      lacunary_sequence(cfg.ratio, cfg.start, cfg.values, cfg.count);
  const std::vector<Kernel> kernels = build_family(cfg, seq);
  const std::vector<GridFunction> ensemble = make_ensemble(cfg.ensemble, cfg.form.n);

  Report rep = base_report(cfg, cfg.variety ? "variety_variation_norm" : "variation_norm", seq);
  rep.ratios.assign(ensemble.size(), 0.0);
  parallel_for(cfg.exec, static_cast<int64_t>(ensemble.size()), [&](int64_t i) {
    const GridFunction& f = ensemble[static_cast<size_t>(i)];
    const double den = lp_norm(f, cfg.p);
    if (den == 0.0) return;
    AverageFamily fam = family_apply(kernels, f, Exec::kSerial);
    SortedField vf = variation_field(fam, cfg.r);
    rep.ratios[static_cast<size_t>(i)] = lp_norm(vf, cfg.p) / den;
  });
  finish_report(rep);
  return rep;
}

Report jump_norm_experiment(const ExperimentConfig& cfg) {
  const LacunarySequence seq =
      lacunary_sequence(cfg.ratio, cfg.start, cfg.values, cfg.count);
  const std::vector<Kernel> kernels = build_family(cfg, seq);
  const std::vector<GridFunction> ensemble = make_ensemble(cfg.ensemble, cfg.form.n);

  Report rep = base_report(cfg, cfg.variety ? "variety_jump_norm" : "jump_norm", seq);
  rep.ratios.assign(ensemble.size(), 0.0);
  std::vector<int> widened(ensemble.size(), 0);
  parallel_for(cfg.exec, static_cast<int64_t>(ensemble.size()), [&](int64_t i) {
    const GridFunction& f = ensemble[static_cast<size_t>(i)];
    const double den = lp_norm(f, cfg.p);
    if (den == 0.0) return;
    AverageFamily fam = family_apply(kernels, f, Exec::kSerial);

    double best = 0.0;
    if (!cfg.jump_grid.empty()) {
      for (double v : jump_functional(fam, cfg.jump_grid, cfg.p)) best = std::max(best, v);
    } else {
      double amp = 0.0;
      for (const SortedField& g : fam.averaged) amp = std::max(amp, g.max_abs());
      if (amp == 0.0) return;
      // dyadic sweep lambda = amp 2^{-t}; widen while the sup sits on an edge;
      // each contiguous batch shares one pass over the family
      int best_t = 0;
      auto take_range = [&](int t0, int t1) {
        std::vector<double> thresholds;
        for (int t = t0; t <= t1; ++t) thresholds.push_back(amp * std::ldexp(1.0, -t));
        const std::vector<double> vals = jump_functional(fam, thresholds, cfg.p);
        for (int t = t0; t <= t1; ++t) {
          const double v = vals[static_cast<size_t>(t - t0)];
          if (v > best) {
            best = v;
            best_t = t;
          }
        }
      };
      int lo = 0, hi = 6;
      take_range(lo, hi);
      while (best > 0.0 && (best_t == lo || best_t == hi) && hi - lo < 16) {
        widened[static_cast<size_t>(i)] = 1;
        if (best_t == lo) {
          take_range(lo - 2, lo - 1);
          lo -= 2;
        } else {
          take_range(hi + 1, hi + 2);
          hi += 2;
        }
      }
    }
    rep.ratios[static_cast<size_t>(i)] = best / den;
  });
  const int64_t wide = std::count(widened.begin(), widened.end(), 1);
  if (wide > 0) {
    rep.notes.push_back("sweep widened for " + std::to_string(wide) + " members");
  }
  finish_report(rep);
  return rep;
}

Report variety_experiment(const ExperimentConfig& cfg) {
  ExperimentConfig vc = cfg;
  vc.variety = true;
  return variation_norm_experiment(vc);
}

BridgeResult jump_bridge_check(const std::vector<SampleSequence>& seqs, double r) {
  require(r > 2.0, "bridge holds for r > 2");
  BridgeResult out;
  out.r = r;
  out.levels = 24;
  out.ratios.reserve(seqs.size());
  for (const SampleSequence& seq : seqs) {
    const double amp = variation_exact(seq, std::numeric_limits<double>::infinity()).value;
    if (amp == 0.0) {
      out.ratios.push_back(0.0);  // constant sequence, 0/0 read as 0
      continue;
    }
    double agg2 = 0.0;
    for (int k = 0; k < out.levels; ++k) {
      const double lam = amp * std::ldexp(1.0, -k);
      const int64_t c = jump_count(seq, lam).count;
      agg2 += lam * lam * double(c);
    }
    const double vr = variation_exact(seq, r).value;
    out.ratios.push_back(vr / std::sqrt(agg2));
  }
  for (double v : out.ratios) out.max_ratio = std::max(out.max_ratio, v);
  return out;
}

TransferenceReport ergodic_shift_demo(const ExperimentConfig& cfg) {
  require(!cfg.variety, "the transference demo needs the symmetric form average");
  const LacunarySequence seq =
      lacunary_sequence(cfg.ratio, cfg.start, cfg.values, cfg.count);
  const std::vector<Kernel> kernels = form_kernel_family(
      cfg.form, seq, cfg.cutoff, Kernel::Normalization::kByCount, cfg.enum_opts);
  const int n = cfg.form.n;
  const int64_t W = cfg.window;
  require(W >= 4, "window radius too small");

  int64_t s_max = 0;
  for (const Kernel& k : kernels) {
    const int64_t s = k.support_linf();
    require(2 * n * s <= W, "window too small for the average's support");
    s_max = std::max(s_max, s);
    for (size_t i = 0; i < k.points.size(); ++i) {
      Point neg = Point::zero(n);
      for (int c = 0; c < n; ++c) {
        neg.c[static_cast<size_t>(c)] = static_cast<int32_t>(-k.points[i].c[static_cast<size_t>(c)]);
      }
      auto it = k.lookup.find(neg);
      require(it != k.lookup.end() && it->second == k.weights[i],
              "transference needs a sign-symmetric kernel");
    }
  }

  TransferenceReport rep;
  rep.config_hash = cfg.hash();
  rep.window = W;
  rep.lambdas = seq.lambdas;
  for (const Kernel& k : kernels) {
    for (size_t i = 1; i < k.weights.size(); ++i) {
      if (k.weights[i] != k.weights[0]) rep.int_path_available = false;
    }
  }

  for (int cs = 0; cs < cfg.cases; ++cs) {
    RngStream rng(cfg.ensemble.seed, "transfer", static_cast<uint64_t>(cs));
    GridFunction f(n);
    for (int s = 0; s < cfg.ensemble.support; ++s) {
      Point p = Point::zero(n);
      for (int c = 0; c < n; ++c) {
        p.c[static_cast<size_t>(c)] = static_cast<int32_t>(rng.uniform_int(-W / 2, W / 2));
      }
      f.set(p, cplx{rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0, 0.0});
    }
    Point x = Point::zero(n);
    for (int c = 0; c < n; ++c) {
      x.c[static_cast<size_t>(c)] = static_cast<int32_t>(rng.uniform_int(-W / 4, W / 4));
    }

    // the windowed orbit sample: gamma(m) = f(T^m x) = f(x - m)
    GridFunction gamma(n);
    for (const Point& p : f.sorted_support()) {
      const Point m = x - p;
      bool inside = true;
      for (int c = 0; c < n; ++c) {
        if (std::llabs(m.c[static_cast<size_t>(c)]) > W) inside = false;
      }
      if (inside) gamma.set(m, f.at(p));
    }

    TransferenceCase row;
    row.member = static_cast<uint64_t>(cs);
    row.lambda = seq.lambdas.back();
    row.probes = cfg.probes;
    for (int pr = 0; pr < cfg.probes; ++pr) {
      Point m = Point::zero(n);
      const int64_t reach = W - s_max;
      for (int c = 0; c < n; ++c) {
        m.c[static_cast<size_t>(c)] = static_cast<int32_t>(rng.uniform_int(-reach, reach));
      }
      SampleSequence seq_orbit, seq_window;
      for (const Kernel& k : kernels) {
        if (rep.int_path_available) {
          int64_t sum_orbit = 0, sum_window = 0;
          for (const Point& q : k.points) {
            sum_orbit += std::llround(f.at(x - m - q).real());
            sum_window += std::llround(gamma.at(m - q).real());
          }
          if (sum_orbit != sum_window) row.int_exact = false;
        }
        const cplx a = apply_kernel_at(k, f, x - m);
        const cplx b = apply_kernel_at(k, gamma, m);
        row.max_float_diff = std::max(row.max_float_diff, std::abs(a - b));
        seq_orbit.index.push_back(double(k.lambda));
        seq_orbit.value.push_back(a);
        seq_window.index.push_back(double(k.lambda));
        seq_window.value.push_back(b);
      }
      const double va = variation_exact(seq_orbit, cfg.r).value;
      const double vb = variation_exact(seq_window, cfg.r).value;
      row.max_variation_diff = std::max(row.max_variation_diff, std::abs(va - vb));
    }
    rep.all_int_exact = rep.all_int_exact && row.int_exact;
    rep.max_float_diff = std::max(rep.max_float_diff, row.max_float_diff);
    rep.max_variation_diff = std::max(rep.max_variation_diff, row.max_variation_diff);
    rep.cases.push_back(row);
  }
  if (!rep.int_path_available) rep.all_int_exact = false;
  return rep;
}

LineFit decay_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() >= 3, "decay fit needs at least 3 points");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < xs.size(); ++i) {
    require(xs[i] > 0.0 && ys[i] > 0.0, "decay fit needs positive data");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  return fit_line(lx, ly);
}

}  // namespace latvar
