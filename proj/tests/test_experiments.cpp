#include <doctest.h>

#include <cmath>
#include <limits>

#include "latvar/experiments.hpp"

using namespace latvar;

namespace {


ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.form = IntegralForm::diagonal_form({1, 1}, 2);
  cfg.start = 2;
  cfg.count = 3;
  cfg.ensemble.kind = EnsembleKind::kRandomSparse;
  cfg.ensemble.members = 4;
  cfg.ensemble.support = 10;
  cfg.ensemble.box_radius = 5;
  cfg.ensemble.seed = 7;
  return cfg;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("ensembles are deterministic and prefix-stable") {
    EnsembleSpec spec;
    spec.members = 8;
    spec.support = 6;
    spec.seed = 3;
    const std::vector<GridFunction> a = make_ensemble(spec, 2);
    const std::vector<GridFunction> b = make_ensemble(spec, 2);
    REQUIRE(a.size() == 8);
    for (size_t i = 0; i < a.size(); ++i) CHECK(max_abs_diff(a[i], b[i]) == 0.0);

    spec.members = 4;
    const std::vector<GridFunction> prefix = make_ensemble(spec, 2);
    for (size_t i = 0; i < prefix.size(); ++i) CHECK(max_abs_diff(a[i], prefix[i]) == 0.0);
  }

  TEST_CASE("ensemble kinds produce the advertised shapes") {
    EnsembleSpec spec;
    spec.members = 2;
    spec.box_radius = 2;

    spec.kind = EnsembleKind::kDelta;
    const std::vector<GridFunction> deltas = make_ensemble(spec, 2);
    CHECK(deltas[0].support_size() == 1);
    CHECK(std::abs(deltas[0].at(Point::zero(2)) - cplx{1.0, 0.0}) == 0.0);

    spec.kind = EnsembleKind::kRademacherBox;
    const std::vector<GridFunction> boxes = make_ensemble(spec, 2);
    CHECK(boxes[0].support_size() == 25);
    for (const Point& p : boxes[0].sorted_support()) {
      const cplx v = boxes[0].at(p);
      CHECK(std::abs(std::abs(v.real()) - 1.0) < 1e-15);
      CHECK(v.imag() == 0.0);
    }

    spec.kind = EnsembleKind::kWavePacket;
    const std::vector<GridFunction> packets = make_ensemble(spec, 2);
    CHECK(packets[0].support_size() > 0);
    CHECK(packets[0].max_abs() <= 1.0 + 1e-12);

    CHECK(std::string(ensemble_kind_name(EnsembleKind::kWavePacket)) == "wave_packet");
    CHECK(ensemble_kind_from_name("rademacher_box") == EnsembleKind::kRademacherBox);
    CHECK_THROWS_AS(ensemble_kind_from_name("nonsense"), ValidationError);
  }

  TEST_CASE("config hashes react to every field") {
    ExperimentConfig base = small_config();
    const uint64_t h0 = base.hash();
    CHECK(h0 == small_config().hash());  // stable

    ExperimentConfig mod = small_config();
    mod.r = 4.0;
    CHECK(mod.hash() != h0);
    mod = small_config();
    mod.ensemble.seed = 8;
    CHECK(mod.hash() != h0);
    mod = small_config();
    mod.variety = true;
    CHECK(mod.hash() != h0);
    // canonical text mentions keys in sorted order
    const std::string text = base.canonical();
    CHECK(text.find("cases=") != std::string::npos);
    CHECK(text.find("window=") != std::string::npos);
    CHECK(text.find("cases=") < text.find("window="));
  }

  TEST_CASE("r-range flag follows the duality threshold") {
    ExperimentConfig cfg = small_config();
    cfg.p = 2.0;
    cfg.r = 3.0;
    CHECK(cfg.r_in_admissible_range());
    cfg.r = 2.0;
    CHECK_FALSE(cfg.r_in_admissible_range());  // needs r > max(p, p') = 2
    cfg.p = 4.0;
    cfg.r = 4.2;
    CHECK(cfg.r_in_admissible_range());
    cfg.p = 4.0 / 3.0;
    cfg.r = 4.2;
    CHECK(cfg.r_in_admissible_range());  // p' = 4
    cfg.r = 3.9;
    CHECK_FALSE(cfg.r_in_admissible_range());
  }

  TEST_CASE("variation experiment reports reproducible finite ratios") {
    const ExperimentConfig cfg = small_config();
    const Report rep = variation_norm_experiment(cfg);
    CHECK(rep.experiment == "variation_norm");
    CHECK(rep.config_hash == cfg.hash());
    REQUIRE(rep.ratios.size() == 4);
    REQUIRE(rep.lambdas.size() == 3);
    CHECK(rep.lambdas[0] == 2);
    for (double r : rep.ratios) {
      CHECK(std::isfinite(r));
      CHECK(r >= 0.0);
      CHECK(rep.max_ratio >= r);
    }
    CHECK(rep.median_ratio <= rep.max_ratio);
    CHECK(rep.q90_ratio <= rep.max_ratio);
    CHECK(rep.c_constant == doctest::Approx(1.0).epsilon(1e-12));  // two squares: c = 2/2
    CHECK(rep.r_range_ok);

    const Report again = variation_norm_experiment(cfg);
    CHECK(rep.to_text() == again.to_text());
  }

  TEST_CASE("a delta input yields a positive variation ratio") {
    ExperimentConfig cfg = small_config();
    cfg.ensemble.kind = EnsembleKind::kDelta;
    cfg.ensemble.members = 1;
    const Report rep = variation_norm_experiment(cfg);
    CHECK(rep.max_ratio > 0.0);
  }

  TEST_CASE("growing the ensemble can only raise the max ratio") {
    ExperimentConfig small = small_config();
    ExperimentConfig big = small_config();
    big.ensemble.members = 8;
    const Report rs = variation_norm_experiment(small);
    const Report rb = variation_norm_experiment(big);
    for (size_t i = 0; i < rs.ratios.size(); ++i) CHECK(rs.ratios[i] == rb.ratios[i]);
    CHECK(rb.max_ratio >= rs.max_ratio);
  }

  TEST_CASE("sup of the family dominates half the infinite variation") {
    const ExperimentConfig cfg = small_config();
    const LacunarySequence seq =
        lacunary_sequence(cfg.ratio, cfg.start, cfg.values, cfg.count);
    const std::vector<Kernel> kernels =
        form_kernel_family(cfg.form, seq, cfg.cutoff, Kernel::Normalization::kByCount);
    const std::vector<GridFunction> ens = make_ensemble(cfg.ensemble, cfg.form.n);
    const AverageFamily fam = family_apply(kernels, ens[0]);
    const SortedField vinf = variation_field(fam, kInf);
    const SortedField sup = family_sup_field(fam);
    for (size_t i = 0; i < vinf.size(); ++i) {
      CHECK(vinf.values[i].real() <= 2.0 * sup.at(vinf.points[i]).real() + 1e-12);
    }
  }

  TEST_CASE("jump experiment aggregates a pointwise-certified functional") {
    ExperimentConfig cfg = small_config();
    cfg.ensemble.members = 2;
    const Report rep = jump_norm_experiment(cfg);
    CHECK(rep.experiment == "jump_norm");
    REQUIRE(rep.ratios.size() == 2);
    for (double r : rep.ratios) CHECK(std::isfinite(r));

    // lambda^2 N_lambda <= 4 sum_l |A_l f|^2 pointwise, any lambda > 0
    const LacunarySequence seq =
        lacunary_sequence(cfg.ratio, cfg.start, cfg.values, cfg.count);
    const std::vector<Kernel> kernels =
        form_kernel_family(cfg.form, seq, cfg.cutoff, Kernel::Normalization::kByCount);
    const std::vector<GridFunction> ens = make_ensemble(cfg.ensemble, cfg.form.n);
    const AverageFamily fam = family_apply(kernels, ens[0]);
    for (double lam : {0.01, 0.05, 0.2}) {
      const SortedField jf = jump_field(fam, lam);
      for (size_t i = 0; i < jf.size(); ++i) {
        const SampleSequence seq_at = family_sequence_at(fam, jf.points[i]);
        double ss = 0.0;
        for (const cplx& v : seq_at.value) ss += std::norm(v);
        CHECK(lam * lam * jf.values[i].real() <= 4.0 * ss + 1e-12);
      }
    }
  }

  TEST_CASE("fixed jump grids are honored") {
    ExperimentConfig cfg = small_config();
    cfg.ensemble.members = 2;
    cfg.jump_grid = {0.05, 0.1};
    const Report rep = jump_norm_experiment(cfg);
    REQUIRE(rep.ratios.size() == 2);
    for (double r : rep.ratios) CHECK(std::isfinite(r));
  }

  TEST_CASE("variety experiment forces the variety flag") {
    ExperimentConfig cfg;
    cfg.form = IntegralForm::diagonal_form({1, 1, 1, 1, -1}, 2);
    cfg.form.rank_override = 4;
    cfg.ratio = 1.5;
    cfg.start = 2;
    cfg.count = 3;
    cfg.ensemble.members = 2;
    cfg.ensemble.support = 6;
    cfg.ensemble.box_radius = 4;
    const Report rep = variety_experiment(cfg);
    CHECK(rep.experiment == "variety_variation_norm");
    for (double r : rep.ratios) {
      CHECK(std::isfinite(r));
      CHECK(r >= 0.0);
    }
  }

  TEST_CASE("bridge ratios freeze on known sequences") {
    const SampleSequence constant = SampleSequence::from_reals({1.0, 1.0, 1.0});
    const SampleSequence alternating = SampleSequence::from_reals({0.0, 1.0, 0.0, 1.0});
    const BridgeResult out = jump_bridge_check({constant, alternating}, 3.0);
    REQUIRE(out.ratios.size() == 2);
    CHECK(out.ratios[0] == 0.0);
    // V_3 = 3^{1/3}; levels lambda_k = 2^{-k}: three jumps at every k >= 1,
    // none at k = 0, so agg^2 = 3 sum_{k>=1} 4^{-k} = (1 - 4^{-23})
    const double agg = std::sqrt(1.0 - std::pow(0.25, 23));
    CHECK(out.ratios[1] == doctest::Approx(std::cbrt(3.0) / agg).epsilon(1e-9));
    CHECK(out.max_ratio == doctest::Approx(out.ratios[1]).epsilon(1e-15));
    CHECK(out.levels == 24);
    CHECK_THROWS_AS(jump_bridge_check({constant}, 2.0), ValidationError);  // needs r > 2
  }

  TEST_CASE("bridge ratios stay bounded on random sequences") {
    std::vector<SampleSequence> seqs;
    for (uint64_t t = 0; t < 12; ++t) {
      RngStream rng(13, "bridge-test", t);
      std::vector<double> vals;
      const int len = 8 + int(t % 5);
      for (int i = 0; i < len; ++i) vals.push_back(rng.uniform(-1.0, 1.0));
      seqs.push_back(SampleSequence::from_reals(vals));
    }
    const BridgeResult out = jump_bridge_check(seqs, 3.0);
    for (double r : out.ratios) {
      CHECK(std::isfinite(r));
      CHECK(r >= 0.0);
    }
    CHECK(out.max_ratio < 50.0);
  }

  TEST_CASE("shift transference is exact on the valid window") {
    ExperimentConfig cfg;
    cfg.form = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
    cfg.start = 1;
    cfg.count = 3;  // lambdas 1, 2, 4; support radius <= 2.4 sqrt(4) < 5
    cfg.window = 32;
    cfg.cases = 5;
    cfg.probes = 8;
    const TransferenceReport rep = ergodic_shift_demo(cfg);
    CHECK(rep.window == 32);
    REQUIRE(rep.cases.size() == 5);
    CHECK(rep.all_int_exact);
    CHECK(rep.int_path_available);
    CHECK(rep.max_float_diff <= 1e-12);
    CHECK(rep.max_variation_diff <= 1e-12);

    ExperimentConfig wide = cfg;
    wide.count = 5;  // reaches lambda = 16: support 2.4 * 4 * 2 * 5 > 32
    CHECK_THROWS_AS(ergodic_shift_demo(wide), ValidationError);
  }

  TEST_CASE("log-log fits recover exact power laws") {
    const std::vector<double> xs = {1.0, 2.0, 4.0, 8.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(5.0 / (x * x));
    const LineFit fit = decay_fit(xs, ys);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.max_abs_residual < 1e-12);

    const LineFit flat = decay_fit(xs, {3.0, 3.0, 3.0, 3.0});
    CHECK(flat.slope == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(decay_fit({1.0, 2.0}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(decay_fit(xs, {1.0, -1.0, 1.0, 1.0}), ValidationError);
  }
}
