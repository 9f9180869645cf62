#include <doctest.h>

#include <cmath>
#include <limits>

#include "latvar/seminorms.hpp"

using namespace latvar;

namespace {


SampleSequence random_sequence(uint64_t counter, int len) {
  RngStream rng(11, "seminorm-test", counter);
  std::vector<double> vals;
  vals.reserve(size_t(len));
  for (int i = 0; i < len; ++i) vals.push_back(rng.uniform(-2.0, 2.0));
  return SampleSequence::from_reals(vals);
}

}  // namespace

TEST_SUITE("seminorms") {
  TEST_CASE("variation of the alternating sequence") {
    const SampleSequence seq = SampleSequence::from_reals({0.0, 1.0, 0.0, 1.0});
    const VariationResult v1 = variation_exact(seq, 1.0);
    CHECK(v1.value == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(v1.witness == std::vector<int>{0, 1, 2, 3});
    const VariationResult vinf = variation_exact(seq, kInf);
    CHECK(vinf.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(variation_exact(seq, 3.0).value == doctest::Approx(std::cbrt(3.0)).epsilon(1e-15));
  }

  TEST_CASE("variation picks the best subsequence, not all samples") {
    // skipping the middle point beats taking every step at r=2
    const SampleSequence seq = SampleSequence::from_reals({0.0, 1.0, 3.0});
    const VariationResult v = variation_exact(seq, 2.0);
    CHECK(v.value == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(v.witness == std::vector<int>{0, 2});
  }

  TEST_CASE("dynamic program matches the exhaustive oracle") {
    const double rs[] = {1.0, 1.5, 2.0, 3.0, kInf};
    for (uint64_t t = 0; t < 60; ++t) {
      RngStream lenrng(7, "seminorm-len", t);
      const int len = int(lenrng.uniform_int(2, 9));
      const SampleSequence seq = random_sequence(t, len);
      for (double r : rs) {
        const VariationResult a = variation_exact(seq, r);
        const VariationResult b = variation_bruteforce(seq, r);
        CHECK(std::abs(a.value - b.value) < 1e-10);
        CHECK(variation_value(seq, r) == a.value);  // bitwise, same arithmetic
      }
    }
  }

  TEST_CASE("variation is nonincreasing in r and homogeneous") {
    for (uint64_t t = 0; t < 20; ++t) {
      const SampleSequence seq = random_sequence(100 + t, 10);
      double prev = kInf;
      for (double r : {1.0, 1.3, 2.0, 4.0, kInf}) {
        const double v = variation_exact(seq, r).value;
        CHECK(v <= prev + 1e-12);
        prev = v;
      }
      SampleSequence scaled = seq;
      for (cplx& z : scaled.value) z *= -2.5;
      CHECK(variation_exact(scaled, 3.0).value ==
            doctest::Approx(2.5 * variation_exact(seq, 3.0).value).epsilon(1e-12));
    }
  }

  TEST_CASE("unordered sample parameters are rejected") {
    SampleSequence seq;
    seq.index = {0.0, 2.0, 1.0};
    seq.value = {cplx{0, 0}, cplx{1, 0}, cplx{2, 0}};
    CHECK_THROWS_AS(seq.validate(), ValidationError);
    CHECK_THROWS_AS(variation_exact(seq, 2.0), ValidationError);
    const SampleSequence ok = SampleSequence::from_reals({1.0});
    CHECK(variation_exact(ok, 2.0).value == 0.0);
  }

  TEST_CASE("jump count of the alternating sequence") {
    const SampleSequence seq = SampleSequence::from_reals({0.0, 2.0, 0.0, 2.0});
    const JumpResult j = jump_count(seq, 1.0);
    CHECK(j.count == 3);
    REQUIRE(j.witness.size() == 3);
    CHECK(j.witness[0] == std::pair<int, int>{0, 1});
    CHECK(jump_count(seq, 2.0).count == 0);  // strict exceedance
    CHECK(jump_count(seq, 1.9).count == 3);
  }

  TEST_CASE("greedy jump scan matches the exhaustive oracle") {
    for (uint64_t t = 0; t < 60; ++t) {
      RngStream lenrng(7, "jump-len", t);
      const int len = int(lenrng.uniform_int(2, 10));
      const SampleSequence seq = random_sequence(200 + t, len);
      for (double lam : {0.5, 1.0, 2.0}) {
        const int64_t greedy = jump_count(seq, lam).count;
        CHECK(greedy == jump_bruteforce(seq, lam).count);
        CHECK(jump_count_value(seq, lam) == greedy);
      }
    }
  }

  TEST_CASE("jump count is nonincreasing in lambda") {
    for (uint64_t t = 0; t < 20; ++t) {
      const SampleSequence seq = random_sequence(300 + t, 12);
      int64_t prev = std::numeric_limits<int64_t>::max();
      for (double lam : {0.1, 0.3, 0.8, 1.5, 3.0}) {
        const int64_t c = jump_count(seq, lam).count;
        CHECK(c <= prev);
        prev = c;
      }
    }
  }

  TEST_CASE("fields match per-point recomputation over the family") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    const LacunarySequence lac = lacunary_from_list(2.0, RegularValueSet::naturals(), {2, 4, 8, 16});
    const std::vector<Kernel> kernels =
        form_kernel_family(two, lac, Cutoff(), Kernel::Normalization::kByCount);
    RngStream rng(21, "field-test", 0);
    GridFunction f(2);
    for (int i = 0; i < 15; ++i) {
      f.add(Point::of({int32_t(rng.uniform_int(-5, 5)), int32_t(rng.uniform_int(-5, 5))}),
            rng.gaussian_cplx());
    }
    const AverageFamily fam = family_apply(kernels, f);
    const SortedField vf = variation_field(fam, 2.0);
    const SortedField jf = jump_field(fam, 0.05);
    const std::vector<Point> support = family_support(fam);
    for (size_t i = 0; i < support.size(); i += 7) {
      const SampleSequence seq = family_sequence_at(fam, support[i]);
      CHECK(std::abs(vf.at(support[i]).real() - variation_exact(seq, 2.0).value) < 1e-12);
      CHECK(std::abs(jf.at(support[i]).real() - double(jump_count(seq, 0.05).count)) < 1e-12);
    }
  }

  TEST_CASE("jump functional aggregates the field in p-norm") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    const LacunarySequence lac = lacunary_from_list(2.0, RegularValueSet::naturals(), {2, 5, 10});
    const std::vector<Kernel> kernels =
        form_kernel_family(two, lac, Cutoff(), Kernel::Normalization::kByCount);
    GridFunction f(2);
    f.set(Point::zero(2), cplx{1.0, 0.0});
    f.set(Point::of({1, -2}), cplx{0.0, -1.0});
    const AverageFamily fam = family_apply(kernels, f);
    const double lam = 0.03;
    const SortedField jf = jump_field(fam, lam);
    double acc = 0.0;
    for (const cplx& v : jf.values) acc += v.real();  // counts
    const double manual = lam * std::sqrt(acc);       // p=2: sqrt of summed counts
    CHECK(jump_functional(fam, lam, 2.0) == doctest::Approx(manual).epsilon(1e-12));
  }

  TEST_CASE("lp norms agree with the dedicated accessors") {
    GridFunction f(3);
    RngStream rng(31, "lp-test", 0);
    for (int i = 0; i < 10; ++i) {
      f.add(Point::of({int32_t(rng.uniform_int(-3, 3)), int32_t(rng.uniform_int(-3, 3)),
                       int32_t(rng.uniform_int(-3, 3))}),
            rng.gaussian_cplx());
    }
    CHECK(lp_norm(f, 2.0) == doctest::Approx(f.l2norm()).epsilon(1e-12));
    CHECK(lp_norm(f, kInf) == doctest::Approx(f.max_abs()).epsilon(1e-12));
    const SortedField s = SortedField::from_grid(f);
    CHECK(lp_norm(s, 2.0) == doctest::Approx(s.l2norm()).epsilon(1e-12));
    CHECK(lp_norm(s, kInf) == doctest::Approx(s.max_abs()).epsilon(1e-12));
    CHECK_THROWS_AS(lp_norm(f, 0.5), ValidationError);
  }
}
