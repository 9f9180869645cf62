#include <doctest.h>

#include <cmath>

#include "latvar/ops.hpp"

using namespace latvar;

namespace {

GridFunction random_sparse(int n, int count, int radius, uint64_t counter) {
  RngStream rng(5, "ops-test", counter);
  GridFunction f(n);
  for (int i = 0; i < count; ++i) {
    Point p = Point::zero(n);
    for (int c = 0; c < n; ++c) {
      p.c[size_t(c)] = static_cast<int32_t>(rng.uniform_int(-radius, radius));
    }
    f.add(p, rng.gaussian_cplx());
  }
  return f;
}

}  // namespace

TEST_SUITE("ops") {
  TEST_CASE("by-count kernels have unit mass") {
    const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
    const Kernel k = make_form_kernel(five, 25, Cutoff(), Kernel::Normalization::kByCount);
    CHECK(k.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k.lambda == 25);
    for (size_t i = 1; i < k.points.size(); ++i) CHECK(k.points[i - 1] < k.points[i]);
  }

  TEST_CASE("by-power kernels divide by the count scale") {
    const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
    const SolutionSet sol = enumerate_solutions(five, 25, Cutoff());
    const Kernel k = make_form_kernel(five, 25, Cutoff(), Kernel::Normalization::kByPower);
    // lambda^{n/d - 1} = 25^{3/2} = 125
    CHECK(k.mass() == doctest::Approx(sol.weighted_count / 125.0).epsilon(1e-12));
  }

  TEST_CASE("empty level sets are rejected for by-count kernels") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    CHECK_THROWS_AS(make_form_kernel(two, 3, Cutoff(), Kernel::Normalization::kByCount),
                    ValidationError);
  }

  TEST_CASE("convolving the delta recovers the kernel") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    const Kernel k = make_form_kernel(two, 25, Cutoff(), Kernel::Normalization::kByCount);
    GridFunction delta(2);
    delta.set(Point::zero(2), cplx{1.0, 0.0});
    const SortedField out = apply_kernel(k, delta);
    REQUIRE(out.size() == k.points.size());
    for (size_t i = 0; i < out.size(); ++i) {
      CHECK(out.points[i] == k.points[i]);
      CHECK(std::abs(out.values[i] - cplx{k.weights[i], 0.0}) < 1e-15);
    }
  }

  TEST_CASE("merge convolution matches the hash-scatter reference") {
    const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
    const Kernel k = make_form_kernel(five, 30, Cutoff(), Kernel::Normalization::kByCount);
    for (uint64_t trial = 0; trial < 4; ++trial) {
      const GridFunction f = random_sparse(5, 20, 8, trial);
      const SortedField merged = apply_kernel(k, f);
      const SortedField ref = apply_kernel_reference(k, f);
      REQUIRE(merged.points == ref.points);
      double gap = 0.0;
      for (size_t i = 0; i < merged.size(); ++i) {
        gap = std::max(gap, std::abs(merged.values[i] - ref.values[i]));
      }
      CHECK(gap < 1e-12);
    }
  }

  TEST_CASE("convolution output is identical for any thread count") {
    const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
    const Kernel k = make_form_kernel(five, 40, Cutoff(), Kernel::Normalization::kByCount);
    const GridFunction f = random_sparse(5, 30, 10, 99);
    const SortedField serial = apply_kernel(k, f, Exec::kSerial);
    const SortedField parallel = apply_kernel(k, f, Exec::kParallel);
    CHECK(serial.points == parallel.points);
    CHECK(serial.values == parallel.values);  // bitwise
  }

  TEST_CASE("pointwise application matches the full field") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    const Kernel k = make_form_kernel(two, 10, Cutoff(), Kernel::Normalization::kByCount);
    const GridFunction f = random_sparse(2, 15, 6, 3);
    const SortedField field = apply_kernel(k, f);
    for (size_t i = 0; i < field.size(); i += 3) {
      const cplx direct = apply_kernel_at(k, f, field.points[i]);
      CHECK(std::abs(direct - field.values[i]) < 1e-12);
    }
    CHECK(std::abs(field.at(Point::of({1000, 1000}))) == 0.0);
  }

  TEST_CASE("grid and field application agree") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    const Kernel k = make_form_kernel(two, 5, Cutoff(), Kernel::Normalization::kByCount);
    const GridFunction f = random_sparse(2, 10, 5, 4);
    const GridFunction g = apply_kernel_grid(k, f);
    const SortedField s = apply_kernel(k, f);
    CHECK(max_abs_diff(g, s.to_grid()) == 0.0);
    const SortedField back = SortedField::from_grid(g);
    CHECK(back.points == s.points);
  }

  TEST_CASE("lacunary sequences freeze to known values") {
    CHECK(lacunary_sequence(2.0, 1, RegularValueSet::naturals(), 4).lambdas ==
          std::vector<int64_t>{1, 2, 4, 8});
    CHECK(lacunary_sequence(2.0, 1, RegularValueSet::progression(1, 3), 4).lambdas ==
          std::vector<int64_t>{1, 4, 10, 22});
    CHECK(lacunary_sequence(1.5, 4, RegularValueSet::naturals(), 3).lambdas ==
          std::vector<int64_t>{4, 6, 9});
  }

  TEST_CASE("lacunary validation rejects bad lists") {
    CHECK_THROWS_AS(lacunary_from_list(2.0, RegularValueSet::naturals(), {1, 2, 3}),
                    ValidationError);  // 3 < 2*2
    CHECK_THROWS_AS(lacunary_from_list(2.0, RegularValueSet::progression(1, 3), {1, 2}),
                    ValidationError);  // 2 not in the progression
    CHECK_THROWS_AS(lacunary_sequence(0.9, 1, RegularValueSet::naturals(), 3), ValidationError);
    const LacunarySequence ok = lacunary_from_list(2.0, RegularValueSet::naturals(), {3, 7, 15});
    CHECK(ok.lambdas.size() == 3);
  }

  TEST_CASE("family scan visits the union in order with aligned columns") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    const LacunarySequence seq = lacunary_from_list(2.0, RegularValueSet::naturals(), {2, 5, 10});
    const std::vector<Kernel> kernels =
        form_kernel_family(two, seq, Cutoff(), Kernel::Normalization::kByCount);
    const GridFunction f = random_sparse(2, 12, 5, 8);
    const AverageFamily fam = family_apply(kernels, f);

    Point prev = Point::zero(2);
    bool first = true;
    size_t visited = 0;
    double worst = 0.0;
    family_scan(fam, [&](const Point& x, const cplx* column) {
      if (!first) CHECK(prev < x);
      prev = x;
      first = false;
      ++visited;
      for (size_t l = 0; l < fam.lambdas.size(); ++l) {
        worst = std::max(worst, std::abs(column[l] - fam.averaged[l].at(x)));
      }
    });
    CHECK(visited > 0);
    CHECK(worst == 0.0);

    const SortedField sup = family_sup_field(fam);
    for (size_t i = 0; i < sup.size(); i += 5) {
      double m = 0.0;
      for (const SortedField& g : fam.averaged) m = std::max(m, std::abs(g.at(sup.points[i])));
      CHECK(sup.values[i].real() == doctest::Approx(m).epsilon(1e-15));
    }
  }

  TEST_CASE("variety kernels sit on the zero set") {
    const IntegralForm p = IntegralForm::diagonal_form({1, 1, 1, 1, -1}, 2);
    const Kernel k = make_variety_kernel(p, 8);
    CHECK(k.mass() == doctest::Approx(1.0).epsilon(1e-12));
    for (const Point& q : k.points) CHECK(eval_form(p, q) == 0);
  }
}
