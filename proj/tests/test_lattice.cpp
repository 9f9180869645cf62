#include <doctest.h>

#include <cmath>

#include "latvar/lattice.hpp"

using namespace latvar;

namespace {

int64_t box_scan_radius(const Cutoff& cutoff, int64_t lambda, int degree) {
  return static_cast<int64_t>(
             std::ceil(cutoff.r2 * std::pow(double(lambda), 1.0 / degree))) +
         1;
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("two-square counts match the classical values") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    const Cutoff cutoff;
    CHECK(enumerate_solutions(two, 25, cutoff).points.size() == 12);
    CHECK(enumerate_solutions(two, 3, cutoff).points.size() == 0);
    CHECK(enumerate_solutions(two, 2, cutoff).points.size() == 4);
  }

  TEST_CASE("four-square counts match the divisor-sum values") {
    const IntegralForm four = IntegralForm::diagonal_form({1, 1, 1, 1}, 2);
    const Cutoff cutoff;
    CHECK(enumerate_solutions(four, 1, cutoff).points.size() == 8);
    CHECK(enumerate_solutions(four, 2, cutoff).points.size() == 24);
  }

  TEST_CASE("solutions come back sorted with unit weights inside the plateau") {
    const IntegralForm two = IntegralForm::diagonal_form({1, 1}, 2);
    const SolutionSet sol = enumerate_solutions(two, 25, Cutoff());
    REQUIRE(sol.points.size() == 12);
    for (size_t i = 1; i < sol.points.size(); ++i) CHECK(sol.points[i - 1] < sol.points[i]);
    // every solution sits on |y| = 5 = 25^{1/2}, strictly inside the plateau
    CHECK(sol.weighted_count == doctest::Approx(12.0).epsilon(1e-12));
    for (double w : sol.weights) CHECK(w == 1.0);
  }

  TEST_CASE("meet-in-the-middle agrees with the box scan") {
    const Cutoff cutoff;
    for (const auto& coeffs : {std::vector<int64_t>{1, 1}, std::vector<int64_t>{1, 2}}) {
      const IntegralForm f = IntegralForm::diagonal_form(coeffs, 2);
      for (int64_t lam = 1; lam <= 30; ++lam) {
        const SolutionSet a = enumerate_solutions(f, lam, cutoff);
        const SolutionSet b =
            enumerate_box_scan(f, lam, cutoff, box_scan_radius(cutoff, lam, 2));
        CHECK(a.points == b.points);
      }
    }
    const IntegralForm quartic = IntegralForm::diagonal_form({1, 1}, 4);
    for (int64_t lam : {1, 2, 16, 17, 32, 81, 97, 626}) {
      const SolutionSet a = enumerate_solutions(quartic, lam, cutoff);
      const SolutionSet b =
          enumerate_box_scan(quartic, lam, cutoff, box_scan_radius(cutoff, lam, 4));
      CHECK(a.points == b.points);
    }
  }

  TEST_CASE("variety zero set of the shipped indefinite form") {
    const IntegralForm p = IntegralForm::diagonal_form({1, 1, 1, 1, -1}, 2);
    const SolutionSet z2 = enumerate_variety_zero(p, 2);
    REQUIRE(z2.points.size() == 1);
    CHECK(z2.points[0] == Point::of({1, 1, 1, 1, 2}));
    CHECK(enumerate_variety_zero(p, 1).points.size() == 0);
    // coordinates stay in [1, lambda]; the set grows with lambda
    const SolutionSet z8 = enumerate_variety_zero(p, 8);
    CHECK(z8.points.size() > z2.points.size());
    for (const Point& q : z8.points) {
      CHECK(eval_form(p, q) == 0);
      for (int i = 0; i < 5; ++i) {
        CHECK(q[i] >= 1);
        CHECK(q[i] <= 8);
      }
    }
  }

  TEST_CASE("variety enumeration matches a direct scan at small sizes") {
    const IntegralForm p = IntegralForm::diagonal_form({1, 1, 1, 1, -1}, 2);
    for (int64_t lam : {2, 3, 5, 8, 12}) {
      const SolutionSet fast = enumerate_variety_zero(p, lam);
      // direct odometer over [1, lam]^4 solving for the last coordinate
      std::vector<Point> slow;
      std::vector<int64_t> idx(4, 1);
      while (true) {
        int64_t s = 0;
        for (int64_t v : idx) s += v * v;
        const int64_t root = static_cast<int64_t>(std::llround(std::sqrt(double(s))));
        if (root >= 1 && root <= lam && root * root == s) {
          Point q = Point::zero(5);
          for (int i = 0; i < 4; ++i) q[i] = static_cast<int32_t>(idx[size_t(i)]);
          q[4] = static_cast<int32_t>(root);
          slow.push_back(q);
        }
        int i = 3;
        while (i >= 0) {
          if (++idx[size_t(i)] <= lam) break;
          idx[size_t(i)] = 1;
          --i;
        }
        if (i < 0) break;
      }
      std::sort(slow.begin(), slow.end());
      CHECK(fast.points == slow);
    }
  }

  TEST_CASE("counting function grows like the expected power") {
    const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
    const Cutoff cutoff;
    std::vector<int64_t> lambdas, counts;
    for (int e = 6; e <= 10; ++e) {
      const int64_t lam = int64_t(1) << e;
      lambdas.push_back(lam);
      counts.push_back(std::llround(counting_function(five, lam, cutoff)));
    }
    const LineFit fit = counting_exponent_fit(lambdas, counts);
    CHECK(std::abs(fit.slope - 1.5) < 0.1);
  }

  TEST_CASE("enumeration budgets bound the work") {
    const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
    EnumOptions opts;
    opts.max_points = 3;
    CHECK_THROWS_AS(enumerate_solutions(five, 100, Cutoff(), opts), BudgetError);
  }

  TEST_CASE("serial and parallel enumeration agree") {
    const IntegralForm five = IntegralForm::diagonal_form({1, 1, 1, 1, 1}, 2);
    EnumOptions serial;
    serial.exec = Exec::kSerial;
    EnumOptions parallel;
    parallel.exec = Exec::kParallel;
    const SolutionSet a = enumerate_solutions(five, 500, Cutoff(), serial);
    const SolutionSet b = enumerate_solutions(five, 500, Cutoff(), parallel);
    CHECK(a.points == b.points);
    CHECK(a.weights == b.weights);
  }
}
