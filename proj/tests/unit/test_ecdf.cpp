#include <gtest/gtest.h>

#include <cstring>
#include <limits>

#include "medpoc/ecdf.hpp"
#include "medpoc/rng.hpp"

using namespace medpoc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool below(double v, double t, Strictness s) { return s == Strictness::strict ? v < t : v <= t; }

// Row-by-row counting, independent of the sorted-cell implementation.
struct Brute {
  const Dataset& d;

  double cdf_x(double y, double x, Strictness s) const {
    double hit = 0, n = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.x()[i] != x) continue;
      ++n;
      hit += below(d.y()[i], y, s);
    }
    return hit / n;
  }
  double cdf_xm(double y, double x, double m, Strictness s) const {
    double hit = 0, n = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.x()[i] != x || d.m()[i] != m) continue;
      ++n;
      hit += below(d.y()[i], y, s);
    }
    return hit / n;
  }
  double pmf(double m, double x) const {
    double hit = 0, n = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.x()[i] != x) continue;
      ++n;
      hit += d.m()[i] == m;
    }
    return hit / n;
  }
  double joint(double y, double m, double x, Strictness sy, Strictness sm) const {
    double hit = 0, n = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.x()[i] != x) continue;
      ++n;
      hit += below(d.y()[i], y, sy) && below(d.m()[i], m, sm);
    }
    return hit / n;
  }
  double uni(double y, double m, double x) const {
    double hit = 0, n = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.x()[i] != x) continue;
      ++n;
      hit += d.y()[i] < y || d.m()[i] < m;
    }
    return hit / n;
  }
  double rho(double y, double xb, double xa) const {
    double total = 0;
    for (double m : {0.0, 1.0, 2.0}) {
      const double p = pmf(m, xa);
      if (p > 0) total += cdf_xm(y, xb, m, Strictness::strict) * p;
    }
    return total;
  }
};

Dataset make_random_data(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> x(n), m(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(rng.below(2));
    m[i] = static_cast<double>(rng.below(3));
    y[i] = static_cast<double>(rng.below(5)) * 0.5;
  }
  return Dataset(Schema{}, x, m, y);
}

}  // namespace

TEST(EmpiricalCdf, MatchesRowCounting) {
  const Dataset d = make_random_data(11, 400);
  const EmpiricalCdf e(d);
  const Brute b{d};
  for (double x : {0.0, 1.0}) {
    for (double y : {-1.0, 0.0, 0.25, 0.5, 1.0, 2.0, 3.0}) {
      for (auto s : {Strictness::strict, Strictness::inclusive}) {
        EXPECT_DOUBLE_EQ(e.cdf_y_given_x(y, x, s), b.cdf_x(y, x, s));
        for (double m : {0.0, 1.0, 2.0}) {
          EXPECT_DOUBLE_EQ(e.cdf_y_given_xm(y, x, m, s), b.cdf_xm(y, x, m, s));
          for (auto sm : {Strictness::strict, Strictness::inclusive}) {
            EXPECT_DOUBLE_EQ(e.joint_cdf_ym_given_x(y, m, x, s, sm), b.joint(y, m, x, s, sm));
          }
        }
      }
      for (double m : {-1.0, 0.0, 1.0, 2.0, 2.5}) {
        EXPECT_NEAR(e.union_cdf_ym_given_x(y, m, x), b.uni(y, m, x), 1e-15);
      }
      for (double xa : {0.0, 1.0}) EXPECT_NEAR(e.rho(y, x, xa), b.rho(y, x, xa), 1e-15);
    }
    for (double m : {0.0, 1.0, 2.0}) EXPECT_DOUBLE_EQ(e.mediator_pmf(m, x), b.pmf(m, x));
    EXPECT_EQ(e.mediator_support(x), (std::vector<double>{0, 1, 2}));
  }
  EXPECT_EQ(e.treatment_support(), (std::vector<double>{0, 1}));
}

TEST(EmpiricalCdf, RhoOnTheSameTreatmentIsBitwiseTheCdf) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = make_random_data(seed, 37 + seed * 13);
    const EmpiricalCdf e(d);
    for (double y : {0.0, 0.5, 1.0, 1.5, 2.0, 9.0}) {
      for (double x : {0.0, 1.0}) {
        const double r = e.rho(y, x, x);
        const double c = e.cdf_y_given_x(y, x, Strictness::strict);
        EXPECT_EQ(std::memcmp(&r, &c, sizeof r), 0) << "seed " << seed << " y " << y;
      }
    }
  }
}

TEST(EmpiricalCdf, InfiniteThresholds) {
  const Dataset d = make_random_data(3, 50);
  const EmpiricalCdf e(d);
  for (auto s : {Strictness::strict, Strictness::inclusive}) {
    EXPECT_EQ(e.cdf_y_given_x(kInf, 0.0, s), 1.0);
    EXPECT_EQ(e.cdf_y_given_x(-kInf, 0.0, s), 0.0);
    EXPECT_EQ(e.joint_cdf_ym_given_x(kInf, kInf, 1.0, s, s), 1.0);
  }
  EXPECT_EQ(e.union_cdf_ym_given_x(-kInf, -kInf, 1.0), 0.0);
  EXPECT_EQ(e.union_cdf_ym_given_x(kInf, -kInf, 1.0), 1.0);
}

TEST(EmpiricalCdf, EmptyCellsRaisePositivity) {
  const Dataset d(Schema{}, {0, 0, 1}, {0, 1, 0}, {1, 0, 1});
  const EmpiricalCdf e(d);
  EXPECT_THROW(e.cdf_y_given_x(1.0, 2.0, Strictness::strict), PositivityError);
  EXPECT_THROW(e.cdf_y_given_xm(1.0, 1.0, 1.0, Strictness::strict), PositivityError);
  EXPECT_EQ(e.mediator_pmf(1.0, 1.0), 0.0);
  // rho needs every mediator level seen under x_alt to exist under x_base.
  EXPECT_NO_THROW(e.rho(1.0, 0.0, 1.0));
  EXPECT_THROW(e.rho(1.0, 1.0, 0.0), PositivityError);
  EXPECT_EQ(e.count(0.0), 2u);
  EXPECT_EQ(e.count(1.0, 1.0), 0u);
}

TEST(CountBelow, StrictAndInclusive) {
  const std::vector<double> ys{1, 2, 2, 3};
  EXPECT_EQ(count_below(ys, 2, Strictness::strict), 1u);
  EXPECT_EQ(count_below(ys, 2, Strictness::inclusive), 3u);
  EXPECT_EQ(count_below(ys, kInf, Strictness::strict), 4u);
  EXPECT_EQ(count_below(ys, -kInf, Strictness::inclusive), 0u);
  EXPECT_EQ(count_below({}, 1.0, Strictness::strict), 0u);
}
