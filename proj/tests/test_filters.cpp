#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dwdob/filters.hpp"

using namespace dwdob;

namespace {

constexpr double kDt = 1e-3;

FilterParams q15() { return {hz_to_rad(15.0), kDt}; }

// Steady-state amplitude of a filter driven by sin(2 pi f t).
template <typename Step>
double sine_gain(Step step, double hz, double seconds = 4.0) {
  const int n = static_cast<int>(seconds / kDt);
  double peak = 0.0;
  for (int k = 0; k < n; ++k) {
    const double y = step(std::sin(kTwoPi * hz * k * kDt));
    if (k > n / 2) peak = std::max(peak, std::abs(y));
  }
  return peak;
}

}  // namespace

TEST(Filters, LowpassStepFollowsFirstOrderLag) {
  FilterState s;
  const auto p = q15();
  lowpass_step(s, p, 0.0);
  double worst = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double y = lowpass_step(s, p, 1.0);
    // Tustin puts the step half a sample early.
    const double t = (k - 0.5) * kDt;
    worst = std::max(worst, std::abs(y - (1.0 - std::exp(-p.cutoff * t))));
  }
  EXPECT_LT(worst, 0.01);
}

TEST(Filters, LowpassHasUnitDcGainAndPassThroughStart) {
  FilterState s;
  EXPECT_EQ(lowpass_step(s, q15(), 3.5), 3.5);
  for (int k = 0; k < 100; ++k) EXPECT_DOUBLE_EQ(lowpass_step(s, q15(), 3.5), 3.5);
}

TEST(Filters, LowpassIsMonotoneForSteps) {
  FilterState s;
  lowpass_step(s, q15(), 0.0);
  double prev = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double y = lowpass_step(s, q15(), 2.0);
    EXPECT_GE(y, prev);
    EXPECT_LE(y, 2.0);
    prev = y;
  }
}

TEST(Filters, LowpassMinusThreeDecibelAtCutoff) {
  FilterState s;
  const double g = sine_gain([&](double u) { return lowpass_step(s, q15(), u); }, 15.0);
  EXPECT_NEAR(g, 1.0 / std::sqrt(2.0), 0.01 / std::sqrt(2.0));
}

TEST(Filters, DifferentiatorRampGainIsUnity) {
  FilterState s;
  const FilterParams p{hz_to_rad(15.0), kDt};
  double y = 0.0;
  for (int k = 0; k < 2000; ++k) y = filtered_diff_step(s, p, 0.7 * k * kDt);
  EXPECT_NEAR(y, 0.7, 0.007);
}

TEST(Filters, DifferentiatorKillsConstants) {
  FilterState s;
  const FilterParams p{hz_to_rad(15.0), kDt};
  EXPECT_EQ(filtered_diff_step(s, p, 4.0), 0.0);
  for (int k = 0; k < 100; ++k) {
    EXPECT_LT(std::abs(filtered_diff_step(s, p, 4.0)), 1e-6 * 4.0);
  }
}

TEST(Filters, DifferentiatorTracksSlowSine) {
  FilterState s;
  const FilterParams p{hz_to_rad(100.0), kDt};
  const double f = 1.0;
  double worst = 0.0;
  for (int k = 0; k < 3000; ++k) {
    const double t = k * kDt;
    const double y = filtered_diff_step(s, p, std::sin(kTwoPi * f * t));
    if (t > 0.5) {
      worst = std::max(worst, std::abs(y - kTwoPi * f * std::cos(kTwoPi * f * t)));
    }
  }
  // Phase lag of w/(s+w) at 1 Hz is ~0.01 rad.
  EXPECT_LT(worst, 0.02 * kTwoPi * f);
}

TEST(Filters, CompositePathsArePhaseAligned) {
  // Acceleration path on X = double integral of a, against L applied to a.
  const CompositeFilter c = default_composite(kDt);
  AccelerationPath accel(c);
  WrenchPath wrench(c);
  const double w1 = kTwoPi * 2.0, w2 = kTwoPi * 7.0;
  double err = 0.0, scale = 0.0;
  for (int k = 0; k < 4000; ++k) {
    const double t = k * kDt;
    Vector a(1), x(1);
    a << std::sin(w1 * t) + 0.5 * std::cos(w2 * t);
    x << -std::sin(w1 * t) / (w1 * w1) - 0.5 * std::cos(w2 * t) / (w2 * w2);
    const double lhs = accel.step(x)[0];
    const double rhs = wrench.step(a)[0];
    if (t > 1.0) {
      err = std::max(err, std::abs(lhs - rhs));
      scale = std::max(scale, std::abs(rhs));
    }
  }
  EXPECT_LT(err / scale, 1e-3);
}

TEST(Filters, AccelerationOfParabolaSettlesToConstant) {
  AccelerationPath accel(default_composite(kDt));
  Vector y;
  for (int k = 0; k < 1000; ++k) {
    const double t = k * kDt;
    Vector x(1);
    x << 0.5 * 3.0 * t * t;
    y = accel.step(x);
  }
  EXPECT_NEAR(y[0], 3.0, 0.02 * 3.0);
}

TEST(Filters, LowpassIsLinear) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  FilterState su, sv, sw;
  const double a = 1.7, b = -0.4;
  for (int k = 0; k < 1000; ++k) {
    const double u = n(rng), v = n(rng);
    const double yu = lowpass_step(su, q15(), u);
    const double yv = lowpass_step(sv, q15(), v);
    const double yw = lowpass_step(sw, q15(), a * u + b * v);
    EXPECT_NEAR(yw, a * yu + b * yv, 1e-12);
  }
}

TEST(Filters, DifferentiatorIsTimeInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> u{0.0};
  for (int k = 0; k < 500; ++k) u.push_back(n(rng));
  const FilterParams p{hz_to_rad(40.0), kDt};
  FilterState s1, s2;
  std::vector<double> y1, y2;
  for (double v : u) y1.push_back(filtered_diff_step(s1, p, v));
  const int shift = 37;
  for (int k = 0; k < shift; ++k) y2.push_back(filtered_diff_step(s2, p, 0.0));
  for (double v : u) y2.push_back(filtered_diff_step(s2, p, v));
  for (std::size_t k = 0; k < y1.size(); ++k) {
    EXPECT_NEAR(y1[k], y2[k + shift], 1e-12);
  }
}

TEST(Filters, BoundedInputGivesBoundedOutput) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const FilterParams p = q15();
  const double k = 2.0 / kDt;
  const double wa = k * std::tan(0.5 * p.cutoff * kDt);
  const double diff_bound = 2.0 * wa * k / (k + wa) / (1.0 - (k - wa) / (k + wa));
  FilterState lp, df;
  double lp_peak = 0.0, df_peak = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double v = u(rng);
    lp_peak = std::max(lp_peak, std::abs(lowpass_step(lp, p, v)));
    df_peak = std::max(df_peak, std::abs(filtered_diff_step(df, p, v)));
  }
  EXPECT_LE(lp_peak, 1.0 + 1e-12);
  EXPECT_LE(df_peak, diff_bound);
}

TEST(Filters, RejectsBadParameters) {
  EXPECT_THROW((FilterParams{0.0, kDt}.validate()), ConfigInvalid);
  EXPECT_THROW((FilterParams{10.0, 0.0}.validate()), ConfigInvalid);
  EXPECT_THROW((FilterParams{3000.0, kDt}.validate()), ConfigInvalid);
  EXPECT_NO_THROW(q15().validate());
}

TEST(Filters, MixedRatesAreRejected) {
  CompositeFilter c = default_composite(kDt);
  c.stages[1].dt = 2e-3;
  EXPECT_THROW(c.validate(), StreamRateMismatch);
  EXPECT_THROW(AccelerationPath{c}, StreamRateMismatch);
  EXPECT_THROW(check_same_rate(default_composite(kDt), FilterParams{10.0, 5e-4}),
               StreamRateMismatch);
  EXPECT_NO_THROW(check_same_rate(default_composite(kDt), q15()));
}

TEST(Filters, IdenticalCompositeUsesTwoEqualStages) {
  const auto c = identical_composite(hz_to_rad(20.0), kDt);
  ASSERT_EQ(c.stages.size(), 2u);
  EXPECT_EQ(c.stages[0].cutoff, c.stages[1].cutoff);
  EXPECT_EQ(c.diff_stages, 2);
}
