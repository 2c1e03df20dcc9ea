#pragma once

// Fixed-rate first-order filters discretized with the bilinear (Tustin)
// transform, prewarped so the discrete -3 dB point sits exactly at the
// requested cutoff.
//
//   low-pass        w / (s + w)
//   differentiator  w s / (s + w)
//
// A composite filter is a cascade of such stages. Its acceleration path runs
// the first `diff_stages` stages as differentiators; its wrench path runs
// every stage as a low-pass. Because the Tustin map is a substitution, both
// paths share the same denominator polynomials and therefore the same phase,
// the acceleration path being exactly (Tustin s)^diff_stages times the
// wrench path.

#include <vector>

#include "dwdob/types.hpp"

namespace dwdob {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double hz_to_rad(double hz) { return kTwoPi * hz; }

struct FilterParams {
  double cutoff = 0.0;  // rad/s
  double dt = 0.0;      // s

  // Requires cutoff > 0, dt > 0 and cutoff * dt < 2.
  void validate() const;
};

struct FilterState {
  Vector prev_output;
  Vector prev_input;
  bool initialized = false;
};

// One low-pass sample. The first sample passes straight through.
Vector lowpass_step(FilterState& state, const FilterParams& params,
                    const Vector& u);
double lowpass_step(FilterState& state, const FilterParams& params, double u);

// One filtered-derivative sample. The first sample outputs zero.
Vector filtered_diff_step(FilterState& state, const FilterParams& params,
                          const Vector& u);
double filtered_diff_step(FilterState& state, const FilterParams& params,
                          double u);

struct CompositeFilter {
  std::vector<FilterParams> stages;
  int diff_stages = 2;

  void validate() const;
  double dt() const { return stages.front().dt; }
};

// 100 Hz then 15 Hz, both folded into the double differentiator.
CompositeFilter default_composite(double dt);

// Two identical stages, L(s) = H(s)^2 / s^2.
CompositeFilter identical_composite(double cutoff, double dt);

// Throws StreamRateMismatch unless every stage of `composite` and `other`
// run at the same sample period.
void check_same_rate(const CompositeFilter& composite, const FilterParams& other);

// Filtered acceleration estimate from a stream of task poses.
class AccelerationPath {
 public:
  explicit AccelerationPath(CompositeFilter composite);

  Vector step(const Vector& pose);
  const CompositeFilter& composite() const { return composite_; }

 private:
  CompositeFilter composite_;
  std::vector<FilterState> states_;
};

// The low-pass content L(s) of the acceleration path, for wrench streams.
class WrenchPath {
 public:
  explicit WrenchPath(CompositeFilter composite);

  Wrench step(const Wrench& w);
  const CompositeFilter& composite() const { return composite_; }

 private:
  CompositeFilter composite_;
  std::vector<FilterState> states_;
};

}  // namespace dwdob
