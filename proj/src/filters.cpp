#include "dwdob/filters.hpp"

#include <cmath>

namespace dwdob {

namespace {

struct Coefficients {
  double in;   // weight of (u + u_prev) or (u - u_prev)
  double fb;   // weight of y_prev
};

// Prewarped Tustin: wa = (2/dt) tan(w dt / 2).
Coefficients lowpass_coefficients(const FilterParams& p) {
  const double k = 2.0 / p.dt;
  const double wa = k * std::tan(0.5 * p.cutoff * p.dt);
  return {wa / (k + wa), (k - wa) / (k + wa)};
}

Coefficients diff_coefficients(const FilterParams& p) {
  const double k = 2.0 / p.dt;
  const double wa = k * std::tan(0.5 * p.cutoff * p.dt);
  return {wa * k / (k + wa), (k - wa) / (k + wa)};
}

}  // namespace

void FilterParams::validate() const {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
    throw ConfigInvalid("filter.cutoff", "must be > 0");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigInvalid("filter.dt", "must be > 0");
  }
  if (!(cutoff * dt < 2.0)) {
    throw ConfigInvalid("filter.cutoff", "cutoff * dt must stay below 2");
  }
}

Vector lowpass_step(FilterState& state, const FilterParams& params,
                    const Vector& u) {
  if (!state.initialized) {
    state.prev_input = u;
    state.prev_output = u;
    state.initialized = true;
    return u;
  }
  // y = b (u + u_prev) + (1 - 2b) y_prev, arranged so a held input is an
  // exact fixed point.
  const auto c = lowpass_coefficients(params);
  Vector y = state.prev_output +
             c.in * ((u + state.prev_input) - 2.0 * state.prev_output);
  state.prev_input = u;
  state.prev_output = y;
  return y;
}

double lowpass_step(FilterState& state, const FilterParams& params, double u) {
  return lowpass_step(state, params, Vector::Constant(1, u))[0];
}

Vector filtered_diff_step(FilterState& state, const FilterParams& params,
                          const Vector& u) {
  if (!state.initialized) {
    state.prev_input = u;
    state.prev_output = Vector::Zero(u.size());
    state.initialized = true;
    return state.prev_output;
  }
  const auto c = diff_coefficients(params);
  Vector y = c.in * (u - state.prev_input) + c.fb * state.prev_output;
  state.prev_input = u;
  state.prev_output = y;
  return y;
}

double filtered_diff_step(FilterState& state, const FilterParams& params,
                          double u) {
  return filtered_diff_step(state, params, Vector::Constant(1, u))[0];
}

void CompositeFilter::validate() const {
  if (stages.empty()) {
    throw ConfigInvalid("composite.stages", "at least one stage required");
  }
  if (diff_stages < 0 || diff_stages > static_cast<int>(stages.size())) {
    throw ConfigInvalid("composite.diff_stages",
                        "must lie between 0 and the stage count");
  }
  for (const auto& s : stages) s.validate();
  for (const auto& s : stages) {
    if (s.dt != stages.front().dt) {
      throw StreamRateMismatch("composite stages run at different periods");
    }
  }
}

CompositeFilter default_composite(double dt) {
  return CompositeFilter{{{hz_to_rad(100.0), dt}, {hz_to_rad(15.0), dt}}, 2};
}

CompositeFilter identical_composite(double cutoff, double dt) {
  return CompositeFilter{{{cutoff, dt}, {cutoff, dt}}, 2};
}

void check_same_rate(const CompositeFilter& composite,
                     const FilterParams& other) {
  for (const auto& s : composite.stages) {
    if (s.dt != other.dt) {
      throw StreamRateMismatch("filter streams sampled at different periods");
    }
  }
}

AccelerationPath::AccelerationPath(CompositeFilter composite)
    : composite_(std::move(composite)) {
  composite_.validate();
  states_.resize(composite_.stages.size());
}

Vector AccelerationPath::step(const Vector& pose) {
  Vector signal = pose;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (static_cast<int>(i) < composite_.diff_stages) {
      signal = filtered_diff_step(states_[i], composite_.stages[i], signal);
    } else {
      signal = lowpass_step(states_[i], composite_.stages[i], signal);
    }
  }
  return signal;
}

WrenchPath::WrenchPath(CompositeFilter composite)
    : composite_(std::move(composite)) {
  composite_.validate();
  states_.resize(composite_.stages.size());
}

Wrench WrenchPath::step(const Wrench& w) {
  Wrench signal = w;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    signal = lowpass_step(states_[i], composite_.stages[i], signal);
  }
  return signal;
}

}  // namespace dwdob
