#pragma once

#include "droopsim/trace.hpp"
#include "droopsim/types.hpp"

namespace droopsim::metrics {

/// Scoring window for the integral-squared-error figures. Current
/// references are the instantaneous total load current split by the
/// converters' rating shares.
struct IseWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  double v_ref = 400.0;  // voltage reference [V]
  Vec i_shares;          // per-converter share of the load current, sums to 1
};

/// Trapezoidal integral of the squared error between v_ref and the mean of
/// the converter terminal voltages over the window.
double ise_v(const Trace& trace, const IseWindow& w);

/// Trapezoidal integral of the summed squared per-converter current errors,
/// each converter referenced to i_load * share.
double ise_i(const Trace& trace, const IseWindow& w);

/// Rating shares from per-unit current bases (i_rated / sum i_rated).
Vec rating_shares(const Vec& i_rated);

/// Settling time of the step response between t_event and t_end: the first
/// time from which `column` stays within band_frac * |final - initial| of
/// its final value (final sampled at t_end, initial at t_event). Returned
/// relative to t_event; 0 when the signal never leaves the band, NaN when it
/// is still outside the band at t_end.
double settling_time(const Trace& trace, const std::string& column,
                     double t_event, double t_end, double band_frac = 0.02);

/// First time after t_event from which `column` stays inside
/// center +- halfwidth through t_end. Returned relative to t_event; 0 when
/// it never leaves the band, NaN when it is still outside at t_end.
double time_entering_band(const Trace& trace, const std::string& column,
                          double t_event, double t_end, double center,
                          double halfwidth);

}  // namespace droopsim::metrics
