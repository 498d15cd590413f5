#include "droopsim/metrics.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace droopsim::metrics {
namespace {

// Trapezoidal integration of f(row) over [t_start, t_end] on the trace's
// time grid, interpolating the endpoint samples so the window bounds do not
// have to coincide with grid points.
double integrate(const Trace& trace, double t_start, double t_end,
                 const std::function<double(int)>& f) {
  if (trace.rows_used < 2) {
    throw std::invalid_argument("ise: trace has fewer than two samples");
  }
  const double t0 = trace.t(0);
  const double t1 = trace.t(trace.rows_used - 1);
  constexpr double kSlack = 1e-9;
  if (t_start < t0 - kSlack || t_end > t1 + kSlack || t_start >= t_end) {
    throw std::invalid_argument(
        "ise: window [" + std::to_string(t_start) + ", " +
        std::to_string(t_end) + "] outside trace span [" + std::to_string(t0) +
        ", " + std::to_string(t1) + "]");
  }

  // Value at an arbitrary time by linear interpolation between rows; `hint`
  // is a row at or below the bracketing pair.
  auto value_at = [&](double t, int hint) -> double {
    int k = hint;
    while (k + 1 < trace.rows_used && trace.t(k + 1) <= t) ++k;
    while (k > 0 && trace.t(k) > t) --k;
    if (k + 1 >= trace.rows_used) return f(trace.rows_used - 1);
    const double ta = trace.t(k);
    const double tb = trace.t(k + 1);
    const double lam = (tb > ta) ? (t - ta) / (tb - ta) : 0.0;
    return f(k) + lam * (f(k + 1) - f(k));
  };

  // Grid points strictly inside the window.
  int first = 0;
  while (first < trace.rows_used && trace.t(first) <= t_start) ++first;
  int last = trace.rows_used - 1;
  while (last > 0 && trace.t(last) >= t_end) --last;

  double acc = 0.0;
  double prev_t = t_start;
  double prev_v = value_at(t_start, first > 0 ? first - 1 : 0);
  for (int k = first; k <= last && k < trace.rows_used; ++k) {
    const double tk = trace.t(k);
    if (tk <= prev_t) continue;
    acc += 0.5 * (prev_v + f(k)) * (tk - prev_t);
    prev_t = tk;
    prev_v = f(k);
  }
  const double end_v = value_at(t_end, last);
  if (t_end > prev_t) acc += 0.5 * (prev_v + end_v) * (t_end - prev_t);
  return acc;
}

}  // namespace

double ise_v(const Trace& trace, const IseWindow& w) {
  const int n = trace.n_converters();
  std::vector<int> c_vconv(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    c_vconv[static_cast<std::size_t>(k)] =
        trace.col("v_conv_" + std::to_string(k + 1));
  }
  return integrate(trace, w.t_start, w.t_end, [&](int row) {
    double mean = 0.0;
    for (int k = 0; k < n; ++k) {
      mean += trace.data(row, c_vconv[static_cast<std::size_t>(k)]);
    }
    mean /= n;
    const double err = mean - w.v_ref;
    return err * err;
  });
}

double ise_i(const Trace& trace, const IseWindow& w) {
  const int n = trace.n_converters();
  if (static_cast<int>(w.i_shares.size()) != n) {
    throw std::invalid_argument("ise_i: share vector size " +
                                std::to_string(w.i_shares.size()) +
                                " does not match trace with " +
                                std::to_string(n) + " converters");
  }
  const int c_load = trace.col("i_load");
  std::vector<int> c_line(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    c_line[static_cast<std::size_t>(k)] =
        trace.col("i_line_" + std::to_string(k + 1));
  }
  return integrate(trace, w.t_start, w.t_end, [&](int row) {
    const double load = trace.data(row, c_load);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const double err =
          trace.data(row, c_line[static_cast<std::size_t>(k)]) -
          load * w.i_shares(k);
      sum += err * err;
    }
    return sum;
  });
}

Vec rating_shares(const Vec& i_rated) {
  if (i_rated.size() == 0) {
    throw std::invalid_argument("rating_shares: empty rating vector");
  }
  const double total = i_rated.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("rating_shares: ratings must sum > 0");
  }
  return i_rated / total;
}

namespace {

// Shared scan for the two band-settling measures: the moment after which
// |column - center| <= halfwidth holds through t_end.
double stay_within(const Trace& trace, int col, double t_event, double t_end,
                   double center, double halfwidth) {
  const int r0 = trace.row_at(t_event);
  const int r1 = trace.row_at(t_end);
  if (r1 <= r0) {
    throw std::invalid_argument("settling window contains no samples");
  }
  int last_outside = -1;
  for (int r = r0; r <= r1; ++r) {
    if (std::abs(trace.data(r, col) - center) > halfwidth) last_outside = r;
  }
  if (last_outside < 0) return 0.0;
  if (last_outside >= r1) return std::nan("");
  return trace.t(last_outside + 1) - t_event;
}

}  // namespace

double settling_time(const Trace& trace, const std::string& column,
                     double t_event, double t_end, double band_frac) {
  if (!(band_frac > 0.0)) {
    throw std::invalid_argument("settling_time: band fraction must be > 0");
  }
  const int col = trace.col(column);
  const double initial = trace.data(trace.row_at(t_event), col);
  const double final_v = trace.data(trace.row_at(t_end), col);
  const double band = band_frac * std::abs(final_v - initial);
  if (band == 0.0) return 0.0;  // no step at all
  return stay_within(trace, col, t_event, t_end, final_v, band);
}

double time_entering_band(const Trace& trace, const std::string& column,
                          double t_event, double t_end, double center,
                          double halfwidth) {
  if (!(halfwidth > 0.0)) {
    throw std::invalid_argument("time_entering_band: halfwidth must be > 0");
  }
  return stay_within(trace, trace.col(column), t_event, t_end, center,
                     halfwidth);
}

}  // namespace droopsim::metrics
