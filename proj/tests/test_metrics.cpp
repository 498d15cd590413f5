// Integral-squared-error scoring and band-settling measures on recorded
// traces.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "droopsim/metrics.hpp"
#include "droopsim/trace.hpp"

using namespace droopsim;
using metrics::IseWindow;

namespace {

// Two-converter trace with `rows` samples at `dt` spacing, filled by
// callbacks so each test states its signals declaratively.
template <typename F>
Trace build_trace(int rows, double dt, F fill) {
  Trace tr = make_trace(2, rows);
  for (int k = 0; k < rows; ++k) {
    const double t = k * dt;
    tr.data(k, 0) = t;
    fill(tr, k, t);
    ++tr.rows_used;
  }
  return tr;
}

// Perfect 2:1 sharing at 400 V: 10 A and 5 A into a 15 A load.
void perfect_row(Trace& tr, int k, double) {
  tr.data(k, tr.col("v_conv_1")) = 400.0;
  tr.data(k, tr.col("v_conv_2")) = 400.0;
  tr.data(k, tr.col("i_line_1")) = 10.0;
  tr.data(k, tr.col("i_line_2")) = 5.0;
  tr.data(k, tr.col("i_load")) = 15.0;
}

IseWindow window(double t0, double t1) {
  IseWindow w;
  w.t_start = t0;
  w.t_end = t1;
  w.i_shares = metrics::rating_shares((Vec(2) << 10.0, 5.0).finished());
  return w;
}

}  // namespace

TEST_CASE("rating shares split by rated current") {
  const Vec shares = metrics::rating_shares((Vec(2) << 10.0, 5.0).finished());
  CHECK(shares(0) == doctest::Approx(2.0 / 3.0));
  CHECK(shares(1) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(metrics::rating_shares(Vec{}), std::invalid_argument);
  CHECK_THROWS_AS(metrics::rating_shares(Vec::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("zero error scores zero") {
  const auto tr = build_trace(5001, 1e-3, perfect_row);
  CHECK(metrics::ise_v(tr, window(0.0, 4.0)) == doctest::Approx(0.0));
  CHECK(metrics::ise_i(tr, window(0.0, 4.0)) == doctest::Approx(0.0));
}

TEST_CASE("constant 1 V mean error over 4 s integrates to 4") {
  const auto tr = build_trace(5001, 1e-3, [](Trace& t, int k, double) {
    perfect_row(t, k, 0.0);
    t.data(k, t.col("v_conv_1")) = 399.5;  // converter mean 399.0
    t.data(k, t.col("v_conv_2")) = 398.5;
  });
  CHECK(metrics::ise_v(tr, window(0.5, 4.5)) ==
        doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("constant 0.5 A error on one converter over 4 s integrates to 1") {
  const auto tr = build_trace(5001, 1e-3, [](Trace& t, int k, double) {
    perfect_row(t, k, 0.0);
    // Converter 1 runs half an amp under its 10 A share; the remainder is
    // booked on the load so converter 2 stays exact.
    t.data(k, t.col("i_line_1")) = 9.5;
    t.data(k, t.col("i_line_2")) = 5.0;
    t.data(k, t.col("i_load")) = 15.0;
  });
  CHECK(metrics::ise_i(tr, window(0.0, 4.0)) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("windows outside the recorded span are rejected") {
  const auto tr = build_trace(1001, 1e-3, perfect_row);  // spans [0, 1]
  CHECK_THROWS_AS(metrics::ise_v(tr, window(0.5, 1.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(metrics::ise_v(tr, window(-0.5, 0.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(metrics::ise_v(tr, window(0.8, 0.8)),
                  std::invalid_argument);
  CHECK_NOTHROW(metrics::ise_v(tr, window(0.0, 1.0)));

  auto bad = window(0.0, 1.0);
  bad.i_shares = Vec::Ones(3) / 3.0;
  CHECK_THROWS_AS(metrics::ise_i(tr, bad), std::invalid_argument);
}

TEST_CASE("windows are additive over adjacent spans") {
  const auto tr = build_trace(4001, 1e-3, [](Trace& t, int k, double tt) {
    perfect_row(t, k, tt);
    t.data(k, t.col("v_conv_1")) = 400.0 + 3.0 * std::sin(2.0 * tt);
    t.data(k, t.col("v_conv_2")) = 400.0 + 2.0 * std::cos(3.0 * tt);
  });
  const double whole = metrics::ise_v(tr, window(0.0, 4.0));
  const double split = metrics::ise_v(tr, window(0.0, 1.7)) +
                       metrics::ise_v(tr, window(1.7, 4.0));
  CHECK(whole == doctest::Approx(split).epsilon(1e-12));
  CHECK(whole > 0.0);
}

TEST_CASE("refining the grid twofold moves the integral by less than 0.5%") {
  auto smooth = [](Trace& t, int k, double tt) {
    perfect_row(t, k, tt);
    t.data(k, t.col("v_conv_1")) = 400.0 + std::sin(5.0 * tt);
    t.data(k, t.col("v_conv_2")) = 400.0 + std::sin(5.0 * tt);
    t.data(k, t.col("i_line_1")) = 10.0 + 0.3 * std::cos(4.0 * tt);
  };
  const auto coarse = build_trace(401, 1e-2, smooth);   // 10 ms sampling
  const auto fine = build_trace(801, 5e-3, smooth);     // 5 ms sampling
  const double v1 = metrics::ise_v(coarse, window(0.0, 4.0));
  const double v2 = metrics::ise_v(fine, window(0.0, 4.0));
  CHECK(std::abs(v1 - v2) / v2 < 0.005);
  const double i1 = metrics::ise_i(coarse, window(0.0, 4.0));
  const double i2 = metrics::ise_i(fine, window(0.0, 4.0));
  CHECK(std::abs(i1 - i2) / i2 < 0.005);
}

TEST_CASE("band-entry time: first moment the signal enters and stays") {
  // v_bus ramps from 395 to 400 over one second, then holds.
  const auto tr = build_trace(2001, 1e-3, [](Trace& t, int k, double tt) {
    perfect_row(t, k, tt);
    t.data(k, t.col("v_bus")) = (tt < 1.0) ? 395.0 + 5.0 * tt : 400.0;
  });
  // Enters 400 +- 0.5 when the ramp crosses 399.5 at t = 0.9.
  const double enter =
      metrics::time_entering_band(tr, "v_bus", 0.0, 2.0, 400.0, 0.5);
  CHECK(enter == doctest::Approx(0.9).epsilon(1e-3));

  // Already inside: zero.
  CHECK(metrics::time_entering_band(tr, "v_bus", 1.2, 2.0, 400.0, 0.5) ==
        doctest::Approx(0.0));

  // Never inside: NaN.
  CHECK(std::isnan(
      metrics::time_entering_band(tr, "v_bus", 0.0, 0.5, 400.0, 0.5)));
}

TEST_CASE("settling time: 2% band around the segment's final value") {
  // Exponential approach from 5 to 10 with a 0.25 s time constant: the 2%
  // band around the final value is entered near t = -tau ln(0.02) = 0.98 s.
  const auto tr = build_trace(4001, 1e-3, [](Trace& t, int k, double tt) {
    perfect_row(t, k, tt);
    t.data(k, t.col("i_line_1")) = 10.0 - 5.0 * std::exp(-tt / 0.25);
  });
  const double ts = metrics::settling_time(tr, "i_line_1", 0.0, 4.0, 0.02);
  CHECK(ts == doctest::Approx(-0.25 * std::log(0.02)).epsilon(0.02));

  // A flat signal never leaves its band.
  CHECK(metrics::settling_time(tr, "i_line_2", 0.0, 4.0, 0.02) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(metrics::settling_time(tr, "i_line_1", 0.0, 4.0, 0.0),
                  std::invalid_argument);
}
