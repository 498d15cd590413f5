#pragma once

#include <string>
#include <vector>

#include "droopsim/types.hpp"

namespace droopsim {

/// Time-indexed recording of a run. Column order is fixed:
///   t,
///   per converter k (1-based): v_conv_k, i_line_k, droop_k, r_v_k, r_i_k,
///                              i_pu_k, i_ref_pu_k,
///   v_bus,
///   per node k: v_bar_pu_k,
///   i_load
struct Trace {
  std::vector<std::string> columns;
  Mat data;           // preallocated rows x columns
  int rows_used = 0;

  int n_converters() const;
  int col(const std::string& name) const;  // throws if the column is missing
  bool has_col(const std::string& name) const;
  double t(int row) const { return data(row, 0); }
  double at(int row, const std::string& name) const {
    return data(row, col(name));
  }
  /// Row index of the last sample with time <= t_query.
  int row_at(double t_query) const;
};

/// Allocates the fixed schema for `n_conv` converters and `rows` samples.
Trace make_trace(int n_conv, int rows);

/// Full-precision CSV. Repeated runs of the same scenario produce
/// byte-identical files.
void write_csv(const Trace& trace, const std::string& path);
Trace read_csv(const std::string& path);

}  // namespace droopsim
