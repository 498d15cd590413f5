#include "droopsim/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace droopsim {

int Trace::n_converters() const {
  // Schema: 1 + 7n + 1 + n + 1 columns.
  return static_cast<int>((columns.size() - 3) / 8);
}

int Trace::col(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end())
    throw std::invalid_argument("trace has no column '" + name + "'");
  return static_cast<int>(it - columns.begin());
}

bool Trace::has_col(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

int Trace::row_at(double t_query) const {
  if (rows_used == 0) throw std::invalid_argument("empty trace");
  int lo = 0;
  for (int r = 0; r < rows_used; ++r) {
    if (data(r, 0) <= t_query + 1e-12)
      lo = r;
    else
      break;
  }
  return lo;
}

Trace make_trace(int n_conv, int rows) {
  Trace tr;
  tr.columns.push_back("t");
  for (int k = 1; k <= n_conv; ++k) {
    const std::string s = std::to_string(k);
    tr.columns.push_back("v_conv_" + s);
    tr.columns.push_back("i_line_" + s);
    tr.columns.push_back("droop_" + s);
    tr.columns.push_back("r_v_" + s);
    tr.columns.push_back("r_i_" + s);
    tr.columns.push_back("i_pu_" + s);
    tr.columns.push_back("i_ref_pu_" + s);
  }
  tr.columns.push_back("v_bus");
  for (int k = 1; k <= n_conv; ++k)
    tr.columns.push_back("v_bar_pu_" + std::to_string(k));
  tr.columns.push_back("i_load");
  tr.data.resize(rows, static_cast<int>(tr.columns.size()));
  return tr;
}

void write_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < trace.columns.size(); ++c) {
    if (c) out << ',';
    out << trace.columns[c];
  }
  out << '\n';
  char buf[32];
  for (int r = 0; r < trace.rows_used; ++r) {
    for (int c = 0; c < trace.data.cols(); ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", trace.data(r, c));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Trace read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("'" + path + "' is empty");
  Trace tr;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) tr.columns.push_back(cell);
  }
  if (tr.columns.empty() || tr.columns[0] != "t")
    throw std::runtime_error("'" + path + "' is not a trace CSV");

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("'" + path + "': bad number on line " +
                                 std::to_string(lineno));
      }
    }
    if (row.size() != tr.columns.size())
      throw std::runtime_error("'" + path + "': wrong field count on line " +
                               std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  tr.data.resize(static_cast<int>(rows.size()),
                 static_cast<int>(tr.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      tr.data(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  tr.rows_used = static_cast<int>(rows.size());
  return tr;
}

}  // namespace droopsim
