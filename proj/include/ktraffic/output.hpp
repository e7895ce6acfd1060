#pragma once

// Tabular experiment outputs and their CSV / JSON serialization.
// Reals are written with 17 significant digits; identical tables give
// byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ktraffic/experiments.hpp"
#include "ktraffic/observables.hpp"

namespace ktraffic {

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Provenance (key, value) pairs, written as `# key = value` CSV comments
  /// or a JSON "metadata" object.
  std::vector<std::pair<std::string, std::string>> metadata;
};

enum class Format { csv, json };

inline Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ConfigError("format must be csv or json, got '" + std::string(name) + "'");
}

inline std::string_view extension(Format f) { return f == Format::csv ? "csv" : "json"; }

// --- builders ----------------------------------------------------------------

inline Table moments_table(const MomentSeries& series) {
  Table t{{"tau", "V", "E", "variance"}, {}, {}};
  for (const auto& s : series.samples) t.rows.push_back({s.tau, s.mean, s.energy, s.variance});
  return t;
}

inline Table diagram_table(std::vector<DiagramRow> rows) {
  std::sort(rows.begin(), rows.end(), diagram_order);
  Table t{{"rho", "strategy", "nu0", "V", "flux", "variance"}, {}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.rho, std::string(to_string(r.strategy)), r.nu0, r.mean, r.flux, r.variance});
  }
  return t;
}

/// Long form: one row per (tau, bin).
inline Table contours_table(const HistogramGrid& grid) {
  Table t{{"tau", "bin_center", "density"}, {}, {}};
  for (const auto& slice : grid.slices) {
    for (std::size_t b = 0; b < grid.bins(); ++b) {
      t.rows.push_back({slice.tau, grid.bin_center(b), slice.density[b]});
    }
  }
  return t;
}

inline Table comparison_table(const std::vector<ComparisonLeg>& legs) {
  Table t{{"strategy", "nu0", "tau", "V", "E", "variance"}, {}, {}};
  for (const auto& leg : legs) {
    for (const auto& s : leg.series.samples) {
      t.rows.push_back({std::string(to_string(leg.strategy.kind())), leg.strategy.nu0(), s.tau,
                        s.mean, s.energy, s.variance});
    }
  }
  return t;
}

inline Table relaxation_table(const RelaxationReport& report) {
  Table t{{"tau", "V", "V_closed_form", "rel_error"}, {}, {}};
  for (std::size_t k = 0; k < report.measured.size(); ++k) {
    const auto& s = report.measured.samples[k];
    const double exact = report.closed_form[k];
    const double err = std::abs(s.mean - exact);
    t.rows.push_back({s.tau, s.mean, exact, exact != 0.0 ? err / std::abs(exact) : err});
  }
  return t;
}

// --- serialization -------------------------------------------------------------

namespace detail {

inline std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt_value(x);
}

inline std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

inline std::string json_cell(const Cell& cell) {
  if (const auto* x = std::get_if<double>(&cell)) {
    return std::isfinite(*x) ? fmt_value(*x) : json_string(format_real(*x));
  }
  return json_string(std::get<std::string>(cell));
}

}  // namespace detail

inline void write_csv(std::ostream& out, const Table& t) {
  for (const auto& [key, value] : t.metadata) out << "# " << key << " = " << value << '\n';
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (const auto* x = std::get_if<double>(&row[c])) {
        out << detail::format_real(*x);
      } else {
        out << std::get<std::string>(row[c]);
      }
    }
    out << '\n';
  }
}

/// {"metadata": {...}, "columns": [...], "rows": [[...], ...]}
inline void write_json(std::ostream& out, const Table& t) {
  out << "{\n  \"metadata\": {";
  for (std::size_t k = 0; k < t.metadata.size(); ++k) {
    out << (k ? ",\n    " : "\n    ") << detail::json_string(t.metadata[k].first) << ": "
        << detail::json_string(t.metadata[k].second);
  }
  out << (t.metadata.empty() ? "},\n" : "\n  },\n");
  out << "  \"columns\": [";
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    out << (c ? ", " : "") << detail::json_string(t.columns[c]);
  }
  out << "],\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out << (r ? ",\n    [" : "\n    [");
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
      out << (c ? ", " : "") << detail::json_cell(t.rows[r][c]);
    }
    out << ']';
  }
  out << (t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

inline void write_outputs(const Table& t, Format format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  if (format == Format::csv) {
    write_csv(out, t);
  } else {
    write_json(out, t);
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing output file " + path);
}

}  // namespace ktraffic
