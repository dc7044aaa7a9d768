#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spikegap/crossings.hpp"
#include "spikegap/errors.hpp"
#include "spikegap/instanton.hpp"
#include "spikegap/model.hpp"
#include "spikegap/parallel.hpp"
#include "spikegap/scaling.hpp"
#include "spikegap/spectrum.hpp"
#include "spikegap/variational.hpp"
#include "spikegap/wkb.hpp"

namespace spikegap::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAllFailed = 3;

enum class Format { csv, json };

// ---- ranges ----------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + s + "'");
  return v;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline int parse_count(const std::string& s) {
  const double v = parse_real(s);
  if (v != std::floor(v) || v < 2 || v > 1e6) throw ConfigError("bad point count: '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace detail

/// "x", "a,b,c", "start:stop:step" or "start:stop:geometric:count".
inline std::vector<double> parse_range(const std::string& text) {
  if (text.empty()) throw ConfigError("empty range");
  if (text.find(',') != std::string::npos) {
    std::vector<double> out;
    for (const auto& part : detail::split(text, ',')) {
      const auto sub = parse_range(part);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
  const auto parts = detail::split(text, ':');
  if (parts.size() == 1) return {detail::parse_real(parts[0])};
  if (parts.size() == 3) {
    const double a = detail::parse_real(parts[0]), b = detail::parse_real(parts[1]), h = detail::parse_real(parts[2]);
    if (!(h > 0.0) || b < a) throw ConfigError("range '" + text + "' needs start <= stop and step > 0");
    const auto steps = static_cast<long>(std::floor((b - a) / h + 1e-9));
    if (steps > 10000000) throw ConfigError("range '" + text + "' is too long");
    std::vector<double> out;
    for (long i = 0; i <= steps; ++i) out.push_back(a + h * static_cast<double>(i));
    return out;
  }
  if (parts.size() == 4 && parts[2] == "geometric")
    return geometric_points(detail::parse_real(parts[0]), detail::parse_real(parts[1]), detail::parse_count(parts[3]));
  throw ConfigError("cannot parse range '" + text + "'");
}

/// Sizes: geometric ranges are rounded to multiples of 4; everything else must already be one.
inline std::vector<int> parse_n_range(const std::string& text) {
  std::vector<int> out;
  for (const auto& piece : detail::split(text, ',')) {
    const auto parts = detail::split(piece, ':');
    if (parts.size() == 4 && parts[2] == "geometric") {
      const auto g = geometric_grid(detail::parse_real(parts[0]), detail::parse_real(parts[1]),
                                    detail::parse_count(parts[3]));
      out.insert(out.end(), g.begin(), g.end());
      continue;
    }
    for (double v : parse_range(piece)) {
      if (v != std::floor(v) || v < 4 || v > 1e8 || static_cast<long>(v) % 4 != 0)
        throw ConfigError("n must be a positive multiple of 4, got " + detail::format_number(v));
      out.push_back(static_cast<int>(v));
    }
  }
  if (out.empty()) throw ConfigError("empty n range");
  return out;
}

// ---- configuration and rows ------------------------------------------------

struct RunConfig {
  std::string subcommand;
  std::vector<int> n;
  std::vector<double> alpha;
  std::vector<double> beta;  // empty: width-one
  std::vector<double> s;
  int precision_bits = kDoubleBits;
  std::optional<Format> format;  // default depends on the subcommand
  std::string output;            // empty: stdout
  unsigned threads = default_threads();
  std::optional<double> s_fixed;  // instanton
  int t_max = 5;                  // crossings
  bool all_nodes = false;         // crossings: i = 1..t-1 instead of i = 1
  bool verify = true;             // crossings
  bool align_lattice = true;      // classify
  double refine_tol = 1e-7;       // min-gap
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"gap-curve", "min-gap", "slope-vs-alpha", "bounds",
                                              "instanton", "wkb",     "crossings",      "classify"};
  return names;
}

inline Format default_format(const std::string& sub) {
  if (sub == "bounds" || sub == "instanton" || sub == "wkb" || sub == "classify") return Format::json;
  return Format::csv;
}

struct Row {
  int n = 0;
  double alpha = 0.0;
  std::optional<double> beta;
  std::optional<double> s;
  std::string method;
  std::optional<double> value;
  std::optional<double> log_value;
  int precision_bits = kDoubleBits;
  Flags flags;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();  // JSON only

  bool failed() const { return flags.has(Flag::failed); }
};

struct Report {
  std::vector<Row> rows;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"n",      "alpha", "beta", "s", "method", "value", "log_value",
                                             "precision_bits", "flags"};
  return cols;
}

namespace detail {

inline Row make_row(int n, double alpha, std::optional<double> beta, std::optional<double> s, std::string method) {
  Row r;
  r.n = n;
  r.alpha = alpha;
  r.beta = beta;
  r.s = s;
  r.method = std::move(method);
  return r;
}

inline void validate(const RunConfig& c) {
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), c.subcommand) == subs.end())
    throw ConfigError("unknown subcommand '" + c.subcommand + "'");
  for (int n : c.n)
    if (n <= 0 || n % 4 != 0) throw ConfigError("n values must be positive multiples of 4");
  for (double a : c.alpha)
    if (!(a >= 0.0)) throw ConfigError("alpha must be >= 0");
  for (double b : c.beta)
    if (!(b >= 0.0)) throw ConfigError("beta must be >= 0");
  for (double s : c.s)
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("s values must lie in [0, 1]");
  if (c.precision_bits < 2 || c.precision_bits > kMaxPrecisionBits)
    throw ConfigError("precision must lie in [2, " + std::to_string(kMaxPrecisionBits) + "] bits");
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError(c.subcommand + " needs " + what);
  };
  need(!c.n.empty(), "--n");
  if (c.subcommand != "crossings") need(!c.alpha.empty(), "--alpha");
  if (c.subcommand == "gap-curve") need(!c.s.empty(), "--s");
  if (c.subcommand == "min-gap") need(c.s.size() >= 3, "--s with at least three points");
  if (c.subcommand == "instanton" || c.subcommand == "wkb" || c.subcommand == "classify")
    need(c.alpha.size() == 1 && c.beta.size() == 1, "exactly one --alpha and one --beta");
  if (c.subcommand == "crossings") need(c.t_max >= 1 && c.t_max <= 8, "--t-max in [1, 8]");
}

inline CostModel spike_cost(int n, double alpha, std::optional<double> beta) {
  return CostModel::spike(beta ? SpikeParams::with_width(n, alpha, *beta) : SpikeParams::width_one(n, alpha));
}

/// Lexicographic (n, alpha, beta) cells; beta absent means width one.
struct Cell {
  int n;
  double alpha;
  std::optional<double> beta;
};

inline std::vector<Cell> cells(const RunConfig& c) {
  std::vector<Cell> out;
  for (int n : c.n)
    for (double a : c.alpha) {
      if (c.beta.empty())
        out.push_back({n, a, std::nullopt});
      else
        for (double b : c.beta) out.push_back({n, a, b});
    }
  return out;
}

inline Row gap_row(const Cell& cell, const GapEstimate& g) {
  Row r = make_row(cell.n, cell.alpha, cell.beta, g.s, to_string(g.method));
  r.precision_bits = g.precision_bits;
  r.flags = g.flags;
  if (g.resolved()) {
    r.value = g.value;
    r.log_value = g.log_value;
  } else if (std::isfinite(g.log_value)) {
    r.log_value = g.log_value;
  }
  return r;
}

inline Row failed_row(const Cell& cell, std::optional<double> s, const std::string& method, int bits,
                      const std::string& why) {
  Row r = make_row(cell.n, cell.alpha, cell.beta, s, method);
  r.precision_bits = bits;
  r.flags.set(Flag::failed);
  r.extra["error"] = why;
  return r;
}

inline nlohmann::ordered_json fit_json(const ScalingFit& f) {
  nlohmann::ordered_json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["concavity_score"] = f.concavity_score;
  j["noise"] = f.noise;
  j["verdict"] = to_string(f.verdict);
  j["residues"] = f.residues;
  return j;
}

inline nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

// ---- subcommands -----------------------------------------------------------

inline Report gap_curve(const RunConfig& c) {
  const auto cs = cells(c);
  const std::size_t m = c.s.size();
  Report rep;
  rep.rows = parallel_map(
      cs.size() * m,
      [&](std::size_t idx) {
        const auto& cell = cs[idx / m];
        const double s = c.s[idx % m];
        try {
          return gap_row(cell, gap(spike_cost(cell.n, cell.alpha, cell.beta), s, c.precision_bits));
        } catch (const std::exception& e) {
          return failed_row(cell, s, "exact", c.precision_bits, e.what());
        }
      },
      c.threads);
  return rep;
}

inline Report min_gap(const RunConfig& c) {
  const auto cs = cells(c);
  const double lo = *std::min_element(c.s.begin(), c.s.end()), hi = *std::max_element(c.s.begin(), c.s.end());
  const SGrid grid{lo, hi, static_cast<int>(c.s.size())};
  Report rep;
  rep.rows = parallel_map(
      cs.size(),
      [&](std::size_t i) {
        const auto& cell = cs[i];
        try {
          const auto r = min_gap_scan(spike_cost(cell.n, cell.alpha, cell.beta), grid, c.refine_tol, c.precision_bits);
          Row row = gap_row(cell, r.gap);
          row.s = r.s_min;
          row.flags.merge(r.flags);
          return row;
        } catch (const std::exception& e) {
          return failed_row(cell, std::nullopt, "exact", c.precision_bits, e.what());
        }
      },
      c.threads);
  return rep;
}

inline Report slope_vs_alpha_report(const RunConfig& c) {
  Report rep;
  const auto curve = slope_vs_alpha(c.alpha, c.n, c.precision_bits, c.threads);
  auto& fits = rep.summary["fits"] = nlohmann::ordered_json::array();
  for (const auto& p : curve) {
    for (std::size_t i = 0; i < c.n.size(); ++i) rep.rows.push_back(gap_row({c.n[i], p.alpha, std::nullopt}, p.gaps[i]));
    nlohmann::ordered_json f;
    f["alpha"] = p.alpha;
    f["slope"] = p.fit ? nlohmann::ordered_json(p.fit->slope) : nlohmann::ordered_json(nullptr);
    f["omitted"] = p.omitted;
    f["flags"] = p.flags.to_string();
    fits.push_back(f);
  }
  return rep;
}

inline Report bounds_report(const RunConfig& c) {
  Report rep;
  auto& pairs = rep.summary["bounds"] = nlohmann::ordered_json::array();
  for (int n : c.n)
    for (double a : c.alpha) {
      const Cell cell{n, a, std::nullopt};
      try {
        const auto lo = lower_bound_gap(n, a);
        const auto b = bounds(n, a);
        rep.rows.push_back(gap_row(cell, lo.estimate));
        if (std::isfinite(b.upper)) {
          rep.rows.push_back(gap_row(cell, upper_bound_gap(n, a).estimate));
        } else {
          Row r = make_row(n, a, std::nullopt, critical_point(), "stoquastic_upper");
          r.flags = b.flags;
          rep.rows.push_back(r);
        }
        nlohmann::ordered_json j;
        j["n"] = n;
        j["alpha"] = a;
        j["s"] = critical_point();
        j["lower"] = b.lower;
        j["upper"] = number_or_null(b.upper);
        j["ratio"] = number_or_null(b.upper / b.lower);
        j["flags"] = b.flags.to_string();
        pairs.push_back(j);
      } catch (const std::exception& e) {
        rep.rows.push_back(failed_row(cell, critical_point(), "variational_lower", kDoubleBits, e.what()));
      }
    }
  return rep;
}

inline Report instanton_report(const RunConfig& c) {
  Report rep;
  const double a = c.alpha[0], b = c.beta[0];
  const auto sw = action_scaling_sweep(a, b, c.n, c.s_fixed, c.threads);
  for (std::size_t i = 0; i < sw.n.size(); ++i) {
    const auto& r = sw.results[i];
    Row row = make_row(sw.n[i], a, b, r.s_star_used, "instanton_exponent");
    row.flags = r.flags;
    if (std::isfinite(r.S_I) && r.S_I > 0.0) {
      row.value = r.S_I;
      row.log_value = std::log(r.S_I);
    } else if (r.S_I == 0.0) {
      row.value = 0.0;
    } else {
      row.flags.set(Flag::failed);
    }
    row.extra["theta1"] = r.theta1;
    row.extra["theta2"] = r.theta2;
    row.extra["quadrature_error"] = r.quadrature_error;
    row.extra["applicability"] = to_string(r.applicability);
    rep.rows.push_back(row);
  }
  rep.summary["alpha"] = a;
  rep.summary["beta"] = b;
  rep.summary["applicability"] = to_string(sw.applicability);
  rep.summary["flags"] = sw.flags.to_string();
  rep.summary["excluded"] = sw.excluded;
  rep.summary["reasons"] = sw.reasons;
  rep.summary["fit"] = sw.fit ? fit_json(*sw.fit) : nlohmann::ordered_json(nullptr);
  return rep;
}

inline Report wkb_report(const RunConfig& c) {
  Report rep;
  const double a = c.alpha[0], b = c.beta[0];
  std::vector<double> ns, integrals;
  auto points = parallel_map(
      c.n.size(),
      [&](std::size_t i) -> std::optional<WkbGapEstimate> {
        try {
          return wkb_gap(c.n[i], a, b);
        } catch (const NumericalError&) {
          return std::nullopt;
        }
      },
      c.threads);
  for (std::size_t i = 0; i < c.n.size(); ++i) {
    const Cell cell{c.n[i], a, b};
    if (!points[i]) {
      // rerun serially for the message; cheap and keeps the worker lambda simple
      std::string why;
      try {
        (void)wkb_gap(c.n[i], a, b);
      } catch (const std::exception& e) {
        why = e.what();
      }
      rep.rows.push_back(failed_row(cell, critical_point(), "wkb", kDoubleBits, why));
      continue;
    }
    const auto& p = *points[i];
    Row row = make_row(p.n, a, b, critical_point(), "wkb");
    row.log_value = p.log_gap_estimate;
    row.value = std::exp(p.log_gap_estimate);
    row.extra["d"] = p.d;
    row.extra["d_leading"] = p.d_leading;
    row.extra["j1"] = p.j1;
    row.extra["j2"] = p.j2;
    row.extra["phase_integral"] = p.phase_integral;
    row.extra["tunneling_integral"] = p.tunneling_integral;
    row.extra["centre_decay"] = p.centre_decay;
    rep.rows.push_back(row);
    ns.push_back(p.n);
    integrals.push_back(p.tunneling_integral);
  }
  rep.summary["alpha"] = a;
  rep.summary["beta"] = b;
  rep.summary["verdict"] = to_string(a + 2 * b > 1 ? Verdict::superpolynomial : Verdict::power_law);
  rep.summary["exponent_target"] = a / 2 + b - 0.5;
  if (ns.size() >= 4) {
    const auto f = fit(ns, integrals);
    rep.summary["tunneling_fit"] = fit_json(f);
  } else {
    rep.summary["tunneling_fit"] = nullptr;
  }
  return rep;
}

inline Report crossings_report(const RunConfig& c) {
  Report rep;
  const double a = c.alpha.empty() ? 1.0 : c.alpha[0];
  auto& checks = rep.summary["ordering"] = nlohmann::ordered_json::array();
  for (int n : c.n) {
    std::vector<std::pair<int, int>> pairs;
    for (int t = 1; t <= c.t_max; ++t) {
      const int last = c.all_nodes ? std::max(1, t - 1) : 1;
      for (int i = 1; i <= last; ++i) pairs.emplace_back(t, i);
    }
    auto preds = parallel_map(
        pairs.size(),
        [&](std::size_t k) -> Row {
          const Cell cell{n, a, std::nullopt};
          const auto [t, i] = pairs[k];
          try {
            auto p = predict_crossing(n, t, i);
            if (c.verify) p = verify_crossing(n, a, p);
            Row row = make_row(n, a, std::nullopt, p.s_t_i, "exact");
            row.flags = p.flags;
            if (p.verified_gap && *p.verified_gap > 0) {
              row.value = *p.verified_gap;
              row.log_value = std::log(*p.verified_gap);
            }
            row.extra["t"] = t;
            row.extra["i"] = i;
            row.extra["s_dip"] = p.s_dip ? nlohmann::ordered_json(*p.s_dip) : nlohmann::ordered_json(nullptr);
            row.extra["off_dip_gap"] =
                p.off_dip_gap ? nlohmann::ordered_json(*p.off_dip_gap) : nlohmann::ordered_json(nullptr);
            return row;
          } catch (const std::exception& e) {
            Row row = failed_row(cell, std::nullopt, "exact", kDoubleBits, e.what());
            row.extra["t"] = t;
            row.extra["i"] = i;
            return row;
          }
        },
        c.threads);
    rep.rows.insert(rep.rows.end(), preds.begin(), preds.end());
    const auto o = ordering_theorem_check(n, c.t_max, c.threads);
    nlohmann::ordered_json j;
    j["n"] = n;
    j["holds"] = o.holds;
    j["decreasing"] = o.decreasing;
    j["difference_nodes"] = o.difference_nodes;
    j["s_first"] = o.s_first;
    checks.push_back(j);
  }
  return rep;
}

inline Report classify_report(const RunConfig& c) {
  Report rep;
  const double a = c.alpha[0], b = c.beta[0];
  std::vector<int> ns = c.n;
  if (c.align_lattice && ns.size() >= 2) {
    auto aligned = lattice_aligned_grid(ns.front(), ns.back(), static_cast<int>(ns.size()), b);
    if (aligned.size() >= 4) ns = std::move(aligned);
  }
  const auto r = classify_exact_gaps(a, b, ns, c.precision_bits, c.threads);
  for (std::size_t i = 0; i < r.n.size(); ++i) rep.rows.push_back(gap_row({r.n[i], a, b}, r.gaps[i]));
  rep.summary["alpha"] = a;
  rep.summary["beta"] = b;
  rep.summary["n"] = r.n;
  rep.summary["omitted"] = r.omitted;
  rep.summary["flags"] = r.flags.to_string();
  rep.summary["verdict"] = r.fit ? to_string(r.fit->verdict) : "inconclusive";
  rep.summary["fit"] = r.fit ? fit_json(*r.fit) : nlohmann::ordered_json(nullptr);
  return rep;
}

inline std::string format_double(double v) { return format_number(v); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string opt(const std::optional<double>& v) { return v && std::isfinite(*v) ? format_double(*v) : ""; }

}  // namespace detail

/// Runs the subcommand; rows come back in lexicographic sweep order whatever the thread count.
inline Report execute(const RunConfig& c) {
  detail::validate(c);
  if (c.subcommand == "gap-curve") return detail::gap_curve(c);
  if (c.subcommand == "min-gap") return detail::min_gap(c);
  if (c.subcommand == "slope-vs-alpha") return detail::slope_vs_alpha_report(c);
  if (c.subcommand == "bounds") return detail::bounds_report(c);
  if (c.subcommand == "instanton") return detail::instanton_report(c);
  if (c.subcommand == "wkb") return detail::wkb_report(c);
  if (c.subcommand == "crossings") return detail::crossings_report(c);
  return detail::classify_report(c);
}

inline void write_csv(const Report& rep, std::ostream& out) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\r\n";
  for (const auto& r : rep.rows) {
    out << r.n << ',' << detail::format_double(r.alpha) << ',' << detail::opt(r.beta) << ',' << detail::opt(r.s) << ','
        << detail::csv_field(r.method) << ',' << detail::opt(r.value) << ',' << detail::opt(r.log_value) << ','
        << r.precision_bits << ',' << detail::csv_field(r.flags.to_string()) << "\r\n";
  }
}

inline nlohmann::ordered_json to_json(const RunConfig& c, const Report& rep) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = c.subcommand;
  j["precision_bits"] = c.precision_bits;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  auto num = [](const std::optional<double>& v) {
    return v && std::isfinite(*v) ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (const auto& r : rep.rows) {
    nlohmann::ordered_json o;
    o["n"] = r.n;
    o["alpha"] = r.alpha;
    o["beta"] = num(r.beta);
    o["s"] = num(r.s);
    o["method"] = r.method;
    o["value"] = num(r.value);
    o["log_value"] = num(r.log_value);
    o["precision_bits"] = r.precision_bits;
    o["flags"] = r.flags.names();
    for (const auto& [k, v] : r.extra.items()) o[k] = v;
    rows.push_back(o);
  }
  j["summary"] = rep.summary;
  return j;
}

inline void write(const RunConfig& c, const Report& rep, std::ostream& out) {
  if (c.format.value_or(default_format(c.subcommand)) == Format::json)
    out << to_json(c, rep).dump(2) << "\n";
  else
    write_csv(rep, out);
}

/// Exit status for a finished report: 3 when there were rows and all of them failed.
inline int exit_status(const Report& rep) {
  if (rep.rows.empty()) return kExitOk;
  for (const auto& r : rep.rows)
    if (!r.failed()) return kExitOk;
  return kExitAllFailed;
}

}  // namespace spikegap::cli
