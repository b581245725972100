#pragma once

// Command implementations behind the `ziber` tool. Each command writes its
// report to `out`, diagnostics to `err`, and returns the process exit code:
// 0 success, 1 usage or data error, 2 finished with a convergence warning.
//
// Typical analysis of a new data set:
//   1. `histogram` the outcome to check for excess zeros;
//   2. choose candidate models (ZIBer links plus plain baselines);
//   3. `compare` them with the Vuong test against a reference model;
//   4. `fit` the selected model for estimates, ASEs and p-values;
//   5. interpret the signs and significance of the coefficients.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ziber/estimation.hpp"
#include "ziber/selection.hpp"
#include "ziber/simulation.hpp"

namespace ziber::cli {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV input

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("column '" + std::string(name) + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto fields = detail::split_fields(trimmed);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw DataError("row " + std::to_string(t.rows.size() + 1) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) throw DataError("empty file");
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in);
}

struct CsvSchema {
  std::string y_col;
  std::vector<std::string> x_cols;
  std::vector<std::string> z_cols;
};

/// Builds a dataset from `table`. Row numbers in messages count data rows from 1.
inline Dataset dataset_from_table(const CsvTable& table, const CsvSchema& schema) {
  std::set<std::string> seen;
  auto claim = [&](const std::string& name) {
    if (!seen.insert(name).second) throw DataError("column '" + name + "' is listed more than once");
    return table.column(name);
  };
  const std::size_t yc = claim(schema.y_col);
  std::vector<std::size_t> xc, zc;
  for (const auto& c : schema.x_cols) xc.push_back(claim(c));
  for (const auto& c : schema.z_cols) zc.push_back(claim(c));
  if (table.rows.empty()) throw DataError("no data rows");

  const Index n = static_cast<Index>(table.rows.size());
  Vector y(n);
  Matrix x(n, static_cast<Index>(xc.size()));
  Matrix z(n, static_cast<Index>(zc.size()));
  auto number = [&](std::size_t row, std::size_t col) {
    const auto v = detail::parse_double(table.rows[row][col]);
    if (!v || !std::isfinite(*v)) {
      throw DataError("row " + std::to_string(row + 1) + ", column '" + table.header[col] +
                      "': '" + table.rows[row][col] + "' is not a finite number");
    }
    return *v;
  };
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double v = number(r, yc);
    if (v != 0.0 && v != 1.0) {
      throw DataError("row " + std::to_string(r + 1) + ", column '" + schema.y_col + "': value '" +
                      table.rows[r][yc] + "' is not 0 or 1");
    }
    const Index i = static_cast<Index>(r);
    y[i] = v;
    for (std::size_t j = 0; j < xc.size(); ++j) x(i, static_cast<Index>(j)) = number(r, xc[j]);
    for (std::size_t j = 0; j < zc.size(); ++j) z(i, static_cast<Index>(j)) = number(r, zc[j]);
  }
  return Dataset(std::move(y), std::move(x), std::move(z));
}

// ---------------------------------------------------------------------------
// Model and scenario parsing

/// logit | probit | cloglog | gev | plain-logit | plain-probit
inline ModelSpec parse_model(std::string_view name) {
  constexpr std::string_view plain_prefix = "plain-";
  if (name.substr(0, plain_prefix.size()) == plain_prefix) {
    const auto base = name.substr(plain_prefix.size());
    if (base == "logit") return {LinkKind::Logit, true};
    if (base == "probit") return {LinkKind::Probit, true};
  } else if (const auto link = parse_link(name)) {
    return {*link, false};
  }
  throw DataError("unknown link '" + std::string(name) +
                  "' (expected logit, probit, cloglog, gev, plain-logit or plain-probit)");
}

inline std::string builtin_names() {
  std::string s;
  for (const auto& sc : builtin_scenarios()) s += (s.empty() ? "" : ", ") + sc.name;
  return s;
}

namespace detail {

inline Covariate covariate_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("dist") || !j["dist"].is_string()) {
    throw DataError(where + ": expected an object with a string field 'dist'");
  }
  const std::string dist = j["dist"];
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw DataError(where + ": field '" + key + "' must be a number");
    return j[key].get<double>();
  };
  Covariate c;
  if (dist == "std_normal") {
    c = Covariate::std_normal();
  } else if (dist == "normal") {
    c = Covariate::normal(num("mean", 0.0), num("sd", 1.0));
  } else if (dist == "exponential") {
    c = Covariate::exponential(num("rate", 1.0));
  } else if (dist == "bernoulli") {
    if (!j.contains("p")) throw DataError(where + ": bernoulli needs field 'p'");
    c = Covariate::bernoulli(num("p", 0.5));
  } else {
    throw DataError(where + ": unknown dist '" + dist +
                    "' (expected std_normal, normal, exponential or bernoulli)");
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  return c;
}

inline Vector vector_from_json(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].empty()) {
    throw DataError("scenario: field '" + key + "' must be a non-empty array of numbers");
  }
  Vector v(static_cast<Index>(j[key].size()));
  for (std::size_t i = 0; i < j[key].size(); ++i) {
    if (!j[key][i].is_number()) throw DataError("scenario: " + key + "[" + std::to_string(i) + "] is not a number");
    v[static_cast<Index>(i)] = j[key][i].get<double>();
  }
  return v;
}

}  // namespace detail

/// Custom scenario from JSON with fields link, gamma, eta, eps (gev only),
/// x_spec, z_spec and optional event_columns / name.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("scenario: top level must be an object");
  if (!j.contains("link") || !j["link"].is_string()) throw DataError("scenario: missing string field 'link'");
  const auto link = parse_link(j["link"].get<std::string>());
  if (!link) throw DataError("scenario: unknown link '" + j["link"].get<std::string>() + "'");

  Scenario s;
  s.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "custom";
  s.true_beta.spec = ModelSpec{*link, false};
  s.true_beta.gamma = detail::vector_from_json(j, "gamma");
  s.true_beta.eta = detail::vector_from_json(j, "eta");
  if (*link == LinkKind::Gev) {
    if (!j.contains("eps") || !j["eps"].is_number()) throw DataError("scenario: gev link needs numeric field 'eps'");
    s.true_beta.eps = j["eps"].get<double>();
  } else if (j.contains("eps")) {
    throw DataError("scenario: field 'eps' is only valid for the gev link");
  }
  for (const char* key : {"x_spec", "z_spec"}) {
    if (!j.contains(key) || !j[key].is_array()) throw DataError(std::string("scenario: field '") + key + "' must be an array");
    auto& dst = std::string_view(key) == "x_spec" ? s.x_spec : s.z_spec;
    for (std::size_t i = 0; i < j[key].size(); ++i) {
      dst.push_back(detail::covariate_from_json(j[key][i], std::string("scenario: ") + key + "[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("event_columns")) {
    if (!j["event_columns"].is_array()) throw DataError("scenario: 'event_columns' must be an array of integers");
    std::vector<Index> cols;
    for (const auto& c : j["event_columns"]) {
      if (!c.is_number_integer()) throw DataError("scenario: 'event_columns' must be an array of integers");
      cols.push_back(c.get<Index>());
    }
    s.event_z_columns = std::move(cols);
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("scenario: ") + e.what());
  }
  return s;
}

/// A built-in scenario name, or a path to a scenario JSON file.
inline Scenario resolve_scenario(const std::string& name_or_path) {
  if (const Scenario* s = find_builtin(name_or_path)) return *s;
  if (std::filesystem::is_regular_file(name_or_path)) {
    std::ifstream in(name_or_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("scenario file '" + name_or_path + "': " + e.what());
    }
    return scenario_from_json(j);
  }
  throw DataError("unknown scenario '" + name_or_path + "'; valid names: " + builtin_names());
}

// ---------------------------------------------------------------------------
// Output helpers

/// Table cells carry 6 significant digits.
inline std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void print_table(std::ostream& out, const std::vector<std::string>& head,
                        const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) width[c] = head[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << r[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << r[c];
      }
    }
    out << "\n";
  };
  line(head);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total - 2, '-') << "\n";
  for (const auto& r : rows) line(r);
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << content;
  if (!f) throw DataError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Commands

struct DataArgs {
  std::string data;
  std::string y;
  std::vector<std::string> x;
  std::vector<std::string> z;
};

struct FitArgs {
  DataArgs data;
  std::string link = "logit";
  std::optional<std::string> out;
  double level = 0.95;
  std::uint64_t seed = 0;
};

inline Dataset load_dataset(const DataArgs& a) {
  return dataset_from_table(read_csv(a.data), CsvSchema{a.y, a.x, a.z});
}

inline int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const ModelSpec spec = parse_model(args.link);
    const Dataset data = load_dataset(args.data);
    FitConfig cfg;
    cfg.seed = args.seed;
    const FitResult f = fit(data, spec, cfg);

    const double zc = wald_critical_value(args.level);
    const Vector est = f.beta_hat.packed();
    const auto names = parameter_names(f.beta_hat);
    std::vector<std::vector<std::string>> rows;
    std::ostringstream csv;
    csv << "parameter,estimate,ase,z,p_value,lower,upper\n";
    for (Index j = 0; j < est.size(); ++j) {
      const double se = f.ase[j];
      const double z = est[j] / se;
      const double p = 2.0 * std_normal_cdf(-std::fabs(z));
      const double lo = est[j] - zc * se;
      const double hi = est[j] + zc * se;
      const auto& name = names[static_cast<std::size_t>(j)];
      rows.push_back({name, cell(est[j]), cell(se), cell(z), cell(p), cell(lo), cell(hi)});
      csv << name << ',' << full(est[j]) << ',' << full(se) << ',' << full(z) << ',' << full(p)
          << ',' << full(lo) << ',' << full(hi) << "\n";
    }
    out << "model: " << model_name(spec) << (spec.plain ? "" : "-ZIBer") << "\n";
    out << "n: " << data.n() << "  zero fraction: " << cell(zi_ratio(data)) << "\n";
    out << "log-likelihood: " << cell(f.loglik) << "\n";
    const auto pct = cell(100.0 * args.level);
    print_table(out, {"parameter", "estimate", "ASE", "z", "p-value", "lower " + pct + "%", "upper " + pct + "%"}, rows);
    if (args.out) write_file(*args.out, csv.str());
    if (f.singular) err << "warning: observed information is not positive definite\n";
    if (f.boundary) err << "warning: estimate is at a parameter boundary\n";
    if (!f.converged) {
      err << "warning: optimizer did not converge (max |score| = " << cell(f.score.cwiseAbs().maxCoeff())
          << ")\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

struct SimulateArgs {
  std::string scenario;
  Index n = 500;
  int reps = 200;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  double level = 0.95;
};

inline int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Scenario sc = resolve_scenario(args.scenario);
    if (args.n < 1) throw DataError("--n must be >= 1");
    if (args.reps < 2) throw DataError("--reps must be >= 2");
    if (!(args.level > 0.0 && args.level < 1.0)) throw DataError("--level must be in (0, 1)");
    FitConfig cfg;
    cfg.seed = args.seed;
    StudyOptions opt;
    opt.level = args.level;
    const StudyReport rep = run_study(sc, args.n, args.reps, args.seed, cfg, opt);

    out << "scenario: " << rep.scenario << " (" << rep.link << "-ZIBer";
    if (rep.generating_eps) out << ", eps = " << cell(*rep.generating_eps);
    out << ")\n";
    out << "n: " << rep.n << "  replications: " << rep.reps << "  used: " << rep.used
        << "  convergence failures: " << rep.failures << "\n";
    out << "mean zero-inflation ratio: " << cell(rep.mean_zi_ratio) << "\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : rep.parameters) {
      rows.push_back({p.name, cell(p.true_value), cell(p.bias), cell(p.mean_ase), cell(p.sd), cell(p.cp)});
    }
    print_table(out, {"parameter", "true", "bias", "ASE", "SD", "CP"}, rows);
    if (args.out) {
      std::ostringstream csv;
      write_report_csv(rep, csv);
      write_file(*args.out, csv.str());
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

struct CompareArgs {
  DataArgs data;
  std::vector<std::string> links;
  std::optional<std::string> out;
  std::uint64_t seed = 0;
};

inline int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.links.size() < 2) throw DataError("compare needs at least two --link values");
    std::vector<ModelSpec> specs;
    for (const auto& l : args.links) specs.push_back(parse_model(l));
    const Dataset data = load_dataset(args.data);
    FitConfig cfg;
    cfg.seed = args.seed;

    std::vector<FitResult> fits;
    bool all_converged = true;
    std::vector<std::vector<std::string>> model_rows;
    for (std::size_t m = 0; m < specs.size(); ++m) {
      fits.push_back(fit(data, specs[m], cfg));
      all_converged = all_converged && fits.back().converged;
      model_rows.push_back({args.links[m], std::to_string(fits.back().beta_hat.dim()),
                            cell(fits.back().loglik), fits.back().converged ? "yes" : "no"});
    }
    print_table(out, {"model", "k", "log-likelihood", "converged"}, model_rows);
    out << "\n";

    std::vector<std::vector<std::string>> rows;
    std::ostringstream csv;
    csv << "model_a,model_b,statistic,mean_lr,sd_lr,preferred\n";
    for (std::size_t m = 1; m < specs.size(); ++m) {
      const VuongResult v = vuong(fits[0], fits[m], data.n());
      std::string verdict;
      switch (v.preferred) {
        case Preferred::ModelA: verdict = args.links[0] + " preferred"; break;
        case Preferred::ModelB: verdict = args.links[m] + " preferred"; break;
        case Preferred::Indeterminate: verdict = "Indeterminate"; break;
      }
      char stat[32];
      std::snprintf(stat, sizeof stat, "%.2f", v.statistic);
      rows.push_back({args.links[0] + " vs " + args.links[m], stat, cell(v.mean_lr), cell(v.sd_lr), verdict});
      csv << args.links[0] << ',' << args.links[m] << ',' << full(v.statistic) << ','
          << full(v.mean_lr) << ',' << full(v.sd_lr) << ',' << to_string(v.preferred) << "\n";
    }
    print_table(out, {"comparison", "Vuong", "mean LR", "SD LR", "verdict"}, rows);
    if (args.out) write_file(*args.out, csv.str());
    if (!all_converged) {
      err << "warning: at least one model did not converge\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

struct HistogramArgs {
  std::string data;
  std::string column;
  std::optional<std::string> out;
};

inline int cmd_histogram(const HistogramArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const CsvTable t = read_csv(args.data);
    const std::size_t c = t.column(args.column);
    if (t.rows.empty()) throw DataError("no data rows");
    std::map<long long, long long> counts;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto v = detail::parse_double(t.rows[r][c]);
      if (!v || !std::isfinite(*v) || std::floor(*v) != *v || std::fabs(*v) > 9.0e15) {
        throw DataError("row " + std::to_string(r + 1) + ", column '" + args.column + "': '" +
                        t.rows[r][c] + "' is not an integer");
      }
      ++counts[static_cast<long long>(*v)];
    }
    std::ostringstream csv;
    csv << "value,count\n";
    for (const auto& [v, k] : counts) csv << v << ',' << k << "\n";
    const double zero_fraction =
        static_cast<double>(counts.count(0) ? counts.at(0) : 0) / static_cast<double>(t.rows.size());
    if (args.out) {
      write_file(*args.out, csv.str());
    } else {
      out << csv.str();
    }
    out << "zero fraction: " << cell(zero_fraction) << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ziber::cli
