#include "hlab/io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "hlab/errors.hpp"

namespace hlab::io {

using nlohmann::json;

std::string format_double(double x) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

std::filesystem::path resolve_output_root(const std::string& configured_root) {
  if (const char* env = std::getenv("HARNACK_LAB_OUT"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  if (!configured_root.empty()) return std::filesystem::path(configured_root);
  return std::filesystem::path("out");
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
  std::error_code ec;
  if (file.has_parent_path()) {
    std::filesystem::create_directories(file.parent_path(), ec);
    if (ec) {
      throw ConfigError("cannot create directory " + file.parent_path().string() +
                        ": " + ec.message());
    }
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + file.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("short write to " + file.string());
}

std::uint64_t fnv1a_checksum(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string bool_cell(bool b) { return b ? "true" : "false"; }

std::string direction_name(Direction d) {
  return d == Direction::forward ? "forward" : "backward";
}

json exponents_json(const ExponentTriple& e) {
  return json{{"n", e.n()}, {"p", e.p()}, {"q", e.q()},
              {"d", e.d()}, {"eta", e.eta()}};
}

// CSV field quoting for free-text cells (reasons may contain commas).
std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

std::string certificate_json(const CertificateReport& report) {
  json constants = json::object();
  for (const auto& [k, v] : report.constants) constants[k] = v;
  const json j{{"function", report.function},
               {"constants", constants},
               {"grid", {{"nr", report.grid.nr}, {"nt", report.grid.nt}}},
               {"max_residual", report.max_residual},
               {"argmax", {{"r", report.argmax_r}, {"t", report.argmax_t}}},
               {"tolerance", kCertifyTolerance},
               {"aux_ok", report.aux_ok},
               {"pass", report.pass}};
  return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "direction,x0,t0,r,c,theta,extremum,empirical_mu,pass,skipped,reason\n";
  for (const SweepRow& row : table.rows) {
    out << direction_name(row.direction) << ',' << format_double(row.x0) << ','
        << format_double(row.t0) << ',' << format_double(row.r) << ','
        << format_double(row.c) << ',' << format_double(row.theta) << ','
        << format_double(row.extremum) << ',' << format_double(row.empirical_mu)
        << ',' << bool_cell(row.pass) << ',' << bool_cell(row.skipped) << ','
        << quote_csv(row.reason) << '\n';
  }
  return out.str();
}

std::string sweep_aggregate_json(const SweepTable& table) {
  json arr = json::array();
  for (const SweepAggregate& agg : table.aggregates) {
    arr.push_back(json{{"direction", direction_name(agg.direction)},
                       {"r", agg.r},
                       {"max_mu", agg.max_mu},
                       {"evaluated", agg.evaluated},
                       {"skipped", agg.skipped}});
  }
  return json{{"aggregates", arr}}.dump(2) + "\n";
}

std::string harnack_report_json(const HarnackQuery& query, const HarnackReport& report) {
  const json j{{"query",
                {{"x0", query.x0},
                 {"t0", query.t0},
                 {"r", query.r},
                 {"c", query.c},
                 {"mu", query.mu},
                 {"sigma", query.sigma},
                 {"direction", direction_name(query.direction)}}},
               {"theta", report.theta},
               {"probe_value", report.probe_value},
               {"extremum", report.extremum},
               {"empirical_mu", report.empirical_mu},
               {"geometry_ok", report.geometry_ok},
               {"pass", report.pass}};
  return j.dump(2) + "\n";
}

std::string chain_trace_json(const ChainParams& params, const ChainTrace& trace) {
  json steps = json::array();
  for (const ChainStep& s : trace.steps) {
    steps.push_back(json{{"x", s.x},
                         {"t", s.t},
                         {"u", s.u},
                         {"rho", s.rho},
                         {"phase", std::string(1, s.phase)}});
  }
  const json j{{"params",
                {{"sigma_t", params.sigma_t},
                 {"sigma", params.sigma},
                 {"tilde_c", params.base.tilde_c},
                 {"tilde_mu", params.base.tilde_mu},
                 {"tilde_sigma", params.base.tilde_sigma},
                 {"kappa", params.kappa},
                 {"alpha", params.alpha},
                 {"sigma_x", params.sigma_x},
                 {"c_time", params.c_time},
                 {"mu_time", params.mu_time},
                 {"max_time_steps", params.max_time_steps},
                 {"varrho", params.varrho},
                 {"c_space", params.c_space},
                 {"mu_space", params.mu_space},
                 {"max_space_steps", params.max_space_steps},
                 {"passthrough", params.passthrough}}},
               {"steps", steps},
               {"space_steps", trace.space_steps},
               {"time_steps", trace.time_steps},
               {"mu_total", trace.mu_total},
               {"certified", trace.certified}};
  return j.dump(2) + "\n";
}

std::string extinction_json(const ExtinctionReport& report) {
  const json j{{"exponents", exponents_json(report.e)},
               {"s", report.s},
               {"subcritical", report.subcritical},
               {"extinction_time_emp", report.extinction_time_emp},
               {"decay_slope", report.decay_slope},
               {"fit_residual", report.fit_residual},
               {"C_emp", report.C_emp},
               {"floor", report.floor},
               {"t_max", report.t_max},
               {"checks",
                {{"monotone", report.bound_check.monotone},
                 {"slope_positive", report.bound_check.slope_positive},
                 {"fit_ok", report.bound_check.fit_ok}}}};
  return j.dump(2) + "\n";
}

std::string norm_curve_csv(const ExtinctionReport& report) {
  std::ostringstream out;
  out << "t,v,v_pow_2mq\n";
  const double expo = 2.0 - report.e.q();
  for (const auto& [t, v] : report.norm_curve) {
    out << format_double(t) << ',' << format_double(v) << ','
        << format_double(std::pow(v, expo)) << '\n';
  }
  return out.str();
}

std::string sobolev_json(const ExponentTriple& e, const SobolevResult& result) {
  const json j{{"exponents", exponents_json(e)},
               {"ratio", result.ratio},
               {"degenerate", result.degenerate}};
  return j.dump(2) + "\n";
}

std::string dichotomy_csv(const std::vector<DichotomyRow>& rows) {
  std::ostringstream out;
  out << "q,in_range,extinct,extinction_time,v0,v_end,floor,t_max\n";
  for (const DichotomyRow& row : rows) {
    out << format_double(row.q) << ',' << bool_cell(row.in_range) << ','
        << bool_cell(row.extinct) << ',' << format_double(row.extinction_time)
        << ',' << format_double(row.v0) << ',' << format_double(row.v_end) << ','
        << format_double(row.floor) << ',' << format_double(row.t_max) << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,r,u\n";
  for (const Snapshot& s : traj.snapshots) {
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      out << format_double(s.t) << ','
          << format_double(traj.delta_r * static_cast<double>(j)) << ','
          << format_double(s.u[j]) << '\n';
    }
  }
  return out.str();
}

std::string trajectory_meta_json(const Trajectory& traj) {
  const json j{{"exponents", exponents_json(traj.exponents)},
               {"R", traj.R},
               {"delta_r", traj.delta_r},
               {"nodes", traj.snapshots.front().u.size()},
               {"snapshots", traj.snapshots.size()},
               {"t_final", traj.snapshots.back().t},
               {"stopped_early", traj.stopped_early},
               {"eps_grad", traj.params_used.eps_grad},
               {"cfl", traj.params_used.cfl},
               {"form", traj.params_used.form == DiscreteForm::conservative
                            ? "conservative"
                            : "nondivergence"}};
  return j.dump(2) + "\n";
}

void Manifest::add(const std::filesystem::path& root, const std::string& relative_path) {
  const std::filesystem::path full = root / relative_path;
  std::ifstream in(full, std::ios::binary);
  if (!in) throw ConfigError("manifest: cannot read back " + full.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  ManifestEntry entry;
  entry.path = relative_path;
  entry.bytes = bytes.size();
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a_checksum(bytes);
  entry.fnv1a = hex.str();
  entries_.push_back(std::move(entry));
}

std::string Manifest::to_json(bool complete) const {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char stamp[80];
  std::snprintf(stamp, sizeof stamp, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);

  json files = json::array();
  for (const ManifestEntry& e : entries_) {
    files.push_back(json{{"path", e.path}, {"bytes", e.bytes}, {"fnv1a", e.fnv1a}});
  }
  const json j{{"schema_version", 1},
               {"generated_at", stamp},
               {"complete", complete},
               {"files", files}};
  return j.dump(2) + "\n";
}

}  // namespace hlab::io
