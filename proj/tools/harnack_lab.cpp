// Batch front-end: parses a JSON experiment config (with command-line
// overrides), dispatches to the library, and emits CSV/JSON artifacts plus a
// checksum manifest.  Exit codes: 0 all checks passed, 1 a check failed,
// 2 configuration or I/O error (nothing is written in that case).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hlab/comparison.hpp"
#include "hlab/errors.hpp"
#include "hlab/exponents.hpp"
#include "hlab/extinction.hpp"
#include "hlab/harnack.hpp"
#include "hlab/io.hpp"
#include "hlab/reference.hpp"
#include "hlab/solver.hpp"

namespace {

using hlab::ConfigError;
using nlohmann::json;

const std::set<std::string> kCommands = {"certify", "solve",      "harnack",
                                         "chain",   "extinction", "sobolev",
                                         "sweep"};

const std::set<std::string> kCommonKeys = {"out", "seed", "jobs"};

const std::set<std::string> kU0Keys = {"u0_kind", "u0_amplitude", "u0_radius",
                                       "u0_C"};

const std::set<std::string> kSolverKeys = {"eps_grad", "cfl", "snapshot_count",
                                           "snapshot_times", "form"};

std::set<std::string> allowed_keys(const std::string& command) {
  std::set<std::string> keys = kCommonKeys;
  auto add = [&keys](const std::set<std::string>& more) {
    keys.insert(more.begin(), more.end());
  };
  auto add_list = [&keys](std::initializer_list<const char*> more) {
    for (const char* k : more) keys.insert(k);
  };
  if (command == "certify") {
    add_list({"n", "p", "q", "function", "nr", "nt", "kappa", "rho", "nu_hole",
              "xi_scale"});
  } else if (command == "solve") {
    add_list({"n", "p", "q", "R", "nodes", "t_final"});
    add(kU0Keys);
    add(kSolverKeys);
  } else if (command == "harnack") {
    add_list({"n", "p", "q", "R", "nodes", "t_final", "x0", "t0", "r", "c",
              "mu", "direction", "sigma"});
    add(kU0Keys);
    add(kSolverKeys);
  } else if (command == "chain") {
    add_list({"n", "p", "q", "R", "nodes", "t_final", "start_x", "start_t",
              "target_x", "target_t", "sigma_t", "sigma", "tilde_c", "tilde_mu",
              "tilde_sigma"});
    add(kU0Keys);
    add(kSolverKeys);
  } else if (command == "extinction") {
    add_list({"n", "p", "q", "R", "nodes", "expect", "eps_grad", "cfl",
              "snapshot_count", "t_max_factor", "floor_rel"});
    add(kU0Keys);
  } else if (command == "sobolev") {
    add_list({"n", "p", "q", "R", "nodes"});
    add(kU0Keys);
  } else if (command == "sweep") {
    add_list({"n", "p", "R", "nodes", "q_values", "q_range", "eps_grad", "cfl",
              "snapshot_count", "t_max_factor", "floor_rel"});
    add(kU0Keys);
  }
  return keys;
}

// ---- Config access -----------------------------------------------------------

double require_number(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("missing required key '" + key + "'");
  if (!cfg[key].is_number()) throw ConfigError("key '" + key + "' must be a number");
  return cfg[key].get<double>();
}

double number_or(const json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_number()) throw ConfigError("key '" + key + "' must be a number");
  return cfg[key].get<double>();
}

int int_or(const json& cfg, const std::string& key, int fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_number_integer()) {
    throw ConfigError("key '" + key + "' must be an integer");
  }
  return cfg[key].get<int>();
}

std::string string_or(const json& cfg, const std::string& key,
                      const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_string()) throw ConfigError("key '" + key + "' must be a string");
  return cfg[key].get<std::string>();
}

hlab::ExponentTriple exponents_from(const json& cfg) {
  try {
    return hlab::ExponentTriple(require_number(cfg, "n"), require_number(cfg, "p"),
                                require_number(cfg, "q"));
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("invalid exponents: ") + err.what());
  }
}

// ---- Initial data builders -----------------------------------------------------

hlab::RadialField build_u0(const json& cfg, double R, int nodes, double q) {
  if (nodes < 4) throw ConfigError("'nodes' must be at least 4");
  if (!(R > 0.0)) throw ConfigError("'R' must be positive");
  const std::string kind = string_or(cfg, "u0_kind", "parabola");
  const double amplitude = number_or(cfg, "u0_amplitude", 1.0);
  const double radius = number_or(cfg, "u0_radius", 0.5 * R);
  if (!(amplitude > 0.0)) throw ConfigError("'u0_amplitude' must be positive");
  if (!(radius > 0.0 && radius <= R)) {
    throw ConfigError("'u0_radius' must lie in (0, R]");
  }

  hlab::RadialField field;
  field.delta_r = R / static_cast<double>(nodes - 1);
  field.R = R;
  field.values.resize(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) {
    const double r = field.delta_r * static_cast<double>(j);
    double v = 0.0;
    if (kind == "parabola") {
      const double s = 1.0 - (r / radius) * (r / radius);
      v = s > 0.0 ? amplitude * s : 0.0;
    } else if (kind == "bump") {
      const double x = r / radius;
      const double s = 1.0 - x * x;
      v = s > 0.0 ? amplitude * std::exp(1.0 - 1.0 / s) : 0.0;
    } else if (kind == "gauss") {
      // Gaussian shifted to vanish exactly at R (compact support).
      const double x = r / radius;
      const double edge = std::exp(-(R / radius) * (R / radius));
      v = amplitude * std::max(0.0, std::exp(-x * x) - edge);
    } else if (kind == "barenblatt") {
      const double C = number_or(cfg, "u0_C", 0.5);
      v = hlab::reference::barenblatt_profile(r, 1.0, C, q);
    } else {
      throw ConfigError("unknown u0_kind '" + kind + "'");
    }
    field.values[static_cast<std::size_t>(j)] = v;
  }
  field.values.back() = 0.0;
  return field;
}

hlab::SolverParams solver_params_from(const json& cfg) {
  hlab::SolverParams sp;
  sp.eps_grad = number_or(cfg, "eps_grad", 0.0);
  sp.cfl = number_or(cfg, "cfl", 0.4);
  sp.snapshot_count = int_or(cfg, "snapshot_count", 64);
  if (cfg.contains("snapshot_times")) {
    if (!cfg["snapshot_times"].is_array()) {
      throw ConfigError("'snapshot_times' must be an array of numbers");
    }
    for (const auto& v : cfg["snapshot_times"]) {
      if (!v.is_number()) throw ConfigError("'snapshot_times' entries must be numbers");
      sp.snapshot_times.push_back(v.get<double>());
    }
  }
  const std::string form = string_or(cfg, "form", "conservative");
  if (form == "conservative") sp.form = hlab::DiscreteForm::conservative;
  else if (form == "nondivergence") sp.form = hlab::DiscreteForm::nondivergence;
  else throw ConfigError("'form' must be 'conservative' or 'nondivergence'");
  return sp;
}

// ---- Command implementations ----------------------------------------------------

struct Output {
  std::string relative_path;
  std::string content;
};

struct CommandResult {
  int exit_code = 0;
  std::vector<Output> outputs;
};

CommandResult cmd_certify(const json& cfg) {
  const hlab::ExponentTriple e = exponents_from(cfg);
  const std::string function = string_or(cfg, "function", "");
  hlab::GridSpec grid;
  grid.nr = int_or(cfg, "nr", 400);
  grid.nt = int_or(cfg, "nt", 400);
  const double kappa = number_or(cfg, "kappa", 1.0);
  const double rho = number_or(cfg, "rho", 1.0);
  const double xi_scale = number_or(cfg, "xi_scale", 1.0);

  hlab::ComparisonSpec spec = [&]() -> hlab::ComparisonSpec {
    if (function == "phi") {
      const hlab::PhiConstants c = hlab::select_phi_constants(e);
      return hlab::PhiSpec{kappa, rho, c.xi * xi_scale, c.delta};
    }
    if (function == "g") {
      const hlab::GNuSelection sel = hlab::select_g_nu(e);
      // Besides the exponent window, the shape needs a positive decay rate,
      // which caps q at 2 + 1/nu.
      const double q_hi = std::min(sel.q_hi, 2.0 + 1.0 / sel.nu);
      if (!(e.q() > sel.q_lo && e.q() < q_hi)) {
        throw ConfigError("q outside the admissible window (" +
                          std::to_string(sel.q_lo) + ", " +
                          std::to_string(q_hi) + ") for 'g'");
      }
      return hlab::GSpec{kappa, rho, sel.nu, hlab::g_lambda(sel.nu, e.q())};
    }
    if (function == "psi") {
      const hlab::PsiConstants c = hlab::select_psi_constants(e);
      const double nu_hole = number_or(cfg, "nu_hole", 0.25);
      return hlab::PsiSpec{kappa,    nu_hole,  c.zeta, c.Theta,
                           c.Z,      c.lambda, c.C1,   c.C2};
    }
    throw ConfigError("'function' must be one of phi|g|psi");
  }();

  const hlab::CertificateReport report = hlab::certify_subsolution(spec, e, grid);
  CommandResult res;
  res.outputs.push_back({"certify/certificate.json", hlab::io::certificate_json(report)});
  res.exit_code = report.pass ? 0 : 1;
  return res;
}

CommandResult cmd_solve(const json& cfg) {
  const hlab::ExponentTriple e = exponents_from(cfg);
  const double R = require_number(cfg, "R");
  const int nodes = int_or(cfg, "nodes", 201);
  const double t_final = require_number(cfg, "t_final");
  const hlab::RadialField u0 = build_u0(cfg, R, nodes, e.q());
  const hlab::SolverParams sp = solver_params_from(cfg);

  const hlab::Trajectory traj = hlab::solve(u0, t_final, e, sp);
  CommandResult res;
  res.outputs.push_back({"solve/trajectory.csv", hlab::io::trajectory_csv(traj)});
  res.outputs.push_back({"solve/trajectory.json", hlab::io::trajectory_meta_json(traj)});
  return res;
}

CommandResult cmd_harnack(const json& cfg) {
  const hlab::ExponentTriple e = exponents_from(cfg);
  const double R = require_number(cfg, "R");
  const int nodes = int_or(cfg, "nodes", 201);
  const double t_final = require_number(cfg, "t_final");
  const hlab::RadialField u0 = build_u0(cfg, R, nodes, e.q());
  const hlab::SolverParams sp = solver_params_from(cfg);

  hlab::HarnackQuery query;
  query.x0 = require_number(cfg, "x0");
  query.t0 = require_number(cfg, "t0");
  query.r = require_number(cfg, "r");
  query.c = number_or(cfg, "c", 1.0);
  query.mu = number_or(cfg, "mu", 1.0);
  query.sigma = number_or(cfg, "sigma", 4.0);
  const std::string dir = string_or(cfg, "direction", "forward");
  if (dir == "forward") query.direction = hlab::Direction::forward;
  else if (dir == "backward") query.direction = hlab::Direction::backward;
  else throw ConfigError("'direction' must be 'forward' or 'backward'");

  const hlab::Trajectory traj = hlab::solve(u0, t_final, e, sp);
  const hlab::HarnackReport report = query.direction == hlab::Direction::forward
                                         ? hlab::forward_check(traj, query)
                                         : hlab::backward_check(traj, query);
  CommandResult res;
  res.outputs.push_back({"harnack/report.json",
                         hlab::io::harnack_report_json(query, report)});
  res.exit_code = report.pass ? 0 : 1;
  return res;
}

CommandResult cmd_chain(const json& cfg) {
  const hlab::ExponentTriple e = exponents_from(cfg);
  const double R = require_number(cfg, "R");
  const int nodes = int_or(cfg, "nodes", 201);
  const double t_final = require_number(cfg, "t_final");
  const hlab::RadialField u0 = build_u0(cfg, R, nodes, e.q());
  const hlab::SolverParams sp = solver_params_from(cfg);

  hlab::ChainBase base;
  base.tilde_c = number_or(cfg, "tilde_c", 1.0);
  base.tilde_mu = number_or(cfg, "tilde_mu", 2.0);
  base.tilde_sigma = number_or(cfg, "tilde_sigma", 2.0);
  const double sigma_t = number_or(cfg, "sigma_t", 1.5);
  const double sigma = number_or(cfg, "sigma", 2.0);

  const hlab::Trajectory traj = hlab::solve(u0, t_final, e, sp);
  const hlab::ChainParams params = hlab::chain_constants(sigma_t, sigma, base, e);
  hlab::ChainPoint start{require_number(cfg, "start_x"), require_number(cfg, "start_t")};
  hlab::ChainPoint target{require_number(cfg, "target_x"), require_number(cfg, "target_t")};
  const hlab::ChainTrace trace = hlab::run_chain(traj, start, target, params);

  CommandResult res;
  res.outputs.push_back({"chain/trace.json", hlab::io::chain_trace_json(params, trace)});
  res.exit_code = trace.certified ? 0 : 1;
  return res;
}

CommandResult cmd_extinction(const json& cfg) {
  const hlab::ExponentTriple e = exponents_from(cfg);
  const double R = require_number(cfg, "R");
  const int nodes = int_or(cfg, "nodes", 201);
  const hlab::RadialField u0 = build_u0(cfg, R, nodes, e.q());
  hlab::ExtinctionParams params;
  params.eps_grad = number_or(cfg, "eps_grad", 0.0);
  params.cfl = number_or(cfg, "cfl", 0.4);
  params.snapshot_count = int_or(cfg, "snapshot_count", 200);
  params.t_max_factor = number_or(cfg, "t_max_factor", 20.0);
  params.floor_rel = number_or(cfg, "floor_rel", 1e-6);
  const std::string expect = string_or(cfg, "expect", "");
  if (!expect.empty() && expect != "extinct" && expect != "survive") {
    throw ConfigError("'expect' must be 'extinct' or 'survive'");
  }

  CommandResult res;
  try {
    const hlab::ExtinctionReport report = hlab::run_extinction(u0, e, params);
    res.outputs.push_back({"extinction/report.json", hlab::io::extinction_json(report)});
    res.outputs.push_back({"extinction/norm_curve.csv", hlab::io::norm_curve_csv(report)});
    const bool checks = report.bound_check.all();
    if (expect == "survive") {
      res.exit_code = 1;  // extinction observed where survival was expected
    } else {
      res.exit_code = checks ? 0 : 1;
    }
  } catch (const hlab::NoExtinctionError& err) {
    const json j{{"no_extinction", true}, {"detail", err.what()},
                 {"expected_survival", expect == "survive"}};
    res.outputs.push_back({"extinction/report.json", j.dump(2) + "\n"});
    res.exit_code = expect == "survive" ? 0 : 1;
  }
  return res;
}

CommandResult cmd_sobolev(const json& cfg) {
  const hlab::ExponentTriple e = exponents_from(cfg);
  const double R = require_number(cfg, "R");
  const int nodes = int_or(cfg, "nodes", 201);
  const hlab::RadialField v = build_u0(cfg, R, nodes, e.q());
  const hlab::SobolevResult result = hlab::sobolev_check(v, e);
  CommandResult res;
  res.outputs.push_back({"sobolev/report.json", hlab::io::sobolev_json(e, result)});
  res.exit_code = result.degenerate ? 1 : 0;
  return res;
}

std::vector<double> sweep_q_values(const json& cfg) {
  std::vector<double> qs;
  if (cfg.contains("q_values")) {
    if (!cfg["q_values"].is_array()) throw ConfigError("'q_values' must be an array");
    for (const auto& v : cfg["q_values"]) {
      if (!v.is_number()) throw ConfigError("'q_values' entries must be numbers");
      qs.push_back(v.get<double>());
    }
  } else if (cfg.contains("q_range")) {
    const std::string spec = string_or(cfg, "q_range", "");
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
        !(step > 0.0) || !(hi >= lo)) {
      throw ConfigError("'q_range' must have the form lo:hi:step with step > 0");
    }
    for (double q = lo; q <= hi + 1e-12; q += step) qs.push_back(q);
  } else {
    throw ConfigError("sweep requires 'q_values' or 'q_range'");
  }
  if (qs.empty()) throw ConfigError("sweep produced no q values");
  for (double q : qs) {
    if (!(q > 1.0)) throw ConfigError("sweep q values must exceed 1");
  }
  return qs;
}

CommandResult cmd_sweep(const json& cfg) {
  const double n = require_number(cfg, "n");
  const double p = require_number(cfg, "p");
  const double R = require_number(cfg, "R");
  const int nodes = int_or(cfg, "nodes", 201);
  const std::vector<double> qs = sweep_q_values(cfg);
  for (double q : qs) {
    if (q >= 2.0) throw ConfigError("extinction sweep requires q < 2 throughout");
  }
  const hlab::RadialField u0 = build_u0(cfg, R, nodes, qs.front());
  hlab::ExtinctionParams params;
  params.eps_grad = number_or(cfg, "eps_grad", 0.0);
  params.cfl = number_or(cfg, "cfl", 0.4);
  params.snapshot_count = int_or(cfg, "snapshot_count", 200);
  params.t_max_factor = number_or(cfg, "t_max_factor", 20.0);
  params.floor_rel = number_or(cfg, "floor_rel", 1e-6);
  const int jobs = int_or(cfg, "jobs", 1);
  if (jobs < 1) throw ConfigError("'jobs' must be >= 1");

  const std::vector<hlab::DichotomyRow> rows =
      hlab::run_dichotomy_sweep(u0, n, p, qs, params, jobs);
  CommandResult res;
  res.outputs.push_back({"sweep/dichotomy.csv", hlab::io::dichotomy_csv(rows)});
  bool dichotomy = true;
  for (const hlab::DichotomyRow& row : rows) {
    if (row.extinct == row.in_range) dichotomy = false;
  }
  res.exit_code = dichotomy ? 0 : 1;
  return res;
}

// ---- Entry point ---------------------------------------------------------------

void usage(std::ostream& out) {
  out << "usage: harnack_lab <command> [--config file.json] [--key value ...]\n"
         "commands: certify solve harnack chain extinction sobolev sweep\n"
         "Flags override config keys; unknown keys are rejected.\n";
}

json load_config(int argc, char** argv) {
  // First locate --config, then apply every other flag as an override.
  json cfg = json::object();
  for (int i = 2; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw ConfigError(std::string("cannot open config ") + argv[i + 1]);
      try {
        in >> cfg;
      } catch (const json::exception& err) {
        throw ConfigError(std::string("malformed config JSON: ") + err.what());
      }
      if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
    }
  }
  for (int i = 2; i < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag.rfind("--", 0) != 0) {
      throw ConfigError("expected --key, got '" + flag + "'");
    }
    if (i + 1 >= argc) throw ConfigError("flag " + flag + " needs a value");
    const std::string key = flag.substr(2);
    if (key == "config") continue;
    const std::string value = argv[i + 1];
    try {
      cfg[key] = json::parse(value);
    } catch (const json::exception&) {
      cfg[key] = value;  // plain string
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    usage(std::cerr);
    return 2;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h") {
    usage(std::cout);
    return 0;
  }
  if (kCommands.count(command) == 0) {
    std::cerr << "unknown command '" << command << "'\n";
    usage(std::cerr);
    return 2;
  }

  CommandResult result;
  std::filesystem::path root;
  try {
    const json cfg = load_config(argc, argv);
    const std::set<std::string> allowed = allowed_keys(command);
    for (const auto& [key, value] : cfg.items()) {
      if (allowed.count(key) == 0) {
        throw ConfigError("unknown key '" + key + "' for command '" + command + "'");
      }
    }
    if (cfg.contains("jobs") && int_or(cfg, "jobs", 1) < 1) {
      throw ConfigError("'jobs' must be >= 1");
    }
    if (cfg.contains("seed") && !cfg["seed"].is_number_integer()) {
      throw ConfigError("'seed' must be an integer");
    }
    root = hlab::io::resolve_output_root(string_or(cfg, "out", ""));

    if (command == "certify") result = cmd_certify(cfg);
    else if (command == "solve") result = cmd_solve(cfg);
    else if (command == "harnack") result = cmd_harnack(cfg);
    else if (command == "chain") result = cmd_chain(cfg);
    else if (command == "extinction") result = cmd_extinction(cfg);
    else if (command == "sobolev") result = cmd_sobolev(cfg);
    else result = cmd_sweep(cfg);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const hlab::RegimeError& err) {
    std::cerr << "config error (regime): " << err.what() << "\n";
    return 2;
  } catch (const hlab::ExponentError& err) {
    std::cerr << "config error (exponents): " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error (argument): " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    // Domain failures (blow-up, geometry, selection, ...) count as failed checks.
    std::cerr << "check failed: " << err.what() << "\n";
    return 1;
  }

  try {
    hlab::io::Manifest manifest;
    for (const Output& out : result.outputs) {
      hlab::io::write_text_file(root / out.relative_path, out.content);
      manifest.add(root, out.relative_path);
    }
    hlab::io::write_text_file(root / "manifest.json", manifest.to_json(true));
  } catch (const ConfigError& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return 2;
  }
  return result.exit_code;
}
