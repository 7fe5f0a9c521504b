#include "spps/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "spps/expression.hpp"
#include "spps/formal_powers.hpp"
#include "spps/spectral.hpp"

namespace spps {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Expression parse_field(const std::string& label, const std::string& text) {
  try {
    return parse_expression(text);
  } catch (const ParseError& e) {
    throw ConfigError(label + ": " + e.what());
  }
}

SampledFunction tabulate_field(const std::string& label, const Expression& e, const Mesh& mesh) {
  try {
    return evaluate_expression(e, mesh);
  } catch (const Error& err) {
    throw ConfigError(label + ": " + err.what());
  }
}

// e and its derivatives 0..max_order.
DerivativeTable tabulate_table(const std::string& label, const std::string& text,
                               const Mesh& mesh, int max_order) {
  Expression e = parse_field(label, text);
  DerivativeTable t;
  for (int d = 0; d <= max_order; ++d) {
    t.push_back(tabulate_field(label, e, mesh));
    if (d < max_order) e = e.derivative();
  }
  return t;
}

Mesh make_mesh(const ProblemConfig& cfg) {
  return Mesh::with_basepoint(cfg.x1, cfg.x2, cfg.mesh, cfg.basepoint());
}

OperatorSpec make_operator(const ProblemConfig& cfg, const Mesh& mesh) {
  const int n = cfg.order;
  std::vector<DerivativeTable> phi;
  for (int j = 1; j <= n; ++j)
    phi.push_back(tabulate_table("coefficients.phi" + std::to_string(j),
                                 cfg.phi[static_cast<std::size_t>(j - 1)], mesh, std::max(n - 1, 0)));
  auto weight = tabulate_field("coefficients.r", parse_field("coefficients.r", cfg.weight), mesh);
  return OperatorSpec(std::move(phi), std::move(weight));
}

SeedOptions seed_options(const ProblemConfig& cfg) {
  SeedOptions o;
  o.rng_seed = cfg.seed;
  o.max_retries = cfg.tolerances.max_retries;
  o.wronskian_floor = cfg.tolerances.wronskian_floor;
  o.residual_tolerance = cfg.tolerances.residual;
  o.truncation = cfg.truncation;
  return o;
}

SeedResult explicit_seed(const ProblemConfig& cfg, const OperatorSpec& op) {
  const int n = cfg.order;
  SeedResult r;
  for (int k = 1; k <= n; ++k)
    r.system.y.push_back(tabulate_table("seed_system.y" + std::to_string(k),
                                        cfg.seed_system[static_cast<std::size_t>(k - 1)],
                                        op.mesh(), 2 * n - 2));
  r.wronskian_min =
      check_nonvanishing(wronskians(r.system), cfg.tolerances.wronskian_floor).min_relative();
  for (const auto& y : r.system.y) r.residual_max = std::max(r.residual_max, relative_residual(op, y));
  if (!(r.residual_max <= cfg.tolerances.residual))
    throw ValidationError("explicit seed system does not solve Ly = 0: residual " +
                          std::to_string(r.residual_max) + " exceeds tolerance " +
                          std::to_string(cfg.tolerances.residual));
  return r;
}

json complex_json(cplx v) { return json::array({v.real(), v.imag()}); }

struct Output {
  fs::path dir;
  std::string format;
  std::vector<std::string> files;

  void write(const std::string& name, const SampledFunction& f) {
    fs::create_directories(dir);
    const fs::path path = dir / (name + "." + format);
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    if (format == "csv") {
      write_csv(os, f);
    } else {
      json j{{"x", json::array()}, {"re", json::array()}, {"im", json::array()}};
      for (std::size_t i = 0; i < f.size(); ++i) {
        j["x"].push_back(f.mesh().node(i));
        j["re"].push_back(f[i].real());
        j["im"].push_back(f[i].imag());
      }
      os << j.dump() << '\n';
    }
    if (!os) throw ConfigError("failed writing '" + path.string() + "'");
    files.push_back(path.string());
  }
};

json base_report(const std::string& command, const Problem& p) {
  return json{{"command", command},
              {"residual_max", p.seed.residual_max},
              {"wronskian_min", p.seed.wronskian_min},
              {"retries", p.seed.retries},
              {"seed_system", p.explicit_seed ? "explicit" : "constructed"},
              {"x0",
               {{"requested", p.config.basepoint()},
                {"node", p.mesh.basepoint()},
                {"index", p.mesh.base_index()}}}};
}

std::shared_ptr<const SppsSystem> make_system(const Problem& p) {
  return std::make_shared<const SppsSystem>(
      p.op, factorize(p.op, p.seed.system, p.config.tolerances.wronskian_floor),
      p.config.truncation);
}

json cmd_factorize(const Problem& p, Output& out) {
  const auto fac = factorize(p.op, p.seed.system, p.config.tolerances.wronskian_floor);
  const auto w = wronskians(p.seed.system);
  for (int j = 0; j <= fac.order(); ++j) out.write("b" + std::to_string(j), fac.factor(j));
  for (std::size_t j = 0; j < w.size(); ++j) out.write("W" + std::to_string(j), w[j]);
  json report = base_report("factorize", p);
  json residuals = json::array();
  for (const auto& y : p.seed.system.y) residuals.push_back(relative_residual(p.op, y));
  json moduli = json::array();
  for (const auto& c : check_nonvanishing(w, p.config.tolerances.wronskian_floor).entries)
    moduli.push_back({{"min", c.min_modulus}, {"max", c.max_modulus}, {"x_min", c.x}});
  report["residuals"] = residuals;
  report["min_moduli"] = moduli;
  report["files"] = out.files;
  return report;
}

json cmd_powers(const Problem& p, Output& out, bool secondary) {
  const auto sys = make_system(p);
  const auto& table = sys->table();
  double at_x0 = 0.0;
  for (int k = 1; k <= sys->order(); ++k) {
    for (int m = 0; m <= table.truncation(); ++m)
      out.write("P" + std::to_string(k) + "_" + std::to_string(m), table.main(k, m));
    for (int j = 0; j <= table.max_index(k); ++j) {
      if (j > 0) at_x0 = std::max(at_x0, std::abs(table.secondary(k, j).at_basepoint()));
      if (secondary) out.write("X" + std::to_string(k) + "_" + std::to_string(j), table.secondary(k, j));
    }
  }
  json report = base_report("powers", p);
  report["truncation"] = table.truncation();
  report["max_power_at_x0"] = at_x0;
  report["files"] = out.files;
  return report;
}

json cmd_solve(const Problem& p, Output& out) {
  if (!p.config.solve) throw ConfigError("solve needs a [solve] section");
  const auto sys = make_system(p);
  const auto& s = *p.config.solve;
  const auto c = ivp_coefficients(*sys, s.init);
  out.write("solution", solve_ivp(*sys, s.lambda, s.init));
  json report = base_report("solve", p);
  json coeffs = json::array();
  for (const auto& v : c) coeffs.push_back(complex_json(v));
  const double tail = sys->tail_ratio(s.lambda);
  report["lambda"] = complex_json(s.lambda);
  report["coefficients"] = coeffs;
  report["solution_residual"] = sys->residual(s.lambda, c);
  report["tail_ratio"] = tail;
  report["truncation_warning"] = tail > SeriesValue::kTailWarning;
  report["files"] = out.files;
  return report;
}

json candidate_json(const EigenCandidate& c) {
  json j{{"lambda_re", c.lambda.real()}, {"lambda_im", c.lambda.imag()}, {"residual", c.residual}};
  if (!c.accepted) j["reason"] = c.reason;
  return j;
}

json cmd_eig(const Problem& p, Output& out, bool eigenfunctions) {
  if (p.config.boundary.empty()) throw ConfigError("eig needs a [boundary] section");
  if (!p.config.eig) throw ConfigError("eig needs an [eig] section");
  std::vector<BoundaryRow> rows;
  for (const auto& r : p.config.boundary) rows.push_back({r.left, r.right});
  BoundaryConditions bc = [&] {
    try {
      return BoundaryConditions(std::move(rows));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("boundary: ") + e.what());
    }
  }();
  const CharacteristicFunction cf(make_system(p), std::move(bc));
  const auto& e = *p.config.eig;
  EigenOptions opts;
  opts.scan_points = e.scan_points;
  opts.bisection_tolerance = p.config.tolerances.bisection;
  opts.residual_tolerance = p.config.tolerances.residual;
  Region region = RealInterval{e.lo, e.hi};
  if (e.mode == EigSpec::Mode::Disk) region = Disk{e.center, e.radius};
  const auto found = find_eigenvalues(cf, region, opts);

  json report = base_report("eig", p);
  json eigs = json::array();
  for (std::size_t i = 0; i < found.eigenvalues.size(); ++i) {
    eigs.push_back(candidate_json(found.eigenvalues[i]));
    if (eigenfunctions)
      out.write("eigenfunction_" + std::to_string(i + 1), eigenfunction(cf, found.eigenvalues[i].lambda));
  }
  json spurious = json::array();
  for (const auto& c : found.spurious) spurious.push_back(candidate_json(c));
  report["eigenvalues"] = eigs;
  report["spurious"] = spurious;
  report["tail_ratio"] = found.tail_ratio;
  if (eigenfunctions) report["files"] = out.files;
  return report;
}

json cmd_verify(const Problem& p, int& code) {
  const auto sys = make_system(p);
  const auto& cfg = p.config;
  const int n = sys->order();
  json checks = json::array();
  bool all = true;
  auto check = [&](const std::string& name, double value, double threshold, bool below = true) {
    const bool pass = below ? value <= threshold : value >= threshold;
    all = all && pass;
    checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"pass", pass}});
  };

  check("seed_residual", p.seed.residual_max, cfg.tolerances.residual);
  check("wronskian_min", p.seed.wronskian_min, cfg.tolerances.wronskian_floor, false);

  double at_x0 = 0.0;
  for (int k = 1; k <= n; ++k)
    for (int j = 1; j <= sys->table().max_index(k); ++j)
      at_x0 = std::max(at_x0, std::abs(sys->table().secondary(k, j).at_basepoint()));
  check("formal_powers_vanish_at_x0", at_x0, 1e-14);

  const auto t = sys->initial_matrix();
  double scale = 0.0;
  double upper = 0.0;
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      const double v = std::abs(t[static_cast<std::size_t>(l * n + k)]);
      scale = std::max(scale, v);
      if (k > l) upper = std::max(upper, v);
    }
  check("initial_matrix_upper_part", upper / scale, 1e-10);

  const std::array<cplx, 4> lambdas{0.0, 1.0, -2.0, cplx(0.0, 3.0)};
  double invariance = 0.0;
  double residual = 0.0;
  double derivative = 0.0;
  for (const cplx lambda : lambdas) {
    for (int k = 1; k <= n; ++k) {
      for (int l = 0; l < n; ++l) {
        const cplx v = sys->derivative(k, lambda, l).value.at_basepoint();
        invariance = std::max(invariance, std::abs(v - t[static_cast<std::size_t>(l * n + k - 1)]) / scale);
      }
      std::vector<cplx> c(static_cast<std::size_t>(n), cplx{});
      c[static_cast<std::size_t>(k - 1)] = 1.0;
      residual = std::max(residual, sys->residual(lambda, c));
      if (n >= 2) {
        const auto u = sys->solution(k, lambda).value;
        const auto exact = sys->derivative(k, lambda, 1).value;
        const auto fd = differentiate(u, 1);
        double diff = 0.0;
        for (std::size_t i = 1; i + 1 < u.size(); ++i) diff = std::max(diff, std::abs(exact[i] - fd[i]));
        derivative = std::max(derivative, diff / std::max(exact.max_modulus(), 1e-300));
      }
    }
  }
  check("initial_data_lambda_invariance", invariance, 1e-9);
  check("solution_residual", residual, cfg.tolerances.residual);
  if (n >= 2) check("derivative_formula_consistency", derivative, 1e-5);

  json report = base_report("verify", p);
  report["checks"] = checks;
  report["pass"] = all;
  code = all ? exit_code::ok : exit_code::validation;
  return report;
}

}  // namespace

Problem assemble(const ProblemConfig& cfg) {
  cfg.validate();
  Mesh mesh = make_mesh(cfg);
  OperatorSpec op = make_operator(cfg, mesh);
  const bool has_seed = !cfg.seed_system.empty();
  SeedResult seed = has_seed ? explicit_seed(cfg, op) : build_seed_system(op, seed_options(cfg));
  return Problem{cfg, std::move(mesh), std::move(op), std::move(seed), has_seed};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral parameter power series solver for linear ODEs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::size_t> mesh;
  std::optional<int> order;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out_dir = ".";
  std::string format = "csv";
  bool secondary = false;
  bool eigenfunctions = false;

  app.add_option("--config", config_path, "Problem definition file")->required();
  app.add_option("--mesh", mesh, "Number of mesh nodes (1 mod 4)");
  app.add_option("--order", order, "Truncation order M");
  app.add_option("--seed", seed, "Random seed for the seed-system builder");
  app.add_option("--tol", tol, "Base residual tolerance");
  app.add_option("--out", out_dir, "Output directory for function dumps");
  app.add_option("--format", format, "Function dump format")->check(CLI::IsMember({"csv", "json"}));

  auto* factorize_cmd = app.add_subcommand("factorize", "Write b_j and W_j and a verification report");
  auto* powers_cmd = app.add_subcommand("powers", "Write the main formal powers P_k^(m)");
  powers_cmd->add_flag("--secondary", secondary, "Also write every X_k^(j)");
  auto* solve_cmd = app.add_subcommand("solve", "Solve the initial value problem in [solve]");
  auto* eig_cmd = app.add_subcommand("eig", "Find eigenvalues in the [eig] region");
  eig_cmd->add_flag("--eigenfunctions", eigenfunctions, "Write normalized eigenfunctions");
  auto* verify_cmd = app.add_subcommand("verify", "Check invariants and print a JSON report");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::config;
  }

  try {
    ProblemConfig cfg = load_config(config_path);
    if (mesh) cfg.mesh = *mesh;
    if (order) cfg.truncation = *order;
    if (seed) cfg.seed = *seed;
    if (tol) cfg.tolerances.residual = *tol;
    const Problem problem = assemble(cfg);
    if (std::abs(problem.mesh.basepoint() - cfg.basepoint()) > 1e-12 * (cfg.x2 - cfg.x1))
      err << "note: x0 = " << cfg.basepoint() << " snapped to node " << problem.mesh.base_index()
          << " (x = " << problem.mesh.basepoint() << ")\n";

    Output output{out_dir, format, {}};
    int code = exit_code::ok;
    json report;
    if (factorize_cmd->parsed())
      report = cmd_factorize(problem, output);
    else if (powers_cmd->parsed())
      report = cmd_powers(problem, output, secondary);
    else if (solve_cmd->parsed())
      report = cmd_solve(problem, output);
    else if (eig_cmd->parsed())
      report = cmd_eig(problem, output, eigenfunctions);
    else if (verify_cmd->parsed())
      report = cmd_verify(problem, code);
    out << report.dump(2) << '\n';
    return code;
  } catch (const TruncationError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::truncation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::validation;
  } catch (const VanishingFunction& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::config;
  }
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace spps
