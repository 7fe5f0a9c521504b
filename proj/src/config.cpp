#include "spps/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spps/expression.hpp"

namespace spps {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

cplx complex_value(const std::string& key, const std::string& text) {
  try {
    const cplx v = parse_expression(text).constant_value();
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw ConfigError(key + ": value '" + text + "' is not finite");
    return v;
  } catch (const ParseError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

double real_value(const std::string& key, const std::string& text) {
  const cplx v = complex_value(key, text);
  if (v.imag() != 0.0) throw ConfigError(key + ": expected a real number, got '" + text + "'");
  return v.real();
}

long long integer_value(const std::string& key, const std::string& text) {
  const double v = real_value(key, text);
  if (v != std::round(v) || std::abs(v) > 9.0e15)
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return static_cast<long long>(v);
}

std::vector<cplx> complex_list(const std::string& key, const std::string& text) {
  std::vector<cplx> out;
  for (const auto& item : split_list(text)) out.push_back(complex_value(key, item));
  return out;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_complex(cplx v) {
  if (v.imag() == 0.0) return format_real(v.real());
  return format_real(v.real()) + "+" + format_real(v.imag()) + "*i";
}

std::string format_list(const std::vector<cplx>& vs) {
  std::string s;
  for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + format_complex(vs[i]);
  return s;
}

class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(pt::ptree::path_type(name_, '/'))) tree_ = &*child;
  }

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> get(const std::string& key) const {
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '/'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw ConfigError("missing key '" + key + "' in section [" + name_ + "]");
    return *v;
  }

  std::string label(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  const pt::ptree* tree_ = nullptr;
};

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

void ProblemConfig::validate() const {
  if (order < 1) throw ConfigError("problem.order must be at least 1");
  if (!(x1 < x2)) throw ConfigError("problem.x1 must be smaller than problem.x2");
  if (basepoint() < x1 || basepoint() > x2)
    throw ConfigError("problem.x0 must lie in [x1, x2]");
  if (mesh < 9 || mesh % 4 != 1) throw ConfigError("problem.mesh must be >= 9 and 1 mod 4");
  if (truncation < 0) throw ConfigError("problem.truncation must be >= 0");
  const auto n = static_cast<std::size_t>(order);
  if (phi.size() != n)
    throw ConfigError("expected " + std::to_string(n) + " coefficients phi1..phi" +
                      std::to_string(n) + ", got " + std::to_string(phi.size()));
  if (!seed_system.empty() && seed_system.size() != n)
    throw ConfigError("seed_system must list exactly " + std::to_string(n) + " functions");
  if (!boundary.empty() && boundary.size() != n)
    throw ConfigError("expected " + std::to_string(n) + " boundary conditions, got " +
                      std::to_string(boundary.size()));
  for (std::size_t i = 0; i < boundary.size(); ++i)
    if (boundary[i].left.size() != n || boundary[i].right.size() != n)
      throw ConfigError("boundary condition " + std::to_string(i + 1) + " needs " +
                        std::to_string(n) + " left and right coefficients");
  if (solve && solve->init.size() != n)
    throw ConfigError("solve.init must have " + std::to_string(n) + " entries");
}

ProblemConfig parse_config(std::istream& is) {
  pt::ptree root;
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  ProblemConfig cfg;
  const Section problem(root, "problem");
  if (!problem.present()) throw ConfigError("missing section [problem]");
  cfg.order = static_cast<int>(integer_value("problem.order", problem.require("order")));
  cfg.x1 = real_value("problem.x1", problem.require("x1"));
  cfg.x2 = real_value("problem.x2", problem.require("x2"));
  if (auto v = problem.get("x0")) cfg.x0 = real_value("problem.x0", *v);
  if (auto v = problem.get("mesh"))
    cfg.mesh = static_cast<std::size_t>(integer_value("problem.mesh", *v));
  if (auto v = problem.get("truncation"))
    cfg.truncation = static_cast<int>(integer_value("problem.truncation", *v));
  if (auto v = problem.get("seed"))
    cfg.seed = static_cast<std::uint64_t>(integer_value("problem.seed", *v));

  const Section coeffs(root, "coefficients");
  for (int j = 1; j <= std::max(cfg.order, 0); ++j)
    cfg.phi.push_back(coeffs.get("phi" + std::to_string(j)).value_or("0"));
  if (auto v = coeffs.get("r")) cfg.weight = *v;

  const Section seeds(root, "seed_system");
  if (seeds.present())
    for (int k = 1; k <= cfg.order; ++k)
      cfg.seed_system.push_back(seeds.require("y" + std::to_string(k)));

  const Section bc(root, "boundary");
  if (bc.present()) {
    for (int i = 1; i <= cfg.order; ++i) {
      const std::string stem = "bc" + std::to_string(i);
      BoundaryRowSpec row;
      row.left = complex_list(bc.label(stem + "_left"), bc.require(stem + "_left"));
      row.right = complex_list(bc.label(stem + "_right"), bc.require(stem + "_right"));
      cfg.boundary.push_back(std::move(row));
    }
  }

  const Section tol(root, "tolerances");
  if (auto v = tol.get("wronskian_floor"))
    cfg.tolerances.wronskian_floor = real_value(tol.label("wronskian_floor"), *v);
  if (auto v = tol.get("residual")) cfg.tolerances.residual = real_value(tol.label("residual"), *v);
  if (auto v = tol.get("bisection"))
    cfg.tolerances.bisection = real_value(tol.label("bisection"), *v);
  if (auto v = tol.get("max_retries"))
    cfg.tolerances.max_retries = static_cast<int>(integer_value(tol.label("max_retries"), *v));

  const Section solve(root, "solve");
  if (solve.present()) {
    SolveSpec s;
    s.lambda = complex_value(solve.label("lambda"), solve.get("lambda").value_or("0"));
    s.init = complex_list(solve.label("init"), solve.require("init"));
    cfg.solve = std::move(s);
  }

  const Section eig(root, "eig");
  if (eig.present()) {
    EigSpec e;
    const std::string region = eig.get("region").value_or("interval");
    if (region == "interval") {
      e.mode = EigSpec::Mode::Interval;
      e.lo = real_value(eig.label("lo"), eig.require("lo"));
      e.hi = real_value(eig.label("hi"), eig.require("hi"));
    } else if (region == "disk") {
      e.mode = EigSpec::Mode::Disk;
      e.center = complex_value(eig.label("center"), eig.require("center"));
      e.radius = real_value(eig.label("radius"), eig.require("radius"));
    } else {
      throw ConfigError("eig.region must be 'interval' or 'disk', got '" + region + "'");
    }
    if (auto v = eig.get("scan_points"))
      e.scan_points = static_cast<int>(integer_value(eig.label("scan_points"), *v));
    cfg.eig = e;
  }

  cfg.validate();
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(is);
}

void write_config(std::ostream& os, const ProblemConfig& cfg) {
  pt::ptree root;
  auto put = [&](const std::string& section, const std::string& key, const std::string& value) {
    root.put(pt::ptree::path_type(section + "/" + key, '/'), value);
  };
  put("problem", "order", std::to_string(cfg.order));
  put("problem", "x1", format_real(cfg.x1));
  put("problem", "x2", format_real(cfg.x2));
  if (cfg.x0) put("problem", "x0", format_real(*cfg.x0));
  put("problem", "mesh", std::to_string(cfg.mesh));
  put("problem", "truncation", std::to_string(cfg.truncation));
  put("problem", "seed", std::to_string(cfg.seed));

  for (std::size_t j = 0; j < cfg.phi.size(); ++j)
    put("coefficients", "phi" + std::to_string(j + 1), cfg.phi[j]);
  put("coefficients", "r", cfg.weight);

  for (std::size_t k = 0; k < cfg.seed_system.size(); ++k)
    put("seed_system", "y" + std::to_string(k + 1), cfg.seed_system[k]);

  for (std::size_t i = 0; i < cfg.boundary.size(); ++i) {
    const std::string stem = "bc" + std::to_string(i + 1);
    put("boundary", stem + "_left", format_list(cfg.boundary[i].left));
    put("boundary", stem + "_right", format_list(cfg.boundary[i].right));
  }

  put("tolerances", "wronskian_floor", format_real(cfg.tolerances.wronskian_floor));
  put("tolerances", "residual", format_real(cfg.tolerances.residual));
  put("tolerances", "bisection", format_real(cfg.tolerances.bisection));
  put("tolerances", "max_retries", std::to_string(cfg.tolerances.max_retries));

  if (cfg.solve) {
    put("solve", "lambda", format_complex(cfg.solve->lambda));
    put("solve", "init", format_list(cfg.solve->init));
  }
  if (cfg.eig) {
    if (cfg.eig->mode == EigSpec::Mode::Interval) {
      put("eig", "region", "interval");
      put("eig", "lo", format_real(cfg.eig->lo));
      put("eig", "hi", format_real(cfg.eig->hi));
    } else {
      put("eig", "region", "disk");
      put("eig", "center", format_complex(cfg.eig->center));
      put("eig", "radius", format_real(cfg.eig->radius));
    }
    put("eig", "scan_points", std::to_string(cfg.eig->scan_points));
  }
  pt::write_ini(os, root);
}

}  // namespace spps
