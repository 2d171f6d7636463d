#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvbell/cvbell.hpp"

namespace cvbell::cli {

enum ExitCode : int { kOk = 0, kToleranceFailure = 1, kUsageError = 2, kNotConverged = 3 };

/// Raised for argument combinations that parse but make no sense.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  std::string profile = "rinv";
  double s = 10.0;
  std::optional<int> epsilon;
  std::string method = "quadrature";
  int order = 20;
  int fock_n = 0;
  double n_mean = 10.0;
  double n_mean_min = 0.0;
  double n_mean_max = 20.0;
  int n_mean_steps = 21;
  double d_min = 0.0;
  double d_max = 0.6;
  int d_steps = 61;
  std::string kind = "real";
  std::uint64_t seed = 1;
  std::string output;
  std::string format = "csv";
  bool only_violations = false;
  bool strict = false;
  std::optional<double> tol;
  int settings = -1;  // -1: per-command default
  std::size_t count = 0;
  double spread = -1.0;
  PhasePoint alice;
  PhasePoint bob;
};

/// "%.12g"
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::vector<double> linspace(double lo, double hi, int steps, const char* what) {
  if (steps < 1) throw UsageError(std::string(what) + ": steps must be >= 1");
  if (!(hi >= lo)) throw UsageError(std::string(what) + ": empty range");
  if (steps == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
  return out;
}

inline ObservableSpec make_family(const RunConfig& cfg) {
  const std::string& p = cfg.profile;
  auto fixed = [&](int eps, ObservableSpec spec) {
    if (cfg.epsilon && *cfg.epsilon != eps) {
      throw UsageError("profile " + p + " has epsilon " + std::to_string(eps));
    }
    return spec;
  };
  if (p == "parity") return fixed(-1, make_parity());
  if (p == "sign") return fixed(1, make_sign());
  if (p == "rinv") return fixed(-1, make_parity_inversion());
  int l = 0;
  if (p == "tanh") l = 1;
  else if (p == "expsat") l = 2;
  else if (p == "gausssat") l = 3;
  else throw UsageError("unknown profile '" + p + "'");
  if (!(cfg.s > 0.0)) throw UsageError("--s must be positive");
  const int eps = cfg.epsilon.value_or(-1);
  if (eps == -1) return make_unsharp(l, cfg.s);
  return {1, Profile::saturating(l, cfg.s)};
}

inline CorrelationMethod make_method(const RunConfig& cfg) {
  if (cfg.method == "closed") return ClosedForm{};
  if (cfg.method == "quadrature") {
    Quadrature q;
    q.spec.order = cfg.order;
    q.spec.validate();
    return q;
  }
  if (cfg.method == "fock") {
    if (cfg.fock_n < 0 || cfg.fock_n > kMaxSchmidtTruncation) throw UsageError("--fock-n out of range");
    return FockTruncation{cfg.fock_n, cfg.tol.value_or(1e-6)};
  }
  throw UsageError("unknown method '" + cfg.method + "'");
}

inline ScanKind make_kind(const std::string& k) {
  if (k == "real") return ScanKind::Real;
  if (k == "complex") return ScanKind::Complex;
  throw UsageError("unknown scan kind '" + k + "'");
}

/// Writes to --output when given, otherwise to `out`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) : out_(&out) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot open output file " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline int cmd_correlate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const EprState state = EprState::from_mean_photon(cfg.n_mean);
  const ObservableSpec family = make_family(cfg);
  const CorrelationMethod method = make_method(cfg);
  const CorrelationResult r = correlation(state, family.at(cfg.alice), family.at(cfg.bob), method);
  Sink sink(cfg.output, out);
  if (cfg.format == "json") {
    nlohmann::ordered_json j{{"n_mean", cfg.n_mean}, {"profile", cfg.profile},  {"method", method_name(method)},
                             {"qa", cfg.alice.q},    {"pa", cfg.alice.p},        {"qb", cfg.bob.q},
                             {"pb", cfg.bob.p},      {"E", r.value},             {"abs_E", std::abs(r.value)},
                             {"error", r.error},     {"converged", r.converged}};
    sink.stream() << j.dump(2) << '\n';
  } else {
    sink.stream() << "n_mean,profile,method,qa,pa,qb,pb,E,abs_E,error,converged\n"
                  << fmt(cfg.n_mean) << ',' << cfg.profile << ',' << method_name(method) << ','
                  << fmt(cfg.alice.q) << ',' << fmt(cfg.alice.p) << ',' << fmt(cfg.bob.q) << ','
                  << fmt(cfg.bob.p) << ',' << fmt(r.value) << ',' << fmt(std::abs(r.value)) << ','
                  << fmt(r.error) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  if (family.epsilon() == -1 && family.profile().kind() != ProfileKind::UnitConstant) {
    err << "note: sign follows the kernel convention; for two parity inversions E = -(2/pi) arctan(s2) "
           "exp(-c2(q^2+q'^2)+2 s2 q q')\n";
  }
  if (!r.converged) {
    err << "error: correlation did not converge (error estimate " << fmt(r.error) << ")\n";
    return kNotConverged;
  }
  return kOk;
}

inline int cmd_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ObservableSpec family = make_family(cfg);
  const CorrelationMethod method = make_method(cfg);
  const ScanKind kind = make_kind(cfg.kind);
  const auto n_grid = linspace(cfg.n_mean_min, cfg.n_mean_max, cfg.n_mean_steps, "n_mean");
  const auto d_grid = linspace(cfg.d_min, cfg.d_max, cfg.d_steps, "d");
  if (n_grid.front() < 0.0) throw UsageError("n_mean must be >= 0");
  const ScanResult scan = bell_scan(kind, n_grid, d_grid, family, method);

  Sink sink(cfg.output, out);
  std::size_t failures = 0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  if (cfg.format != "json") sink.stream() << "d,n_mean,B,converged\n";
  for (std::size_t r = 0; r < n_grid.size(); ++r) {
    for (std::size_t c = 0; c < d_grid.size(); ++c) {
      const double b = scan.at(r, c);
      const bool ok = scan.ok(r, c);
      if (!ok) ++failures;
      if (cfg.only_violations && !(std::abs(b) > 2.0)) continue;
      if (cfg.format == "json") {
        rows.push_back({{"d", d_grid[c]}, {"n_mean", n_grid[r]}, {"B", b}, {"converged", ok}});
      } else {
        sink.stream() << fmt(d_grid[c]) << ',' << fmt(n_grid[r]) << ',' << fmt(b) << ',' << (ok ? 1 : 0) << '\n';
      }
    }
  }
  if (cfg.format == "json") {
    nlohmann::ordered_json j{{"kind", to_string(kind)}, {"method", scan.method}, {"profile", cfg.profile},
                             {"rows", rows}};
    sink.stream() << j.dump(2) << '\n';
  }
  if (failures > 0) {
    err << "warning: " << failures << " cell(s) did not converge\n";
    if (cfg.strict) return kNotConverged;
  }
  return kOk;
}

inline int cmd_lhv(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const EprState state = EprState::from_mean_photon(cfg.n_mean);
  const ObservableSpec family = make_family(cfg);
  const WignerSymbol symbol = wigner_symbol(family);
  if (classify_boundedness(symbol) == Boundedness::Singular) {
    err << "error: profile '" << cfg.profile
        << "' has a singular Wigner symbol (delta(q) on a line, unbounded). Only bounded symbols act as "
           "local response functions, so the phase-space LHV model does not apply.\n";
    return kUsageError;
  }
  const int n_settings = cfg.settings < 0 ? 400 : cfg.settings;
  if (n_settings < 1) throw UsageError("--settings must be >= 1");
  const double spread = cfg.spread > 0.0 ? cfg.spread : 1.0;
  const auto settings = random_settings(static_cast<std::size_t>(n_settings), cfg.seed, spread);
  LhvMethod method = LhvQuadrature{};
  if (cfg.count > 0) method = LhvMonteCarlo{cfg.count, cfg.seed};
  const double tol = cfg.tol.value_or(cfg.count > 0 ? 5e-3 : 1e-6);
  const LhvScanResult r = lhv_chsh_scan(state, symbol, settings, method);
  const bool pass = r.max_abs <= 2.0 + tol;

  Sink sink(cfg.output, out);
  const std::string method_tag = cfg.count > 0 ? "montecarlo" : "quadrature";
  if (cfg.format == "json") {
    nlohmann::ordered_json j{{"n_mean", cfg.n_mean}, {"profile", cfg.profile}, {"method", method_tag},
                             {"settings", n_settings}, {"max_abs_B", r.max_abs}, {"argmax", r.argmax},
                             {"error", r.error},       {"tolerance", tol},       {"verdict", pass ? "PASS" : "FAIL"}};
    sink.stream() << j.dump(2) << '\n';
  } else {
    sink.stream() << "n_mean,profile,method,settings,max_abs_B,argmax,error,tolerance,verdict\n"
                  << fmt(cfg.n_mean) << ',' << cfg.profile << ',' << method_tag << ',' << n_settings << ','
                  << fmt(r.max_abs) << ',' << r.argmax << ',' << fmt(r.error) << ',' << fmt(tol) << ','
                  << (pass ? "PASS" : "FAIL") << '\n';
  }
  if (!r.converged) {
    err << "warning: some LHV integrals did not converge\n";
    if (cfg.strict) return kNotConverged;
  }
  return pass ? kOk : kToleranceFailure;
}

inline int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const EprState state = EprState::from_mean_photon(cfg.n_mean);
  const ObservableSpec family = make_family(cfg);
  const int n_settings = cfg.settings < 0 ? 10 : cfg.settings;
  if (n_settings < 1) throw UsageError("oracle: settings list is empty");
  const double spread = cfg.spread > 0.0 ? cfg.spread : 0.3;
  const bool real_only = cfg.kind == "real";
  const auto settings = random_settings(static_cast<std::size_t>(n_settings), cfg.seed, spread, real_only);
  Quadrature quad;
  quad.spec.order = cfg.order;
  quad.spec.validate();
  const FockTruncation fock{cfg.fock_n > 0 ? cfg.fock_n : 256, 1e-6};
  const OracleReport rep = oracle_compare(state, family, settings, quad, fock);
  const double tol = cfg.tol.value_or(1e-5);
  const bool pass = rep.max_discrepancy() < tol;

  Sink sink(cfg.output, out);
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("nan"); };
  if (cfg.format == "json") {
    nlohmann::ordered_json j{{"n_mean", cfg.n_mean},
                             {"profile", cfg.profile},
                             {"correlations", rep.correlations},
                             {"quadrature_vs_fock", rep.quadrature_vs_fock},
                             {"quadrature_vs_closed", rep.quadrature_vs_closed ? nlohmann::ordered_json(*rep.quadrature_vs_closed) : nullptr},
                             {"fock_vs_closed", rep.fock_vs_closed ? nlohmann::ordered_json(*rep.fock_vs_closed) : nullptr},
                             {"max_discrepancy", rep.max_discrepancy()},
                             {"unconverged", rep.unconverged},
                             {"tolerance", tol},
                             {"verdict", pass ? "PASS" : "FAIL"}};
    sink.stream() << j.dump(2) << '\n';
  } else {
    sink.stream() << "n_mean,profile,correlations,quadrature_vs_fock,quadrature_vs_closed,fock_vs_closed,"
                     "max_discrepancy,unconverged,tolerance,verdict\n"
                  << fmt(cfg.n_mean) << ',' << cfg.profile << ',' << rep.correlations << ','
                  << fmt(rep.quadrature_vs_fock) << ',' << opt(rep.quadrature_vs_closed) << ','
                  << opt(rep.fock_vs_closed) << ',' << fmt(rep.max_discrepancy()) << ',' << rep.unconverged << ','
                  << fmt(tol) << ',' << (pass ? "PASS" : "FAIL") << '\n';
  }
  if (!pass) {
    err << "error: max discrepancy " << fmt(rep.max_discrepancy()) << " exceeds tolerance " << fmt(tol) << '\n';
    return kToleranceFailure;
  }
  if (rep.unconverged > 0 && cfg.strict) return kNotConverged;
  return kOk;
}

inline void parse_point(const std::string& text, PhasePoint& into, const char* what) {
  std::istringstream in(text);
  char comma = 0;
  PhasePoint p;
  if (!(in >> p.q)) throw UsageError(std::string(what) + ": expected q or q,p");
  if (in >> comma) {
    if (comma != ',' || !(in >> p.p)) throw UsageError(std::string(what) + ": expected q or q,p");
  }
  into = p;
}

/// Parses argv and runs the selected subcommand. Diagnostics go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Continuous-variable Bell tests on the two-mode squeezed vacuum"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  std::string alpha;
  std::string beta;
  std::optional<double> eps_flag;
  app.add_option("--profile", cfg.profile, "parity|sign|rinv|tanh|expsat|gausssat")
      ->check(CLI::IsMember({"parity", "sign", "rinv", "tanh", "expsat", "gausssat"}));
  app.add_option("--s", cfg.s, "steepness of the saturating profiles");
  app.add_option("--epsilon", eps_flag, "kernel reflection, +1 or -1")->check(CLI::IsMember({-1.0, 1.0}));
  app.add_option("--method", cfg.method, "closed|quadrature|fock")
      ->check(CLI::IsMember({"closed", "quadrature", "fock"}));
  app.add_option("--order", cfg.order, "Gauss nodes per panel");
  app.add_option("--fock-n", cfg.fock_n, "Fock truncation (0 = automatic)");
  app.add_option("--nmean", cfg.n_mean, "mean photon number per mode");
  app.add_option("--nmean-min", cfg.n_mean_min);
  app.add_option("--nmean-max", cfg.n_mean_max);
  app.add_option("--nmean-steps", cfg.n_mean_steps);
  app.add_option("--d-min", cfg.d_min);
  app.add_option("--d-max", cfg.d_max);
  app.add_option("--d-steps", cfg.d_steps);
  app.add_option("--kind", cfg.kind, "real|complex")->check(CLI::IsMember({"real", "complex"}));
  app.add_option("--seed", cfg.seed);
  app.add_option("--output", cfg.output, "output file (default stdout)");
  app.add_option("--format", cfg.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--only-violations", cfg.only_violations, "keep rows with |B| > 2");
  app.add_flag("--strict", cfg.strict, "exit 3 when any evaluation fails to converge");
  app.add_option("--tol", cfg.tol);
  app.add_option("--settings", cfg.settings, "number of random settings");
  app.add_option("--count", cfg.count, "Monte Carlo samples (0 = quadrature)");
  app.add_option("--spread", cfg.spread, "random settings are drawn from [-spread, spread]");
  app.add_option("--alpha", alpha, "Alice's shift q[,p]");
  app.add_option("--beta", beta, "Bob's shift q[,p]");

  app.add_subcommand("correlate", "single correlation E(alpha, beta)");
  app.add_subcommand("scan", "Bell value over an (n_mean, d) grid");
  app.add_subcommand("lhv", "CHSH check of the phase-space hidden-variable model");
  app.add_subcommand("oracle", "cross-check the correlation engines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (eps_flag) cfg.epsilon = static_cast<int>(*eps_flag);
    if (!alpha.empty()) parse_point(alpha, cfg.alice, "--alpha");
    if (!beta.empty()) parse_point(beta, cfg.bob, "--beta");
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "correlate") return cmd_correlate(cfg, out, err);
    if (cfg.command == "scan") return cmd_scan(cfg, out, err);
    if (cfg.command == "lhv") return cmd_lhv(cfg, out, err);
    return cmd_oracle(cfg, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  }
}

}  // namespace cvbell::cli
