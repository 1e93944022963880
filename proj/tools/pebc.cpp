// SPDX-License-Identifier: Apache-2.0
//
// pebc: check, simulate, estimate, verify and export probabilistic Event-B
// models.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>

#include <CLI11.hpp>
#include <json.hpp>

#include "peb/exact.hpp"
#include "peb/json_io.hpp"
#include "peb/smc.hpp"

namespace {

using nlohmann::json;
using namespace peb;

enum Exit { kOk = 0, kDiagnostics = 1, kUsage = 2, kRuntime = 3, kResource = 4 };

/// Raised anywhere in a command to end it with an exit code.
struct Failure {
  int code;
  std::string kind;
  std::string message;
  std::vector<Diagnostic> diagnostics;
};

struct Common {
  std::vector<std::string> files;
  std::vector<std::string> consts;
  bool json_out = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kUsage, "FileNotFound", "cannot open '" + path + "'", {}};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const CheckedModel> load(const Common& c, std::vector<Diagnostic>* warnings = nullptr) {
  std::vector<Model> parts;
  for (const auto& f : c.files) {
    auto parsed = parse_model(read_file(f), f);
    if (!parsed.ok()) throw Failure{kDiagnostics, "SyntaxError", "syntax error", parsed.diagnostics};
    parts.push_back(std::move(*parsed.model));
  }
  auto merged = merge_models(std::move(parts));
  if (!merged.ok()) throw Failure{kDiagnostics, "SyntaxError", "cannot combine model files", merged.diagnostics};
  Model model = std::move(*merged.model);
  for (const auto& def : c.consts) {
    auto eq = def.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Failure{kUsage, "Usage", "--const expects NAME=VALUE, got '" + def + "'", {}};
    }
    std::string name = def.substr(0, eq);
    auto expr = parse_expression(def.substr(eq + 1), "<--const " + name + ">");
    if (!expr.expr) throw Failure{kUsage, "Usage", "cannot parse value of --const " + name, expr.diagnostics};
    if (!override_constant(model, name, expr.expr)) {
      throw Failure{kUsage, "Usage", "--const names unknown constant '" + name + "'", {}};
    }
  }
  auto checked = check_model(model);
  if (!checked.ok()) throw Failure{kDiagnostics, "CheckError", "model is not well-formed", checked.diagnostics};
  if (warnings) *warnings = checked.diagnostics;
  return checked.model;
}

Query query_for(const CheckedModel& m, const std::string& text, std::optional<std::uint64_t> within) {
  try {
    return make_query(m, text, within);
  } catch (const QueryError& e) {
    throw Failure{kDiagnostics, "QueryError", e.what(), e.diagnostics()};
  }
}

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << format(d) << '\n';
}

json diagnostics_json(const std::vector<Diagnostic>& diags) {
  auto arr = json::array();
  for (const auto& d : diags) arr.push_back(to_json(d));
  return arr;
}

std::string state_text(const CheckedModel& m, const MachineState& s) {
  std::string out;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (i) out += ' ';
    out += m.variable_names[i] + "=" + to_string(s.values[i]);
  }
  return out;
}

std::uint64_t default_jobs() {
  if (const char* env = std::getenv("PEBC_JOBS")) {
    try {
      auto v = std::stoull(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void write_to(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Failure{kUsage, "FileNotWritable", "cannot write '" + path + "'", {}};
  fn(out);
}

int cmd_check(const Common& c) {
  std::vector<Diagnostic> warnings;
  auto m = load(c, &warnings);
  if (c.json_out) {
    std::cout << json{{"command", "check"}, {"ok", true}, {"diagnostics", diagnostics_json(warnings)}}.dump(2)
              << '\n';
  } else {
    print_diagnostics(warnings);
    std::cout << m->machine().name << ": " << m->variable_names.size() << " variables, " << m->events().size()
              << " events, well-formed\n";
  }
  return kOk;
}

struct SimulateArgs {
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 1'000'000;
  bool trace = false;
  std::string trace_file;
  std::string stop;
};

int cmd_simulate(const Common& c, const SimulateArgs& a) {
  auto m = load(c);
  Semantics sem(m);
  RunConfig config;
  config.seed = a.seed;
  config.max_steps = a.max_steps;
  if (!a.stop.empty()) config.stop_predicate = query_for(*m, a.stop, std::nullopt).expr;
  Simulator sim(sem);
  Trace trace = sim.run(config);
  if (a.trace) write_trace_jsonl(std::cout, *m, trace);
  if (!a.trace_file.empty()) write_to(a.trace_file, [&](std::ostream& os) { write_trace_jsonl(os, *m, trace); });
  std::uint64_t steps = trace.steps.size();
  if (c.json_out) {
    std::cout << json{{"command", "simulate"},
                      {"seed", a.seed},
                      {"rng", kRngAlgorithm},
                      {"steps", steps},
                      {"termination", to_string(trace.reason)},
                      {"final_state", to_json(*m, trace.final_state())}}
                     .dump()
              << '\n';
  } else {
    std::cout << "termination: " << to_string(trace.reason) << "\nsteps: " << steps
              << "\nfinal: " << state_text(*m, trace.final_state()) << '\n';
  }
  return kOk;
}

struct SmcArgs {
  std::string query;
  std::optional<std::uint64_t> within;
  EstimateOptions options;
  std::string samples_csv;
  std::string histogram;
  std::size_t bins = 20;
  bool no_timing = false;
};

int cmd_smc(const Common& c, SmcArgs a) {
  auto m = load(c);
  Semantics sem(m);
  Query q = query_for(*m, a.query, a.within);
  a.options.keep_samples = !a.samples_csv.empty() || !a.histogram.empty();
  Estimate est;
  try {
    est = estimate(sem, q, a.options);
  } catch (const std::invalid_argument& e) {
    throw Failure{kUsage, "Usage", e.what(), {}};
  }
  json out = to_json(est, !a.no_timing);
  out["command"] = "smc";
  std::cout << out.dump() << '\n';
  if (!a.samples_csv.empty()) write_to(a.samples_csv, [&](std::ostream& os) { write_samples_csv(os, est); });
  if (!a.histogram.empty()) write_to(a.histogram, [&](std::ostream& os) { write_histogram(os, est, a.bins); });
  if (est.truncated_runs > 0) {
    std::cerr << "warning: " << est.truncated_runs << " runs reached --max-steps before terminating\n";
  }
  return kOk;
}

struct ExactArgs {
  std::string query;
  std::optional<std::uint64_t> within;
  std::optional<std::uint64_t> horizon;
  std::size_t max_states = 1'000'000;
  bool no_abstraction = false;
};

std::vector<std::string> names_of(const CheckedModel& m, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(m.variable_names[i]);
  return out;
}

int cmd_exact(const Common& c, const ExactArgs& a) {
  auto m = load(c);
  Semantics sem(m);
  Query q = query_for(*m, a.query, a.within);
  BuildOptions opts;
  opts.max_states = a.max_states;
  if (!a.no_abstraction) opts.abstract_vars = accumulators_for(*m, &q);
  Dtmc d = build_dtmc(sem, opts);
  Rational value = exact_query(sem, d, q, a.horizon);
  if (c.json_out) {
    std::cout << json{{"command", "exact"},
                      {"query", q.text},
                      {"kind", to_string(q.kind)},
                      {"value", to_string(value)},
                      {"decimal", to_decimal(value)},
                      {"states", d.size()},
                      {"transitions", d.transition_count()},
                      {"abstracted", names_of(*m, d.accumulators)}}
                     .dump()
              << '\n';
  } else {
    std::cout << "value: " << to_string(value) << "\ndecimal: " << to_decimal(value) << "\nstates: " << d.size()
              << "\ntransitions: " << d.transition_count() << '\n';
    if (!d.accumulators.empty()) {
      std::cout << "abstracted:";
      for (const auto& n : names_of(*m, d.accumulators)) std::cout << ' ' << n;
      std::cout << '\n';
    }
  }
  return kOk;
}

struct ExportArgs {
  std::string format = "tra";
  std::string output = "-";
  std::size_t max_states = 1'000'000;
  bool no_abstraction = false;
};

int cmd_export(const Common& c, const ExportArgs& a) {
  auto m = load(c);
  Semantics sem(m);
  BuildOptions opts;
  opts.max_states = a.max_states;
  if (!a.no_abstraction) opts.abstract_vars = find_accumulators(*m);
  Dtmc d = build_dtmc(sem, opts);
  write_to(a.output, [&](std::ostream& os) {
    if (a.format == "tra") export_tra(os, sem, d);
    if (a.format == "sta") export_sta(os, sem, d);
    if (a.format == "dot") export_dot(os, sem, d);
  });
  return kOk;
}

int report(const Common& c, const Failure& f) {
  if (c.json_out) {
    std::cout << json{{"command", "error"},
                      {"exit_code", f.code},
                      {"error", {{"kind", f.kind}, {"message", f.message}}},
                      {"diagnostics", diagnostics_json(f.diagnostics)}}
                     .dump()
              << '\n';
  } else {
    print_diagnostics(f.diagnostics);
    std::cerr << "pebc: " << f.message << '\n';
  }
  return f.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic Event-B analyser"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--json", common.json_out, "Emit machine-readable JSON (also for errors)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("files", common.files, "Model file(s); a context and a machine may be split")
        ->required();
    sub->add_option("--const", common.consts, "Override a context constant, NAME=VALUE");
    sub->add_flag("--json", common.json_out, "Emit machine-readable JSON (also for errors)");
  };

  auto* check = app.add_subcommand("check", "Parse and check a model");
  add_common(check);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one seeded simulation");
  add_common(simulate);
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--max-steps", sim.max_steps, "Step bound")->check(CLI::PositiveNumber);
  simulate->add_flag("--trace", sim.trace, "Print the trace as JSON lines");
  simulate->add_option("--trace-file", sim.trace_file, "Write the JSON-lines trace to a file");
  simulate->add_option("--stop", sim.stop, "Stop when this predicate holds");

  SmcArgs smc_args;
  smc_args.options.jobs = static_cast<unsigned>(default_jobs());
  auto* smc = app.add_subcommand("smc", "Estimate a query by simulation");
  add_common(smc);
  smc->add_option("--query", smc_args.query, "Property name or expression")->required();
  smc->add_option("--within", smc_args.within, "Probability of reaching the predicate within K steps");
  smc->add_option("--alpha", smc_args.options.alpha, "1 - confidence level")->capture_default_str();
  smc->add_option("--delta", smc_args.options.delta, "Target half-width")->capture_default_str();
  smc->add_option("--seed", smc_args.options.seed, "Master seed");
  smc->add_option("--max-runs", smc_args.options.max_runs, "Run limit")->capture_default_str();
  smc->add_option("--min-runs", smc_args.options.min_runs, "Do not stop before this many runs");
  smc->add_option("--batch", smc_args.options.batch, "Runs between stopping checks")->capture_default_str();
  smc->add_option("--jobs", smc_args.options.jobs, "Worker threads (default: PEBC_JOBS or 1)");
  smc->add_option("--max-steps", smc_args.options.max_steps, "Step bound per run")->capture_default_str();
  smc->add_option("--samples-csv", smc_args.samples_csv, "Write per-run samples as CSV");
  smc->add_option("--histogram", smc_args.histogram, "Write a gnuplot histogram of the samples");
  smc->add_option("--bins", smc_args.bins, "Histogram bins")->capture_default_str();
  smc->add_flag("--no-timing", smc_args.no_timing, "Omit wall_time from the result");

  ExactArgs exact_args;
  auto* exact = app.add_subcommand("exact", "Compute a query exactly on the explicit DTMC");
  add_common(exact);
  exact->add_option("--query", exact_args.query, "Property name or expression")->required();
  exact->add_option("--within", exact_args.within, "Probability of reaching the predicate within K steps");
  exact->add_option("--horizon", exact_args.horizon, "Evaluate at-end queries after at most K steps");
  exact->add_option("--max-states", exact_args.max_states, "State bound")->capture_default_str();
  exact->add_flag("--no-abstraction", exact_args.no_abstraction, "Keep counter variables in the state");

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export", "Write the explicit DTMC");
  add_common(exp);
  exp->add_option("--format", export_args.format, "tra | sta | dot")
      ->check(CLI::IsMember({"tra", "sta", "dot"}))
      ->capture_default_str();
  exp->add_option("-o,--output", export_args.output, "Output file, - for stdout")->capture_default_str();
  exp->add_option("--max-states", export_args.max_states, "State bound")->capture_default_str();
  exp->add_flag("--no-abstraction", export_args.no_abstraction, "Keep counter variables in the state");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    bool json_requested = false;
    for (int i = 1; i < argc; ++i) json_requested = json_requested || std::string_view(argv[i]) == "--json";
    if (!json_requested) {
      app.exit(e);
      return kUsage;
    }
    common.json_out = true;
    return report(common, {kUsage, "Usage", e.what(), {}});
  }

  try {
    if (*check) return cmd_check(common);
    if (*simulate) return cmd_simulate(common, sim);
    if (*smc) return cmd_smc(common, smc_args);
    if (*exact) return cmd_exact(common, exact_args);
    if (*exp) return cmd_export(common, export_args);
  } catch (const Failure& f) {
    return report(common, f);
  } catch (const EvalError& e) {
    return report(common, {kRuntime, to_string(e.kind()), e.what(), {e.diagnostic()}});
  } catch (const StateBound& e) {
    return report(common, {kResource, "StateBound", e.what(), {}});
  } catch (const NoAbsorption& e) {
    return report(common, {kRuntime, "NoAbsorption", e.what(), {}});
  } catch (const std::invalid_argument& e) {
    return report(common, {kUsage, "Usage", e.what(), {}});
  } catch (const std::exception& e) {
    return report(common, {kRuntime, "InternalError", e.what(), {}});
  }
  return kUsage;
}
