// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "peb/random.hpp"
#include "peb/simulator.hpp"

#ifndef PEB_MODELS_DIR
#define PEB_MODELS_DIR "models"
#endif

namespace peb::testing {

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) out += format(d) + "\n";
  return out;
}

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <class T>
const T& choose(std::mt19937_64& rng, const std::vector<T>& options) {
  return options[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(options.size()) - 1))];
}

/// n positive tenths summing to 1, e.g. "0.3", "0.7".
std::vector<std::string> random_probabilities(std::mt19937_64& rng, int n) {
  std::vector<int> parts(static_cast<std::size_t>(n), 1);
  for (int left = 10 - n; left > 0; --left) parts[static_cast<std::size_t>(pick(rng, 0, n - 1))]++;
  std::vector<std::string> out;
  for (int p : parts) out.push_back(p == 10 ? "1" : "0." + std::to_string(p));
  return out;
}

}  // namespace

std::string models_dir() { return PEB_MODELS_DIR; }

std::shared_ptr<const CheckedModel> load_text(std::string_view text, const Overrides& overrides) {
  auto parsed = parse_model(text);
  if (!parsed.ok()) throw std::runtime_error("parse failed:\n" + join_diagnostics(parsed.diagnostics));
  Model model = std::move(*parsed.model);
  for (const auto& [name, value] : overrides) {
    auto e = parse_expression(value);
    if (!e.expr || !override_constant(model, name, e.expr)) {
      throw std::runtime_error("bad override " + name + "=" + value);
    }
  }
  auto checked = check_model(model);
  if (!checked.ok()) throw std::runtime_error("check failed:\n" + join_diagnostics(checked.diagnostics));
  return checked.model;
}

std::shared_ptr<const CheckedModel> load_file(const std::string& name, const Overrides& overrides) {
  std::string path = models_dir() + "/" + name;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_text(ss.str(), overrides);
}

std::string random_model_source(std::mt19937_64& rng) {
  const int m = pick(rng, 2, 4);
  const std::vector<std::string> colours = {"red", "green", "blue"};
  std::ostringstream os;
  os << "CONTEXT MUT_CTX\n SETS\n   COL : {red, green, blue}\n CONSTANTS\n   M : Nat := " << m
     << "\nEND\n\nMACHINE MUT SEES MUT_CTX\n VARIABLES x y c\n INVARIANTS\n   x : Nat\n   y : Nat\n"
     << "   c : COL\n INITIALISATION\n   x := 0\n   y := " << pick(rng, 0, m - 1) << "\n   c := "
     << choose(rng, colours) << "\n";

  const std::vector<std::string> weights = {"1",         "2",           "M - x",     "1 + x",
                                            "y + 1",     "M - y",       "x * y + 1", "3 - y",
                                            "card({z . 0 .. x | z mod 2 = 0})"};
  const std::vector<std::string> guards = {"TRUE",         "x < M - 1",        "c /= blue",
                                           "y <= x",       "x + y < M",        "c = red \\/ x = 0",
                                           "not(c = green)", "x mod 2 = y mod 2"};
  const std::vector<std::string> domains = {"0 .. y", "COL", "{x, y}", "{z . 0 .. M | z /= x}", "0 .. M - 1"};

  const int events = pick(rng, 1, 4);
  for (int e = 0; e < events; ++e) {
    os << "\nEVENT ev" << e << "\n  WEIGHT " << choose(rng, weights) << "\n";
    bool has_param = pick(rng, 0, 1) == 1;
    std::string dom;
    if (has_param) {
      dom = choose(rng, domains);
      os << "  ANY p :in " << dom << "\n";
    }
    bool colour_param = dom == "COL";
    std::string guard = choose(rng, guards);
    if (has_param && pick(rng, 0, 1)) {
      guard += colour_param ? " /\\ p /= c" : " /\\ p <= x + 1";
    }
    os << "  WHERE " << guard << "\n  THEN\n";

    // Each variable is assigned at most once; the set of targets is random
    // but never empty.
    std::vector<int> targets;
    for (int v = 0; v < 3; ++v) {
      if (pick(rng, 0, 2) > 0) targets.push_back(v);
    }
    if (targets.empty()) targets.push_back(pick(rng, 0, 2));
    for (int v : targets) {
      if (v == 0) {
        std::string inc = has_param && !colour_param ? choose(rng, std::vector<std::string>{"p", "1", "y"})
                                                     : choose(rng, std::vector<std::string>{"1", "2", "y"});
        switch (pick(rng, 0, 2)) {
          case 0:
            os << "    x := (x + " << inc << ") mod M\n";
            break;
          case 1: {
            auto ps = random_probabilities(rng, 2);
            os << "    x := {((x + " << inc << ") mod M) @ " << ps[0] << ", 0 @ " << ps[1] << "}\n";
            break;
          }
          default:
            os << "    x := {0, (x + 1) mod M}\n";
        }
      } else if (v == 1) {
        switch (pick(rng, 0, 2)) {
          case 0: os << "    y :in 0 .. x\n"; break;
          case 1: os << "    y := (y + x) mod M\n"; break;
          default: os << "    y :in {z . 0 .. M - 1 | z /= y}\n";
        }
      } else {
        int n = pick(rng, 1, 3);
        if (colour_param && pick(rng, 0, 1)) {
          os << "    c := p\n";
        } else if (n == 1) {
          os << "    c := " << choose(rng, colours) << "\n";
        } else {
          auto ps = random_probabilities(rng, n);
          os << "    c := {";
          for (int i = 0; i < n; ++i) {
            os << (i ? ", " : "") << colours[static_cast<std::size_t>(i)] << " @ " << ps[static_cast<std::size_t>(i)];
          }
          os << "}\n";
        }
      }
    }
    os << "END\n";
  }
  return os.str();
}

Value random_scalar(std::mt19937_64& rng, int kind) {
  static const std::vector<std::string> names = {"a", "b", "c", "emp", "ok"};
  switch (kind) {
    case 0: return Value::symbol(choose(rng, names));
    case 1: return Value::boolean(pick(rng, 0, 1) == 1);
    default: return Value::integer(pick(rng, -3, 6));
  }
}

Value random_int_set(std::mt19937_64& rng, std::size_t max_size) {
  std::vector<Value> elems;
  int n = pick(rng, 0, static_cast<int>(max_size));
  for (int i = 0; i < n; ++i) elems.push_back(Value::integer(pick(rng, 0, 7)));
  return canonical_set(std::move(elems));
}

Value random_relation(std::mt19937_64& rng, std::size_t max_size) {
  std::vector<Value> elems;
  int n = pick(rng, 0, static_cast<int>(max_size));
  for (int i = 0; i < n; ++i) {
    elems.push_back(Value::pair(Value::integer(pick(rng, 0, 4)), random_scalar(rng, 0)));
  }
  return canonical_set(std::move(elems));
}

Value random_symbol_set(std::mt19937_64& rng) {
  std::vector<Value> elems;
  int n = pick(rng, 0, 3);
  for (int i = 0; i < n; ++i) elems.push_back(random_scalar(rng, 0));
  return canonical_set(std::move(elems));
}

Value random_value(std::mt19937_64& rng) {
  switch (pick(rng, 0, 5)) {
    case 0:
    case 1:
    case 2: return random_scalar(rng, pick(rng, 0, 2));
    case 3: return Value::pair(random_scalar(rng, pick(rng, 0, 2)), random_scalar(rng, pick(rng, 0, 2)));
    case 4: return random_int_set(rng, 4);
    default: return random_relation(rng, 3);
  }
}

std::vector<MachineState> sample_reachable(const Semantics& sem, std::size_t count, std::uint64_t seed,
                                           std::size_t max_walk) {
  Simulator sim(sem);
  Rng rng(seed);
  std::vector<MachineState> out;
  std::unordered_set<MachineState, MachineStateHash> seen;
  StepCache cache;
  for (std::size_t attempt = 0; out.size() < count && attempt < count * 50; ++attempt) {
    MachineState s = sem.initial_state();
    std::size_t len = static_cast<std::size_t>(rng.uniform_index(max_walk + 1));
    bool dead = false;
    for (std::size_t k = 0; k < len; ++k) {
      auto next = sim.step(s, rng, &cache);
      if (!next) {
        dead = true;
        break;
      }
      s = std::move(next->state);
    }
    if (dead || sem.successor_distribution(s).deadlock()) continue;
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace peb::testing
