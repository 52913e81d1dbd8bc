#pragma once

// Gate-level combinational netlists: .bench ingestion, canonical
// serialization, fanout classes, bit-parallel simulation and loop queries.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace splitlift {

class NetlistError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Error raised by parse_bench; carries the 1-based offending line.
class ParseError : public NetlistError {
public:
  ParseError(std::size_t line, const std::string& what)
      : NetlistError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Const0 is internal: reconstruction ties unresolved inputs to it. It is
/// not part of the .bench dialect.
enum class GateFunction { And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Const0 };

inline std::string_view to_string(GateFunction f) {
  switch (f) {
  case GateFunction::And: return "AND";
  case GateFunction::Nand: return "NAND";
  case GateFunction::Or: return "OR";
  case GateFunction::Nor: return "NOR";
  case GateFunction::Xor: return "XOR";
  case GateFunction::Xnor: return "XNOR";
  case GateFunction::Not: return "NOT";
  case GateFunction::Buf: return "BUF";
  case GateFunction::Const0: return "CONST0";
  }
  return "?";
}

inline std::optional<GateFunction> gate_function_from_string(std::string_view s) {
  static const std::pair<std::string_view, GateFunction> table[] = {
      {"AND", GateFunction::And}, {"NAND", GateFunction::Nand},
      {"OR", GateFunction::Or},   {"NOR", GateFunction::Nor},
      {"XOR", GateFunction::Xor}, {"XNOR", GateFunction::Xnor},
      {"NOT", GateFunction::Not}, {"BUF", GateFunction::Buf},
      {"BUFF", GateFunction::Buf}, {"CONST0", GateFunction::Const0}};
  for (const auto& [name, fn] : table)
    if (name == s) return fn;
  return std::nullopt;
}

inline bool arity_ok(GateFunction f, std::size_t n) {
  switch (f) {
  case GateFunction::Not:
  case GateFunction::Buf: return n == 1;
  case GateFunction::Const0: return n == 0;
  default: return n >= 2;
  }
}

/// Drive-strength classes, ordered.
inline constexpr int kDriveClasses[] = {1, 2, 4};

inline int drive_class_rank(int strength) {
  for (int i = 0; i < 3; ++i)
    if (kDriveClasses[i] == strength) return i;
  throw NetlistError("invalid drive strength " + std::to_string(strength));
}

struct Gate {
  std::string id;
  GateFunction function = GateFunction::Buf;
  std::vector<std::string> inputs;
  std::string output;
  int drive_strength = 1;

  bool operator==(const Gate&) const = default;
};

/// A consumer of a net: input pin `pin` of gate `gate`, or primary output
/// number `output` (then gate == -1).
struct Sink {
  int gate = -1;
  int pin = -1;
  int output = -1;

  bool is_primary_output() const noexcept { return gate < 0; }
  auto operator<=>(const Sink&) const = default;
};

struct Net {
  std::string id;
  int driver_gate = -1;  ///< -1: driven by primary input `input_index`
  int input_index = -1;
  std::vector<Sink> sinks;

  bool is_primary_input() const noexcept { return driver_gate < 0; }
  std::size_t fanout() const noexcept { return sinks.size(); }
};

enum class FanoutClass { HiFon, SingleSink, Dangling };

class Netlist {
public:
  Netlist() = default;

  /// Validates and indexes the circuit. Throws NetlistError on duplicate
  /// drivers, undefined nets, arity mismatches or combinational cycles.
  static Netlist build(std::string name, std::vector<std::string> inputs,
                       std::vector<std::string> outputs, std::vector<Gate> gates);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& inputs() const noexcept { return inputs_; }
  const std::vector<std::string>& outputs() const noexcept { return outputs_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  const std::vector<Net>& nets() const noexcept { return nets_; }
  const std::vector<int>& topological_order() const noexcept { return topo_; }

  std::optional<int> find_gate(std::string_view id) const {
    auto it = gate_index_.find(std::string(id));
    if (it == gate_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> find_net(std::string_view id) const {
    auto it = net_index_.find(std::string(id));
    if (it == net_index_.end()) return std::nullopt;
    return it->second;
  }
  int gate_index(std::string_view id) const {
    if (auto g = find_gate(id)) return *g;
    throw NetlistError("unknown gate '" + std::string(id) + "'");
  }
  int net_index(std::string_view id) const {
    if (auto n = find_net(id)) return *n;
    throw NetlistError("unknown net '" + std::string(id) + "'");
  }
  const Net& net(std::string_view id) const { return nets_[net_index(id)]; }
  const Gate& gate(std::string_view id) const { return gates_[gate_index(id)]; }

  /// Net driven by gate `g`.
  int output_net(int g) const { return gate_output_net_[g]; }
  /// Net feeding input pin `pin` of gate `g`.
  int input_net(int g, int pin) const { return gate_input_nets_[g][pin]; }

  void set_drive_strength(int g, int strength) {
    drive_class_rank(strength);
    gates_[g].drive_strength = strength;
  }

  /// Gates reading the output of gate `g` (deduplicated, ascending).
  std::vector<int> fanout_gates(int g) const {
    std::vector<int> out;
    for (const Sink& s : nets_[gate_output_net_[g]].sinks)
      if (!s.is_primary_output()) out.push_back(s.gate);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

private:
  std::string name_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<Gate> gates_;
  std::vector<Net> nets_;
  std::unordered_map<std::string, int> gate_index_;
  std::unordered_map<std::string, int> net_index_;
  std::vector<int> gate_output_net_;
  std::vector<std::vector<int>> gate_input_nets_;
  std::vector<int> topo_;
};

namespace detail {

/// Kahn's algorithm over the gate graph. Returns the order, or the gates
/// left over when a cycle blocks progress (second == true).
inline std::pair<std::vector<int>, bool>
topo_sort(std::size_t n_gates, const std::vector<std::vector<int>>& succ) {
  std::vector<int> indeg(n_gates, 0);
  for (const auto& s : succ)
    for (int v : s) ++indeg[v];
  std::vector<int> order;
  order.reserve(n_gates);
  for (std::size_t g = 0; g < n_gates; ++g)
    if (indeg[g] == 0) order.push_back(static_cast<int>(g));
  for (std::size_t head = 0; head < order.size(); ++head)
    for (int v : succ[order[head]])
      if (--indeg[v] == 0) order.push_back(v);
  if (order.size() == n_gates) return {order, false};
  std::vector<int> stuck;
  for (std::size_t g = 0; g < n_gates; ++g)
    if (indeg[g] > 0) stuck.push_back(static_cast<int>(g));
  return {stuck, true};
}

}  // namespace detail

inline Netlist Netlist::build(std::string name, std::vector<std::string> inputs,
                              std::vector<std::string> outputs, std::vector<Gate> gates) {
  Netlist nl;
  nl.name_ = std::move(name);
  nl.inputs_ = std::move(inputs);
  nl.outputs_ = std::move(outputs);
  nl.gates_ = std::move(gates);

  auto add_net = [&](const std::string& id) {
    if (nl.net_index_.count(id)) throw NetlistError("duplicate driver for net '" + id + "'");
    nl.net_index_[id] = static_cast<int>(nl.nets_.size());
    nl.nets_.push_back(Net{id, -1, -1, {}});
    return static_cast<int>(nl.nets_.size()) - 1;
  };
  for (std::size_t i = 0; i < nl.inputs_.size(); ++i) {
    int n = add_net(nl.inputs_[i]);
    nl.nets_[n].input_index = static_cast<int>(i);
  }
  for (std::size_t g = 0; g < nl.gates_.size(); ++g) {
    const Gate& gate = nl.gates_[g];
    if (nl.gate_index_.count(gate.id)) throw NetlistError("duplicate gate id '" + gate.id + "'");
    if (!arity_ok(gate.function, gate.inputs.size()))
      throw NetlistError("gate '" + gate.id + "': " + std::string(to_string(gate.function)) +
                         " cannot take " + std::to_string(gate.inputs.size()) + " inputs");
    drive_class_rank(gate.drive_strength);
    nl.gate_index_[gate.id] = static_cast<int>(g);
    int n = add_net(gate.output);
    nl.nets_[n].driver_gate = static_cast<int>(g);
  }
  nl.gate_output_net_.resize(nl.gates_.size());
  nl.gate_input_nets_.resize(nl.gates_.size());
  for (std::size_t g = 0; g < nl.gates_.size(); ++g) {
    const Gate& gate = nl.gates_[g];
    nl.gate_output_net_[g] = nl.net_index_.at(gate.output);
    for (std::size_t p = 0; p < gate.inputs.size(); ++p) {
      auto it = nl.net_index_.find(gate.inputs[p]);
      if (it == nl.net_index_.end())
        throw NetlistError("gate '" + gate.id + "' reads undefined net '" + gate.inputs[p] + "'");
      nl.gate_input_nets_[g].push_back(it->second);
      nl.nets_[it->second].sinks.push_back(Sink{static_cast<int>(g), static_cast<int>(p), -1});
    }
  }
  for (std::size_t o = 0; o < nl.outputs_.size(); ++o) {
    auto it = nl.net_index_.find(nl.outputs_[o]);
    if (it == nl.net_index_.end())
      throw NetlistError("output '" + nl.outputs_[o] + "' is never driven");
    nl.nets_[it->second].sinks.push_back(Sink{-1, -1, static_cast<int>(o)});
  }

  std::vector<std::vector<int>> succ(nl.gates_.size());
  for (std::size_t g = 0; g < nl.gates_.size(); ++g) succ[g] = nl.fanout_gates(static_cast<int>(g));
  auto [order, cyclic] = detail::topo_sort(nl.gates_.size(), succ);
  if (cyclic)
    throw NetlistError("combinational cycle through gate '" + nl.gates_[order.front()].id + "'");
  nl.topo_ = std::move(order);
  return nl;
}

// ---------------------------------------------------------------------------
// .bench I/O

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_args(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

}  // namespace detail

/// Parses the ISCAS `.bench` dialect: INPUT(x), OUTPUT(y), z = FUNC(a, ...),
/// '#' comments. All gates get drive strength 1.
inline Netlist parse_bench(std::string_view text, std::string name = "bench") {
  struct Decl {
    std::string net;
    std::size_t line;
  };
  struct GateDecl {
    Gate gate;
    std::size_t line;
  };
  std::vector<Decl> inputs, outputs;
  std::vector<GateDecl> gates;
  std::map<std::string, std::size_t> driver_line;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = detail::trim(raw);
    if (line.empty()) continue;

    auto open = line.find('(');
    auto close = line.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
      throw ParseError(line_no, "malformed statement '" + std::string(line) + "'");
    auto args = detail::split_args(line.substr(open + 1, close - open - 1));
    if (!detail::trim(line.substr(close + 1)).empty())
      throw ParseError(line_no, "trailing characters after ')'");

    auto eq = line.find('=');
    if (eq == std::string_view::npos || eq > open) {
      std::string kw(detail::trim(line.substr(0, open)));
      if (args.size() != 1 || args[0].empty())
        throw ParseError(line_no, kw + " expects exactly one net");
      if (kw == "INPUT") {
        if (driver_line.count(args[0]))
          throw ParseError(line_no, "duplicate driver for net '" + args[0] + "'");
        driver_line[args[0]] = line_no;
        inputs.push_back({args[0], line_no});
      } else if (kw == "OUTPUT") {
        outputs.push_back({args[0], line_no});
      } else {
        throw ParseError(line_no, "unknown declaration '" + kw + "'");
      }
      continue;
    }

    std::string out(detail::trim(line.substr(0, eq)));
    std::string fn_tok(detail::trim(line.substr(eq + 1, open - eq - 1)));
    if (out.empty()) throw ParseError(line_no, "missing output net");
    std::string upper = fn_tok;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "DFF" || upper == "LATCH")
      throw ParseError(line_no, "sequential element " + fn_tok + " is not supported");
    auto fn = gate_function_from_string(upper);
    if (!fn || *fn == GateFunction::Const0)
      throw ParseError(line_no, "unknown function '" + fn_tok + "'");
    for (const auto& a : args)
      if (a.empty()) throw ParseError(line_no, "empty operand");
    if (!arity_ok(*fn, args.size()))
      throw ParseError(line_no, fn_tok + " cannot take " + std::to_string(args.size()) + " inputs");
    if (driver_line.count(out))
      throw ParseError(line_no, "duplicate driver for net '" + out + "'");
    driver_line[out] = line_no;
    gates.push_back({Gate{out, *fn, args, out, 1}, line_no});
  }

  for (const auto& g : gates)
    for (const auto& in : g.gate.inputs)
      if (!driver_line.count(in)) throw ParseError(g.line, "undefined net '" + in + "'");
  for (const auto& o : outputs)
    if (!driver_line.count(o.net)) throw ParseError(o.line, "undefined net '" + o.net + "'");

  // Cycle check with line attribution before handing over to build().
  std::map<std::string, int> gate_of_net;
  for (std::size_t i = 0; i < gates.size(); ++i) gate_of_net[gates[i].gate.output] = static_cast<int>(i);
  std::vector<std::vector<int>> succ(gates.size());
  for (std::size_t i = 0; i < gates.size(); ++i)
    for (const auto& in : gates[i].gate.inputs)
      if (auto it = gate_of_net.find(in); it != gate_of_net.end())
        succ[it->second].push_back(static_cast<int>(i));
  auto [stuck, cyclic] = detail::topo_sort(gates.size(), succ);
  if (cyclic) {
    std::size_t first = gates[stuck.front()].line;
    for (int g : stuck) first = std::min(first, gates[g].line);
    throw ParseError(first, "cyclic definition");
  }

  std::vector<std::string> in_names, out_names;
  for (auto& d : inputs) in_names.push_back(d.net);
  for (auto& d : outputs) out_names.push_back(d.net);
  std::vector<Gate> gate_list;
  for (auto& g : gates) gate_list.push_back(std::move(g.gate));
  return Netlist::build(std::move(name), std::move(in_names), std::move(out_names),
                        std::move(gate_list));
}

/// Canonical .bench text: inputs and outputs in declaration order, gates
/// sorted by id.
inline std::string to_bench(const Netlist& nl) {
  std::ostringstream os;
  os << "# " << nl.name() << "\n";
  for (const auto& i : nl.inputs()) os << "INPUT(" << i << ")\n";
  for (const auto& o : nl.outputs()) os << "OUTPUT(" << o << ")\n";
  os << "\n";
  std::vector<const Gate*> sorted;
  for (const auto& g : nl.gates()) sorted.push_back(&g);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (const Gate* g : sorted) {
    if (g->function == GateFunction::Const0)
      throw NetlistError("CONST0 gate '" + g->id + "' has no .bench form");
    if (g->id != g->output)
      throw NetlistError("gate '" + g->id + "' is not named after its output net");
    os << g->output << " = " << to_string(g->function) << "(";
    for (std::size_t i = 0; i < g->inputs.size(); ++i) os << (i ? ", " : "") << g->inputs[i];
    os << ")\n";
  }
  return os.str();
}

/// Re-indexes a netlist in to_bench order, keeping drive strengths.
inline Netlist canonical(const Netlist& nl) {
  Netlist out = parse_bench(to_bench(nl), nl.name());
  for (const Gate& g : nl.gates()) out.set_drive_strength(out.gate_index(g.id), g.drive_strength);
  return out;
}

/// Same gates (compared by id), same primary I/O lists.
inline bool structurally_equal(const Netlist& a, const Netlist& b) {
  if (a.inputs() != b.inputs() || a.outputs() != b.outputs()) return false;
  if (a.gates().size() != b.gates().size()) return false;
  for (const Gate& g : a.gates()) {
    auto other = b.find_gate(g.id);
    if (!other) return false;
    const Gate& h = b.gates()[*other];
    if (g.function != h.function || g.inputs != h.inputs || g.output != h.output) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Analysis

/// HIFON iff the net has at least two sinks (primary outputs count).
inline std::map<std::string, FanoutClass> classify_fanout(const Netlist& nl) {
  std::map<std::string, FanoutClass> out;
  for (const Net& n : nl.nets())
    out[n.id] = n.fanout() >= 2   ? FanoutClass::HiFon
                : n.fanout() == 1 ? FanoutClass::SingleSink
                                  : FanoutClass::Dangling;
  return out;
}

/// Toolkit sizing rule: a driver of class c serves up to 4c sinks; the
/// smallest sufficient class is chosen, capped at 4.
inline void size_gates_by_fanout(Netlist& nl, int fanout_unit = 4) {
  for (std::size_t g = 0; g < nl.gates().size(); ++g) {
    std::size_t fo = nl.nets()[nl.output_net(static_cast<int>(g))].fanout();
    int cls = 4;
    for (int c : kDriveClasses)
      if (fo <= static_cast<std::size_t>(c * fanout_unit)) {
        cls = c;
        break;
      }
    nl.set_drive_strength(static_cast<int>(g), cls);
  }
}

/// True iff wiring the output of `driver_gate` into `sink_gate` closes a
/// combinational cycle, i.e. the driver is reachable from the sink.
inline bool has_combinational_loop(const Netlist& nl, std::string_view driver_gate,
                                   std::string_view sink_gate) {
  int from = nl.gate_index(driver_gate);
  int to = nl.gate_index(sink_gate);
  if (from == to) return true;
  std::vector<char> seen(nl.gates().size(), 0);
  std::vector<int> stack{to};
  seen[to] = 1;
  while (!stack.empty()) {
    int g = stack.back();
    stack.pop_back();
    for (int s : nl.fanout_gates(g)) {
      if (s == from) return true;
      if (!seen[s]) {
        seen[s] = 1;
        stack.push_back(s);
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Simulation

inline std::uint64_t eval_gate_word(GateFunction f, std::span<const std::uint64_t> in) {
  std::uint64_t acc = 0;
  switch (f) {
  case GateFunction::Const0: return 0;
  case GateFunction::Buf: return in[0];
  case GateFunction::Not: return ~in[0];
  case GateFunction::And:
  case GateFunction::Nand:
    acc = ~std::uint64_t{0};
    for (auto w : in) acc &= w;
    return f == GateFunction::And ? acc : ~acc;
  case GateFunction::Or:
  case GateFunction::Nor:
    for (auto w : in) acc |= w;
    return f == GateFunction::Or ? acc : ~acc;
  case GateFunction::Xor:
  case GateFunction::Xnor:
    for (auto w : in) acc ^= w;
    return f == GateFunction::Xor ? acc : ~acc;
  }
  return 0;
}

/// Evaluates 64 patterns at once: one word per primary input in, one word
/// per primary output out (bit i of every word belongs to pattern i).
inline std::vector<std::uint64_t> simulate_words(const Netlist& nl,
                                                 std::span<const std::uint64_t> input_words) {
  if (input_words.size() != nl.inputs().size())
    throw NetlistError("vector width " + std::to_string(input_words.size()) + " != " +
                       std::to_string(nl.inputs().size()) + " inputs");
  std::vector<std::uint64_t> value(nl.nets().size(), 0);
  for (std::size_t i = 0; i < nl.inputs().size(); ++i)
    value[nl.net_index(nl.inputs()[i])] = input_words[i];
  std::vector<std::uint64_t> scratch;
  for (int g : nl.topological_order()) {
    const Gate& gate = nl.gates()[g];
    scratch.clear();
    for (std::size_t p = 0; p < gate.inputs.size(); ++p)
      scratch.push_back(value[nl.input_net(g, static_cast<int>(p))]);
    value[nl.output_net(g)] = eval_gate_word(gate.function, scratch);
  }
  std::vector<std::uint64_t> out;
  out.reserve(nl.outputs().size());
  for (const auto& o : nl.outputs()) out.push_back(value[nl.net_index(o)]);
  return out;
}

using BitVector = std::vector<bool>;

/// One output assignment per input assignment, in order.
inline std::vector<BitVector> simulate(const Netlist& nl, std::span<const BitVector> vectors) {
  std::vector<BitVector> result;
  result.reserve(vectors.size());
  const std::size_t n_in = nl.inputs().size();
  for (std::size_t base = 0; base < vectors.size(); base += 64) {
    std::size_t count = std::min<std::size_t>(64, vectors.size() - base);
    std::vector<std::uint64_t> words(n_in, 0);
    for (std::size_t k = 0; k < count; ++k) {
      const BitVector& v = vectors[base + k];
      if (v.size() != n_in)
        throw NetlistError("vector " + std::to_string(base + k) + " has width " +
                           std::to_string(v.size()) + ", expected " + std::to_string(n_in));
      for (std::size_t i = 0; i < n_in; ++i)
        if (v[i]) words[i] |= std::uint64_t{1} << k;
    }
    auto out = simulate_words(nl, words);
    for (std::size_t k = 0; k < count; ++k) {
      BitVector o(out.size());
      for (std::size_t j = 0; j < out.size(); ++j) o[j] = (out[j] >> k) & 1u;
      result.push_back(std::move(o));
    }
  }
  return result;
}

}  // namespace splitlift
