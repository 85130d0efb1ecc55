#include "slackcast/netlist.hpp"

#include <algorithm>
#include <sstream>

#include "slackcast/error.hpp"

namespace slackcast {

std::string_view to_string(GateType type) {
  switch (type) {
    case GateType::INV: return "INV";
    case GateType::BUF: return "BUF";
    case GateType::AND2: return "AND2";
    case GateType::OR2: return "OR2";
    case GateType::XOR2: return "XOR2";
    case GateType::NAND2: return "NAND2";
    case GateType::NOR2: return "NOR2";
    case GateType::XNOR2: return "XNOR2";
    case GateType::MUX2: return "MUX2";
  }
  return "?";
}

std::optional<GateType> gate_type_from_string(std::string_view name) {
  for (auto t : kAllGateTypes)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

std::string_view to_string(PointKind kind) {
  switch (kind) {
    case PointKind::Input: return "input";
    case PointKind::Register: return "reg";
    case PointKind::Output: return "output";
  }
  return "?";
}

int arity(GateType type) {
  switch (type) {
    case GateType::INV:
    case GateType::BUF: return 1;
    case GateType::MUX2: return 3;
    default: return 2;
  }
}

Netlist::Netlist() {
  net_names = {"1'b0", "1'b1"};
}

NetId Netlist::add_net(std::string name) {
  net_names.push_back(std::move(name));
  return static_cast<NetId>(net_names.size() - 1);
}

std::size_t Netlist::gate_count(GateType type) const {
  return static_cast<std::size_t>(
      std::count_if(gates.begin(), gates.end(), [&](const Gate& g) { return g.type == type; }));
}

namespace {

enum class DriverKind : std::uint8_t { None, Tie, Input, FlopQ, Gate };

std::vector<DriverKind> driver_kinds(const Netlist& n) {
  std::vector<DriverKind> kind(n.net_count(), DriverKind::None);
  auto claim = [&](NetId net, DriverKind k, std::string_view what) {
    if (net >= n.net_count())
      throw Error(ErrorCode::InvalidNetlist, std::string(what) + " refers to unknown net");
    if (kind[net] != DriverKind::None)
      throw Error(ErrorCode::InvalidNetlist, "net '" + n.net_names[net] + "' has multiple drivers");
    kind[net] = k;
  };
  if (n.net_count() < 2) throw Error(ErrorCode::InvalidNetlist, "constant nets missing");
  kind[Netlist::kConst0] = kind[Netlist::kConst1] = DriverKind::Tie;
  for (const auto& p : n.inputs) claim(p.net, DriverKind::Input, "input");
  for (const auto& f : n.flops) claim(f.q, DriverKind::FlopQ, "flop");
  for (const auto& g : n.gates) claim(g.out, DriverKind::Gate, "gate");
  return kind;
}

}  // namespace

std::vector<std::size_t> topological_order(const Netlist& n) {
  std::vector<std::int64_t> driver(n.net_count(), -1);
  for (std::size_t i = 0; i < n.gates.size(); ++i) driver[n.gates[i].out] = static_cast<std::int64_t>(i);
  std::vector<std::vector<std::size_t>> fanout(n.net_count());
  std::vector<int> pending(n.gates.size(), 0);
  for (std::size_t i = 0; i < n.gates.size(); ++i) {
    for (NetId in : n.gates[i].inputs()) {
      if (in >= n.net_count()) throw Error(ErrorCode::InvalidNetlist, "gate refers to unknown net");
      if (driver[in] >= 0) {
        ++pending[i];
        fanout[in].push_back(i);
      }
    }
  }
  std::vector<std::size_t> order;
  order.reserve(n.gates.size());
  for (std::size_t i = 0; i < n.gates.size(); ++i)
    if (pending[i] == 0) order.push_back(i);
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t succ : fanout[n.gates[order[head]].out])
      if (--pending[succ] == 0) order.push_back(succ);
  }
  if (order.size() == n.gates.size()) return order;

  // Walk predecessors among the unsorted gates until a net repeats.
  std::size_t g = 0;
  while (pending[g] == 0) ++g;
  std::vector<int> seen_at(n.gates.size(), -1);
  std::vector<std::size_t> walk;
  for (;;) {
    if (seen_at[g] >= 0) break;
    seen_at[g] = static_cast<int>(walk.size());
    walk.push_back(g);
    for (NetId in : n.gates[g].inputs()) {
      if (driver[in] >= 0 && pending[static_cast<std::size_t>(driver[in])] > 0) {
        g = static_cast<std::size_t>(driver[in]);
        break;
      }
    }
  }
  std::string cycle;
  for (std::size_t i = static_cast<std::size_t>(seen_at[g]); i < walk.size(); ++i) {
    cycle += n.net_names[n.gates[walk[i]].out];
    cycle += " <- ";
  }
  cycle += n.net_names[n.gates[g].out];
  throw Error(ErrorCode::CombinationalLoop, "combinational loop: " + cycle);
}

void validate(const Netlist& n) {
  driver_kinds(n);
  for (const auto& g : n.gates) {
    for (NetId in : g.inputs())
      if (in >= n.net_count()) throw Error(ErrorCode::InvalidNetlist, "gate refers to unknown net");
  }
  for (const auto& p : n.outputs)
    if (p.net >= n.net_count()) throw Error(ErrorCode::InvalidNetlist, "output refers to unknown net");
  for (const auto& f : n.flops)
    if (f.d >= n.net_count()) throw Error(ErrorCode::InvalidNetlist, "flop refers to unknown net");
  topological_order(n);
}

int unit_depth(const Netlist& n) {
  std::vector<int> depth(n.net_count(), 0);
  for (std::size_t gi : topological_order(n)) {
    const Gate& g = n.gates[gi];
    int d = 0;
    for (NetId in : g.inputs())
      if (in > Netlist::kConst1) d = std::max(d, depth[in]);
    depth[g.out] = d + 1;
  }
  int best = 0;
  for (const auto& p : n.outputs) best = std::max(best, depth[p.net]);
  for (const auto& f : n.flops) best = std::max(best, depth[f.d]);
  return best;
}

std::string dump(const Netlist& n) {
  std::ostringstream out;
  for (const auto& g : n.gates) {
    out << "GATE " << g.id << ' ' << to_string(g.type);
    for (NetId in : g.inputs()) out << ' ' << n.net_names[in];
    out << " -> " << n.net_names[g.out] << '\n';
  }
  for (const auto& f : n.flops) out << "DFF " << n.net_names[f.d] << " -> " << n.net_names[f.q] << '\n';
  return out.str();
}

std::vector<bool> simulate(const Netlist& n, const std::vector<bool>& input_values,
                           const std::vector<bool>& flop_values) {
  if (input_values.size() != n.inputs.size() || flop_values.size() != n.flops.size())
    throw Error(ErrorCode::DimensionMismatch, "simulate: stimulus size mismatch");
  std::vector<bool> value(n.net_count(), false);
  value[Netlist::kConst1] = true;
  for (std::size_t i = 0; i < n.inputs.size(); ++i) value[n.inputs[i].net] = input_values[i];
  for (std::size_t i = 0; i < n.flops.size(); ++i) value[n.flops[i].q] = flop_values[i];
  for (std::size_t gi : topological_order(n)) {
    const Gate& g = n.gates[gi];
    bool a = value[g.in[0]];
    bool b = arity(g.type) > 1 ? value[g.in[1]] : false;
    bool r = false;
    switch (g.type) {
      case GateType::INV: r = !a; break;
      case GateType::BUF: r = a; break;
      case GateType::AND2: r = a && b; break;
      case GateType::OR2: r = a || b; break;
      case GateType::XOR2: r = a != b; break;
      case GateType::NAND2: r = !(a && b); break;
      case GateType::NOR2: r = !(a || b); break;
      case GateType::XNOR2: r = a == b; break;
      case GateType::MUX2: r = a ? value[g.in[2]] : b; break;
    }
    value[g.out] = r;
  }
  return value;
}

}  // namespace slackcast
