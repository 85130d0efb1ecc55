#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slackcast {

enum class GateType : std::uint8_t { INV, BUF, AND2, OR2, XOR2, NAND2, NOR2, XNOR2, MUX2 };

inline constexpr std::array<GateType, 9> kAllGateTypes = {
    GateType::INV,  GateType::BUF,  GateType::AND2,  GateType::OR2, GateType::XOR2,
    GateType::NAND2, GateType::NOR2, GateType::XNOR2, GateType::MUX2};

std::string_view to_string(GateType type);
std::optional<GateType> gate_type_from_string(std::string_view name);
int arity(GateType type);

/// Timing path start/end classification.
enum class PointKind { Input, Register, Output };

std::string_view to_string(PointKind kind);

using NetId = std::uint32_t;

/// MUX2 inputs are (select, when-0, when-1).
struct Gate {
  std::uint32_t id = 0;
  GateType type = GateType::BUF;
  std::array<NetId, 3> in{};
  NetId out = 0;

  std::span<const NetId> inputs() const {
    return std::span<const NetId>(in.data(), static_cast<std::size_t>(arity(type)));
  }
};

struct Flop {
  std::string name;  // register bit, e.g. "q[3]"
  NetId d = 0;
  NetId q = 0;
};

struct Port {
  std::string name;  // port bit, e.g. "a[0]" or "a" for 1-bit ports
  NetId net = 0;
};

/// Technology-independent gate-level netlist. Nets 0 and 1 are the
/// constant nets, driven by implicit tie cells; every other net is driven
/// by exactly one primary input, flop Q pin, or gate output.
struct Netlist {
  static constexpr NetId kConst0 = 0;
  static constexpr NetId kConst1 = 1;

  std::string module_name;
  std::vector<std::string> net_names;
  std::vector<Gate> gates;
  std::vector<Flop> flops;
  std::vector<Port> inputs;
  std::vector<Port> outputs;

  Netlist();

  NetId add_net(std::string name);
  std::size_t net_count() const { return net_names.size(); }
  std::size_t gate_count(GateType type) const;
};

/// Checks arity, single-driver and acyclicity. Throws InvalidNetlist or
/// CombinationalLoop.
void validate(const Netlist& netlist);

/// Gate indices in topological order of the combinational subgraph. Throws
/// CombinationalLoop with the cycle's net names in the message.
std::vector<std::size_t> topological_order(const Netlist& netlist);

/// Longest path measured in gates from any source to any endpoint.
int unit_depth(const Netlist& netlist);

/// `GATE <id> <type> <in...> -> <out>` / `DFF <d> -> <q>` lines.
std::string dump(const Netlist& netlist);

/// Evaluates every net given values for the primary inputs and flop Q
/// pins (both in declaration order). Used for exhaustive equivalence
/// checks.
std::vector<bool> simulate(const Netlist& netlist, const std::vector<bool>& input_values,
                           const std::vector<bool>& flop_values);

}  // namespace slackcast
