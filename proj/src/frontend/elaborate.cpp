#include "slackcast/elaborate.hpp"

#include <optional>

#include "slackcast/lowering.hpp"

namespace slackcast {
namespace {

std::string bit_name(const verilog::NetDecl& decl, int index) {
  if (decl.width() == 1 && decl.lsb == 0) return decl.name;
  return decl.name + "[" + std::to_string(decl.lsb + index) + "]";
}

/// Bit algebra that emits gates into a Netlist, folding constants and
/// trivially redundant structure on the fly.
class NetBuilder {
 public:
  using Bit = NetId;

  explicit NetBuilder(Netlist& netlist) : n_(netlist) {}

  Bit constant(bool v) const { return v ? Netlist::kConst1 : Netlist::kConst0; }

  std::vector<Bit> input_bits(const verilog::NetDecl& decl) {
    std::vector<Bit> bits;
    for (int i = 0; i < decl.width(); ++i) {
      NetId net = new_net(bit_name(decl, i));
      n_.inputs.push_back({bit_name(decl, i), net});
      bits.push_back(net);
    }
    return bits;
  }

  std::vector<Bit> reg_bits(const verilog::NetDecl& decl) {
    std::vector<Bit> bits;
    for (int i = 0; i < decl.width(); ++i) {
      NetId net = new_net(bit_name(decl, i));
      n_.flops.push_back({bit_name(decl, i), Netlist::kConst0, net});
      bits.push_back(net);
    }
    return bits;
  }

  Bit inv(Bit x) {
    if (is_const(x)) return constant(x == Netlist::kConst0);
    if (auto src = inverted_source(x)) return *src;
    return emit(GateType::INV, {x, 0, 0});
  }

  Bit and2(Bit x, Bit y) {
    if (x == Netlist::kConst0 || y == Netlist::kConst0) return constant(false);
    if (x == Netlist::kConst1) return y;
    if (y == Netlist::kConst1) return x;
    if (x == y) return x;
    if (complementary(x, y)) return constant(false);
    return emit(GateType::AND2, {x, y, 0});
  }

  Bit or2(Bit x, Bit y) {
    if (x == Netlist::kConst1 || y == Netlist::kConst1) return constant(true);
    if (x == Netlist::kConst0) return y;
    if (y == Netlist::kConst0) return x;
    if (x == y) return x;
    if (complementary(x, y)) return constant(true);
    return emit(GateType::OR2, {x, y, 0});
  }

  Bit xor2(Bit x, Bit y) {
    if (x == Netlist::kConst0) return y;
    if (y == Netlist::kConst0) return x;
    if (x == Netlist::kConst1) return inv(y);
    if (y == Netlist::kConst1) return inv(x);
    if (x == y) return constant(false);
    if (complementary(x, y)) return constant(true);
    return emit(GateType::XOR2, {x, y, 0});
  }

  Bit nand2(Bit x, Bit y) {
    if (foldable(x, y)) return inv(and2(x, y));
    return emit(GateType::NAND2, {x, y, 0});
  }

  Bit nor2(Bit x, Bit y) {
    if (foldable(x, y)) return inv(or2(x, y));
    return emit(GateType::NOR2, {x, y, 0});
  }

  Bit xnor2(Bit x, Bit y) {
    if (foldable(x, y)) return inv(xor2(x, y));
    return emit(GateType::XNOR2, {x, y, 0});
  }

  Bit mux2(Bit sel, Bit when0, Bit when1) {
    if (sel == Netlist::kConst0) return when0;
    if (sel == Netlist::kConst1) return when1;
    if (when0 == when1) return when0;
    if (when0 == Netlist::kConst0 && when1 == Netlist::kConst1) return sel;
    if (when0 == Netlist::kConst1 && when1 == Netlist::kConst0) return inv(sel);
    return emit(GateType::MUX2, {sel, when0, when1});
  }

 private:
  static bool is_const(Bit x) { return x <= Netlist::kConst1; }

  bool foldable(Bit x, Bit y) const {
    return is_const(x) || is_const(y) || x == y || complementary(x, y);
  }

  std::optional<Bit> inverted_source(Bit x) const {
    if (x < driver_.size() && driver_[x] >= 0) {
      const Gate& g = n_.gates[static_cast<std::size_t>(driver_[x])];
      if (g.type == GateType::INV) return g.in[0];
    }
    return std::nullopt;
  }

  bool complementary(Bit x, Bit y) const {
    auto sx = inverted_source(x);
    auto sy = inverted_source(y);
    return (sx && *sx == y) || (sy && *sy == x);
  }

  NetId new_net(std::string name) {
    NetId id = n_.add_net(std::move(name));
    driver_.resize(n_.net_count(), -1);
    return id;
  }

  Bit emit(GateType type, std::array<NetId, 3> in) {
    auto id = static_cast<std::uint32_t>(n_.gates.size());
    NetId out = new_net("n" + std::to_string(id));
    n_.gates.push_back({id, type, in, out});
    driver_[out] = static_cast<std::int64_t>(id);
    return out;
  }

  Netlist& n_;
  std::vector<std::int64_t> driver_ = {-1, -1};
};

}  // namespace

Netlist elaborate(const verilog::Ast& ast) {
  Netlist netlist;
  netlist.module_name = ast.module_name;
  NetBuilder builder(netlist);
  auto lowered = Lowering<NetBuilder>(ast, builder).run();

  for (const auto& [decl, bits] : lowered.outputs) {
    for (std::size_t i = 0; i < bits.size(); ++i)
      netlist.outputs.push_back({bit_name(*decl, static_cast<int>(i)), bits[i]});
  }
  // Flops were created in reg declaration order, one per bit.
  std::size_t flop = 0;
  for (const auto& [decl, bits] : lowered.next_state) {
    for (NetId d : bits) netlist.flops[flop++].d = d;
  }
  validate(netlist);
  return netlist;
}

}  // namespace slackcast
