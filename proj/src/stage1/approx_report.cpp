#include <algorithm>
#include <cmath>

#include "slackcast/lowering.hpp"
#include "slackcast/stage1.hpp"

namespace slackcast::stage1 {
namespace {

/// A bit as seen by the level analysis: either a known constant or a
/// signal with an identity, a unit-delay level and the kind of startpoint
/// its deepest path comes from.
struct LevelBit {
  int id = -1;  // -1 for constants
  bool value = false;
  int level = 0;
  PointKind origin = PointKind::Input;
  int inverse_of = -1;  // id of x when this bit is ~x
  int inverse_level = 0;
  PointKind inverse_origin = PointKind::Input;

  bool is_const() const { return id < 0; }
};

class LevelAlgebra {
 public:
  using Bit = LevelBit;

  std::array<int, kAllGateTypes.size()> census{};

  Bit constant(bool v) const {
    Bit b;
    b.value = v;
    return b;
  }

  std::vector<Bit> input_bits(const verilog::NetDecl& decl) { return sources(decl, PointKind::Input); }
  std::vector<Bit> reg_bits(const verilog::NetDecl& decl) { return sources(decl, PointKind::Register); }

  Bit inv(const Bit& x) {
    if (x.is_const()) return constant(!x.value);
    if (x.inverse_of >= 0) {
      Bit back;
      back.id = x.inverse_of;
      back.level = x.inverse_level;
      back.origin = x.inverse_origin;
      return back;
    }
    Bit out = op(GateType::INV, {&x});
    out.inverse_of = x.id;
    out.inverse_level = x.level;
    out.inverse_origin = x.origin;
    return out;
  }

  Bit and2(const Bit& x, const Bit& y) {
    if (is(x, false) || is(y, false)) return constant(false);
    if (is(x, true)) return y;
    if (is(y, true)) return x;
    if (x.id == y.id) return x;
    if (complementary(x, y)) return constant(false);
    return op(GateType::AND2, {&x, &y});
  }

  Bit or2(const Bit& x, const Bit& y) {
    if (is(x, true) || is(y, true)) return constant(true);
    if (is(x, false)) return y;
    if (is(y, false)) return x;
    if (x.id == y.id) return x;
    if (complementary(x, y)) return constant(true);
    return op(GateType::OR2, {&x, &y});
  }

  Bit xor2(const Bit& x, const Bit& y) {
    if (is(x, false)) return y;
    if (is(y, false)) return x;
    if (is(x, true)) return inv(y);
    if (is(y, true)) return inv(x);
    if (x.id == y.id) return constant(false);
    if (complementary(x, y)) return constant(true);
    return op(GateType::XOR2, {&x, &y});
  }

  Bit nand2(const Bit& x, const Bit& y) {
    if (foldable(x, y)) return inv(and2(x, y));
    return op(GateType::NAND2, {&x, &y});
  }
  Bit nor2(const Bit& x, const Bit& y) {
    if (foldable(x, y)) return inv(or2(x, y));
    return op(GateType::NOR2, {&x, &y});
  }
  Bit xnor2(const Bit& x, const Bit& y) {
    if (foldable(x, y)) return inv(xor2(x, y));
    return op(GateType::XNOR2, {&x, &y});
  }

  Bit mux2(const Bit& sel, const Bit& when0, const Bit& when1) {
    if (sel.is_const()) return sel.value ? when1 : when0;
    if (same(when0, when1)) return when0;
    if (is(when0, false) && is(when1, true)) return sel;
    if (is(when0, true) && is(when1, false)) return inv(sel);
    return op(GateType::MUX2, {&sel, &when0, &when1});
  }

 private:
  static bool is(const Bit& b, bool v) { return b.is_const() && b.value == v; }
  static bool same(const Bit& a, const Bit& b) {
    if (a.is_const() || b.is_const()) return a.is_const() && b.is_const() && a.value == b.value;
    return a.id == b.id;
  }
  static bool complementary(const Bit& a, const Bit& b) {
    return (a.inverse_of >= 0 && a.inverse_of == b.id) || (b.inverse_of >= 0 && b.inverse_of == a.id);
  }
  static bool foldable(const Bit& a, const Bit& b) {
    return a.is_const() || b.is_const() || a.id == b.id || complementary(a, b);
  }

  std::vector<Bit> sources(const verilog::NetDecl& decl, PointKind kind) {
    std::vector<Bit> bits(static_cast<std::size_t>(decl.width()));
    for (auto& b : bits) {
      b.id = next_id_++;
      b.origin = kind;
    }
    return bits;
  }

  Bit op(GateType type, std::initializer_list<const Bit*> inputs) {
    ++census[static_cast<std::size_t>(type)];
    Bit out;
    out.id = next_id_++;
    int deepest = -1;
    for (const Bit* in : inputs) {
      if (in->is_const()) continue;
      if (in->level > deepest) {
        deepest = in->level;
        out.origin = in->origin;
      }
    }
    out.level = deepest + 1;
    return out;
  }

  int next_id_ = 0;
};

std::string bit_name(const verilog::NetDecl& decl, std::size_t index) {
  if (decl.width() == 1 && decl.lsb == 0) return decl.name;
  return decl.name + "[" + std::to_string(decl.lsb + static_cast<int>(index)) + "]";
}

}  // namespace

ApproxReport approx_report(const verilog::Ast& ast, double clock_period) {
  LevelAlgebra algebra;
  auto lowered = Lowering<LevelAlgebra>(ast, algebra).run();

  ApproxReport report;
  report.clock_period = clock_period;
  report.census = algebra.census;
  auto add = [&](const LevelBit& bit, std::string name, PointKind end_kind) {
    if (bit.is_const()) return;
    ApproxPath p;
    p.endpoint = std::move(name);
    p.start_kind = bit.origin;
    p.end_kind = end_kind;
    p.depth = bit.level;
    p.arrival_ps = kPsPerLevel * bit.level;
    p.slack_ps = clock_period - p.arrival_ps;
    report.paths.push_back(std::move(p));
  };
  for (const auto& [decl, bits] : lowered.outputs)
    for (std::size_t i = 0; i < bits.size(); ++i) add(bits[i], bit_name(*decl, i), PointKind::Output);
  for (const auto& [decl, bits] : lowered.next_state)
    for (std::size_t i = 0; i < bits.size(); ++i)
      add(bits[i], bit_name(*decl, i) + "/D", PointKind::Register);

  std::sort(report.paths.begin(), report.paths.end(), [](const ApproxPath& a, const ApproxPath& b) {
    if (a.slack_ps != b.slack_ps) return a.slack_ps < b.slack_ps;
    return a.endpoint < b.endpoint;
  });
  report.wns = report.paths.empty() ? clock_period : report.paths.front().slack_ps;
  for (const auto& p : report.paths) {
    if (p.slack_ps < 0.0) {
      report.tns += p.slack_ps;
      ++report.violating;
    }
  }
  return report;
}

nlohmann::json to_json(const ApproxReport& report) {
  auto ps = [](double v) { return static_cast<long long>(std::llround(v)); };
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : report.paths) {
    paths.push_back({{"endpoint", p.endpoint},
                     {"start_kind", std::string(to_string(p.start_kind))},
                     {"end_kind", std::string(to_string(p.end_kind))},
                     {"depth", p.depth},
                     {"arrival_ps", ps(p.arrival_ps)},
                     {"required_ps", ps(report.clock_period)},
                     {"slack_ps", ps(p.slack_ps)}});
  }
  return {{"approx", true},
          {"clock_period_ps", ps(report.clock_period)},
          {"paths", paths},
          {"violating", report.violating},
          {"wns_ps", ps(report.wns)},
          {"tns_ps", ps(report.tns)}};
}

}  // namespace slackcast::stage1
