#pragma once

// Bit-level lowering of the Verilog subset over an abstract bit algebra.
//
// The same decomposition drives two consumers: the elaborator (bits are
// netlist nets, operations emit gates) and the Stage-1 analyzer (bits are
// unit-delay level estimates, operations only accumulate depth). Keeping
// one lowering guarantees both agree on how operators map to 2-input
// logic:
//   +  ripple-carry full adders (2 XOR2, 2 AND2, 1 OR2 per bit)
//   -  a + ~b + 1
//   <  LSB-to-MSB ripple comparator
//   == XNOR per bit and a balanced AND tree
//   ?: if/else, case  MUX2 per bit (case as a priority chain)
//   ~(a op b)  NAND2 / NOR2 / XNOR2 for op in & | ^

#include <algorithm>
#include <concepts>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "slackcast/error.hpp"
#include "slackcast/verilog.hpp"

namespace slackcast {

template <class A>
concept BitAlgebra = requires(A& a, typename A::Bit x, const verilog::NetDecl& decl) {
  { a.constant(true) } -> std::same_as<typename A::Bit>;
  { a.inv(x) } -> std::same_as<typename A::Bit>;
  { a.and2(x, x) } -> std::same_as<typename A::Bit>;
  { a.or2(x, x) } -> std::same_as<typename A::Bit>;
  { a.xor2(x, x) } -> std::same_as<typename A::Bit>;
  { a.nand2(x, x) } -> std::same_as<typename A::Bit>;
  { a.nor2(x, x) } -> std::same_as<typename A::Bit>;
  { a.xnor2(x, x) } -> std::same_as<typename A::Bit>;
  { a.mux2(x, x, x) } -> std::same_as<typename A::Bit>;
  { a.input_bits(decl) } -> std::same_as<std::vector<typename A::Bit>>;
  { a.reg_bits(decl) } -> std::same_as<std::vector<typename A::Bit>>;
};

template <BitAlgebra A>
class Lowering {
 public:
  using Bit = typename A::Bit;
  using Bits = std::vector<Bit>;

  struct Result {
    // Bits are LSB first.
    std::vector<std::pair<const verilog::NetDecl*, Bits>> outputs;
    std::vector<std::pair<const verilog::NetDecl*, Bits>> next_state;
  };

  Lowering(const verilog::Ast& ast, A& algebra) : ast_(ast), a_(algebra) {}

  Result run() {
    for (const auto* in : ast_.inputs()) bits_[in->name] = a_.input_bits(*in);
    for (const auto* r : ast_.regs()) bits_[r->name] = a_.reg_bits(*r);
    for (const auto& assign : ast_.assigns) resolve(assign.target);

    Result result;
    for (const auto* out : ast_.outputs()) result.outputs.emplace_back(out, resolve(out->name));

    std::map<std::string, Bits> env;
    for (const auto* r : ast_.regs()) env[r->name] = bits_.at(r->name);
    for (const auto& block : ast_.blocks) run_body(block.body, env);
    for (const auto* r : ast_.regs()) result.next_state.emplace_back(r, env.at(r->name));
    return result;
  }

 private:
  const Bits& resolve(const std::string& name) {
    if (auto it = bits_.find(name); it != bits_.end()) return it->second;
    const verilog::NetDecl* decl = ast_.find(name);
    const verilog::ContinuousAssign* assign = nullptr;
    for (const auto& a : ast_.assigns)
      if (a.target == name) assign = &a;
    if (!assign) throw Error(ErrorCode::UndrivenNet, "net '" + name + "' is never driven");
    if (std::find(active_.begin(), active_.end(), name) != active_.end()) {
      std::string cycle;
      auto start = std::find(active_.begin(), active_.end(), name);
      for (auto it = start; it != active_.end(); ++it) cycle += *it + " -> ";
      throw Error(ErrorCode::CombinationalLoop, "combinational loop: " + cycle + name);
    }
    active_.push_back(name);
    Bits value = assignment(decl->width(), assign->value);
    active_.pop_back();
    return bits_[name] = std::move(value);
  }

  Bits assignment(int target_width, const verilog::Expr& rhs) {
    int w = std::max(target_width, verilog::self_width(ast_, rhs));
    Bits v = eval(rhs, w);
    v.resize(static_cast<std::size_t>(target_width));
    return v;
  }

  Bits extend(Bits v, int w) {
    v.resize(static_cast<std::size_t>(w), a_.constant(false));
    return v;
  }

  Bit reduce(Bits v, bool use_and) {
    if (v.empty()) return a_.constant(false);
    while (v.size() > 1) {
      Bits next;
      for (std::size_t i = 0; i + 1 < v.size(); i += 2)
        next.push_back(use_and ? a_.and2(v[i], v[i + 1]) : a_.or2(v[i], v[i + 1]));
      if (v.size() % 2) next.push_back(v.back());
      v = std::move(next);
    }
    return v[0];
  }

  Bit truth(const verilog::Expr& cond) {
    return reduce(eval(cond, verilog::self_width(ast_, cond)), false);
  }

  Bits add(const Bits& x, const Bits& y, Bit carry) {
    Bits sum(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      Bit p = a_.xor2(x[i], y[i]);
      sum[i] = a_.xor2(p, carry);
      Bit g = a_.and2(x[i], y[i]);
      Bit t = a_.and2(p, carry);
      carry = a_.or2(g, t);
    }
    return sum;
  }

  Bit less_than(const Bits& x, const Bits& y) {
    Bit lt = a_.constant(false);
    for (std::size_t i = 0; i < x.size(); ++i) {
      Bit strictly = a_.and2(a_.inv(x[i]), y[i]);
      Bit tied = a_.and2(a_.xnor2(x[i], y[i]), lt);
      lt = a_.or2(strictly, tied);
    }
    return lt;
  }

  Bit equal(const Bits& x, const Bits& y) {
    Bits same(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) same[i] = a_.xnor2(x[i], y[i]);
    return reduce(std::move(same), true);
  }

  Bits mux(Bit sel, const Bits& when0, const Bits& when1) {
    Bits out(when0.size());
    for (std::size_t i = 0; i < when0.size(); ++i) out[i] = a_.mux2(sel, when0[i], when1[i]);
    return out;
  }

  Bits eval(const verilog::Expr& e, int w) {
    using verilog::ExprKind;
    using verilog::Op;
    switch (e.kind) {
      case ExprKind::Identifier: return extend(resolve(e.name), w);
      case ExprKind::Select: {
        const verilog::NetDecl* decl = ast_.find(e.name);
        if (e.lsb < decl->lsb || e.msb > decl->msb)
          throw Error(ErrorCode::WidthMismatch,
                      std::to_string(e.loc.line) + ":" + std::to_string(e.loc.column) +
                          ": select [" + std::to_string(e.msb) + ":" + std::to_string(e.lsb) +
                          "] is outside '" + e.name + "'");
        const Bits& all = resolve(e.name);
        Bits part(all.begin() + (e.lsb - decl->lsb), all.begin() + (e.msb - decl->lsb + 1));
        return extend(std::move(part), w);
      }
      case ExprKind::Literal: {
        Bits v;
        for (int i = 0; i < w; ++i) v.push_back(a_.constant(i < 64 && ((e.value >> i) & 1u)));
        return v;
      }
      case ExprKind::Concat: {
        Bits v;
        for (auto it = e.args.rbegin(); it != e.args.rend(); ++it) {
          Bits part = eval(*it, verilog::self_width(ast_, *it));
          v.insert(v.end(), part.begin(), part.end());
        }
        if (static_cast<int>(v.size()) > 64)
          throw Error(ErrorCode::WidthMismatch, "concatenation wider than 64 bits");
        return extend(std::move(v), w);
      }
      case ExprKind::Unary: {
        const verilog::Expr& inner = e.args[0];
        if (inner.kind == ExprKind::Unary) return eval(inner.args[0], w);
        if (inner.kind == ExprKind::Binary &&
            (inner.op == Op::And || inner.op == Op::Or || inner.op == Op::Xor)) {
          Bits x = eval(inner.args[0], w);
          Bits y = eval(inner.args[1], w);
          Bits out(x.size());
          for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = inner.op == Op::And  ? a_.nand2(x[i], y[i])
                     : inner.op == Op::Or ? a_.nor2(x[i], y[i])
                                          : a_.xnor2(x[i], y[i]);
          }
          return out;
        }
        Bits x = eval(inner, w);
        for (auto& b : x) b = a_.inv(b);
        return x;
      }
      case ExprKind::Binary: {
        if (e.op == Op::Eq || e.op == Op::Lt) {
          int ow = std::max(verilog::self_width(ast_, e.args[0]), verilog::self_width(ast_, e.args[1]));
          Bits x = eval(e.args[0], ow);
          Bits y = eval(e.args[1], ow);
          Bit r = e.op == Op::Eq ? equal(x, y) : less_than(x, y);
          return extend(Bits{r}, w);
        }
        Bits x = eval(e.args[0], w);
        Bits y = eval(e.args[1], w);
        switch (e.op) {
          case Op::Add: return add(x, y, a_.constant(false));
          case Op::Sub: {
            for (auto& b : y) b = a_.inv(b);
            return add(x, y, a_.constant(true));
          }
          default: {
            Bits out(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
              out[i] = e.op == Op::And  ? a_.and2(x[i], y[i])
                       : e.op == Op::Or ? a_.or2(x[i], y[i])
                                        : a_.xor2(x[i], y[i]);
            }
            return out;
          }
        }
      }
      case ExprKind::Ternary: {
        Bit sel = truth(e.args[0]);
        Bits then_v = eval(e.args[1], w);
        Bits else_v = eval(e.args[2], w);
        return mux(sel, else_v, then_v);
      }
    }
    return Bits(static_cast<std::size_t>(w), a_.constant(false));
  }

  using Env = std::map<std::string, Bits>;

  void merge(Bit sel, Env& into, const Env& when0, const Env& when1) {
    for (auto& [name, bits] : into) bits = mux(sel, when0.at(name), when1.at(name));
  }

  void run_body(const std::vector<verilog::Stmt>& body, Env& env) {
    for (const auto& s : body) run_stmt(s, env);
  }

  void run_stmt(const verilog::Stmt& s, Env& env) {
    using verilog::StmtKind;
    switch (s.kind) {
      case StmtKind::Block: run_body(s.then_body, env); break;
      case StmtKind::NonBlocking:
        env[s.target] = assignment(ast_.find(s.target)->width(), s.value);
        break;
      case StmtKind::If: {
        Bit sel = truth(s.value);
        Env then_env = env;
        Env else_env = env;
        run_body(s.then_body, then_env);
        run_body(s.else_body, else_env);
        merge(sel, env, else_env, then_env);
        break;
      }
      case StmtKind::Case: {
        int sel_width = verilog::self_width(ast_, s.value);
        Env result = env;
        for (const auto& item : s.items) {
          if (item.labels.empty()) run_body(item.body, result);
        }
        for (auto it = s.items.rbegin(); it != s.items.rend(); ++it) {
          if (it->labels.empty()) continue;
          Bits matches;
          for (const auto& label : it->labels) {
            int ow = std::max(sel_width, verilog::self_width(ast_, label));
            matches.push_back(equal(eval(s.value, ow), eval(label, ow)));
          }
          Bit hit = reduce(std::move(matches), false);
          Env item_env = env;
          run_body(it->body, item_env);
          Env merged = result;
          merge(hit, merged, result, item_env);
          result = std::move(merged);
        }
        env = std::move(result);
        break;
      }
    }
  }

  const verilog::Ast& ast_;
  A& a_;
  std::map<std::string, Bits> bits_;
  std::vector<std::string> active_;
};

}  // namespace slackcast
