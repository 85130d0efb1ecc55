#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "slackcast/error.hpp"
#include "slackcast/hash.hpp"
#include "slackcast/verilog.hpp"

namespace slackcast::verilog {
namespace {

[[noreturn]] void fail(SourceLoc loc, const std::string& message) {
  throw Error(ErrorCode::SyntaxError,
              std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message);
}

std::string describe_unsupported_keyword(const std::string& kw) {
  if (kw == "initial") return "initial blocks are not supported";
  if (kw == "task" || kw == "function") return kw + " declarations are not supported";
  if (kw == "parameter" || kw == "localparam") return "parameters are not supported";
  if (kw == "generate" || kw == "genvar" || kw == "for" || kw == "while" || kw == "repeat" ||
      kw == "forever")
    return "'" + kw + "' constructs are not supported";
  if (kw == "inout") return "inout ports are not supported";
  if (kw == "integer" || kw == "logic" || kw == "signed") return "'" + kw + "' types are not supported";
  if (kw == "casez" || kw == "casex") return kw + " statements are not supported";
  return "unexpected keyword '" + kw + "'";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Ast run() {
    expect_keyword("module");
    ast_.module_name = expect_identifier("module name");
    expect_symbol("(");
    if (!is_symbol(")")) parse_port_list();
    expect_symbol(")");
    expect_symbol(";");
    while (!is_keyword("endmodule")) {
      if (cur().kind == TokenKind::End) fail(cur().loc, "missing endmodule");
      parse_item();
    }
    advance();
    if (cur().kind != TokenKind::End) fail(cur().loc, "only a single module per source is supported");
    return std::move(ast_);
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool is_symbol(std::string_view s) const {
    return cur().kind == TokenKind::Symbol && cur().text == s;
  }
  bool is_keyword(std::string_view s) const {
    return cur().kind == TokenKind::Keyword && cur().text == s;
  }

  void expect_symbol(std::string_view s) {
    if (!is_symbol(s)) fail(cur().loc, "expected '" + std::string(s) + "' but found " + found());
    advance();
  }
  void expect_keyword(std::string_view s) {
    if (!is_keyword(s)) fail(cur().loc, "expected '" + std::string(s) + "' but found " + found());
    advance();
  }
  std::string expect_identifier(std::string_view what) {
    if (cur().kind != TokenKind::Identifier) {
      reject_out_of_subset();
      fail(cur().loc, "expected " + std::string(what) + " but found " + found());
    }
    return advance().text;
  }
  int expect_int() {
    if (cur().kind != TokenKind::Number) fail(cur().loc, "expected constant but found " + found());
    auto v = advance().value;
    if (v > 1000000) fail(cur().loc, "index out of range");
    return static_cast<int>(v);
  }
  std::string found() const {
    if (cur().kind == TokenKind::End) return "end of input";
    return "'" + cur().text + "'";
  }

  void reject_out_of_subset() {
    const Token& t = cur();
    if (t.kind == TokenKind::Keyword) fail(t.loc, describe_unsupported_keyword(t.text));
    if (t.kind == TokenKind::SystemName) fail(t.loc, "system task '" + t.text + "' is not supported");
    if (t.kind == TokenKind::Symbol && t.text == "#") fail(t.loc, "delay controls are not supported");
  }

  std::pair<int, int> parse_range() {
    if (!is_symbol("[")) return {0, 0};
    advance();
    int msb = expect_int();
    expect_symbol(":");
    int lsb = expect_int();
    expect_symbol("]");
    if (msb < lsb) fail(cur().loc, "descending ranges [msb:lsb] with msb >= lsb are required");
    return {msb, lsb};
  }

  void declare(NetDecl decl) {
    if (index_.count(decl.name)) fail(decl.loc, "net '" + decl.name + "' is declared twice");
    index_[decl.name] = ast_.nets.size();
    ast_.nets.push_back(std::move(decl));
  }

  void parse_port_list() {
    NetKind kind = NetKind::Input;
    bool is_reg = false;
    std::pair<int, int> range{0, 0};
    bool first = true;
    for (;;) {
      SourceLoc loc = cur().loc;
      if (is_keyword("input") || is_keyword("output")) {
        kind = cur().text == "input" ? NetKind::Input : NetKind::Output;
        advance();
        is_reg = false;
        if (is_keyword("wire")) {
          advance();
        } else if (is_keyword("reg")) {
          if (kind == NetKind::Input) fail(cur().loc, "input ports cannot be declared reg");
          advance();
          is_reg = true;
        }
        range = parse_range();
      } else if (first) {
        reject_out_of_subset();
        fail(loc, "non-ANSI port lists are not supported");
      }
      NetDecl decl;
      decl.name = expect_identifier("port name");
      decl.kind = kind;
      decl.is_port = true;
      decl.is_reg = is_reg;
      decl.msb = range.first;
      decl.lsb = range.second;
      decl.loc = loc;
      declare(std::move(decl));
      first = false;
      if (!is_symbol(",")) break;
      advance();
    }
  }

  void parse_item() {
    SourceLoc loc = cur().loc;
    if (is_keyword("wire") || is_keyword("reg")) {
      bool is_reg = cur().text == "reg";
      advance();
      auto range = parse_range();
      for (;;) {
        NetDecl decl;
        decl.loc = cur().loc;
        decl.name = expect_identifier("net name");
        decl.kind = is_reg ? NetKind::Reg : NetKind::Wire;
        decl.is_reg = is_reg;
        decl.msb = range.first;
        decl.lsb = range.second;
        std::string name = decl.name;
        declare(std::move(decl));
        if (is_symbol("=")) {
          if (is_reg) fail(cur().loc, "reg initializers are not supported");
          advance();
          ContinuousAssign a;
          a.loc = loc;
          a.target = name;
          a.value = parse_expr();
          ast_.assigns.push_back(std::move(a));
        }
        if (!is_symbol(",")) break;
        advance();
      }
      expect_symbol(";");
    } else if (is_keyword("input") || is_keyword("output")) {
      fail(loc, "port declarations must appear in the module header");
    } else if (is_keyword("assign")) {
      advance();
      for (;;) {
        ContinuousAssign a;
        a.loc = cur().loc;
        a.target = expect_identifier("assignment target");
        if (is_symbol("[")) fail(cur().loc, "assignment targets must be whole nets");
        expect_symbol("=");
        a.value = parse_expr();
        ast_.assigns.push_back(std::move(a));
        if (!is_symbol(",")) break;
        advance();
      }
      expect_symbol(";");
    } else if (is_keyword("always")) {
      advance();
      parse_always(loc);
    } else {
      reject_out_of_subset();
      fail(loc, "unexpected " + found() + " in module body");
    }
  }

  void parse_always(SourceLoc loc) {
    if (is_symbol("#")) fail(cur().loc, "delay controls are not supported");
    expect_symbol("@");
    if (is_symbol("*")) fail(cur().loc, "combinational always blocks are not supported");
    expect_symbol("(");
    if (is_symbol("*")) fail(cur().loc, "combinational always blocks are not supported");
    if (is_keyword("negedge")) fail(cur().loc, "negedge clocks are not supported");
    if (!is_keyword("posedge")) fail(cur().loc, "combinational always blocks are not supported");
    advance();
    ClockedBlock block;
    block.loc = loc;
    block.clock = expect_identifier("clock name");
    if (is_keyword("or") || is_symbol(","))
      fail(cur().loc, "multiple clocks or asynchronous controls are not supported");
    expect_symbol(")");
    block.body.push_back(parse_stmt());
    ast_.blocks.push_back(std::move(block));
  }

  Stmt parse_stmt() {
    Stmt s;
    s.loc = cur().loc;
    if (is_keyword("begin")) {
      advance();
      if (is_symbol(":")) fail(cur().loc, "named blocks are not supported");
      s.kind = StmtKind::Block;
      while (!is_keyword("end")) {
        if (cur().kind == TokenKind::End) fail(cur().loc, "missing 'end'");
        s.then_body.push_back(parse_stmt());
      }
      advance();
      return s;
    }
    if (is_keyword("if")) {
      advance();
      s.kind = StmtKind::If;
      expect_symbol("(");
      s.value = parse_expr();
      expect_symbol(")");
      s.then_body.push_back(parse_stmt());
      if (is_keyword("else")) {
        advance();
        s.else_body.push_back(parse_stmt());
      }
      return s;
    }
    if (is_keyword("case")) {
      advance();
      s.kind = StmtKind::Case;
      expect_symbol("(");
      s.value = parse_expr();
      expect_symbol(")");
      bool seen_default = false;
      while (!is_keyword("endcase")) {
        if (cur().kind == TokenKind::End) fail(cur().loc, "missing 'endcase'");
        CaseItem item;
        if (is_keyword("default")) {
          if (seen_default) fail(cur().loc, "duplicate default case item");
          seen_default = true;
          advance();
          if (is_symbol(":")) advance();
        } else {
          for (;;) {
            item.labels.push_back(parse_expr());
            if (!is_symbol(",")) break;
            advance();
          }
          expect_symbol(":");
        }
        item.body.push_back(parse_stmt());
        s.items.push_back(std::move(item));
      }
      advance();
      return s;
    }
    if (is_symbol(";")) {
      advance();
      s.kind = StmtKind::Block;
      return s;
    }
    if (cur().kind == TokenKind::Identifier) {
      s.kind = StmtKind::NonBlocking;
      s.target = advance().text;
      if (is_symbol("[")) fail(cur().loc, "assignment targets must be whole nets");
      if (is_symbol("=")) fail(cur().loc, "blocking assignments in clocked blocks are not supported");
      expect_symbol("<=");
      if (is_symbol("#")) fail(cur().loc, "delay controls are not supported");
      s.value = parse_expr();
      expect_symbol(";");
      return s;
    }
    reject_out_of_subset();
    fail(cur().loc, "unexpected " + found() + " in clocked block");
  }

  // Precedence, lowest first: ?:  |  ^  &  ==  <  + -  unary
  Expr parse_expr() { return parse_ternary(); }

  Expr parse_ternary() {
    Expr cond = parse_binary(0);
    if (!is_symbol("?")) return cond;
    Expr e;
    e.kind = ExprKind::Ternary;
    e.loc = cur().loc;
    advance();
    Expr then_e = parse_expr();
    expect_symbol(":");
    Expr else_e = parse_ternary();
    e.args.push_back(std::move(cond));
    e.args.push_back(std::move(then_e));
    e.args.push_back(std::move(else_e));
    return e;
  }

  static int precedence(const Token& t, Op& op) {
    if (t.kind != TokenKind::Symbol) return -1;
    const auto& s = t.text;
    if (s == "|") { op = Op::Or; return 0; }
    if (s == "^") { op = Op::Xor; return 1; }
    if (s == "&") { op = Op::And; return 2; }
    if (s == "==") { op = Op::Eq; return 3; }
    if (s == "<") { op = Op::Lt; return 4; }
    if (s == "+") { op = Op::Add; return 5; }
    if (s == "-") { op = Op::Sub; return 5; }
    return -1;
  }

  void reject_unsupported_operator() {
    static const std::set<std::string> kUnsupported = {
        "&&", "||", "!=", "===", "!==", "<=", ">=", ">", "<<", ">>", "<<<", ">>>",
        "*",  "/",  "%",  "~&",  "~|",  "~^", "!"};
    if (cur().kind == TokenKind::Symbol && kUnsupported.count(cur().text))
      fail(cur().loc, "operator '" + cur().text + "' is not supported");
  }

  Expr parse_binary(int min_prec) {
    Expr lhs = parse_unary();
    for (;;) {
      Op op;
      int prec = precedence(cur(), op);
      if (prec < 0) {
        reject_unsupported_operator();
        return lhs;
      }
      if (prec < min_prec) return lhs;
      Expr e;
      e.kind = ExprKind::Binary;
      e.op = op;
      e.loc = cur().loc;
      advance();
      Expr rhs = parse_binary(prec + 1);
      e.args.push_back(std::move(lhs));
      e.args.push_back(std::move(rhs));
      lhs = std::move(e);
    }
  }

  Expr parse_unary() {
    if (is_symbol("~")) {
      Expr e;
      e.kind = ExprKind::Unary;
      e.op = Op::Not;
      e.loc = cur().loc;
      advance();
      e.args.push_back(parse_unary());
      return e;
    }
    if (is_symbol("-") || is_symbol("+") || is_symbol("!") || is_symbol("&") || is_symbol("|") ||
        is_symbol("^") || is_symbol("~&") || is_symbol("~|") || is_symbol("~^"))
      fail(cur().loc, "unary/reduction operator '" + cur().text + "' is not supported");
    return parse_primary();
  }

  Expr parse_primary() {
    Expr e;
    e.loc = cur().loc;
    if (cur().kind == TokenKind::Number) {
      const Token& t = advance();
      e.kind = ExprKind::Literal;
      e.value = t.value;
      e.width = t.width;
      return e;
    }
    if (cur().kind == TokenKind::Identifier) {
      e.name = advance().text;
      if (is_symbol("[")) {
        advance();
        e.kind = ExprKind::Select;
        e.msb = expect_int();
        e.lsb = e.msb;
        if (is_symbol(":")) {
          advance();
          e.lsb = expect_int();
        }
        expect_symbol("]");
        if (e.msb < e.lsb) fail(e.loc, "part select must be [msb:lsb] with msb >= lsb");
      } else {
        e.kind = ExprKind::Identifier;
      }
      return e;
    }
    if (is_symbol("(")) {
      advance();
      Expr inner = parse_expr();
      expect_symbol(")");
      return inner;
    }
    if (is_symbol("{")) {
      advance();
      e.kind = ExprKind::Concat;
      for (;;) {
        e.args.push_back(parse_expr());
        if (is_symbol("{")) fail(cur().loc, "replication is not supported");
        if (!is_symbol(",")) break;
        advance();
      }
      expect_symbol("}");
      return e;
    }
    reject_out_of_subset();
    fail(cur().loc, "expected expression but found " + found());
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Ast ast_;
  std::unordered_map<std::string, std::size_t> index_;
};

void check_expr_refs(const Ast& ast, const Expr& e) {
  if (e.kind == ExprKind::Identifier || e.kind == ExprKind::Select) {
    if (!ast.find(e.name)) fail(e.loc, "undeclared net '" + e.name + "'");
    if (ast.clock && *ast.clock == e.name)
      fail(e.loc, "clock '" + e.name + "' cannot be used as data");
  }
  for (const auto& a : e.args) check_expr_refs(ast, a);
}

void collect_targets(const Ast& ast, const std::vector<Stmt>& body, std::set<std::string>& out) {
  for (const auto& s : body) {
    switch (s.kind) {
      case StmtKind::NonBlocking: {
        const NetDecl* d = ast.find(s.target);
        if (!d) fail(s.loc, "undeclared net '" + s.target + "'");
        if (!d->is_reg) fail(s.loc, "nonblocking target '" + s.target + "' is not a reg");
        out.insert(s.target);
        check_expr_refs(ast, s.value);
        break;
      }
      case StmtKind::Block:
        collect_targets(ast, s.then_body, out);
        break;
      case StmtKind::If:
        check_expr_refs(ast, s.value);
        collect_targets(ast, s.then_body, out);
        collect_targets(ast, s.else_body, out);
        break;
      case StmtKind::Case:
        check_expr_refs(ast, s.value);
        for (const auto& item : s.items) {
          for (const auto& l : item.labels) check_expr_refs(ast, l);
          collect_targets(ast, item.body, out);
        }
        break;
    }
  }
}

void validate(Ast& ast) {
  for (const auto& n : ast.nets) {
    if (n.width() > 64)
      throw Error(ErrorCode::WidthMismatch, "net '" + n.name + "' is wider than 64 bits");
  }
  for (const auto& b : ast.blocks) {
    const NetDecl* clk = ast.find(b.clock);
    if (!clk) fail(b.loc, "undeclared clock '" + b.clock + "'");
    if (clk->kind != NetKind::Input || clk->width() != 1)
      fail(b.loc, "clock '" + b.clock + "' must be a 1-bit input");
    if (ast.clock && *ast.clock != b.clock)
      fail(b.loc, "multiple clocks are not supported ('" + *ast.clock + "' and '" + b.clock + "')");
    ast.clock = b.clock;
  }
  std::set<std::string> assigned;
  for (const auto& a : ast.assigns) {
    const NetDecl* d = ast.find(a.target);
    if (!d) fail(a.loc, "undeclared net '" + a.target + "'");
    if (d->kind == NetKind::Input) fail(a.loc, "cannot assign to input '" + a.target + "'");
    if (d->is_reg) fail(a.loc, "continuous assignment to reg '" + a.target + "'");
    if (!assigned.insert(a.target).second)
      throw Error(ErrorCode::MultipleDrivers, "net '" + a.target + "' has multiple drivers");
    check_expr_refs(ast, a.value);
  }
  std::set<std::string> reg_owner;
  for (const auto& b : ast.blocks) {
    std::set<std::string> targets;
    collect_targets(ast, b.body, targets);
    for (const auto& t : targets) {
      if (!reg_owner.insert(t).second)
        throw Error(ErrorCode::MultipleDrivers,
                    "reg '" + t + "' is assigned in more than one always block");
    }
  }
}

int count_ops(const Expr& e) {
  int n = (e.kind == ExprKind::Unary || e.kind == ExprKind::Binary || e.kind == ExprKind::Ternary) ? 1 : 0;
  for (const auto& a : e.args) n += count_ops(a);
  return n;
}

int count_ops(const std::vector<Stmt>& body) {
  int n = 0;
  for (const auto& s : body) {
    switch (s.kind) {
      case StmtKind::NonBlocking: n += count_ops(s.value); break;
      case StmtKind::Block: n += count_ops(s.then_body); break;
      case StmtKind::If:
        n += 1 + count_ops(s.value) + count_ops(s.then_body) + count_ops(s.else_body);
        break;
      case StmtKind::Case:
        n += 1 + count_ops(s.value);
        for (const auto& item : s.items) {
          for (const auto& l : item.labels) n += count_ops(l);
          n += count_ops(item.body);
        }
        break;
    }
  }
  return n;
}

}  // namespace

const NetDecl* Ast::find(std::string_view name) const {
  for (const auto& n : nets)
    if (n.name == name) return &n;
  return nullptr;
}

std::vector<const NetDecl*> Ast::inputs() const {
  std::vector<const NetDecl*> out;
  for (const auto& n : nets)
    if (n.kind == NetKind::Input && !(clock && *clock == n.name)) out.push_back(&n);
  return out;
}

std::vector<const NetDecl*> Ast::outputs() const {
  std::vector<const NetDecl*> out;
  for (const auto& n : nets)
    if (n.kind == NetKind::Output) out.push_back(&n);
  return out;
}

std::vector<const NetDecl*> Ast::regs() const {
  std::vector<const NetDecl*> out;
  for (const auto& n : nets)
    if (n.is_reg) out.push_back(&n);
  return out;
}

Ast parse(std::string_view source) {
  Ast ast = Parser(lex(source)).run();
  validate(ast);
  return ast;
}

int self_width(const Ast& ast, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Identifier: return ast.find(e.name)->width();
    case ExprKind::Literal:
      return e.width > 0 ? e.width : std::max(1, static_cast<int>(std::bit_width(e.value)));
    case ExprKind::Select: return e.msb - e.lsb + 1;
    case ExprKind::Concat: {
      int w = 0;
      for (const auto& a : e.args) w += self_width(ast, a);
      return w;
    }
    case ExprKind::Unary: return self_width(ast, e.args[0]);
    case ExprKind::Binary:
      if (e.op == Op::Eq || e.op == Op::Lt) return 1;
      return std::max(self_width(ast, e.args[0]), self_width(ast, e.args[1]));
    case ExprKind::Ternary:
      return std::max(self_width(ast, e.args[1]), self_width(ast, e.args[2]));
  }
  return 1;
}

int operator_count(const Ast& ast) {
  int n = 0;
  for (const auto& a : ast.assigns) n += count_ops(a.value);
  for (const auto& b : ast.blocks) n += count_ops(b.body);
  return n;
}

std::vector<std::string> canonical_tokens(std::string_view source) {
  parse(source);
  std::vector<std::string> out;
  std::unordered_map<std::string, int> renames;
  for (const auto& t : lex(source)) {
    switch (t.kind) {
      case TokenKind::End: break;
      case TokenKind::Identifier: {
        auto [it, inserted] = renames.try_emplace(t.text, static_cast<int>(renames.size()));
        out.push_back("id" + std::to_string(it->second));
        break;
      }
      case TokenKind::Number:
        out.push_back(t.width > 0 ? std::to_string(t.width) + "'d" + std::to_string(t.value)
                                  : std::to_string(t.value));
        break;
      default: out.push_back(t.text); break;
    }
  }
  return out;
}

SourceModule make_source_module(std::string id, std::string source_text) {
  SourceModule m;
  m.id = std::move(id);
  m.token_stream = canonical_tokens(source_text);
  m.source_text = std::move(source_text);
  return m;
}

std::uint64_t token_hash(const std::vector<std::string>& tokens) {
  Fnv1a h;
  for (const auto& t : tokens) {
    h.add(t);
    h.add(std::string_view("\x1f", 1));
  }
  return h.value();
}

}  // namespace slackcast::verilog
