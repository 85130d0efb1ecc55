#pragma once

// Verilog subset front end: lexer, parser, and the typed AST.
//
// Accepted subset: one module with ANSI port list; `wire`/`reg`
// declarations of width <= 64; continuous `assign`; `always @(posedge clk)`
// blocks holding nonblocking assignments, if/else and case. Expression
// operators are ~ & | ^ + - == < ?: plus bit/part selects and
// concatenation (pure wiring).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slackcast::verilog {

struct SourceLoc {
  int line = 1;
  int column = 1;
};

enum class TokenKind { Identifier, Keyword, Number, Symbol, SystemName, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  SourceLoc loc;
  // Number tokens only.
  std::uint64_t value = 0;
  int width = 0;  // 0 for unsized literals
};

/// Splits source text into tokens, dropping whitespace and comments.
/// Throws Error(SyntaxError) on malformed literals or stray characters.
std::vector<Token> lex(std::string_view source);

enum class ExprKind { Identifier, Literal, Select, Concat, Unary, Binary, Ternary };

enum class Op { Not, And, Or, Xor, Add, Sub, Eq, Lt };

struct Expr {
  ExprKind kind = ExprKind::Literal;
  Op op = Op::Not;
  std::string name;         // Identifier, Select
  std::uint64_t value = 0;  // Literal
  int width = 0;            // Literal (0 = unsized)
  int msb = 0;              // Select
  int lsb = 0;              // Select
  std::vector<Expr> args;   // operands, in source order
  SourceLoc loc;
};

enum class NetKind { Input, Output, Wire, Reg };

struct NetDecl {
  std::string name;
  NetKind kind = NetKind::Wire;
  bool is_port = false;
  bool is_reg = false;  // `output reg` or `reg`
  int msb = 0;
  int lsb = 0;
  SourceLoc loc;

  int width() const { return msb - lsb + 1; }
};

struct ContinuousAssign {
  std::string target;
  Expr value;
  SourceLoc loc;
};

enum class StmtKind { Block, NonBlocking, If, Case };

struct Stmt;

struct CaseItem {
  std::vector<Expr> labels;  // empty for `default`
  std::vector<Stmt> body;
};

struct Stmt {
  StmtKind kind = StmtKind::Block;
  std::string target;               // NonBlocking
  Expr value;                       // NonBlocking rhs, If condition, Case selector
  std::vector<Stmt> then_body;      // Block body, If then-branch
  std::vector<Stmt> else_body;      // If else-branch
  std::vector<CaseItem> items;      // Case
  SourceLoc loc;
};

struct ClockedBlock {
  std::string clock;
  std::vector<Stmt> body;
  SourceLoc loc;
};

struct Ast {
  std::string module_name;
  std::vector<NetDecl> nets;  // ports first, in port-list order
  std::vector<ContinuousAssign> assigns;
  std::vector<ClockedBlock> blocks;
  std::optional<std::string> clock;

  const NetDecl* find(std::string_view name) const;
  std::vector<const NetDecl*> inputs() const;   // excludes the clock
  std::vector<const NetDecl*> outputs() const;
  std::vector<const NetDecl*> regs() const;
};

/// Parses and validates one module. Validation enforces the AST
/// invariants: every referenced net is declared, at most one clock, regs
/// are only written by clocked blocks, wires/outputs only by `assign`, and
/// each net has a single driver (MultipleDrivers otherwise).
Ast parse(std::string_view source);

/// Self-determined width of an expression under the subset's rules.
/// Unsized literals take their minimal width.
int self_width(const Ast& ast, const Expr& expr);

/// Number of operator nodes in the module: unary/binary/ternary
/// expressions plus if and case statements.
int operator_count(const Ast& ast);

/// Canonical token stream: comments and whitespace removed, identifiers
/// renamed `id0, id1, ...` by first occurrence, literals rendered in
/// decimal (`<width>'d<value>` when sized). Parses first, so out-of-subset
/// sources raise SyntaxError.
std::vector<std::string> canonical_tokens(std::string_view source);

struct SourceModule {
  std::string id;
  std::string source_text;
  std::vector<std::string> token_stream;
};

SourceModule make_source_module(std::string id, std::string source_text);

/// FNV-1a over the canonical token stream.
std::uint64_t token_hash(const std::vector<std::string>& tokens);

}  // namespace slackcast::verilog
