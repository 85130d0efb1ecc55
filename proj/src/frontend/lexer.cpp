#include <array>
#include <cctype>
#include <string>

#include "slackcast/error.hpp"
#include "slackcast/verilog.hpp"

namespace slackcast::verilog {
namespace {

constexpr std::array<std::string_view, 38> kKeywords = {
    "module",   "endmodule", "input",     "output",   "inout",    "wire",
    "reg",      "assign",    "always",    "posedge",  "negedge",  "or",
    "begin",    "end",       "if",        "else",     "case",     "casez",
    "casex",    "endcase",   "default",   "initial",  "task",     "endtask",
    "function", "endfunction", "integer", "parameter", "localparam", "generate",
    "endgenerate", "genvar", "for",       "while",    "repeat",   "forever",
    "logic",    "signed"};

// Longest first so greedy matching works.
constexpr std::array<std::string_view, 15> kMultiSymbols = {
    "===", "!==", "<<<", ">>>", "==", "!=", "<=", ">=",
    "&&",  "||",  "<<",  ">>",  "~&", "~|", "~^"};

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

[[noreturn]] void fail(SourceLoc loc, const std::string& message) {
  throw Error(ErrorCode::SyntaxError,
              std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message);
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.kind = TokenKind::End;
    end.loc = loc_;
    out.push_back(end);
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++loc_.line;
      loc_.column = 1;
    } else {
      ++loc_.column;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        SourceLoc start = loc_;
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) fail(start, "unterminated block comment");
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  Token next() {
    Token tok;
    tok.loc = loc_;
    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '$')
        advance();
      tok.text = std::string(src_.substr(start, pos_ - start));
      tok.kind = is_keyword(tok.text) ? TokenKind::Keyword : TokenKind::Identifier;
      return tok;
    }
    if (c == '$') {
      std::size_t start = pos_;
      advance();
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance();
      tok.text = std::string(src_.substr(start, pos_ - start));
      tok.kind = TokenKind::SystemName;
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') return number();
    for (auto sym : kMultiSymbols) {
      if (src_.substr(pos_, sym.size()) == sym) {
        for (std::size_t i = 0; i < sym.size(); ++i) advance();
        tok.kind = TokenKind::Symbol;
        tok.text = std::string(sym);
        return tok;
      }
    }
    static constexpr std::string_view kSingle = "()[]{};,:?@~&|^+-=<>!*/%#.";
    if (kSingle.find(c) != std::string_view::npos) {
      advance();
      tok.kind = TokenKind::Symbol;
      tok.text = std::string(1, c);
      return tok;
    }
    fail(loc_, std::string("unexpected character '") + c + "'");
  }

  std::string digits(bool allow_alpha) {
    std::string out;
    while (pos_ < src_.size()) {
      char d = peek();
      if (d == '_') {
        advance();
        continue;
      }
      bool ok = std::isdigit(static_cast<unsigned char>(d)) ||
                (allow_alpha && std::isalpha(static_cast<unsigned char>(d)));
      if (!ok) break;
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(d))));
      advance();
    }
    return out;
  }

  Token number() {
    Token tok;
    tok.kind = TokenKind::Number;
    tok.loc = loc_;
    std::size_t start = pos_;
    std::string size_text;
    if (peek() != '\'') size_text = digits(false);
    if (peek() != '\'') {
      tok.value = parse_digits(size_text, 10, tok.loc);
      tok.width = 0;
      tok.text = std::string(src_.substr(start, pos_ - start));
      return tok;
    }
    advance();  // '
    char base_char = static_cast<char>(std::tolower(static_cast<unsigned char>(peek())));
    if (base_char == 's') fail(tok.loc, "signed literals are not supported");
    int base = 0;
    switch (base_char) {
      case 'b': base = 2; break;
      case 'o': base = 8; break;
      case 'd': base = 10; break;
      case 'h': base = 16; break;
      default: fail(tok.loc, "malformed based literal");
    }
    advance();
    std::string body = digits(true);
    if (body.empty()) fail(tok.loc, "malformed based literal");
    for (char d : body)
      if (d == 'x' || d == 'z' || d == '?') fail(tok.loc, "X/Z literal values are not supported");
    tok.value = parse_digits(body, base, tok.loc);
    if (size_text.empty()) {
      tok.width = 0;
    } else {
      std::uint64_t w = parse_digits(size_text, 10, tok.loc);
      if (w == 0 || w > 64) fail(tok.loc, "literal width must be in 1..64");
      tok.width = static_cast<int>(w);
      if (tok.width < 64) tok.value &= (std::uint64_t{1} << tok.width) - 1;
    }
    tok.text = std::string(src_.substr(start, pos_ - start));
    return tok;
  }

  static std::uint64_t parse_digits(const std::string& text, int base, SourceLoc loc) {
    if (text.empty()) fail(loc, "empty numeric literal");
    unsigned __int128 acc = 0;
    for (char d : text) {
      int v;
      if (d >= '0' && d <= '9') v = d - '0';
      else if (d >= 'a' && d <= 'f') v = 10 + (d - 'a');
      else fail(loc, std::string("invalid digit '") + d + "'");
      if (v >= base) fail(loc, std::string("invalid digit '") + d + "' for base");
      acc = acc * static_cast<unsigned>(base) + static_cast<unsigned>(v);
      if (acc > UINT64_MAX) fail(loc, "literal exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  SourceLoc loc_;
};

}  // namespace

std::vector<Token> lex(std::string_view source) { return Lexer(source).run(); }

}  // namespace slackcast::verilog
