#include "gtlproco/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <vector>

namespace gtlproco {

namespace {

enum class Tok {
  Ident,
  Number,
  Amp,
  Bar,
  Bang,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Dot,
  Caret,
  Le,
  Ge,
  Lt,
  Gt,
  Eq,
  End
};

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string &src) : src_(src) { advance(); }

  const Token &peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
    cur_.line = line_;
    cur_.column = col_;
    if (pos_ >= src_.size()) {
      cur_.kind = Tok::End;
      cur_.text = "<end>";
      return;
    }
    char c = src_[pos_];
    auto one = [&](Tok k, const char *s) {
      cur_.kind = k;
      cur_.text = s;
      ++pos_;
      ++col_;
    };
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             std::isalpha(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++col_;
      }
      cur_.kind = Tok::Ident;
      cur_.text = src_.substr(start, pos_ - start);
      return;
    }
    bool starts_number = std::isdigit(static_cast<unsigned char>(c)) ||
                         (c == '.' && pos_ + 1 < src_.size() &&
                          std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])));
    if ((c == '-' || c == '+') && pos_ + 1 < src_.size()) {
      char n = src_[pos_ + 1];
      if (std::isdigit(static_cast<unsigned char>(n)) || n == '.')
        starts_number = true;
    }
    if (starts_number) {
      std::size_t start = pos_;
      if (c == '-' || c == '+') ++pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '.'))
        ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t mark = pos_;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+'))
          ++pos_;
        if (pos_ < src_.size() &&
            std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        } else {
          pos_ = mark;
        }
      }
      cur_.kind = Tok::Number;
      cur_.text = src_.substr(start, pos_ - start);
      cur_.value = std::strtod(cur_.text.c_str(), nullptr);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    switch (c) {
    case '&': one(Tok::Amp, "&"); return;
    case '|': one(Tok::Bar, "|"); return;
    case '!': one(Tok::Bang, "!"); return;
    case '(': one(Tok::LParen, "("); return;
    case ')': one(Tok::RParen, ")"); return;
    case '[': one(Tok::LBracket, "["); return;
    case ']': one(Tok::RBracket, "]"); return;
    case ',': one(Tok::Comma, ","); return;
    case '.': one(Tok::Dot, "."); return;
    case '^': one(Tok::Caret, "^"); return;
    case '=': one(Tok::Eq, "="); return;
    case '<':
      if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
        cur_.kind = Tok::Le;
        cur_.text = "<=";
        pos_ += 2;
        col_ += 2;
      } else {
        one(Tok::Lt, "<");
      }
      return;
    case '>':
      if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
        cur_.kind = Tok::Ge;
        cur_.text = ">=";
        pos_ += 2;
        col_ += 2;
      } else {
        one(Tok::Gt, ">");
      }
      return;
    default:
      throw syntax_error(std::string("unexpected character '") + c + "'",
                         line_, col_);
    }
  }

  const std::string &src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

class Parser {
public:
  explicit Parser(const std::string &src) : lex_(src) {}

  std::unique_ptr<Formula> parse() {
    auto f = parse_or();
    expect(Tok::End, "end of input");
    return f;
  }

private:
  [[noreturn]] void fail(const std::string &msg) {
    throw syntax_error(msg + " (got '" + lex_.peek().text + "')",
                       lex_.peek().line, lex_.peek().column);
  }

  Token expect(Tok k, const std::string &what) {
    if (lex_.peek().kind != k) fail("expected " + what);
    return lex_.take();
  }

  std::unique_ptr<Formula> parse_or() {
    auto f = parse_and();
    while (lex_.peek().kind == Tok::Bar) {
      lex_.take();
      f = Formula::make_or(std::move(f), parse_and());
    }
    return f;
  }

  std::unique_ptr<Formula> parse_and() {
    auto f = parse_until();
    while (lex_.peek().kind == Tok::Amp) {
      lex_.take();
      f = Formula::make_and(std::move(f), parse_until());
    }
    return f;
  }

  std::unique_ptr<Formula> parse_until() {
    auto f = parse_unary();
    if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "U") {
      lex_.take();
      f = Formula::make_until(std::move(f), parse_until());
    }
    return f;
  }

  std::unique_ptr<Formula> parse_unary() {
    const Token &t = lex_.peek();
    if (t.kind == Tok::Bang) {
      lex_.take();
      return Formula::make_not(parse_unary());
    }
    if (t.kind == Tok::LParen) {
      lex_.take();
      auto f = parse_or();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind == Tok::LBracket) return parse_row_atom();
    if (t.kind == Tok::Ident) {
      const std::string &id = t.text;
      if (id == "X") {
        lex_.take();
        return Formula::make_next(parse_unary());
      }
      if (id == "F") {
        lex_.take();
        return Formula::make_eventually(parse_unary());
      }
      if (id == "G") {
        lex_.take();
        return Formula::make_always(parse_unary());
      }
      if (id == "FG") {
        lex_.take();
        return Formula::make_eventually_always(parse_unary());
      }
      if (id == "GF") {
        lex_.take();
        return Formula::make_always_eventually(parse_unary());
      }
      if (id == "E") return parse_exists();
      if (id == "true") {
        lex_.take();
        return Formula::make_true();
      }
      if (id == "false") {
        lex_.take();
        return Formula::make_false();
      }
      if (id == "y") return parse_vec_atom();
      fail("unknown operator '" + id + "'");
    }
    fail("expected a formula");
  }

  std::unique_ptr<Formula> parse_exists() {
    Token e = lex_.take(); /* E */
    expect(Tok::Caret, "'^' after E");
    Token n = expect(Tok::Number, "neighbor count");
    double iv;
    if (n.value < 1 || std::modf(n.value, &iv) != 0.0)
      throw syntax_error("neighbor count must be a positive integer", n.line,
                         n.column);
    int depth = 0;
    while (lex_.peek().kind == Tok::Ident &&
           lex_.peek().text.find_first_not_of('o') == std::string::npos) {
      depth += static_cast<int>(lex_.take().text.size());
    }
    if (depth == 0)
      throw syntax_error("expected at least one 'o' after E^N", e.line,
                         e.column);
    return Formula::make_exists(static_cast<int>(n.value), depth,
                                parse_unary());
  }

  Cmp parse_cmp() {
    switch (lex_.peek().kind) {
    case Tok::Le: lex_.take(); return Cmp::LE;
    case Tok::Ge: lex_.take(); return Cmp::GE;
    case Tok::Eq: lex_.take(); return Cmp::EQ;
    case Tok::Lt: lex_.take(); return Cmp::LT;
    case Tok::Gt: lex_.take(); return Cmp::GT;
    default: fail("expected a comparison operator");
    }
  }

  Eigen::VectorXd parse_vector() {
    expect(Tok::LBracket, "'['");
    std::vector<double> vals;
    vals.push_back(expect(Tok::Number, "number").value);
    while (lex_.peek().kind == Tok::Comma) {
      lex_.take();
      vals.push_back(expect(Tok::Number, "number").value);
    }
    expect(Tok::RBracket, "']'");
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v(i) = vals[i];
    return v;
  }

  std::unique_ptr<Formula> parse_vec_atom() {
    lex_.take(); /* y */
    AtomSpec a;
    a.componentwise = true;
    a.cmp = parse_cmp();
    a.rhs_vec = parse_vector();
    return Formula::make_atom(std::move(a));
  }

  std::unique_ptr<Formula> parse_row_atom() {
    AtomSpec a;
    a.componentwise = false;
    a.row = parse_vector().transpose();
    expect(Tok::Dot, "'.' after row vector");
    Token y = expect(Tok::Ident, "'y'");
    if (y.text != "y")
      throw syntax_error("expected 'y' after '.'", y.line, y.column);
    a.cmp = parse_cmp();
    a.rhs_scalar = expect(Tok::Number, "bound").value;
    return Formula::make_atom(std::move(a));
  }

  Lexer lex_;
};

} // namespace

std::unique_ptr<Formula> parse_formula(const std::string &text,
                                       int expected_dim) {
  Parser p(text);
  auto f = p.parse();
  int d = f->atom_dim(); /* also rejects mixed dimensions */
  if (expected_dim >= 0 && d >= 0 && d != expected_dim)
    throw syntax_error("atom dimension " + std::to_string(d) +
                           " does not match label dimension " +
                           std::to_string(expected_dim),
                       1, 1);
  return f;
}

} // namespace gtlproco
