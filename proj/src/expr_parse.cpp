#include <cctype>
#include <cmath>
#include <sstream>

#include "horizon/expr.hpp"
#include "horizon/sets.hpp"

namespace horizon {
namespace {

NodePtr mk(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

NodePtr constant(double v) {
  ExprNode n;
  n.kind = NodeKind::kConstant;
  n.value = v;
  return mk(std::move(n));
}

NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
  ExprNode n;
  n.kind = k;
  n.kids = {std::move(a), std::move(b)};
  return mk(std::move(n));
}

struct Lexer {
  std::string s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool consume(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  bool consume_str(const std::string& kw) {
    skip_ws();
    if (s.compare(pos, kw.size(), kw) == 0) {
      pos += kw.size();
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!consume(c)) fail(Errc::syntax_error, std::string("expected '") + c + "' " + what);
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && (std::isalpha(static_cast<unsigned char>(s[pos])) ||
                              std::isdigit(static_cast<unsigned char>(s[pos]))))
      ++pos;
    return s.substr(start, pos - start);
  }
};

class Parser {
 public:
  Parser(std::string text, int dim) : lex_{std::move(text)}, dim_(dim) {
    if (dim <= 0) fail(Errc::semantic_error, "dimension must be positive");
  }

  NodePtr parse() {
    NodePtr e = expr();
    if (!lex_.eof()) fail(Errc::syntax_error, "trailing input at '" + rest() + "'");
    return e;
  }

  NodePtr expr() {
    NodePtr e;
    if (lex_.consume('-'))
      e = binary(NodeKind::kSub, constant(0.0), term());
    else
      e = term();
    for (;;) {
      if (lex_.consume('+'))
        e = binary(NodeKind::kAdd, e, term());
      else if (lex_.consume('-'))
        e = binary(NodeKind::kSub, e, term());
      else
        return e;
    }
  }

  Guard guard() {
    Guard g;
    for (;;) {
      g.push_back(relation());
      if (!lex_.consume('&')) return g;
    }
  }

 private:
  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (lex_.consume('*'))
        e = binary(NodeKind::kMul, e, factor());
      else if (lex_.consume('/'))
        e = binary(NodeKind::kDiv, e, factor());
      else
        return e;
    }
  }

  NodePtr factor() {
    NodePtr e = atom();
    if (lex_.consume('^')) {
      lex_.skip_ws();
      std::size_t start = lex_.pos;
      while (lex_.pos < lex_.s.size() && std::isdigit(static_cast<unsigned char>(lex_.s[lex_.pos])))
        ++lex_.pos;
      if (start == lex_.pos) fail(Errc::syntax_error, "expected integer exponent after '^'");
      ExprNode n;
      n.kind = NodeKind::kPow;
      n.power = std::stoi(lex_.s.substr(start, lex_.pos - start));
      n.kids = {e};
      return mk(std::move(n));
    }
    return e;
  }

  NodePtr atom() {
    lex_.skip_ws();
    const char c = lex_.peek();
    if (c == '(') {
      lex_.consume('(');
      NodePtr e = expr();
      lex_.expect(')', "closing group");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == 'x' && lex_.pos + 1 < lex_.s.size() &&
        std::isdigit(static_cast<unsigned char>(lex_.s[lex_.pos + 1])))
      return variable();
    const std::string id = lex_.ident();
    if (id == "exp") return unary_fn(NodeKind::kExp);
    if (id == "log") return unary_fn(NodeKind::kLog);
    if (id == "abs") return unary_fn(NodeKind::kAbs);
    if (id == "sqrt") return unary_fn(NodeKind::kSqrt);
    if (id == "norm") return norm_fn();
    if (id == "max") return binary_fn(NodeKind::kMax);
    if (id == "min") return binary_fn(NodeKind::kMin);
    if (id == "piecewise") return piecewise_fn();
    if (id == "indicator") return indicator_fn();
    fail(Errc::syntax_error, "unexpected input at '" + rest() + "'");
  }

  NodePtr number() {
    lex_.skip_ws();
    std::size_t start = lex_.pos;
    auto digits = [&] {
      while (lex_.pos < lex_.s.size() && std::isdigit(static_cast<unsigned char>(lex_.s[lex_.pos])))
        ++lex_.pos;
    };
    digits();
    if (lex_.pos < lex_.s.size() && lex_.s[lex_.pos] == '.') {
      ++lex_.pos;
      digits();
    }
    if (lex_.pos < lex_.s.size() && (lex_.s[lex_.pos] == 'e' || lex_.s[lex_.pos] == 'E')) {
      ++lex_.pos;
      if (lex_.pos < lex_.s.size() && (lex_.s[lex_.pos] == '+' || lex_.s[lex_.pos] == '-'))
        ++lex_.pos;
      digits();
    }
    const std::string tok = lex_.s.substr(start, lex_.pos - start);
    try {
      return constant(std::stod(tok));
    } catch (const std::exception&) {
      fail(Errc::syntax_error, "bad number '" + tok + "'");
    }
  }

  NodePtr variable() {
    lex_.consume('x');
    std::size_t start = lex_.pos;
    while (lex_.pos < lex_.s.size() && std::isdigit(static_cast<unsigned char>(lex_.s[lex_.pos])))
      ++lex_.pos;
    const int idx = std::stoi(lex_.s.substr(start, lex_.pos - start));
    if (idx < 1 || idx > dim_)
      fail(Errc::semantic_error,
           "variable x" + std::to_string(idx) + " out of range for dim " + std::to_string(dim_));
    ExprNode n;
    n.kind = NodeKind::kVar;
    n.var = idx - 1;
    return mk(std::move(n));
  }

  NodePtr unary_fn(NodeKind k) {
    lex_.expect('(', "after function name");
    NodePtr a = expr();
    lex_.expect(')', "closing function call");
    ExprNode n;
    n.kind = k;
    n.kids = {a};
    return mk(std::move(n));
  }

  NodePtr binary_fn(NodeKind k) {
    lex_.expect('(', "after function name");
    NodePtr a = expr();
    lex_.expect(',', "between arguments");
    NodePtr b = expr();
    lex_.expect(')', "closing function call");
    ExprNode n;
    n.kind = k;
    n.kids = {a, b};
    return mk(std::move(n));
  }

  NodePtr norm_fn() {
    lex_.expect('(', "after norm");
    ExprNode n;
    n.kind = NodeKind::kNorm;
    n.kids.push_back(expr());
    while (lex_.consume(',')) n.kids.push_back(expr());
    lex_.expect(')', "closing norm");
    if (n.kids.size() == 1) {  // norm of a scalar is abs
      n.kind = NodeKind::kAbs;
    }
    return mk(std::move(n));
  }

  NodePtr piecewise_fn() {
    lex_.expect('(', "after piecewise");
    ExprNode n;
    n.kind = NodeKind::kPiecewise;
    for (;;) {
      n.guards.push_back(guard());
      lex_.expect(':', "between guard and piece body");
      n.kids.push_back(expr());
      if (!lex_.consume(';')) break;
    }
    lex_.expect(')', "closing piecewise");
    return mk(std::move(n));
  }

  NodePtr indicator_fn() {
    lex_.expect('(', "after indicator");
    // Grab the balanced-paren substring and hand it to the set parser.
    lex_.skip_ws();
    std::size_t start = lex_.pos;
    int depth = 1;
    while (lex_.pos < lex_.s.size() && depth > 0) {
      const char ch = lex_.s[lex_.pos];
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      ++lex_.pos;
    }
    if (depth != 0) fail(Errc::syntax_error, "unterminated indicator(...)");
    const std::string inner = lex_.s.substr(start, lex_.pos - 1 - start);
    ExprNode n;
    n.kind = NodeKind::kIndicator;
    n.set = std::make_shared<const SetSpec>(parse_set(inner, dim_));
    return mk(std::move(n));
  }

  AffineIneq relation() {
    NodePtr lhs = expr();
    bool le = false;
    if (lex_.consume_str("<="))
      le = true;
    else if (lex_.consume_str(">="))
      le = false;
    else
      fail(Errc::syntax_error, "expected '<=' or '>=' in guard");
    NodePtr rhs = expr();
    // Normalize to a.x <= b and verify affinity numerically.
    NodePtr diff = le ? binary(NodeKind::kSub, lhs, rhs) : binary(NodeKind::kSub, rhs, lhs);
    FunctionSpec tmp;
    tmp.dim = dim_;
    tmp.root = diff;
    auto aff = as_affine(tmp);
    if (!aff) fail(Errc::semantic_error, "guard is not an affine inequality");
    return AffineIneq{aff->first, -aff->second};
  }

  std::string rest() {
    lex_.skip_ws();
    return lex_.s.substr(lex_.pos, 24);
  }

  Lexer lex_;
  int dim_;
};

}  // namespace

FunctionSpec parse_function(const std::string& text, int dim) {
  Parser p(text, dim);
  return make_from_root(p.parse(), dim, /*check_domain_unbounded=*/true);
}

Guard parse_guard(const std::string& text, int dim) {
  Parser p(text, dim);
  return p.guard();
}

NodePtr parse_expression_raw(const std::string& text, int dim) {
  Parser p(text, dim);
  return p.parse();
}

}  // namespace horizon
