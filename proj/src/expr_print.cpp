#include <sstream>

#include "horizon/expr.hpp"
#include "horizon/sets.hpp"

namespace horizon {
namespace {

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::kAdd:
    case NodeKind::kSub:
      return 1;
    case NodeKind::kMul:
    case NodeKind::kDiv:
      return 2;
    case NodeKind::kPow:
      return 3;
    default:
      return 4;
  }
}

void print_number(std::ostream& os, double v) {
  std::ostringstream tmp;
  tmp.precision(17);
  tmp << v;
  std::string s = tmp.str();
  if (v < 0) {
    os << "(0-" << s.substr(1) << ")";
  } else {
    os << s;
  }
}

void print_node(std::ostream& os, const ExprNode& n, int parent_prec);

void print_guard(std::ostream& os, const Guard& g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) os << " & ";
    bool first = true;
    for (std::size_t j = 0; j < g[i].a.size(); ++j) {
      if (g[i].a[j] == 0.0) continue;
      if (!first) os << "+";
      print_number(os, g[i].a[j]);
      os << "*x" << (j + 1);
      first = false;
    }
    if (first) os << "0";
    os << " <= ";
    print_number(os, g[i].b);
  }
}

void print_node(std::ostream& os, const ExprNode& n, int parent_prec) {
  const int prec = precedence(n.kind);
  const bool paren = prec < parent_prec;
  if (paren) os << "(";
  switch (n.kind) {
    case NodeKind::kConstant:
      print_number(os, n.value);
      break;
    case NodeKind::kVar:
      os << "x" << (n.var + 1);
      break;
    case NodeKind::kAdd:
      print_node(os, *n.kids[0], prec);
      os << "+";
      print_node(os, *n.kids[1], prec + 1);
      break;
    case NodeKind::kSub:
      print_node(os, *n.kids[0], prec);
      os << "-";
      print_node(os, *n.kids[1], prec + 1);
      break;
    case NodeKind::kMul:
      print_node(os, *n.kids[0], prec);
      os << "*";
      print_node(os, *n.kids[1], prec + 1);
      break;
    case NodeKind::kDiv:
      print_node(os, *n.kids[0], prec);
      os << "/";
      print_node(os, *n.kids[1], prec + 1);
      break;
    case NodeKind::kPow:
      print_node(os, *n.kids[0], prec + 1);
      os << "^" << n.power;
      break;
    case NodeKind::kExp:
      os << "exp(";
      print_node(os, *n.kids[0], 0);
      os << ")";
      break;
    case NodeKind::kLog:
      os << "log(";
      print_node(os, *n.kids[0], 0);
      os << ")";
      break;
    case NodeKind::kAbs:
      os << "abs(";
      print_node(os, *n.kids[0], 0);
      os << ")";
      break;
    case NodeKind::kSqrt:
      os << "sqrt(";
      print_node(os, *n.kids[0], 0);
      os << ")";
      break;
    case NodeKind::kNorm:
      os << "norm(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << ",";
        print_node(os, *n.kids[i], 0);
      }
      os << ")";
      break;
    case NodeKind::kMax:
    case NodeKind::kMin:
      os << (n.kind == NodeKind::kMax ? "max(" : "min(");
      print_node(os, *n.kids[0], 0);
      os << ",";
      print_node(os, *n.kids[1], 0);
      os << ")";
      break;
    case NodeKind::kPiecewise:
      os << "piecewise(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << "; ";
        print_guard(os, n.guards[i]);
        os << " : ";
        print_node(os, *n.kids[i], 0);
      }
      os << ")";
      break;
    case NodeKind::kIndicator:
      os << "indicator(" << to_string(*n.set) << ")";
      break;
    case NodeKind::kCompose:
      os << "compose[" << to_string(*n.outer) << "](";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << ",";
        print_node(os, *n.kids[i], 0);
      }
      os << ")";
      break;
  }
  if (paren) os << ")";
}

}  // namespace

std::string to_string(const FunctionSpec& f) {
  std::ostringstream os;
  print_node(os, *f.root, 0);
  return os.str();
}

}  // namespace horizon
