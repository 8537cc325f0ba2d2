#include "crfeff/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace crfeff {

ExprPtr Expr::make_const(cplx v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Constant;
  e->constant = v;
  return e;
}
ExprPtr Expr::make_ref(std::string n) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ref;
  e->name = std::move(n);
  return e;
}
ExprPtr Expr::make_diff(std::string n, bool conj) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Differential;
  e->name = std::move(n);
  e->conj_diff = conj;
  return e;
}
ExprPtr Expr::make_unary(UnaryOp op, ExprPtr x) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Unary;
  e->uop = op;
  e->a = std::move(x);
  return e;
}
ExprPtr Expr::make_binary(BinaryOp op, ExprPtr x, ExprPtr y) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Binary;
  e->bop = op;
  e->a = std::move(x);
  e->b = std::move(y);
  return e;
}

namespace {

struct Token {
  enum Kind { Number, Ident, Op, LParen, RParen, End } kind;
  std::string text;
  double num = 0.0;
  size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }
  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    tok_.pos = i_;
    if (i_ >= s_.size()) {
      tok_.kind = Token::End;
      return;
    }
    char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = i_;
      while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) ++i_;
      if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
        size_t save = i_;
        ++i_;
        if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) ++i_;
        if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
          while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        } else {
          i_ = save;
        }
      }
      tok_.kind = Token::Number;
      tok_.text = s_.substr(start, i_ - start);
      try {
        tok_.num = std::stod(tok_.text);
      } catch (...) {
        throw ParseError("malformed number '" + tok_.text + "'", start);
      }
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = i_;
      while (i_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
        ++i_;
      tok_.kind = Token::Ident;
      tok_.text = s_.substr(start, i_ - start);
      return;
    }
    switch (c) {
      case '(': tok_.kind = Token::LParen; break;
      case ')': tok_.kind = Token::RParen; break;
      case '+': case '-': case '*': case '/': case '^':
        tok_.kind = Token::Op;
        tok_.text = std::string(1, c);
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", i_);
    }
    ++i_;
  }

  const std::string& s_;
  size_t i_ = 0;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& s) : lex_(s) {}

  ExprPtr parse() {
    ExprPtr e = sum();
    if (lex_.peek().kind != Token::End)
      throw ParseError("trailing input '" + lex_.peek().text + "'", lex_.peek().pos);
    return e;
  }

 private:
  ExprPtr sum() {
    ExprPtr e = product();
    while (lex_.peek().kind == Token::Op &&
           (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      std::string op = lex_.next().text;
      ExprPtr r = product();
      e = Expr::make_binary(op == "+" ? BinaryOp::Add : BinaryOp::Sub, e, r);
    }
    return e;
  }

  ExprPtr product() {
    ExprPtr e = unary();
    while (lex_.peek().kind == Token::Op &&
           (lex_.peek().text == "*" || lex_.peek().text == "/")) {
      std::string op = lex_.next().text;
      ExprPtr r = unary();
      e = Expr::make_binary(op == "*" ? BinaryOp::Mul : BinaryOp::Div, e, r);
    }
    return e;
  }

  ExprPtr unary() {
    if (lex_.peek().kind == Token::Op && lex_.peek().text == "-") {
      lex_.next();
      return Expr::make_unary(UnaryOp::Neg, unary());
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (lex_.peek().kind == Token::Op && lex_.peek().text == "^") {
      lex_.next();
      // Exponent binds tighter than unary minus outside it; right-assoc.
      ExprPtr expo = unary();
      return Expr::make_binary(BinaryOp::Pow, base, expo);
    }
    return base;
  }

  ExprPtr atom() {
    Token t = lex_.next();
    if (t.kind == Token::Number) return Expr::make_const(cplx(t.num, 0.0));
    if (t.kind == Token::LParen) {
      ExprPtr e = sum();
      expect_rparen(t.pos);
      return e;
    }
    if (t.kind == Token::Ident) {
      if (t.text == "i") return Expr::make_const(cplx(0.0, 1.0));
      if (lex_.peek().kind == Token::LParen) {
        Token lp = lex_.next();
        if (t.text == "d") {
          // d(name) or d(conj(name))
          Token inner = lex_.next();
          if (inner.kind != Token::Ident)
            throw ParseError("expected coordinate name in d(...)", inner.pos);
          bool conj = false;
          std::string name = inner.text;
          if (name == "conj") {
            Token lp2 = lex_.next();
            if (lp2.kind != Token::LParen) throw ParseError("expected '(' after conj", lp2.pos);
            Token nm = lex_.next();
            if (nm.kind != Token::Ident) throw ParseError("expected coordinate name", nm.pos);
            name = nm.text;
            conj = true;
            expect_rparen(nm.pos);
          }
          expect_rparen(inner.pos);
          return Expr::make_diff(name, conj);
        }
        ExprPtr arg = sum();
        expect_rparen(lp.pos);
        if (t.text == "conj") return Expr::make_unary(UnaryOp::Conj, arg);
        if (t.text == "exp") return Expr::make_unary(UnaryOp::Exp, arg);
        if (t.text == "log") return Expr::make_unary(UnaryOp::Log, arg);
        if (t.text == "sqrt") return Expr::make_unary(UnaryOp::Sqrt, arg);
        if (t.text == "sin") return Expr::make_unary(UnaryOp::Sin, arg);
        if (t.text == "cos") return Expr::make_unary(UnaryOp::Cos, arg);
        throw ParseError("unknown function '" + t.text + "'", t.pos);
      }
      return Expr::make_ref(t.text);
    }
    throw ParseError("unexpected token '" + t.text + "'", t.pos);
  }

  void expect_rparen(size_t where) {
    Token t = lex_.next();
    if (t.kind != Token::RParen) throw ParseError("expected ')'", std::max(t.pos, where));
  }

  Lexer lex_;
};

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binary:
      switch (e.bop) {
        case BinaryOp::Add: case BinaryOp::Sub: return 1;
        case BinaryOp::Mul: case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
      return 0;
    case ExprKind::Unary:
      return e.uop == UnaryOp::Neg ? 3 : 5;
    default:
      return 5;
  }
}

std::string fmt_double(double v) {
  char buf[40];
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", v);
  }
  return buf;
}

void print(const Expr& e, std::ostringstream& os, int parent_prec) {
  int prec = precedence(e);
  bool parens = prec < parent_prec;
  if (parens) os << '(';
  switch (e.kind) {
    case ExprKind::Constant: {
      cplx v = e.constant;
      if (v.imag() == 0.0) {
        if (v.real() < 0) {
          os << '(' << fmt_double(v.real()) << ')';
        } else {
          os << fmt_double(v.real());
        }
      } else if (v.real() == 0.0 && v.imag() == 1.0) {
        os << 'i';
      } else if (v.real() == 0.0) {
        os << '(' << fmt_double(v.imag()) << "*i)";
      } else {
        os << '(' << fmt_double(v.real()) << '+' << fmt_double(v.imag()) << "*i)";
      }
      break;
    }
    case ExprKind::Ref:
      os << e.name;
      break;
    case ExprKind::Differential:
      os << "d(";
      if (e.conj_diff) os << "conj(" << e.name << ")";
      else os << e.name;
      os << ')';
      break;
    case ExprKind::Unary: {
      if (e.uop == UnaryOp::Neg) {
        os << '-';
        print(*e.a, os, 3);
      } else {
        const char* fn = nullptr;
        switch (e.uop) {
          case UnaryOp::Conj: fn = "conj"; break;
          case UnaryOp::Exp: fn = "exp"; break;
          case UnaryOp::Log: fn = "log"; break;
          case UnaryOp::Sqrt: fn = "sqrt"; break;
          case UnaryOp::Sin: fn = "sin"; break;
          case UnaryOp::Cos: fn = "cos"; break;
          default: break;
        }
        os << fn << '(';
        print(*e.a, os, 0);
        os << ')';
      }
      break;
    }
    case ExprKind::Binary: {
      const char* op = nullptr;
      int lp = prec, rp = prec + 1;
      switch (e.bop) {
        case BinaryOp::Add: op = "+"; rp = prec; break;
        case BinaryOp::Sub: op = "-"; break;
        case BinaryOp::Mul: op = "*"; rp = prec; break;
        case BinaryOp::Div: op = "/"; break;
        case BinaryOp::Pow: op = "^"; lp = prec + 1; rp = prec; break;
      }
      print(*e.a, os, lp);
      os << op;
      print(*e.b, os, rp);
      break;
    }
  }
  if (parens) os << ')';
}

}  // namespace

ExprPtr parse_expr(const std::string& source) { return Parser(source).parse(); }

std::string to_string(const ExprPtr& e) {
  std::ostringstream os;
  print(*e, os, 0);
  return os.str();
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Constant: return a->constant == b->constant;
    case ExprKind::Ref: return a->name == b->name;
    case ExprKind::Differential:
      return a->name == b->name && a->conj_diff == b->conj_diff;
    case ExprKind::Unary:
      return a->uop == b->uop && expr_equal(a->a, b->a);
    case ExprKind::Binary:
      return a->bop == b->bop && expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
  }
  return false;
}

int Chart::coord_index(const std::string& n) const {
  for (size_t i = 0; i < coords.size(); ++i)
    if (coords[i] == n) return static_cast<int>(i);
  return -1;
}

const ComplexPair* Chart::complex_pair(const std::string& n) const {
  for (const auto& p : complex_pairs)
    if (p.name == n) return &p;
  return nullptr;
}

namespace {

struct EvalCtx {
  const Chart* chart;
  const LetTable* lets;
  const Point* point;
  int order;
  std::map<std::string, DiffValue>* memo;
  std::vector<std::string>* stack;  // cycle detection for named refs
};

DiffValue ev(const ExprPtr& e, EvalCtx& ctx);

Jet require_scalar(const DiffValue& v, const char* what) {
  if (v.is_form()) throw std::runtime_error(std::string("expected a scalar in ") + what);
  return v.scalar;
}

DiffValue scalar_value(Jet j) {
  DiffValue v;
  v.scalar = std::move(j);
  return v;
}

DiffValue ev_ref(const Expr& e, EvalCtx& ctx) {
  int ci = ctx.chart->coord_index(e.name);
  if (ci >= 0) {
    return scalar_value(Jet::variable(ci, (*ctx.point)[ci], ctx.chart->dim(), ctx.order));
  }
  if (const ComplexPair* p = ctx.chart->complex_pair(e.name)) {
    Jet x = Jet::variable(p->re, (*ctx.point)[p->re], ctx.chart->dim(), ctx.order);
    Jet y = Jet::variable(p->im, (*ctx.point)[p->im], ctx.chart->dim(), ctx.order);
    return scalar_value(x + cplx(0, 1) * y);
  }
  auto it = ctx.lets->find(e.name);
  if (it != ctx.lets->end()) {
    std::string key = e.name + "@" + std::to_string(ctx.order);
    if (ctx.memo) {
      auto mit = ctx.memo->find(key);
      if (mit != ctx.memo->end()) return mit->second;
    }
    for (const auto& s : *ctx.stack)
      if (s == e.name) throw std::runtime_error("cyclic named subexpression '" + e.name + "'");
    ctx.stack->push_back(e.name);
    DiffValue v = ev(it->second, ctx);
    ctx.stack->pop_back();
    if (ctx.memo) (*ctx.memo)[key] = v;
    return v;
  }
  throw std::runtime_error("unresolved name '" + e.name + "'");
}

DiffValue ev_diff(const Expr& e, EvalCtx& ctx) {
  DiffValue v;
  v.scalar = Jet(ctx.chart->dim(), ctx.order);
  v.form.assign(ctx.chart->dim(), Jet(ctx.chart->dim(), ctx.order));
  int ci = ctx.chart->coord_index(e.name);
  if (ci >= 0) {
    if (e.conj_diff) throw std::runtime_error("d(conj(.)) of a real coordinate");
    v.form[ci] = Jet::constant(1.0, ctx.chart->dim(), ctx.order);
    return v;
  }
  const ComplexPair* p = ctx.chart->complex_pair(e.name);
  if (!p) throw std::runtime_error("unresolved coordinate '" + e.name + "' in d(...)");
  cplx unit = e.conj_diff ? cplx(0, -1) : cplx(0, 1);
  v.form[p->re] = Jet::constant(1.0, ctx.chart->dim(), ctx.order);
  v.form[p->im] = Jet::constant(unit, ctx.chart->dim(), ctx.order);
  return v;
}

DiffValue ev(const ExprPtr& ep, EvalCtx& ctx) {
  const Expr& e = *ep;
  switch (e.kind) {
    case ExprKind::Constant:
      return scalar_value(Jet::constant(e.constant, ctx.chart->dim(), ctx.order));
    case ExprKind::Ref:
      return ev_ref(e, ctx);
    case ExprKind::Differential:
      return ev_diff(e, ctx);
    case ExprKind::Unary: {
      DiffValue a = ev(e.a, ctx);
      switch (e.uop) {
        case UnaryOp::Neg: {
          DiffValue r;
          r.scalar = -a.scalar;
          for (auto& f : a.form) r.form.push_back(-f);
          return r;
        }
        case UnaryOp::Conj: {
          DiffValue r;
          r.scalar = a.scalar.conj();
          for (auto& f : a.form) r.form.push_back(f.conj());
          return r;
        }
        case UnaryOp::Exp: return scalar_value(jet_exp(require_scalar(a, "exp")));
        case UnaryOp::Log: {
          Jet s = require_scalar(a, "log");
          if (std::abs(s.value()) < 1e-300) throw SingularPoint("log of zero");
          return scalar_value(jet_log(s));
        }
        case UnaryOp::Sqrt: {
          Jet s = require_scalar(a, "sqrt");
          if (std::abs(s.value()) < 1e-300) throw SingularPoint("sqrt of zero");
          return scalar_value(jet_sqrt(s));
        }
        case UnaryOp::Sin: return scalar_value(jet_sin(require_scalar(a, "sin")));
        case UnaryOp::Cos: return scalar_value(jet_cos(require_scalar(a, "cos")));
      }
      break;
    }
    case ExprKind::Binary: {
      if (e.bop == BinaryOp::Pow) {
        Jet base = require_scalar(ev(e.a, ctx), "pow base");
        cplx expo = eval_const_expr(e.b);
        if (std::abs(expo.imag()) > 0) throw std::runtime_error("pow exponent must be real");
        double p = expo.real();
        bool small_nonneg_int = (p == std::floor(p)) && p >= 0 && p <= 16;
        if (!small_nonneg_int && std::abs(base.value()) < 1e-300)
          throw SingularPoint("fractional power of zero base");
        return scalar_value(jet_pow(base, p));
      }
      DiffValue a = ev(e.a, ctx);
      DiffValue b = ev(e.b, ctx);
      DiffValue r;
      switch (e.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: {
          double sign = e.bop == BinaryOp::Add ? 1.0 : -1.0;
          if (a.is_form() != b.is_form())
            throw std::runtime_error("cannot add a scalar and a one-form");
          r.scalar = a.scalar + cplx(sign) * b.scalar;
          if (a.is_form()) {
            for (size_t k = 0; k < a.form.size(); ++k)
              r.form.push_back(a.form[k] + cplx(sign) * b.form[k]);
          }
          return r;
        }
        case BinaryOp::Mul: {
          if (a.is_form() && b.is_form())
            throw std::runtime_error("product of two one-forms is not supported here");
          if (b.is_form()) std::swap(a, b);
          // now b is scalar
          r.scalar = a.scalar * b.scalar;
          for (auto& f : a.form) r.form.push_back(f * b.scalar);
          return r;
        }
        case BinaryOp::Div: {
          Jet den = require_scalar(b, "divisor");
          if (std::abs(den.value()) < 1e-300) throw SingularPoint("division by zero");
          Jet inv = den.inverse();
          r.scalar = a.scalar * inv;
          for (auto& f : a.form) r.form.push_back(f * inv);
          return r;
        }
        default: break;
      }
      break;
    }
  }
  throw std::logic_error("eval: unhandled node");
}

}  // namespace

cplx eval_const_expr(const ExprPtr& ep) {
  const Expr& e = *ep;
  switch (e.kind) {
    case ExprKind::Constant: return e.constant;
    case ExprKind::Unary: {
      cplx a = eval_const_expr(e.a);
      switch (e.uop) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Conj: return std::conj(a);
        case UnaryOp::Exp: return std::exp(a);
        case UnaryOp::Log: return std::log(a);
        case UnaryOp::Sqrt: return std::sqrt(a);
        case UnaryOp::Sin: return std::sin(a);
        case UnaryOp::Cos: return std::cos(a);
      }
      break;
    }
    case ExprKind::Binary: {
      cplx a = eval_const_expr(e.a);
      cplx b = eval_const_expr(e.b);
      switch (e.bop) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow: return std::pow(a, b);
      }
      break;
    }
    default: break;
  }
  throw std::runtime_error("expression is not constant");
}

Jet eval_expr(const ExprPtr& e, const Chart& chart, const LetTable& lets,
              const Point& point, int order) {
  std::map<std::string, DiffValue> memo;
  std::vector<std::string> stack;
  EvalCtx ctx{&chart, &lets, &point, order, &memo, &stack};
  DiffValue v = ev(e, ctx);
  if (v.is_form()) throw std::runtime_error("expected a scalar expression");
  return v.scalar;
}

DiffValue eval_diff_expr(const ExprPtr& e, const Chart& chart, const LetTable& lets,
                         const Point& point, int order) {
  std::map<std::string, DiffValue> memo;
  std::vector<std::string> stack;
  EvalCtx ctx{&chart, &lets, &point, order, &memo, &stack};
  return ev(e, ctx);
}

bool in_domain(const Chart& chart, const Point& point) {
  if (!chart.domain) return true;
  LetTable empty;
  try {
    Jet v = eval_expr(chart.domain, chart, empty, point, 1);
    return v.value().real() > 0.0;
  } catch (const SingularPoint&) {
    return false;
  }
}

}  // namespace crfeff
