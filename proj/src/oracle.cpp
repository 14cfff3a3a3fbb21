#include "rungekit/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "rungekit/errors.hpp"

namespace rungekit {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

std::string fmt_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string fmt_point(std::span<const cplx> z) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < z.size(); ++i) {
    if (i) os << "; ";
    os << fmt_double(z[i].real()) << (z[i].imag() < 0 ? "-" : "+")
       << fmt_double(std::abs(z[i].imag())) << "i";
  }
  os << ")";
  return os.str();
}

// ------------------------------------------------------------------ lexer

struct Token {
  enum class Kind { Num, Ident, Op, End };
  Kind kind = Kind::End;
  size_t pos = 0;
  double num = 0;
  bool imag_suffix = false;
  bool integral = false;  // no '.', no exponent in the source text
  std::string ident;
  char op = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }
  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_])))
      ++i_;
    tok_ = Token{};
    tok_.pos = i_;
    if (i_ >= src_.size()) return;
    char c = src_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* b = src_.data() + i_;
      const char* e = src_.data() + src_.size();
      double v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc{} || p == b)
        fail(ErrorCode::SyntaxError,
             "bad numeric literal at offset " + std::to_string(i_));
      tok_.kind = Token::Kind::Num;
      tok_.num = v;
      std::string_view text(b, p - b);
      tok_.integral = text.find_first_of(".eE") == std::string_view::npos;
      i_ += p - b;
      if (i_ < src_.size() && src_[i_] == 'i' &&
          (i_ + 1 >= src_.size() || !is_word(src_[i_ + 1]))) {
        tok_.imag_suffix = true;
        ++i_;
      }
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t b = i_;
      while (i_ < src_.size() && is_word(src_[i_])) ++i_;
      tok_.kind = Token::Kind::Ident;
      tok_.ident = src_.substr(b, i_ - b);
      return;
    }
    if (std::string_view("+-*/^()").find(c) != std::string_view::npos) {
      tok_.kind = Token::Kind::Op;
      tok_.op = c;
      ++i_;
      return;
    }
    fail(ErrorCode::SyntaxError, std::string("unexpected character '") + c +
                                     "' at offset " + std::to_string(i_));
  }
  static bool is_word(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }
  const std::string& src_;
  size_t i_ = 0;
  Token tok_;
};

// ----------------------------------------------------------------- parser

struct ParseResult {
  NodePtr root;
  int max_var = -1;
  bool holomorphic = true;
  bool has_log = false;
};

class Parser {
 public:
  Parser(const std::string& src, int expected_dim)
      : lex_(src), expected_dim_(expected_dim) {}

  ParseResult run() {
    out_.root = expr();
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End)
      fail(ErrorCode::SyntaxError,
           "unexpected trailing input at offset " + std::to_string(t.pos));
    return std::move(out_);
  }

 private:
  [[noreturn]] void expected(const std::string& what, const Token& t) {
    std::string where = t.kind == Token::Kind::End
                            ? "unexpected end of input"
                            : "unexpected token";
    fail(ErrorCode::SyntaxError,
         "expected " + what + ", " + where + " at offset " + std::to_string(t.pos));
  }

  bool eat_op(char c) {
    if (lex_.peek().kind == Token::Kind::Op && lex_.peek().op == c) {
      lex_.take();
      return true;
    }
    return false;
  }

  NodePtr make(ExprNode::Kind k, size_t pos, NodePtr a = nullptr,
               NodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->pos = pos;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      size_t pos = lex_.peek().pos;
      if (eat_op('+'))
        n = make(ExprNode::Kind::Add, pos, n, term());
      else if (eat_op('-'))
        n = make(ExprNode::Kind::Sub, pos, n, term());
      else
        return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      size_t pos = lex_.peek().pos;
      if (eat_op('*'))
        n = make(ExprNode::Kind::Mul, pos, n, unary());
      else if (eat_op('/'))
        n = make(ExprNode::Kind::Div, pos, n, unary());
      else
        return n;
    }
  }

  NodePtr unary() {
    size_t pos = lex_.peek().pos;
    if (eat_op('-')) return make(ExprNode::Kind::Neg, pos, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (!eat_op('^')) return base;
    bool neg = eat_op('-');
    Token t = lex_.take();
    if (t.kind != Token::Kind::Num || !t.integral || t.imag_suffix)
      expected("an integer exponent", t);
    if (std::abs(t.num) > 1e6)
      fail(ErrorCode::SyntaxError,
           "exponent too large at offset " + std::to_string(t.pos));
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Pow;
    n->pos = t.pos;
    n->exponent = static_cast<int>(t.num) * (neg ? -1 : 1);
    n->a = std::move(base);
    return n;
  }

  NodePtr atom() {
    Token t = lex_.take();
    if (t.kind == Token::Kind::Num) {
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Number;
      n->pos = t.pos;
      n->value = t.imag_suffix ? cplx{0, t.num} : cplx{t.num, 0};
      return n;
    }
    if (t.kind == Token::Kind::Op && t.op == '(') {
      NodePtr n = expr();
      if (!eat_op(')')) expected("')'", lex_.peek());
      return n;
    }
    if (t.kind == Token::Kind::Ident) return ident_atom(t);
    expected("a value", t);
  }

  NodePtr ident_atom(const Token& t) {
    const std::string& s = t.ident;
    if (s == "i") {
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Number;
      n->pos = t.pos;
      n->value = {0, 1};
      return n;
    }
    static const std::pair<const char*, FuncId> funcs[] = {
        {"exp", FuncId::Exp},   {"sin", FuncId::Sin}, {"cos", FuncId::Cos},
        {"log", FuncId::Log},   {"abs", FuncId::Abs}, {"conj", FuncId::Conj},
        {"re", FuncId::Re},     {"im", FuncId::Im},
    };
    for (auto [name, id] : funcs) {
      if (s == name) {
        if (!eat_op('(')) expected("'(' after " + s, lex_.peek());
        NodePtr arg = expr();
        if (!eat_op(')')) expected("')'", lex_.peek());
        if (id == FuncId::Abs || id == FuncId::Conj || id == FuncId::Re ||
            id == FuncId::Im)
          out_.holomorphic = false;
        if (id == FuncId::Log) out_.has_log = true;
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::Call;
        n->pos = t.pos;
        n->func = id;
        n->a = std::move(arg);
        return n;
      }
    }
    int var = -1;
    if (s == "z")
      var = 0;
    else if (s == "w")
      var = 1;
    else if (s.size() >= 2 && s[0] == 'z' &&
             std::all_of(s.begin() + 1, s.end(), [](char c) {
               return std::isdigit(static_cast<unsigned char>(c));
             })) {
      long idx = std::strtol(s.c_str() + 1, nullptr, 10);
      if (idx >= 1 && idx <= 64) var = static_cast<int>(idx) - 1;
    }
    if (var < 0)
      fail(ErrorCode::UnknownIdentifier,
           "'" + s + "' at offset " + std::to_string(t.pos));
    if (expected_dim_ >= 0 && var >= expected_dim_)
      fail(ErrorCode::DimensionMismatch,
           "expression uses z" + std::to_string(var + 1) + " but the domain has " +
               std::to_string(expected_dim_) + " coordinate(s)");
    out_.max_var = std::max(out_.max_var, var);
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Var;
    n->pos = t.pos;
    n->var = var;
    return n;
  }

  Lexer lex_;
  int expected_dim_;
  ParseResult out_;
};

// ------------------------------------------------------------- evaluation

cplx ipow(cplx z, int n, std::span<const cplx> at) {
  bool inv = n < 0;
  unsigned e = inv ? static_cast<unsigned>(-static_cast<long>(n))
                   : static_cast<unsigned>(n);
  cplx r{1, 0}, b = z;
  while (e) {
    if (e & 1u) r *= b;
    if (e >>= 1) b *= b;
  }
  if (inv) {
    if (r == cplx{0, 0})
      fail(ErrorCode::EvalSingularity,
           "zero raised to a negative power at z=" + fmt_point(at));
    r = 1.0 / r;
  }
  return r;
}

cplx eval_node(const ExprNode& n, std::span<const cplx> z) {
  switch (n.kind) {
    case ExprNode::Kind::Number:
      return n.value;
    case ExprNode::Kind::Var:
      return z[n.var];
    case ExprNode::Kind::Add:
      return eval_node(*n.a, z) + eval_node(*n.b, z);
    case ExprNode::Kind::Sub:
      return eval_node(*n.a, z) - eval_node(*n.b, z);
    case ExprNode::Kind::Mul:
      return eval_node(*n.a, z) * eval_node(*n.b, z);
    case ExprNode::Kind::Div: {
      cplx num = eval_node(*n.a, z);
      cplx den = eval_node(*n.b, z);
      if (den == cplx{0, 0})
        fail(ErrorCode::EvalSingularity,
             "division by exact zero at z=" + fmt_point(z) + " (offset " +
                 std::to_string(n.pos) + ")");
      return num / den;
    }
    case ExprNode::Kind::Neg:
      return -eval_node(*n.a, z);
    case ExprNode::Kind::Pow:
      return ipow(eval_node(*n.a, z), n.exponent, z);
    case ExprNode::Kind::Call: {
      cplx v = eval_node(*n.a, z);
      switch (n.func) {
        case FuncId::Exp:
          return std::exp(v);
        case FuncId::Sin:
          return std::sin(v);
        case FuncId::Cos:
          return std::cos(v);
        case FuncId::Log:
          if (v.imag() == 0 && v.real() <= 0)
            fail(ErrorCode::EvalSingularity,
                 "log argument on the principal branch cut at z=" + fmt_point(z));
          return std::log(v);
        case FuncId::Abs:
          return {std::abs(v), 0};
        case FuncId::Conj:
          return std::conj(v);
        case FuncId::Re:
          return {v.real(), 0};
        case FuncId::Im:
          return {v.imag(), 0};
      }
      return v;  // unreachable
    }
  }
  fail(ErrorCode::Internal, "corrupt expression node");
}

// --------------------------------------------------------------- printing

const char* func_name(FuncId f) {
  switch (f) {
    case FuncId::Exp: return "exp";
    case FuncId::Sin: return "sin";
    case FuncId::Cos: return "cos";
    case FuncId::Log: return "log";
    case FuncId::Abs: return "abs";
    case FuncId::Conj: return "conj";
    case FuncId::Re: return "re";
    case FuncId::Im: return "im";
  }
  return "?";
}

int prec(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Add:
    case ExprNode::Kind::Sub:
      return 1;
    case ExprNode::Kind::Mul:
    case ExprNode::Kind::Div:
      return 2;
    case ExprNode::Kind::Neg:
      return 3;
    case ExprNode::Kind::Pow:
      return 4;
    default:
      return 5;
  }
}

void print_node(const ExprNode& n, int min_prec, std::string& out) {
  bool paren = prec(n) < min_prec;
  if (paren) out += '(';
  switch (n.kind) {
    case ExprNode::Kind::Number:
      if (n.value.imag() == 0) {
        out += fmt_double(n.value.real());
      } else if (n.value.real() == 0) {
        if (n.value.imag() == 1)
          out += 'i';
        else
          out += fmt_double(n.value.imag()) + "i";
      } else {  // never produced by the parser, printed re-parseably anyway
        out += '(' + fmt_double(n.value.real()) + '+' +
               fmt_double(n.value.imag()) + "i)";
      }
      break;
    case ExprNode::Kind::Var:
      out += "z" + std::to_string(n.var + 1);
      break;
    case ExprNode::Kind::Add:
      print_node(*n.a, 1, out);
      out += " + ";
      print_node(*n.b, 2, out);
      break;
    case ExprNode::Kind::Sub:
      print_node(*n.a, 1, out);
      out += " - ";
      print_node(*n.b, 2, out);
      break;
    case ExprNode::Kind::Mul:
      print_node(*n.a, 2, out);
      out += "*";
      print_node(*n.b, 3, out);
      break;
    case ExprNode::Kind::Div:
      print_node(*n.a, 2, out);
      out += "/";
      print_node(*n.b, 3, out);
      break;
    case ExprNode::Kind::Neg:
      out += '-';
      print_node(*n.a, 3, out);
      break;
    case ExprNode::Kind::Pow:
      print_node(*n.a, 5, out);
      out += '^';
      out += std::to_string(n.exponent);
      break;
    case ExprNode::Kind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.a, 1, out);
      out += ')';
      break;
  }
  if (paren) out += ')';
}

}  // namespace

// --------------------------------------------------------- FunctionOracle

void FunctionOracle::set_margin(double rho) {
  if (!(rho > 0))
    fail(ErrorCode::PreconditionViolated, "holomorphy margin must be positive");
  margin_ = rho;
}

void FunctionOracle::declare_singularity(std::vector<cplx> point) {
  if (static_cast<int>(point.size()) != dim_)
    fail(ErrorCode::DimensionMismatch,
         "declared singularity has wrong dimension");
  singularities_.push_back(std::move(point));
}

cplx FunctionOracle::eval(std::span<const cplx> z) const {
  if (!root_) fail(ErrorCode::Internal, "evaluating an empty oracle");
  if (static_cast<int>(z.size()) != dim_)
    fail(ErrorCode::DimensionMismatch,
         "oracle expects " + std::to_string(dim_) + " coordinate(s), got " +
             std::to_string(z.size()));
  cplx v = eval_node(*root_, z);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    fail(ErrorCode::EvalSingularity,
         "non-finite oracle value at z=" + fmt_point(z));
  return v;
}

cplx FunctionOracle::eval1(cplx z) const {
  std::array<cplx, 1> buf{z};
  return eval(buf);
}

std::string FunctionOracle::print() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, 0, out);
  return out;
}

FunctionOracle parse_expression(const std::string& src, int expected_dim,
                                double margin) {
  if (src.empty()) fail(ErrorCode::SyntaxError, "empty expression");
  ParseResult r = Parser(src, expected_dim).run();
  FunctionOracle o;
  o.root_ = std::move(r.root);
  o.dim_ = expected_dim >= 0 ? expected_dim : std::max(r.max_var + 1, 1);
  o.holo_ = r.holomorphic;
  o.has_log_ = r.has_log;
  o.set_margin(margin);
  return o;
}

OracleFn oracle_fn(const FunctionOracle& o) {
  OracleFn fn;
  fn.dim = o.dimension();
  fn.margin = o.margin();
  fn.f = [o](std::span<const cplx> z) { return o.eval(z); };
  return fn;
}

// ------------------------------------------------------------ CR residual

double cr_residual(const Grid<cplx>& samples, double h) {
  if (samples.nx() < 3 || samples.ny() < 3)
    fail(ErrorCode::PatchTooSmall, "need at least 3x3 sample nodes, got " +
                                       std::to_string(samples.nx()) + "x" +
                                       std::to_string(samples.ny()));
  if (!(h > 0)) fail(ErrorCode::PreconditionViolated, "pitch must be positive");
  double worst = 0;
  for (int j = 1; j + 1 < samples.ny(); ++j) {
    for (int i = 1; i + 1 < samples.nx(); ++i) {
      cplx fx = (samples.at(i + 1, j) - samples.at(i - 1, j)) / (2 * h);
      cplx fy = (samples.at(i, j + 1) - samples.at(i, j - 1)) / (2 * h);
      double defect = std::abs(fx + cplx{0, 1} * fy);
      worst = std::max(worst, defect / (1.0 + std::abs(samples.at(i, j))));
    }
  }
  return worst;
}

}  // namespace rungekit
