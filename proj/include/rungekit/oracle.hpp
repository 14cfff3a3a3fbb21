#pragma once
#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rungekit/grid.hpp"

namespace rungekit {

enum class FuncId { Exp, Sin, Cos, Log, Abs, Conj, Re, Im };

// parsed expression node; `pos` is the source offset, kept so evaluation
// errors can point back into the input text
struct ExprNode {
  enum class Kind { Number, Var, Add, Sub, Mul, Div, Neg, Pow, Call };
  Kind kind = Kind::Number;
  size_t pos = 0;
  cplx value{0, 0};           // Number
  int var = 0;                // Var, 0-based
  int exponent = 0;           // Pow
  FuncId func = FuncId::Exp;  // Call
  std::shared_ptr<const ExprNode> a, b;
};

// A user-supplied function of z1..zd with a declared holomorphy margin:
// the caller asserts the function is holomorphic on the rho-neighborhood
// of the domain, which is how far outside the sets cycles may roam.
// abs/conj/re/im parse fine but clear holomorphic_syntax(); approximation
// entry points reject such oracles, membership checks accept them.
class FunctionOracle {
 public:
  FunctionOracle() = default;

  int dimension() const { return dim_; }
  double margin() const { return margin_; }
  void set_margin(double rho);
  bool holomorphic_syntax() const { return holo_; }
  bool uses_log() const { return has_log_; }

  // advisory list of points the user knows are singular; checked against
  // the domain before approximation starts
  const std::vector<std::vector<cplx>>& declared_singularities() const {
    return singularities_;
  }
  void declare_singularity(std::vector<cplx> point);

  cplx eval(std::span<const cplx> z) const;  // throws EvalSingularity
  cplx eval1(cplx z) const;                  // univariate convenience

  // canonical text form; parse(print()) reproduces the tree exactly
  std::string print() const;

 private:
  friend FunctionOracle parse_expression(const std::string&, int, double);
  std::shared_ptr<const ExprNode> root_;
  int dim_ = 1;
  double margin_ = 0.25;
  bool holo_ = true;
  bool has_log_ = false;
  std::vector<std::vector<cplx>> singularities_;
};

// Recursive-descent parse of the expression language: variables z1..zd
// (z is a shorthand for z1, w for z2), decimal literals with an optional
// i suffix, + - * / ^int, functions exp sin cos log abs conj re im.
// expected_dim < 0 means infer the dimension from the variables used;
// otherwise out-of-range variables raise DimensionMismatch.
FunctionOracle parse_expression(const std::string& src, int expected_dim = -1,
                                double margin = 0.25);

// Callable view the approximation pipeline consumes.  FunctionOracle
// provides one; internal recursions wrap lambdas (coordinate slices,
// boundary data) in the same shape.
struct OracleFn {
  int dim = 1;
  double margin = 0.25;
  std::function<cplx(std::span<const cplx>)> f;

  cplx operator()(std::span<const cplx> z) const { return f(z); }
  cplx at1(cplx z) const {
    std::array<cplx, 1> buf{z};
    return f(buf);
  }
};

OracleFn oracle_fn(const FunctionOracle& o);

// Discrete Cauchy-Riemann residual of sampled values on a patch: the max
// over interior nodes of |f_x + i f_y| (centered differences at pitch h),
// divided by 1 + |f| at the node so thresholds are scale-free.  Vanishes
// at O(h^2) for holomorphic data; order-1 for conj(w), |w| and friends.
double cr_residual(const Grid<cplx>& samples, double h);

}  // namespace rungekit
