#pragma once

#include <vector>

#include <Eigen/Dense>

namespace hetquad::ipm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One stored entry of a symmetric constraint matrix. Both (r,c) and (c,r)
/// are stored for off-diagonal positions.
struct Entry {
  int row;
  int col;
  double value;
};

/// The part of a constraint matrix living in one block.
struct BlockTerm {
  int block;
  std::vector<Entry> entries;
};

/// <A_p, X> = sum over terms of sum over entries value * X_block(row, col).
struct Constraint {
  std::vector<BlockTerm> terms;
};

/// Block-diagonal standard form
///   min  sum_j <C_j, X_j>  s.t.  <A_p, X> = b_p,  X_j PSD
///   max  b'y               s.t.  sum_p y_p A_p + Z = C,  Z_j PSD
struct Problem {
  std::vector<int> block_sizes;
  std::vector<Matrix> c;
  std::vector<Constraint> a;
  Vector b;
};

struct Options {
  double tol = 1e-8;          ///< relative primal/dual infeasibility and relative gap
  double gap_abs_tol = 5e-8;  ///< absolute |pobj - dobj|
  double stall_gap_tol = 1e-7;
  int max_iters = 100;
};

struct Start {
  std::vector<Matrix> x;
  std::vector<Matrix> z;
  Vector y;
};

enum class Status { Optimal, Infeasible, NumericalFailure };

struct Result {
  Status status = Status::NumericalFailure;
  std::vector<Matrix> x;
  std::vector<Matrix> z;
  Vector y;
  double pobj = 0.0;
  double dobj = 0.0;
  double pinf = 0.0;
  double dinf = 0.0;
  double relgap = 0.0;
  int iterations = 0;
};

/// Add a symmetric entry pair (or one diagonal entry) to an entry list.
void add_sym(std::vector<Entry>& out, int r, int c, double v);

/// Entries of a dense symmetric matrix, dropping exact zeros.
BlockTerm dense_term(int block, const Matrix& a);

/// Infeasible-start primal-dual path following with the HKM direction and
/// Mehrotra predictor-corrector steps.
Result solve(const Problem& p, const Options& opt = {}, const Start* start = nullptr);

}  // namespace hetquad::ipm
