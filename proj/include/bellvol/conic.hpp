#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace bellvol::conic {

// Variable index used for the constant part of an affine expression.
inline constexpr int kConstant = -1;

struct LinearTerm {
  int var;
  double coef;
};

// constant + sum coef * y[var]
struct AffineRow {
  double constant = 0.0;
  std::vector<LinearTerm> terms;
};

// Contribution coef * y[var] (or coef alone for kConstant) to entry (row, col)
// of a symmetric matrix, and by symmetry to (col, row). Requires row <= col.
// Repeated (var, row, col) triples accumulate.
struct MatrixTerm {
  int var;
  int row;
  int col;
  double coef;
};

// Symmetric affine matrix F0 + sum_i y_i F_i of order `size`, required PSD.
struct PsdBlock {
  int size = 0;
  std::vector<MatrixTerm> terms;
};

// maximize objective . y
// subject to every psd block PSD, every nonneg row >= 0, every eq row == 0.
struct ConicProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<PsdBlock> psd_blocks;
  std::vector<AffineRow> nonneg_rows;
  std::vector<AffineRow> eq_rows;

  // Throws DomainError if any term references an undeclared variable or a
  // matrix entry outside its block.
  void validate() const;
  int total_psd_dimension() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterLimit, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolverOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;
  // Accepted as Optimal when the iteration stalls below this.
  double near_optimal_tolerance = 1e-5;
  double step_fraction = 0.99;
  int max_psd_dimension = 400;
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective_value = 0.0;  // objective . y at the returned point
  double dual_objective = 0.0;   // bound from the multipliers
  double duality_gap = 0.0;      // relative
  double max_primal_residual = 0.0;
  double max_dual_residual = 0.0;
  int iterations = 0;
  std::string message;

  std::vector<double> y;
  // Lagrange multipliers (one per nonneg row, one PSD matrix per block).
  std::vector<double> nonneg_multipliers;
  std::vector<Eigen::MatrixXd> psd_multipliers;
};

// Never throws for numerical trouble; problems are reported through status.
SolveReport solve(const ConicProgram& program, const SolverOptions& options = {});

// Evaluates the affine matrix of a block at y.
Eigen::MatrixXd evaluate_block(const PsdBlock& block, const std::vector<double>& y);
double evaluate_row(const AffineRow& row, const std::vector<double>& y);

// Plain-text exchange format (see README); read_program inverts write_program.
void write_program(std::ostream& os, const ConicProgram& program);
ConicProgram read_program(std::istream& is);

}  // namespace bellvol::conic
