#ifndef LSEMINK_TESTS_ORACLES_HPP
#define LSEMINK_TESTS_ORACLES_HPP

// Slow, independent reference computations. Test-only: these materialize
// every operator and work in long double with plain loops, sharing no code
// with the library beyond LinearOperator::apply.

#include "lsemink/objective.hpp"

#include <functional>

namespace lsemink::oracle {

// Dense matrices above this many columns are refused.
inline constexpr Eigen::Index kMaxDenseDim = 400;

Matrix materialize(const LinearOperator& op);

long double lse(const Vector& z);
Vector softmax(const Vector& z);

// Same convention as LseObjective::evaluate (the constant c'b is dropped).
long double value(const LseObjective& obj, const Vector& x);
Vector gradient(const LseObjective& obj, const Vector& x);

// sum_k w_k J_k'(diag p - p p')J_k + alpha I, assembled entry by entry.
// Throws ScaleLimit above kMaxDenseDim.
Matrix dense_hessian(const LseObjective& obj, const Vector& x);

// sum_k w_k J_k'J_k + alpha I.
Matrix dense_metric(const LseObjective& obj);

// Central differences, one coordinate at a time.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                            double h);

// Pseudo-inverse solve of a symmetric PSD system: eigenvalues below
// cutoff * lambda_max are dropped.
Vector dense_modified_solve(const Matrix& a, const Vector& rhs, double cutoff = 1e-12);

// Minimum-norm solution of (Hess f(x) + beta sum_k w_k J_k'J_k) d = -grad f(x).
Vector dense_modified_solve(const LseObjective& obj, const Vector& x, double beta);

// Orthogonal projector onto null(J).
Matrix null_space_projector(const Matrix& j, double cutoff = 1e-12);

}  // namespace lsemink::oracle

#endif  // LSEMINK_TESTS_ORACLES_HPP
