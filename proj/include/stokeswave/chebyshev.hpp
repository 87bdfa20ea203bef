#pragma once

#include <Eigen/Dense>

namespace stokeswave::cheb {

// Gauss-Lobatto nodes zeta_j = cos(pi j / (n-1)), j = 0..n-1 (zeta_0 = +1).
Eigen::VectorXd points(int n);

// Collocation differentiation matrix on the Gauss-Lobatto nodes
// (negative-sum diagonal for roundoff control).
Eigen::MatrixXd diff_matrix(int n);

// Clenshaw-Curtis quadrature weights on the Gauss-Lobatto nodes, exact for
// polynomials of degree n-1 on [-1,1].
Eigen::VectorXd clenshaw_curtis_weights(int n);

// Nodal values <-> Chebyshev series coefficients (T_0..T_{n-1}).
Eigen::MatrixXd vals_to_coeffs_matrix(int n);
Eigen::MatrixXd coeffs_to_vals_matrix(int n);

// Clenshaw evaluation of a Chebyshev series at zeta in [-1,1].
double eval(const Eigen::VectorXd& coeffs, double zeta);

}  // namespace stokeswave::cheb
