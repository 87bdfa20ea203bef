#include "stokeswave/chebyshev.hpp"

#include <cmath>

namespace stokeswave::cheb {

Eigen::VectorXd points(int n) {
    Eigen::VectorXd z(n);
    for (int j = 0; j < n; ++j) z[j] = std::cos(M_PI * j / (n - 1));
    return z;
}

Eigen::MatrixXd diff_matrix(int n) {
    const Eigen::VectorXd z = points(n);
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c[j] = (j == 0 || j == n - 1) ? 2.0 : 1.0;
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            D(i, j) = (c[i] / c[j]) * sign / (z[i] - z[j]);
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) s += D(i, j);
        D(i, i) = -s;
    }
    return D;
}

Eigen::VectorXd clenshaw_curtis_weights(int n) {
    // Waldvogel's cosine-sum formula for the closed rule.
    const int m = n - 1;
    Eigen::VectorXd w(n);
    for (int j = 0; j <= m; ++j) {
        double s = 1.0;
        for (int k = 1; k <= m / 2; ++k) {
            double bk = (2 * k == m) ? 1.0 : 2.0;
            s -= bk * std::cos(2.0 * k * M_PI * j / m) / (4.0 * k * k - 1.0);
        }
        double cj = (j == 0 || j == m) ? 1.0 : 2.0;
        w[j] = cj * s / m;
    }
    return w;
}

Eigen::MatrixXd coeffs_to_vals_matrix(int n) {
    Eigen::MatrixXd T(n, n);
    for (int j = 0; j < n; ++j) {
        double theta = M_PI * j / (n - 1);
        for (int k = 0; k < n; ++k) T(j, k) = std::cos(k * theta);
    }
    return T;
}

Eigen::MatrixXd vals_to_coeffs_matrix(int n) {
    // Discrete orthogonality of cos(k theta_j) on the closed grid.
    const int m = n - 1;
    Eigen::MatrixXd C(n, n);
    for (int k = 0; k < n; ++k) {
        double ck = (k == 0 || k == m) ? 1.0 : 2.0;
        for (int j = 0; j < n; ++j) {
            double cj = (j == 0 || j == m) ? 0.5 : 1.0;
            C(k, j) = ck * cj * std::cos(k * M_PI * j / m) / m;
        }
    }
    return C;
}

double eval(const Eigen::VectorXd& coeffs, double zeta) {
    const int n = static_cast<int>(coeffs.size());
    double b1 = 0.0, b2 = 0.0;
    for (int k = n - 1; k >= 1; --k) {
        double b0 = 2.0 * zeta * b1 - b2 + coeffs[k];
        b2 = b1;
        b1 = b0;
    }
    return zeta * b1 - b2 + coeffs[0];
}

}  // namespace stokeswave::cheb
