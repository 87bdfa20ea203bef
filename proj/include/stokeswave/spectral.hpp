#pragma once

// Fourier (horizontal) x Chebyshev (vertical) discretization on the strip
// T^d x (-b, 0). v1 implements d = 1; the types keep the dimension field so
// layouts stay dimension-ready.
//
// Conventions, used by every other module:
//   - A real periodic surface field is stored by its complex Fourier
//     coefficients u_hat(k), k in {-Nx/2, ..., Nx/2-1} (FFT index order),
//     with Hermitian symmetry u_hat(-k) = conj(u_hat(k)).
//   - ||u||_{H^s}^2 = 2 pi sum_k (1+|k|^2)^s |u_hat(k)|^2, matching the
//     L^2(T^1) norm at s = 0 (||cos||_{L^2} = sqrt(pi)).
//   - Pointwise products of spectral fields are dealiased by zero-padded
//     evaluation (the padding form of the 2/3 rule).

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "stokeswave/errors.hpp"

namespace stokeswave {

using Complex = std::complex<double>;

struct GridSpec {
    int d = 1;       // surface dimension (v1: 1)
    int Nx = 32;     // Fourier modes per horizontal direction (even, >= 8)
    int Nz = 16;     // Chebyshev points in the vertical (>= 8)
    double b = 1.0;  // strip depth (> 0)
    double Lx = 2.0 * M_PI;  // horizontal period (fixed 2 pi)

    void validate() const;

    // Collocation nodes.
    Eigen::VectorXd x_points() const;
    // Gauss-Lobatto points mapped affinely to [-b, 0]; index 0 is z = 0 (top),
    // index Nz-1 is z = -b (bottom).
    Eigen::VectorXd z_points() const;

    bool operator==(const GridSpec&) const = default;
};

// Real periodic function on the torus stored as truncated Fourier
// coefficients. Houses eta and all scalar boundary data (phi, chi, h, f).
class SurfaceField {
  public:
    SurfaceField() = default;
    explicit SurfaceField(const GridSpec& grid);

    static SurfaceField from_values(const GridSpec& grid, const Eigen::VectorXd& values);
    // Builds a*cos(kx) + b*sin(kx) style fields from (k -> amplitude) pairs.
    static SurfaceField cosine(const GridSpec& grid, int k, double amp);
    static SurfaceField sine(const GridSpec& grid, int k, double amp);
    static SurfaceField constant(const GridSpec& grid, double c);

    const GridSpec& grid() const { return grid_; }
    int size() const { return static_cast<int>(coeff_.size()); }

    // Coefficient access by wavenumber k in [-Nx/2, Nx/2-1].
    Complex coeff(int k) const { return coeff_[index_of(k)]; }
    void set_coeff(int k, Complex v) { coeff_[index_of(k)] = v; }
    const std::vector<Complex>& raw() const { return coeff_; }
    std::vector<Complex>& raw() { return coeff_; }

    // Restores exact Hermitian symmetry (call after writing raw coefficients).
    void enforce_real();

    Eigen::VectorXd values() const;
    // Values on a grid with `factor`*Nx points (spectral interpolation).
    Eigen::VectorXd values_oversampled(int factor) const;
    double eval(double x) const;

    double mean() const { return coeff_[0].real(); }
    double max_abs() const;

    SurfaceField& operator+=(const SurfaceField& o);
    SurfaceField& operator-=(const SurfaceField& o);
    SurfaceField& operator*=(double a);
    friend SurfaceField operator+(SurfaceField a, const SurfaceField& b) { return a += b; }
    friend SurfaceField operator-(SurfaceField a, const SurfaceField& b) { return a -= b; }
    friend SurfaceField operator*(double a, SurfaceField u) { return u *= a; }

  private:
    int index_of(int k) const;
    GridSpec grid_;
    std::vector<Complex> coeff_;
};

// Real tensor over (x collocation) x (z Chebyshev) points, one Nz-by-Nx
// block per component (scalar: 1 block, velocity: d+1 blocks). Entry
// (iz, ix) is the value at (x_ix, z_iz).
class VolumeField {
  public:
    VolumeField() = default;
    VolumeField(const GridSpec& grid, int ncomp);

    const GridSpec& grid() const { return grid_; }
    int ncomp() const { return static_cast<int>(blocks_.size()); }
    Eigen::MatrixXd& block(int c) { return blocks_[c]; }
    const Eigen::MatrixXd& block(int c) const { return blocks_[c]; }

    // Spectral interpolation onto a finer collocation grid (fx*Nx, fz*Nz).
    VolumeField oversampled(int fx, int fz) const;

    VolumeField& operator+=(const VolumeField& o);
    VolumeField& operator-=(const VolumeField& o);
    VolumeField& operator*=(double a);

    double max_abs() const;

  private:
    GridSpec grid_;
    std::vector<Eigen::MatrixXd> blocks_;
};

// --- Operations on surface fields ---------------------------------------

// Coefficients multiplied by (ik)^order; the Nyquist mode is zeroed.
SurfaceField deriv_x(const SurfaceField& u, int order = 1);

// coeff(k) -> exp(delta z |k|) coeff(k); identity at z = 0.
SurfaceField smooth_lift(const SurfaceField& u, double delta, double z);

double sobolev_norm(const SurfaceField& u, double s);

SurfaceField project_mean_zero(const SurfaceField& u);

// Dealiased pointwise product.
SurfaceField multiply(const SurfaceField& a, const SurfaceField& b);

// Dealiased pointwise application of an arbitrary smooth function
// (evaluated on a 2x-padded grid, truncated back to the native band).
SurfaceField apply_pointwise(const SurfaceField& u, const std::function<double(double)>& fn);

// min over an `factor`-times oversampled grid.
double min_oversampled(const SurfaceField& u, int factor = 4);

// L2(T^1) inner product <u, v> = int u v dx = 2 pi sum u_hat conj(v_hat).
double inner_l2(const SurfaceField& u, const SurfaceField& v);

// --- Low-level transform helpers (shared by geometry/stokes) -------------

// Forward DFT of real samples: returns Fourier coefficients (length n, FFT
// index order, normalized so values = sum coeff e^{ikx}).
std::vector<Complex> dft_forward(const Eigen::VectorXd& values);
Eigen::VectorXd dft_inverse(const std::vector<Complex>& coeff);

// Fourier wavenumber of FFT index i for length n.
inline int fft_wavenumber(int i, int n) { return (i <= n / 2 - 1) ? i : i - n; }

}  // namespace stokeswave
