#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "stokeswave/spectral.hpp"

using namespace stokeswave;

namespace {
GridSpec grid{1, 32, 16, 1.0, 2.0 * M_PI};

SurfaceField random_resolved(unsigned seed, double decay = 0.6) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    SurfaceField u(grid);
    for (int k = 0; k <= grid.Nx / 2 - 1; ++k) {
        double amp = std::exp(-decay * k);
        if (k == 0) {
            u.set_coeff(0, Complex(amp * gauss(rng), 0));
            continue;
        }
        Complex c(amp * gauss(rng), amp * gauss(rng));
        u.set_coeff(k, c);
        u.set_coeff(-k, std::conj(c));
    }
    return u;
}
}  // namespace

TEST_CASE("deriv_x on resolved modes") {
    SurfaceField u = SurfaceField::cosine(grid, 1, 1.0);
    Eigen::VectorXd d = deriv_x(u).values();
    Eigen::VectorXd x = grid.x_points();
    for (int i = 0; i < grid.Nx; ++i) CHECK(d[i] == doctest::Approx(-std::sin(x[i])).epsilon(1e-13));

    SurfaceField c = SurfaceField::constant(grid, 4.2);
    CHECK(deriv_x(c).max_abs() < 1e-15);
    CHECK(deriv_x(c, 3).max_abs() < 1e-15);

    SurfaceField u3 = SurfaceField::cosine(grid, 3, 1.0);
    SurfaceField d2 = deriv_x(u3, 2);
    CHECK(2.0 * d2.coeff(3).real() == doctest::Approx(-9.0).epsilon(1e-13));
}

TEST_CASE("smooth_lift is the exponential multiplier") {
    SurfaceField u = SurfaceField::cosine(grid, 1, 1.0);
    CHECK((smooth_lift(u, 0.7, 0.0) - u).max_abs() < 1e-15);
    SurfaceField lifted = smooth_lift(u, 1.0, -1.0);
    CHECK(2.0 * lifted.coeff(1).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    SurfaceField c = SurfaceField::constant(grid, 2.0);
    CHECK((smooth_lift(c, 0.5, -0.8) - c).max_abs() < 1e-15);
    // decay with |k| for z < 0
    SurfaceField hi = SurfaceField::cosine(grid, 6, 1.0);
    CHECK(smooth_lift(hi, 1.0, -1.0).max_abs() < std::exp(-5.9));
}

TEST_CASE("sobolev_norm convention and monotonicity") {
    SurfaceField zero(grid);
    CHECK(sobolev_norm(zero, 2.0) == 0.0);
    SurfaceField u = SurfaceField::cosine(grid, 1, 1.0);
    CHECK(sobolev_norm(u, 0.0) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
    CHECK(sobolev_norm(u, 1.0) ==
          doctest::Approx(std::sqrt(2.0) * std::sqrt(M_PI)).epsilon(1e-14));
    for (unsigned seed = 0; seed < 20; ++seed) {
        SurfaceField r = random_resolved(seed);
        double s1 = -1.0 + 0.15 * seed;
        CHECK(sobolev_norm(r, s1) <= sobolev_norm(r, s1 + 0.5) * (1 + 1e-13));
    }
}

TEST_CASE("project_mean_zero") {
    SurfaceField u = SurfaceField::constant(grid, 3.0) + SurfaceField::cosine(grid, 1, 1.0);
    SurfaceField p = project_mean_zero(u);
    CHECK(p.mean() == 0.0);
    CHECK((p - SurfaceField::cosine(grid, 1, 1.0)).max_abs() < 1e-15);
    CHECK((project_mean_zero(p) - p).max_abs() == 0.0);
}

TEST_CASE("transform round trip on resolved fields") {
    for (unsigned seed = 0; seed < 10; ++seed) {
        SurfaceField u = random_resolved(seed);
        Eigen::VectorXd v = u.values();
        SurfaceField back = SurfaceField::from_values(grid, v);
        double scale = u.max_abs();
        CHECK((back - u).max_abs() <= 1e-12 * scale);
    }
}

TEST_CASE("oversampled values and eval agree") {
    SurfaceField u = random_resolved(7);
    Eigen::VectorXd fine = u.values_oversampled(4);
    for (int i = 0; i < 4 * grid.Nx; i += 7) {
        double x = 2.0 * M_PI * i / (4 * grid.Nx);
        CHECK(fine[i] == doctest::Approx(u.eval(x)).epsilon(1e-11));
    }
}

TEST_CASE("dealiased product is exact for resolved pairs") {
    SurfaceField a = SurfaceField::cosine(grid, 1, 1.0);
    SurfaceField p = multiply(a, a);  // cos^2 = 1/2 + cos(2x)/2
    CHECK(p.coeff(0).real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(2.0 * p.coeff(2).real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(p.coeff(1)) < 1e-15);
}

TEST_CASE("deriv_x commutes with smooth_lift") {
    SurfaceField u = random_resolved(3);
    SurfaceField a = deriv_x(smooth_lift(u, 0.8, -0.5));
    SurfaceField b = smooth_lift(deriv_x(u), 0.8, -0.5);
    CHECK((a - b).max_abs() < 1e-14 * std::max(1.0, u.max_abs()));
}

TEST_CASE("volume field interpolation is consistent with pointwise values") {
    auto f = [](double x, double z) { return std::sin(x) * std::cos(2.0 * z) + 0.3 * z; };
    VolumeField v(grid, 1);
    Eigen::VectorXd xs = grid.x_points(), zs = grid.z_points();
    for (int iz = 0; iz < grid.Nz; ++iz)
        for (int ix = 0; ix < grid.Nx; ++ix) v.block(0)(iz, ix) = f(xs[ix], zs[iz]);
    VolumeField fine = v.oversampled(2, 2);
    Eigen::VectorXd xf = fine.grid().x_points(), zf = fine.grid().z_points();
    double scale = v.max_abs();
    for (int iz = 0; iz < fine.grid().Nz; iz += 3)
        for (int ix = 0; ix < fine.grid().Nx; ix += 5)
            CHECK(std::abs(fine.block(0)(iz, ix) - f(xf[ix], zf[iz])) < 1e-12 * scale);
}

TEST_CASE("grid validation") {
    GridSpec bad = grid;
    bad.Nx = 7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = grid;
    bad.Nz = 4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = grid;
    bad.b = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    // Chebyshev points map to [-b, 0]
    Eigen::VectorXd z = grid.z_points();
    CHECK(z[0] == doctest::Approx(0.0));
    CHECK(z[grid.Nz - 1] == doctest::Approx(-grid.b));
}
