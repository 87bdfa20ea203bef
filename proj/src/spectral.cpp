#include "stokeswave/spectral.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "stokeswave/chebyshev.hpp"
#include "stokeswave/util.hpp"

namespace stokeswave {

namespace {

// Cached FFTW plans per transform length. The planner is not thread-safe;
// execution on caller-owned buffers via the new-array interface is.
class Dft {
  public:
    static const Dft& get(int n) {
        static std::mutex mtx;
        static std::map<int, std::unique_ptr<Dft>> cache;
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, std::unique_ptr<Dft>(new Dft(n))).first;
        return *it->second;
    }

    // values -> coefficients (normalized by 1/n)
    void forward(const double* x, Complex* out) const {
        std::vector<Complex> in(n_);
        for (int i = 0; i < n_; ++i) in[i] = Complex(x[i], 0.0);
        fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out));
        const double s = 1.0 / n_;
        for (int i = 0; i < n_; ++i) out[i] *= s;
    }

    void inverse(const Complex* c, double* out) const {
        std::vector<Complex> in(c, c + n_), buf(n_);
        fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(buf.data()));
        for (int i = 0; i < n_; ++i) out[i] = buf[i].real();
    }

  private:
    explicit Dft(int n) : n_(n) {
        std::vector<Complex> a(n), b(n);
        fwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                                FFTW_ESTIMATE);
    }
    int n_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

}  // namespace

LogLevel& log_level() {
    static LogLevel lvl = LogLevel::Warn;
    return lvl;
}

void log_msg(LogLevel lvl, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
    const char* tag[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", tag[static_cast<int>(lvl)], msg.c_str());
}

void parallel_for(int n, int nthreads, const std::function<void(int)>& fn) {
    if (nthreads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    int workers = std::min(nthreads, n);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<Complex> dft_forward(const Eigen::VectorXd& values) {
    const int n = static_cast<int>(values.size());
    std::vector<Complex> out(n);
    Dft::get(n).forward(values.data(), out.data());
    return out;
}

Eigen::VectorXd dft_inverse(const std::vector<Complex>& coeff) {
    const int n = static_cast<int>(coeff.size());
    Eigen::VectorXd out(n);
    Dft::get(n).inverse(coeff.data(), out.data());
    return out;
}

void GridSpec::validate() const {
    if (d != 1) throw ConfigError("GridSpec: v1 implements d = 1 only");
    if (Nx < 8 || Nx % 2 != 0) throw ConfigError("GridSpec: Nx must be even and >= 8");
    if (Nz < 8) throw ConfigError("GridSpec: Nz must be >= 8");
    if (!(b > 0.0)) throw ConfigError("GridSpec: b must be > 0");
}

Eigen::VectorXd GridSpec::x_points() const {
    Eigen::VectorXd x(Nx);
    for (int i = 0; i < Nx; ++i) x[i] = Lx * i / Nx;
    return x;
}

Eigen::VectorXd GridSpec::z_points() const {
    Eigen::VectorXd zeta = cheb::points(Nz);
    return (zeta.array() - 1.0) * (b / 2.0);
}

SurfaceField::SurfaceField(const GridSpec& grid) : grid_(grid), coeff_(grid.Nx, Complex(0, 0)) {}

int SurfaceField::index_of(int k) const {
    const int n = grid_.Nx;
    return k >= 0 ? k : k + n;
}

SurfaceField SurfaceField::from_values(const GridSpec& grid, const Eigen::VectorXd& values) {
    SurfaceField u(grid);
    u.coeff_ = dft_forward(values);
    u.enforce_real();
    return u;
}

SurfaceField SurfaceField::cosine(const GridSpec& grid, int k, double amp) {
    SurfaceField u(grid);
    u.set_coeff(k, Complex(amp / 2, 0));
    u.set_coeff(-k, Complex(amp / 2, 0));
    return u;
}

SurfaceField SurfaceField::sine(const GridSpec& grid, int k, double amp) {
    SurfaceField u(grid);
    u.set_coeff(k, Complex(0, -amp / 2));
    u.set_coeff(-k, Complex(0, amp / 2));
    return u;
}

SurfaceField SurfaceField::constant(const GridSpec& grid, double c) {
    SurfaceField u(grid);
    u.set_coeff(0, Complex(c, 0));
    return u;
}

void SurfaceField::enforce_real() {
    const int n = grid_.Nx;
    coeff_[0] = Complex(coeff_[0].real(), 0.0);
    coeff_[n / 2] = Complex(coeff_[n / 2].real(), 0.0);
    for (int k = 1; k < n / 2; ++k) {
        Complex avg = 0.5 * (coeff_[k] + std::conj(coeff_[n - k]));
        coeff_[k] = avg;
        coeff_[n - k] = std::conj(avg);
    }
}

Eigen::VectorXd SurfaceField::values() const { return dft_inverse(coeff_); }

Eigen::VectorXd SurfaceField::values_oversampled(int factor) const {
    const int n = grid_.Nx, m = factor * n;
    std::vector<Complex> padded(m, Complex(0, 0));
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        padded[k >= 0 ? k : k + m] = coeff_[i];
    }
    return dft_inverse(padded);
}

double SurfaceField::eval(double x) const {
    Complex s(0, 0);
    const int n = grid_.Nx;
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        s += coeff_[i] * std::exp(Complex(0, k * x));
    }
    return s.real();
}

double SurfaceField::max_abs() const { return values().cwiseAbs().maxCoeff(); }

SurfaceField& SurfaceField::operator+=(const SurfaceField& o) {
    for (size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += o.coeff_[i];
    return *this;
}
SurfaceField& SurfaceField::operator-=(const SurfaceField& o) {
    for (size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= o.coeff_[i];
    return *this;
}
SurfaceField& SurfaceField::operator*=(double a) {
    for (auto& c : coeff_) c *= a;
    return *this;
}

VolumeField::VolumeField(const GridSpec& grid, int ncomp)
    : grid_(grid), blocks_(ncomp, Eigen::MatrixXd::Zero(grid.Nz, grid.Nx)) {}

VolumeField VolumeField::oversampled(int fx, int fz) const {
    GridSpec fine = grid_;
    fine.Nx *= fx;
    fine.Nz *= fz;
    VolumeField out(fine, ncomp());
    const Eigen::MatrixXd V2C = cheb::vals_to_coeffs_matrix(grid_.Nz);
    const Eigen::VectorXd zeta_f = cheb::points(fine.Nz);
    for (int c = 0; c < ncomp(); ++c) {
        // x: Fourier pad per row, then z: Chebyshev evaluation per column.
        Eigen::MatrixXd xf(grid_.Nz, fine.Nx);
        for (int iz = 0; iz < grid_.Nz; ++iz) {
            SurfaceField row = SurfaceField::from_values(grid_, blocks_[c].row(iz).transpose());
            xf.row(iz) = row.values_oversampled(fx).transpose();
        }
        for (int ix = 0; ix < fine.Nx; ++ix) {
            Eigen::VectorXd cz = V2C * xf.col(ix);
            for (int iz = 0; iz < fine.Nz; ++iz) out.block(c)(iz, ix) = cheb::eval(cz, zeta_f[iz]);
        }
    }
    return out;
}

VolumeField& VolumeField::operator+=(const VolumeField& o) {
    for (int c = 0; c < ncomp(); ++c) blocks_[c] += o.blocks_[c];
    return *this;
}
VolumeField& VolumeField::operator-=(const VolumeField& o) {
    for (int c = 0; c < ncomp(); ++c) blocks_[c] -= o.blocks_[c];
    return *this;
}
VolumeField& VolumeField::operator*=(double a) {
    for (auto& b : blocks_) b *= a;
    return *this;
}

double VolumeField::max_abs() const {
    double m = 0.0;
    for (const auto& b : blocks_) m = std::max(m, b.cwiseAbs().maxCoeff());
    return m;
}

SurfaceField deriv_x(const SurfaceField& u, int order) {
    SurfaceField out = u;
    const int n = u.grid().Nx;
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        if (k == -n / 2) {
            out.raw()[i] = Complex(0, 0);  // Nyquist has no consistent odd derivative
            continue;
        }
        Complex ik(0, static_cast<double>(k));
        Complex mult = 1.0;
        for (int p = 0; p < order; ++p) mult *= ik;
        out.raw()[i] *= mult;
    }
    out.enforce_real();
    return out;
}

SurfaceField smooth_lift(const SurfaceField& u, double delta, double z) {
    SurfaceField out = u;
    const int n = u.grid().Nx;
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        out.raw()[i] *= std::exp(delta * z * std::abs(k));
    }
    return out;
}

double sobolev_norm(const SurfaceField& u, double s) {
    const int n = u.grid().Nx;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        acc += std::pow(1.0 + double(k) * k, s) * std::norm(u.raw()[i]);
    }
    return std::sqrt(2.0 * M_PI * acc);
}

SurfaceField project_mean_zero(const SurfaceField& u) {
    SurfaceField out = u;
    out.raw()[0] = Complex(0, 0);
    return out;
}

SurfaceField multiply(const SurfaceField& a, const SurfaceField& b) {
    const int n = a.grid().Nx;
    Eigen::VectorXd av = a.values_oversampled(2), bv = b.values_oversampled(2);
    Eigen::VectorXd prod = av.cwiseProduct(bv);
    std::vector<Complex> fine = dft_forward(prod);
    SurfaceField out(a.grid());
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        if (k == -n / 2) continue;
        out.raw()[i] = fine[k >= 0 ? k : k + 2 * n];
    }
    out.enforce_real();
    return out;
}

SurfaceField apply_pointwise(const SurfaceField& u, const std::function<double(double)>& fn) {
    const int n = u.grid().Nx;
    Eigen::VectorXd uv = u.values_oversampled(2);
    Eigen::VectorXd fv(uv.size());
    for (int i = 0; i < uv.size(); ++i) fv[i] = fn(uv[i]);
    std::vector<Complex> fine = dft_forward(fv);
    SurfaceField out(u.grid());
    for (int i = 0; i < n; ++i) {
        int k = fft_wavenumber(i, n);
        if (k == -n / 2) continue;
        out.raw()[i] = fine[k >= 0 ? k : k + 2 * n];
    }
    out.enforce_real();
    return out;
}

double min_oversampled(const SurfaceField& u, int factor) {
    return u.values_oversampled(factor).minCoeff();
}

double inner_l2(const SurfaceField& u, const SurfaceField& v) {
    double acc = 0.0;
    for (int i = 0; i < u.size(); ++i)
        acc += (u.raw()[i] * std::conj(v.raw()[i])).real();
    return 2.0 * M_PI * acc;
}

}  // namespace stokeswave
