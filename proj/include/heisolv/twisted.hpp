#ifndef HEISOLV_TWISTED_HPP
#define HEISOLV_TWISTED_HPP

#include "heisolv/core.hpp"
#include "heisolv/operator_spec.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace heisolv {

// Uniform grid on [-L/2, L/2)^{2n}; axes 0..n-1 are x, n..2n-1 are y.
struct Grid {
    int n = 1;
    int m = 64;
    double L = 8.0;

    double h() const { return L / m; }
    std::size_t size() const;
    double coord(int index) const { return -0.5 * L + index * h(); }
    RVector point(std::size_t flat) const;
    // Grid of the adapted Fourier transform: same m, extent m / L.
    Grid dual() const { return Grid{n, m, m / L}; }
};

void validate_grid(const Grid& g);

struct GridFunction {
    Grid grid;
    std::vector<Complex> values;  // row-major, last axis fastest

    GridFunction() = default;
    explicit GridFunction(const Grid& g);
    static GridFunction sample(const Grid& g, const std::function<Complex(const RVector&)>& f);

    double l1() const;
    double l2() const;
    double max_abs() const;
    // Share of the L1 mass within max(1, m/16) points of the boundary.
    double boundary_mass() const;
};

Complex inner(const GridFunction& a, const GridFunction& b);  // sum a conj(b) h^{2n}
double relative_l2(const GridFunction& a, const GridFunction& b);  // |a - b| / |b|

// Throws AliasingError if boundary mass exceeds limit.
void check_boundary(const GridFunction& f, double limit = 1e-6, const std::string& what = "input");

struct ParallelOptions {
    int threads = 1;
};

// f x_mu g (v) = sum_{v'} f(v - v') g(v') e^{-pi i mu sigma(v, v')} h^{2n}, direct quadrature.
GridFunction twisted_convolve(const GridFunction& f, const GridFunction& g, double mu,
                              const ParallelOptions& par = {}, bool check = true);

enum class Side { Right, Left };

// Right: d_x - pi i mu y, d_y + pi i mu x. Left: d_x + pi i mu y, d_y - pi i mu x.
// Central differences with zero extension; axis j in 0..2n-1.
GridFunction twisted_derivative(const GridFunction& f, int axis, Side side, double mu);

// sum a_jk V_j V_k f with right-side twisted derivatives.
GridFunction apply_L_tilde(const CMatrix& A, const GridFunction& f, double mu);

// hat f(w) = int f(v) e^{-2 pi i sigma(w, v)} dv by FFT; the result lives on grid.dual().
// Requires m divisible by 4.
GridFunction adapted_fourier(const GridFunction& f);

// Gamma_t on the grid, from hat Gamma sampled on the dual grid and transformed back.
GridFunction kernel_on_grid(const CMatrix& S, double mu, double t, const Grid& grid);

struct SemigroupReport {
    double err_semigroup = 0.0;     // |G_t x G_s - G_{t+s}| / |G_{t+s}|
    double err_contraction = 0.0;   // max_f |f x G_t| / |f| - 1
    double max_ratio = 0.0;
    double err_ground_state = -1.0; // |f x G_t - e^{-2 pi t} f| / |f|, f = exp(-(pi|mu|/2)|v|^2), S = -J only
    double boundary_mass = 0.0;
    int samples = 0;
};

SemigroupReport semigroup_check(const CMatrix& S, double mu, double t, double s, const Grid& grid,
                                std::uint64_t seed = 1, int samples = 10, const ParallelOptions& par = {});

// Random mixture of exp(-pi |v - c|^2 / w^2) with centers in [-0.5, 0.5]^{2n}, w in [0.5, 1]
// and complex weights.
GridFunction random_gaussian_mixture(const Grid& g, std::uint64_t seed, int components = 3);

// H_1 grid: (x, y) on [-L/2, L/2)^2 with m points per axis, u on [-Lu/2, Lu/2) with m_u points.
struct Grid3 {
    int m = 16;
    double L = 6.0;
    int m_u = 32;
    double Lu = 12.0;
};

using GroupFunction = std::function<Complex(double x, double y, double u)>;

struct CentralTransformReport {
    double relative_error = 0.0;
    double norm = 0.0;
};

// (f * g)^mu from group convolution on H_1 then the partial Fourier transform
// int F(v, u) e^{-2 pi i mu u} du, versus f^mu x_mu g^mu. f is evaluated off-grid in u.
CentralTransformReport central_transform_identity(const GroupFunction& f, const GroupFunction& g, double mu,
                                                  const Grid3& grid, const ParallelOptions& par = {});

struct RealBlockCalibration {
    Complex c{1.0, 0.0};
    double modulus_error = 0.0;      // ||c| - 1|
    double max_relative_error = 0.0; // over the sample points, with c applied
    int points = 0;
};

// Fixes c by FFT inversion of hat Gamma at complex time t; c is the ratio at v = 0,
// checked at further points. Both sides must decay, e.g. S = -iJ with Im t < 0; a
// real symplectic S gives an indefinite form and fails the boundary check.
RealBlockCalibration calibrate_real_block(const CMatrix& S, double mu, Complex t, const Grid& grid,
                                          const std::vector<RVector>& points);

// Flat binary: n, m as int64, L as float64, then interleaved re/im float64, little-endian.
void write_binary(const GridFunction& f, const std::string& path);
GridFunction read_binary(const std::string& path);
std::string to_csv(const GridFunction& f);

}  // namespace heisolv

#endif
