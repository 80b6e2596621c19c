#include "heisolv/fixtures.hpp"
#include "heisolv/kernel.hpp"
#include "heisolv/symplectic.hpp"
#include "heisolv/twisted.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <algorithm>

using namespace heisolv;

namespace {


CMatrix minus_J(int n) { return -standard_J(n).cast<Complex>(); }

GridFunction gaussian(const Grid& g, double a, double shift = 0.0) {
    return GridFunction::sample(g, [&](const RVector& v) {
        RVector c = v;
        c(0) -= shift;
        return Complex(std::exp(-a * c.squaredNorm()));
    });
}

// Values on the interior, away from the zero-extension boundary of the difference stencil.
double interior_rel(const GridFunction& a, const GridFunction& b, int band) {
    double num = 0.0, den = 0.0;
    const int m = a.grid.m;
    for (std::size_t p = 0; p < a.values.size(); ++p) {
        std::size_t q = p;
        bool inside = true;
        for (int ax = 0; ax < 2 * a.grid.n; ++ax) {
            const int i = static_cast<int>(q % m);
            q /= m;
            inside = inside && i >= band && i < m - band;
        }
        if (!inside) continue;
        num += std::norm(a.values[p] - b.values[p]);
        den += std::norm(b.values[p]);
    }
    return std::sqrt(num / den);
}

// Space-side Mehler kernel of S = -J, n = 1: (pi/a)/cosh(theta) exp(-pi^2 |v|^2 / a), a = (2 pi/|mu|) tanh theta.
GridFunction mehler_space(const Grid& g, double mu, double t) {
    const double th = 2.0 * kPi * t, a = 2.0 * kPi / std::abs(mu) * std::tanh(th);
    return GridFunction::sample(g, [&](const RVector& v) {
        return Complex((kPi / a) / std::cosh(th) * std::exp(-kPi * kPi * v.squaredNorm() / a));
    });
}

}  // namespace

TEST_SUITE("twisted-convolution-lab") {

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(validate_grid(Grid{1, 4, 8.0}), InputError);
    CHECK_THROWS_AS(validate_grid(Grid{1, 64, -1.0}), InputError);
    CHECK_NOTHROW(validate_grid(Grid{1, 64, 8.0}));
    CHECK(Grid{2, 16, 6.0}.size() == 65536u);
}

TEST_CASE("small mu approaches ordinary convolution") {
    const Grid g{1, 32, 8.0};
    const GridFunction f = random_gaussian_mixture(g, 3), h = random_gaussian_mixture(g, 4);
    const GridFunction a = twisted_convolve(f, h, 1e-6), b = twisted_convolve(f, h, 0.0);
    CHECK(relative_l2(a, b) <= 1e-6);
}

TEST_CASE("convolution with a narrowing Gaussian approaches the identity") {
    const Grid g{1, 64, 8.0};
    const GridFunction f = random_gaussian_mixture(g, 5);
    double prev = 1e9;
    for (double eps : {0.4, 0.2}) {
        GridFunction d = gaussian(g, kPi / (eps * eps));
        for (auto& z : d.values) z /= eps * eps;
        const double err = relative_l2(twisted_convolve(f, d, 1.0), f);
        CHECK(err < prev / 2.5);
        prev = err;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("twisted derivatives") {
    const Grid g{1, 128, 8.0};
    const double h2 = g.h() * g.h();
    const GridFunction f = gaussian(g, kPi);
    // Right X~: d_x - pi i mu y applied to exp(-pi|v|^2).
    const GridFunction expect_x = GridFunction::sample(g, [](const RVector& v) {
        return Complex(-2.0 * kPi * v(0), -kPi * v(1)) * std::exp(-kPi * v.squaredNorm());
    });
    CHECK(interior_rel(twisted_derivative(f, 0, Side::Right, 1.0), expect_x, 2) <= 10.0 * h2);
    const GridFunction expect_xl = GridFunction::sample(g, [](const RVector& v) {
        return Complex(-2.0 * kPi * v(0), kPi * v(1)) * std::exp(-kPi * v.squaredNorm());
    });
    CHECK(interior_rel(twisted_derivative(f, 0, Side::Left, 1.0), expect_xl, 2) <= 10.0 * h2);

    // mu = 0 is the plain central difference.
    const GridFunction d0 = twisted_derivative(f, 1, Side::Right, 0.0);
    for (int i = 1; i < g.m - 1; i += 7)
        for (int j = 1; j < g.m - 1; j += 5) {
            const std::size_t p = static_cast<std::size_t>(i) * g.m + j;
            CHECK(std::abs(d0.values[p] - (f.values[p + 1] - f.values[p - 1]) / (2.0 * g.h())) < 1e-12);
        }

    // X~ Y~ - Y~ X~ = 2 pi i mu on the right-side realization.
    for (double mu : {1.0, -0.5}) {
        const GridFunction phi = random_gaussian_mixture(g, 9);
        const GridFunction xy = twisted_derivative(twisted_derivative(phi, 1, Side::Right, mu), 0, Side::Right, mu);
        const GridFunction yx = twisted_derivative(twisted_derivative(phi, 0, Side::Right, mu), 1, Side::Right, mu);
        GridFunction comm = xy, expect = phi;
        for (std::size_t p = 0; p < comm.values.size(); ++p) {
            comm.values[p] -= yx.values[p];
            expect.values[p] *= Complex(0.0, 2.0 * kPi * mu);
        }
        CHECK(interior_rel(comm, expect, 4) <= 10.0 * h2);
    }
}

TEST_CASE("twisted sub-Laplacian ground state and zero operator") {
    const Grid g{1, 128, 8.0};
    for (double mu : {1.0, 2.0}) {
        const GridFunction f = gaussian(g, kPi * mu / 2.0);
        GridFunction expect = f;
        for (auto& z : expect.values) z *= -2.0 * kPi * mu;
        CHECK(interior_rel(apply_L_tilde(CMatrix::Identity(2, 2), f, mu), expect, 4) <= 10.0 * g.h() * g.h());
    }
    const GridFunction f = random_gaussian_mixture(g, 2);
    CHECK(apply_L_tilde(CMatrix::Zero(2, 2), f, 1.0).max_abs() == 0.0);
}

TEST_CASE("dissipativity on psd fixtures") {
    struct Case {
        std::string name;
        Grid g;
    };
    for (const Case& c : {Case{"sublaplacian_n1", Grid{1, 64, 8.0}}, Case{"rotation_family_n2", Grid{2, 16, 6.0}},
                          Case{"mixed_spectrum_n2", Grid{2, 16, 6.0}}}) {
        const OperatorSpec s = fixture(c.name);
        REQUIRE(re_q_psd(hamilton_from_A(s.A)).psd);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const GridFunction f = random_gaussian_mixture(c.g, seed);
            const double re = inner(apply_L_tilde(s.A, f, 1.0), f).real();
            CHECK_MESSAGE(re <= 1e-6 * f.l2() * f.l2(), c.name);
        }
    }
}

TEST_CASE("adapted Fourier transform") {
    const Grid g{1, 64, 8.0};
    const GridFunction f = gaussian(g, kPi);
    GridFunction fh = adapted_fourier(f);
    CHECK(fh.grid.L == doctest::Approx(8.0));
    CHECK(relative_l2(fh, gaussian(fh.grid, kPi)) <= 1e-10);

    const GridFunction r = random_gaussian_mixture(g, 21);
    GridFunction back = adapted_fourier(adapted_fourier(r));
    back.grid = g;
    CHECK(relative_l2(back, r) <= 1e-6);

    // With sigma antisymmetric, int hat f hat g = int f(v) g(-v) dv; for even g that is int f g.
    const GridFunction q = random_gaussian_mixture(g, 22);
    const GridFunction rh = adapted_fourier(r), qh = adapted_fourier(q);
    Complex lhs = 0.0, rhs = 0.0, plain = 0.0;
    const int m = g.m;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const std::size_t p = static_cast<std::size_t>(i) * m + j;
            const std::size_t neg = static_cast<std::size_t>((m - i) % m) * m + (m - j) % m;
            lhs += rh.values[p] * qh.values[p] * std::pow(rh.grid.h(), 2);
            rhs += r.values[p] * q.values[neg] * std::pow(g.h(), 2);
            plain += r.values[p] * f.values[p] * std::pow(g.h(), 2);
        }
    CHECK(std::abs(lhs - rhs) <= 1e-6 * std::abs(rhs));
    Complex plain_hat = 0.0;
    const GridFunction fhat = adapted_fourier(f);
    for (std::size_t p = 0; p < rh.values.size(); ++p) plain_hat += rh.values[p] * fhat.values[p] * std::pow(rh.grid.h(), 2);
    CHECK(std::abs(plain_hat - plain) <= 1e-6 * std::abs(plain));

    CHECK_THROWS_AS(adapted_fourier(GridFunction(Grid{1, 10, 8.0})), InputError);
}

TEST_CASE("Mehler kernel on the grid") {
    for (double mu : {1.0, -2.0}) {
        const Grid g{1, 64, 8.0};
        const GridFunction k = kernel_on_grid(minus_J(1), mu, 0.1, g);
        CHECK(relative_l2(k, mehler_space(g, mu, 0.1)) <= 1e-10);
    }
    CHECK_THROWS_AS(kernel_on_grid(minus_J(1), 1.0, 0.1, Grid{1, 16, 8.0}), AliasingError);
}

TEST_CASE("semigroup, contraction and ground state on the Mehler fixture") {
    const SemigroupReport r = semigroup_check(minus_J(1), 1.0, 0.1, 0.1, Grid{1, 64, 8.0}, 1, 10);
    CHECK(r.err_semigroup <= 1e-3);
    CHECK(r.err_contraction <= 1e-6);
    CHECK(r.err_ground_state >= 0.0);
    CHECK(r.err_ground_state <= 1e-6);
    CHECK(r.samples == 10);
    CHECK_THROWS_AS(semigroup_check(hamilton_from_A(spec_from_expression("X1^2-Y1^2", 1).A), 1.0, 0.1, 0.1,
                                    Grid{1, 64, 8.0}),
                    HypothesisError);
}

TEST_CASE("semigroup on a complex-coefficient psd operator") {
    // i(X1^2 + Y1^2) + X1^2 + Y1^2 has Re Q > 0 and a rotating phase.
    const CMatrix S = hamilton_from_A(spec_from_expression("(1+0.5i)*X1^2+(1+0.5i)*Y1^2", 1).A);
    const SemigroupReport r = semigroup_check(S, 1.0, 0.08, 0.06, Grid{1, 64, 8.0}, 3, 3);
    CHECK(r.err_semigroup <= 1e-3);
    CHECK(r.err_contraction <= 1e-6);
}

TEST_CASE("f x Gamma_t tends to f as t decreases") {
    const Grid g{1, 128, 8.0};
    const GridFunction f = random_gaussian_mixture(g, 7);
    const double e2 = relative_l2(twisted_convolve(f, kernel_on_grid(minus_J(1), 1.0, 0.02, g), 1.0), f);
    const double e1 = relative_l2(twisted_convolve(f, kernel_on_grid(minus_J(1), 1.0, 0.01, g), 1.0), f);
    CHECK(e1 < e2);
    CHECK(e2 / e1 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("semigroup quadrature converges under refinement") {
    // Closed-form kernels sampled directly, so coarse grids are allowed.
    double prev = 0.0;
    int k = 0;
    for (int m : {8, 16}) {
        const Grid g{1, m, 8.0};
        const double err = relative_l2(twisted_convolve(mehler_space(g, 1.0, 0.1), mehler_space(g, 1.0, 0.1), 1.0, {}, false),
                                       mehler_space(g, 1.0, 0.2));
        if (k++) CHECK(err * 3.0 <= prev);
        prev = err;
    }
}

TEST_CASE("central transform turns group convolution into twisted convolution") {
    auto f = [](double x, double y, double u) { return Complex(std::exp(-kPi * (x * x + y * y) - kPi * u * u / 2.25)); };
    auto g = [](double x, double y, double u) {
        return Complex(std::exp(-kPi * ((x - 0.3) * (x - 0.3) + 2.0 * y * y) - kPi * u * u / 2.25), 0.0) *
               std::exp(Complex(0.0, 0.7 * x));
    };
    CHECK(central_transform_identity(f, g, 1.0, Grid3{}).relative_error <= 1e-2);
    CHECK(central_transform_identity(f, g, 0.0, Grid3{}).relative_error <= 1e-6);
    CHECK_THROWS_AS(central_transform_identity(f, g, 1.0, Grid3{64, 6.0, 32, 12.0}), InputError);
}

TEST_CASE("binary and CSV output") {
    const Grid g{1, 16, 6.0};
    const GridFunction f = random_gaussian_mixture(g, 13);
    const auto path = (std::filesystem::temp_directory_path() / "heisolv_grid_roundtrip.bin").string();
    write_binary(f, path);
    const GridFunction r = read_binary(path);
    std::remove(path.c_str());
    CHECK(r.grid.n == 1);
    CHECK(r.grid.m == 16);
    CHECK(r.grid.L == 6.0);
    CHECK(r.values == f.values);
    const std::string csv = to_csv(f);
    CHECK(csv.rfind("x1,y1,re,im\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 257);
    CHECK_THROWS_AS(read_binary("/nonexistent/heisolv.bin"), InputError);
}

TEST_CASE("boundary mass guard") {
    const Grid g{1, 32, 4.0};
    CHECK_THROWS_AS(twisted_convolve(gaussian(g, 0.1), gaussian(g, 0.1), 1.0), AliasingError);
}

}
