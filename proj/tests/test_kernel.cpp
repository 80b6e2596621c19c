#include "heisolv/fixtures.hpp"
#include "heisolv/kernel.hpp"
#include "heisolv/spectral.hpp"
#include "heisolv/symplectic.hpp"
#include "heisolv/twisted.hpp"
#include "heisolv/verify.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace heisolv;
using test::maxabs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex I1(0.0, 1.0);

CMatrix S_of(const std::string& name, const std::vector<double>& p = {}) { return hamilton_from_A(fixture(name, p).A); }
CMatrix minus_J(int n) { return -standard_J(n).cast<Complex>(); }

// f(M) through the eigendecomposition, for diagonalizable M.
CMatrix eigen_apply(const CMatrix& M, Complex (*f)(Complex)) {
    Eigen::ComplexEigenSolver<CMatrix> es(M);
    CVector d = es.eigenvalues();
    for (int k = 0; k < d.size(); ++k) d(k) = f(d(k));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().inverse();
}

Complex ccos(Complex z) { return std::cos(z); }

CVector random_w(int d, std::mt19937_64& rng, double r = 1.0) {
    std::uniform_real_distribution<double> u(-r, r);
    CVector w(d);
    for (int a = 0; a < d; ++a) w(a) = u(rng);
    return w;
}

// The +-1 real semisimple n = 1 operator, S = diag(1, -1).
CMatrix real_pair_S() {
    RMatrix A(2, 2);
    A << 0.0, 1.0, 1.0, 0.0;
    return hamilton_from_A(A.cast<Complex>());
}

}  // namespace

TEST_SUITE("kernel-engine") {

TEST_CASE("matrix cosine and tangent") {
    const CMatrix C = matrix_cos(minus_J(1), 1.0);
    CHECK(maxabs(C - std::cosh(1.0) * CMatrix::Identity(2, 2)) < 1e-13);

    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k) {
        const CMatrix S = hamilton_from_A(test::random_symmetric(4, rng)) * 0.3;
        const Complex tau(0.7, k % 2 ? 0.2 : 0.0);
        CHECK(maxabs(matrix_cos(S, tau) - eigen_apply(CMatrix(tau * S), ccos)) < 1e-9);
    }

    CMatrix N = CMatrix::Zero(4, 4);
    N(2, 0) = 1.0;
    N(3, 1) = 2.0;
    CHECK(maxabs(matrix_cos(N, 3.0) - CMatrix::Identity(4, 4)) < 1e-14);

    CHECK(maxabs(matrix_cos(CMatrix::Zero(2, 2), 1.0) - CMatrix::Identity(2, 2)) == 0.0);
    CHECK(maxabs(matrix_tan(CMatrix::Zero(2, 2), 1.0)) == 0.0);

    // tan(-tJ) = -tanh(t) J
    CHECK(maxabs(matrix_tan(minus_J(1), 0.8) + std::tanh(0.8) * standard_J(1).cast<Complex>()) < 1e-13);

    // cos(pi/2 * diag(1, -1)) is singular.
    CHECK_THROWS_AS(matrix_tan(real_pair_S(), std::numbers::pi / 2), FocalTimeError);
}

TEST_CASE("branch-continuous square root of det cos") {
    CHECK(sqrt_det_cos(S_of("coupled_chain_n3"), 0.0).value == Complex(1.0));
    for (double t : {0.01, 0.1, 0.5, 1.0, 2.0})
        CHECK(std::abs(sqrt_det_cos(minus_J(1), t).value - std::cosh(kTwoPi * t)) < 1e-10 * std::cosh(kTwoPi * t));

    // Nilpotent block contributes a unipotent cos, so only the +-i pair is left.
    for (double t : {0.02, 0.1, 0.3})
        CHECK(std::abs(sqrt_det_cos(S_of("coupled_chain_n3"), t).value / std::cosh(kTwoPi * t) - 1.0) < 1e-10);

    // A real path through the double zero at t = 1/4 is refused even though det cos > 0 beyond it.
    CHECK_THROWS_AS(sqrt_det_cos(real_pair_S(), 0.4), FocalTimeError);
    CHECK_THROWS_AS(sqrt_det_cos(real_pair_S(), 0.25), FocalTimeError);
    // Slightly off the axis the path passes the zero and picks up the sign of cos(2 pi t).
    for (Complex t : {Complex(0.4, -0.01), Complex(0.4, 0.001), Complex(1.3, -1e-3)}) {
        const Complex expect = std::cos(kTwoPi * t);
        CHECK(std::abs(sqrt_det_cos(real_pair_S(), t).value - expect) < 1e-9 * std::abs(expect));
    }

    for (const auto& f : fixture_list()) {
        const CMatrix S = S_of(f.name);
        const double tf = first_focal_time(S);
        for (double frac : {0.1, 0.4, 0.8}) {
            const double t = frac * std::min(1.0, tf);
            const SqrtDetCos v = sqrt_det_cos(S, t);
            const Complex det = matrix_cos(S, kTwoPi * t).determinant();
            CHECK_MESSAGE(std::abs(v.value * v.value - det) <= 1e-8 * std::abs(det), f.name);
            CHECK(v.branch_residual < 1e-8);
            CHECK_MESSAGE(std::abs(v.value - sqrt_det_cos_eigen(S, t)) <= 1e-8 * std::abs(v.value), f.name);
        }
    }
}

TEST_CASE("Mehler closed form at 100 samples") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ut(0.0, 1.0), uw(-2.0, 2.0);
    const CMatrix S = minus_J(1);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double t = ut(rng), w1 = uw(rng), w2 = uw(rng);
        const Complex expect = std::exp(-kTwoPi * std::tanh(kTwoPi * t) * (w1 * w1 + w2 * w2)) / std::cosh(kTwoPi * t);
        CVector w(2);
        w << w1, w2;
        worst = std::max(worst, std::abs(gamma_hat(S, 1.0, t, w) - expect));
        CHECK(std::abs(mehler_hat(t, w1, w2) - expect) < 1e-14);
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("kernel at t = 0 and zero operator") {
    const KernelHat k = kernel_hat(S_of("rotation_family_n2"), 1.0, 0.0);
    CHECK(k.prefactor == Complex(1.0));
    CHECK(k.E.norm() == 0.0);
    CVector w(2);
    w << 0.3, -1.2;
    CHECK(gamma_hat(CMatrix::Zero(2, 2), 2.0, 0.7, w) == Complex(1.0));

    // E_t = O(t) near 0.
    const CMatrix S = S_of("coupled_chain_n3");
    const double e1 = kernel_hat(S, 1.0, 1e-4).E.norm(), e2 = kernel_hat(S, 1.0, 2e-4).E.norm();
    CHECK(e2 / e1 == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("exponent matrix is symmetric and complex t agrees with real t on the axis") {
    for (const auto& f : fixture_list()) {
        const CMatrix S = S_of(f.name);
        const double t = 0.3 * std::min(1.0, first_focal_time(S));
        const KernelHat k = kernel_hat(S, 1.0, t);
        CHECK(maxabs(k.E - k.E.transpose()) == 0.0);
        const KernelHat kc = kernel_hat(S, 1.0, Complex(t, 0.0));
        CHECK(maxabs(k.E - kc.E) < 1e-14);
        CHECK(std::abs(k.prefactor - kc.prefactor) < 1e-14);
    }
}

TEST_CASE("PDE residual") {
    CVector w(2);
    w << 1.0, 0.0;
    const PdeResidual mj = pde_residual(minus_J(1), 1.0, 0.1, w, 1e-4);
    CHECK(mj.residual <= 1e-6 * mj.scale);

    const PdeResidual z = pde_residual(CMatrix::Zero(2, 2), 1.0, 0.1, w, 1e-4);
    CHECK(z.residual == 0.0);

    CVector w4(4);
    w4 << 0.4, -0.2, 0.7, 0.1;
    const PdeResidual rf = pde_residual(S_of("rotation_family_n2"), 1.0, 0.05, w4, 1e-4);
    CHECK(rf.residual <= 1e-5 * rf.scale);

    std::mt19937_64 rng(23);
    for (const std::string name : {"sublaplacian_n1", "rotation_family_n2", "coupled_chain_n3", "mixed_spectrum_n2"}) {
        const CMatrix S = S_of(name);
        const double t_max = std::min(0.3, 0.4 * first_focal_time(S));
        std::uniform_real_distribution<double> ut(0.02 * t_max, t_max);
        for (double mu : {1.0, -2.0}) {
            double worst = 0.0;
            for (int k = 0; k < 25; ++k) {
                const PdeResidual r = pde_residual(S, mu, ut(rng), random_w(S.rows(), rng), 1e-4);
                worst = std::max(worst, r.residual / r.scale);
            }
            CHECK_MESSAGE(worst <= 1e-5, name);
        }
    }
}

TEST_CASE("factorization over the real / nonreal split") {
    std::mt19937_64 rng(31);
    for (const auto& f : fixture_list()) {
        const CMatrix S = S_of(f.name);
        const SplitDecomposition sp = split_real_nonreal(spectrum_clusters(S));
        if (maxabs(sp.S_r) < 1e-12 || maxabs(sp.S_i) < 1e-12) continue;
        const double tf = first_focal_time(S);
        for (int k = 0; k < 20; ++k) {
            const double t = (0.05 + 0.5 * (k / 20.0)) * std::min(1.0, tf);
            const CVector w = random_w(S.rows(), rng);
            const Complex full = gamma_hat(S, 1.0, t, w);
            const Complex prod = gamma_hat(sp.S_r, 1.0, t, w) * gamma_hat(sp.S_i, 1.0, t, w);
            CHECK_MESSAGE(std::abs(full - prod) <= 1e-8 * std::abs(full), f.name);
        }
    }
}

TEST_CASE("positivity of Re w^T E w for psd fixtures") {
    std::mt19937_64 rng(37);
    for (const auto& f : fixture_list()) {
        const CMatrix S = S_of(f.name);
        if (!re_q_psd(S).psd) continue;
        const double tf = first_focal_time(S);
        for (double t : {0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
            if (t > 0.95 * tf) continue;
            const KernelHat k = kernel_hat(S, 1.0, t);
            double worst = 0.0;
            for (int s = 0; s < 1000; ++s) {
                const CVector w = random_w(S.rows(), rng);
                worst = std::min(worst, (w.transpose() * k.E * w)(0, 0).real());
            }
            CHECK_MESSAGE(worst >= -1e-9, f.name);
        }
    }
}

TEST_CASE("geometric series for 1/cos and tan") {
    const SeriesValue c = series_inv_cos(I1, 1.0, 10);
    CHECK(std::abs(c.exact - 1.0 / std::cosh(1.0)) < 1e-15);
    CHECK(c.error <= 2.0 * std::exp(-21.0) / (1.0 - std::exp(-2.0)));
    const SeriesValue tn = series_tan(I1, 1.0, 10);
    CHECK(std::abs(tn.exact - I1 * std::tanh(1.0)) < 1e-15);
    CHECK(tn.error <= tn.tail_bound);

    for (Complex w : {I1, Complex(1.0, 1.0), Complex(0.0, 2.0)})
        for (double t : {0.5, 1.0, 2.0})
            for (int M : {5, 10, 20}) {
                const SeriesValue a = series_inv_cos(w, t, M);
                const SeriesValue b = series_tan(w, t, M);
                CHECK(std::abs(a.exact - 1.0 / std::cos(t * w)) < 1e-13);
                CHECK(std::abs(b.exact - std::tan(t * w)) < 1e-13);
                CHECK(a.error <= a.tail_bound * (1 + 1e-12) + 1e-15);
                CHECK(b.error <= b.tail_bound * (1 + 1e-12) + 1e-15);
            }
    CHECK_THROWS_AS(series_inv_cos(Complex(1.0, 0.0), 1.0, 5), InputError);
}

TEST_CASE("decay of the inverse cosine product") {
    const StructuralReport r = structural_report(fixture("coupled_chain_n3"));
    std::vector<double> ts;
    for (int k = 0; k <= 90; ++k) ts.push_back(1.0 + 0.1 * k);
    const DecayFit fit = decay_fit(r.omegas, ts);
    CHECK(fit.nu == doctest::Approx(r.nu));
    CHECK(-fit.slope >= r.nu - 0.01);
    CHECK(std::isfinite(fit.intercept));
}

TEST_CASE("Q_t form") {
    const QtForm q = q_t_form(minus_J(1), 0.6);
    CHECK(maxabs(q.Q - std::tanh(0.6) * CMatrix::Identity(2, 2)) < 1e-13);
    CHECK(maxabs(q_t_form(CMatrix::Zero(4, 4), 0.6).Q) == 0.0);

    const SplitDecomposition sp = split_real_nonreal(spectrum_clusters(S_of("conjugation_breaking_n3")));
    const QtForm qc = q_t_form(sp.S_i, 0.7);
    CHECK(qc.semisimple);
    CHECK(qc.decomposition_residual <= 1e-8);

    const QtForm qs = q_t_form(S_of("sublaplacian_n1"), 0.4);
    CHECK(qs.semisimple);
    CHECK(qs.decomposition_residual <= 1e-8);
}

TEST_CASE("real-block kernel") {
    // S = -iJ has spectrum {+-1} and Re Q_S = 0, so both sides decay once Im t < 0.
    const CMatrix S = -I1 * standard_J(1).cast<Complex>();
    // |Gamma(0)| sin(theta) = |mu| / 2 with |c| = 1; near 0 the rate is 1 / theta.
    const double theta = 1e-2;
    const RealBlockKernel rb = real_block_kernel(S, 1.0, theta);
    const double rate = std::abs(rb.value_without_c(RVector::Zero(2))) * theta / 0.5;
    CHECK(rate == doctest::Approx(1.0).epsilon(0.05));
    CHECK_THROWS_AS(real_block_kernel(real_pair_S(), 1.0, std::numbers::pi), FocalTimeError);

    std::vector<RVector> pts;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int k = 0; k < 10; ++k) {
        RVector v(2);
        v << u(rng), u(rng);
        pts.push_back(v);
    }
    const RealBlockCalibration cal = calibrate_real_block(S, 1.0, Complex(0.05, -0.05), Grid{1, 64, 8.0}, pts);
    CHECK(cal.modulus_error < 1e-3);
    CHECK(cal.max_relative_error < 1e-3);
    CHECK(cal.points == 10);
}

TEST_CASE("pairing estimate has a stable constant") {
    std::vector<double> th;
    for (int k = 1; k <= 40; ++k) th.push_back(0.05 * k);
    for (double delta : {0.0, 1.0}) {
        const PairingBound pb = pairing_bound(minus_J(1), 1.0, th, delta);
        CHECK(std::isfinite(pb.C));
        CHECK(pb.C > 0.0);
        CHECK(pb.C_half >= 0.5 * pb.C);
    }
    const PairingBound rf = pairing_bound(S_of("rotation_family_n2"), 1.0, th, 1.0);
    CHECK(std::isfinite(rf.C));
    CHECK(rf.skipped >= 0);
    CHECK(rf.thetas.size() + rf.skipped == th.size());
}

TEST_CASE("kernel data are invariant under symplectic conjugation") {
    // E transforms by congruence with T^-T, so prefactor and the spectrum of J^-1 E are unchanged.
    const OperatorSpec s = fixture("rotation_family_n2");
    const RMatrix T = random_real_symplectic(2, 3, 0.3);
    const CMatrix S = hamilton_from_A(s.A);
    const CMatrix S2 = hamilton_from_A(conjugate_spec(s, T).A);
    const double t = 0.1;
    const KernelHat k1 = kernel_hat(S, 1.0, t), k2 = kernel_hat(S2, 1.0, t);
    CHECK(std::abs(k1.prefactor - k2.prefactor) < 1e-10 * std::abs(k1.prefactor));
    const CMatrix J = standard_J(2).cast<Complex>();
    const auto e1 = test::eigenvalues(CMatrix(J.inverse() * k1.E));
    const auto e2 = test::eigenvalues(CMatrix(J.inverse() * k2.E));
    for (std::size_t k = 0; k < e1.size(); ++k) CHECK(std::abs(e1[k] - e2[k]) < 1e-7 * (1.0 + std::abs(e1[k])));
}

}
