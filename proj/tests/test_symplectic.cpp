#include "heisolv/fixtures.hpp"
#include "heisolv/spectral.hpp"
#include "heisolv/symplectic.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace heisolv;
using test::maxabs;

namespace {
const Complex I1(0.0, 1.0);
}

TEST_SUITE("symplectic-core") {

TEST_CASE("standard J") {
    RMatrix J1(2, 2);
    J1 << 0, 1, -1, 0;
    CHECK(standard_J(1) == J1);
    const RMatrix J2 = standard_J(2);
    CHECK(J2.topRightCorner(2, 2) == RMatrix::Identity(2, 2));
    CHECK(J2.bottomLeftCorner(2, 2) == -RMatrix::Identity(2, 2));
    CHECK(J2.topLeftCorner(2, 2).isZero(0.0));
    const RMatrix J3 = standard_J(3);
    CHECK(J3 * J3 == -RMatrix::Identity(6, 6));
    CHECK(J3.transpose() == -J3);
}

TEST_CASE("Hamilton map of the identity is -J") {
    const CMatrix S = hamilton_from_A(CMatrix::Identity(2, 2));
    CHECK(maxabs(S + standard_J(1).cast<Complex>()) == 0.0);
}

TEST_CASE("Hamilton map of the coupled chain matches the displayed matrix") {
    const double b = 1.0;
    const CMatrix S = hamilton_from_A(fixture("coupled_chain_n3", {b}).A);
    CMatrix E = CMatrix::Zero(6, 6);
    E(0, 1) = I1;
    E(1, 2) = I1 * b;
    E(1, 4) = -1.0;
    E(2, 5) = -1.0;
    E(4, 3) = -I1;
    E(5, 2) = 1.0;
    E(5, 4) = -I1 * b;
    CHECK(maxabs(S - E) < 1e-15);
}

TEST_CASE("rotation family splits as the displayed D + N") {
    const double m = 5, c1 = 3, c2 = 4;
    const CMatrix S = hamilton_from_A(fixture("rotation_family_n2", {m, c1, c2}).A);
    CMatrix iJ(2, 2), C(2, 2);
    iJ << 0, I1, -I1, 0;
    C << c1, c2, c2, -c1;
    CMatrix D = CMatrix::Zero(4, 4), N = CMatrix::Zero(4, 4);
    D.topLeftCorner(2, 2) = iJ;
    D.bottomRightCorner(2, 2) = iJ;
    D.bottomLeftCorner(2, 2) = C;
    N.bottomLeftCorner(2, 2) = m * CMatrix::Identity(2, 2);
    CHECK(maxabs(S - D - N) < 1e-15);
    const JordanPair jp = jordan_pair(spectrum_clusters(S));
    CHECK(maxabs(jp.D - D) < 1e-9);
    CHECK(maxabs(jp.N - N) < 1e-9);
}

TEST_CASE("coefficient and quadratic-form round trips") {
    std::mt19937_64 rng(3);
    for (int n = 1; n <= 3; ++n) {
        const CMatrix A = test::random_symmetric(2 * n, rng);
        const CMatrix S = hamilton_from_A(A);
        CHECK(maxabs(coefficient_from_S(S) - A) < 1e-14);
        const CMatrix J = standard_J(n).cast<Complex>();
        CHECK(maxabs(-J * quadratic_form_matrix(S) * J - A) < 1e-14);
        CHECK(sp_residual(S) < 1e-13);
        CHECK(in_sp(S));
    }
    CHECK(maxabs(quadratic_form_matrix(CMatrix::Zero(2, 2))) == 0.0);
}

TEST_CASE("psd boundary of the rotation family") {
    CHECK(re_q_psd(hamilton_from_A(fixture("rotation_family_n2", {5, 3, 4}).A)).psd);
    CHECK_FALSE(re_q_psd(hamilton_from_A(fixture("rotation_family_n2", {4.99, 3, 4}).A)).psd);
    const PsdResult r = re_q_psd(hamilton_from_A(CMatrix::Identity(2, 2)));
    CHECK(r.psd);
    CHECK(r.min_eigenvalue == doctest::Approx(1.0));
    CHECK(re_a_psd(fixture("mixed_spectrum_n2").A).psd);
}

TEST_CASE("random symplectic matrices and conjugation") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (int n = 1; n <= 3; ++n) {
            const RMatrix T = random_real_symplectic(n, seed);
            CHECK(symplectic_residual(T) < 1e-10 * std::max(1.0, T.squaredNorm()));
        }
    }
    const CMatrix S = -standard_J(1).cast<Complex>();
    CHECK(maxabs(symplectic_conjugate(S, RMatrix::Identity(2, 2)) - S) == 0.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ev = test::eigenvalues(symplectic_conjugate(S, random_real_symplectic(1, seed)));
        CHECK(std::abs(ev[0] - Complex(0, -1)) < 1e-9);
        CHECK(std::abs(ev[1] - Complex(0, 1)) < 1e-9);
    }
    RMatrix bad = RMatrix::Identity(2, 2);
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS(symplectic_conjugate(S, bad), NotSymplecticError);
}

TEST_CASE("conjugate_spec agrees with conjugating S") {
    const OperatorSpec s = fixture("coupled_chain_n3");
    const RMatrix T = random_real_symplectic(3, 9, 0.5);
    const OperatorSpec c = conjugate_spec(s, T);
    CHECK(maxabs(hamilton_from_A(c.A) - symplectic_conjugate(hamilton_from_A(s.A), T)) < 1e-10);
}

TEST_CASE("psd verdict is invariant under conjugation") {
    for (const auto& p : {std::vector<double>{5, 3, 4}, std::vector<double>{4.99, 3, 4}}) {
        const OperatorSpec s = fixture("rotation_family_n2", p);
        const bool base = re_a_psd(s.A).psd;
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
            CHECK(re_a_psd(conjugate_spec(s, random_real_symplectic(2, seed, 0.3)).A).psd == base);
    }
}

TEST_CASE("commutator rule") {
    std::mt19937_64 rng(5);
    const CMatrix S1 = hamilton_from_A(test::random_symmetric(4, rng));
    const CMatrix S2 = hamilton_from_A(test::random_symmetric(4, rng));
    const CMatrix C = commutator_coefficients(S1, S2);
    CHECK(maxabs(C - C.transpose()) < 1e-12);
    CHECK(maxabs(hamilton_from_A(C) - commutator(S1, S2)) < 1e-12);
}

TEST_CASE("symbol of Q_S") {
    const CMatrix S = hamilton_from_A(CMatrix::Identity(2, 2));
    CVector v(2), w(2);
    v << 1.0, 2.0;
    w << -1.0, 0.5;
    const CMatrix M = quadratic_form_matrix(S);
    CHECK(std::abs(q_of(S, v, w) - Complex(v.transpose() * M * w)) < 1e-15);
}

}
