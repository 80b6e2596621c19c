#include "heisolv/symplectic.hpp"
#include "heisolv/matfun.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace heisolv {

RMatrix standard_J(int n) {
    RMatrix J = RMatrix::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = RMatrix::Identity(n, n);
    J.bottomLeftCorner(n, n) = -RMatrix::Identity(n, n);
    return J;
}

static int half_dim(const CMatrix& S) {
    if (S.rows() != S.cols() || S.rows() % 2 != 0)
        throw InputError("expected a square matrix of even size");
    return static_cast<int>(S.rows() / 2);
}

CMatrix hamilton_from_A(const CMatrix& A) {
    return -A * standard_J(half_dim(A)).cast<Complex>();
}

CMatrix coefficient_from_S(const CMatrix& S) {
    return S * standard_J(half_dim(S)).cast<Complex>();
}

CMatrix quadratic_form_matrix(const CMatrix& S) {
    return standard_J(half_dim(S)).cast<Complex>() * S;
}

Complex q_of(const CMatrix& S, const CVector& v, const CVector& w) {
    return v.transpose() * quadratic_form_matrix(S) * w;
}

double sp_residual(const CMatrix& S) {
    const CMatrix J = standard_J(half_dim(S)).cast<Complex>();
    return opnorm(CMatrix(S.transpose() * J + J * S));
}

bool in_sp(const CMatrix& S, const Tolerances& tol) {
    return sp_residual(S) <= tol.sp * (1.0 + opnorm(S));
}

double symplectic_residual(const RMatrix& T) {
    if (T.rows() != T.cols() || T.rows() % 2 != 0) return std::numeric_limits<double>::infinity();
    const RMatrix J = standard_J(static_cast<int>(T.rows() / 2));
    return opnorm(RMatrix(T.transpose() * J * T - J));
}

PsdResult re_a_psd(const CMatrix& A, const Tolerances& tol) {
    const RMatrix R = 0.5 * (A.real() + A.real().transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(R, Eigen::EigenvaluesOnly);
    PsdResult r;
    r.min_eigenvalue = es.eigenvalues()(0);
    r.threshold = -tol.psd * (1.0 + opnorm(A));
    r.psd = r.min_eigenvalue >= r.threshold;
    return r;
}

PsdResult re_q_psd(const CMatrix& S, const Tolerances& tol) {
    return re_a_psd(coefficient_from_S(S), tol);
}

CMatrix symplectic_conjugate(const CMatrix& S, const RMatrix& T, double tol) {
    const double r = symplectic_residual(T);
    if (!(r <= tol * std::max(1.0, opnorm(T) * opnorm(T))))
        throw NotSymplecticError("T is not symplectic, residual " + std::to_string(r), r);
    const CMatrix Tc = T.cast<Complex>();
    return Tc * S * Tc.partialPivLu().inverse();
}

OperatorSpec conjugate_spec(const OperatorSpec& spec, const RMatrix& T, double tol) {
    const double r = symplectic_residual(T);
    if (!(r <= tol * std::max(1.0, opnorm(T) * opnorm(T))))
        throw NotSymplecticError("T is not symplectic, residual " + std::to_string(r), r);
    OperatorSpec out = spec;
    const CMatrix Tc = T.cast<Complex>();
    out.A = Tc * spec.A * Tc.transpose();
    out.A = 0.5 * (out.A + out.A.transpose()).eval();
    return out;
}

RMatrix random_real_symplectic(int n, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    RMatrix H(2 * n, 2 * n);
    for (int j = 0; j < 2 * n; ++j)
        for (int k = j; k < 2 * n; ++k) H(j, k) = H(k, j) = u(rng);
    return matrix_exp(RMatrix(standard_J(n) * H));
}

CMatrix commutator_coefficients(const CMatrix& S1, const CMatrix& S2) {
    return coefficient_from_S(commutator(S1, S2));
}

}  // namespace heisolv
