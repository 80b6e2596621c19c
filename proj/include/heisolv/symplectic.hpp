#ifndef HEISOLV_SYMPLECTIC_HPP
#define HEISOLV_SYMPLECTIC_HPP

#include "heisolv/core.hpp"
#include "heisolv/operator_spec.hpp"

#include <cstdint>

namespace heisolv {

class NotSymplecticError : public HypothesisError {
public:
    NotSymplecticError(const std::string& msg, double r) : HypothesisError(msg), residual(r) {}
    double residual;
};

// J = [[0, I], [-I, 0]] in the basis (X_1..X_n, Y_1..Y_n); sigma(v, w) = v^T J w.
RMatrix standard_J(int n);

// S = -A J and its inverse A = S J.
CMatrix hamilton_from_A(const CMatrix& A);
CMatrix coefficient_from_S(const CMatrix& S);

// Q_S(v, w) = sigma(v, S w) = v^T (J S) w; J S = J A J^T is symmetric.
CMatrix quadratic_form_matrix(const CMatrix& S);
Complex q_of(const CMatrix& S, const CVector& v, const CVector& w);

double sp_residual(const CMatrix& S);  // |S^T J + J S|
bool in_sp(const CMatrix& S, const Tolerances& tol = {});

double symplectic_residual(const RMatrix& T);  // |T^T J T - J|

struct PsdResult {
    bool psd = false;
    double min_eigenvalue = 0.0;  // of Re A, equivalently of Re(J S)
    double threshold = 0.0;
};

// Re Q_S >= 0 on real vectors. Accepts S; A is recovered as S J.
PsdResult re_q_psd(const CMatrix& S, const Tolerances& tol = {});
PsdResult re_a_psd(const CMatrix& A, const Tolerances& tol = {});

// T S T^{-1}; throws NotSymplecticError if T is not symplectic.
CMatrix symplectic_conjugate(const CMatrix& S, const RMatrix& T, double tol = 1e-9);

// The same change of basis on the coefficient matrix: A -> T A T^T.
OperatorSpec conjugate_spec(const OperatorSpec& spec, const RMatrix& T, double tol = 1e-9);

// exp(J H) with H symmetric, entries uniform in [-scale, scale].
RMatrix random_real_symplectic(int n, std::uint64_t seed, double scale = 1.0);

// [L_{S1}, L_{S2}] = -2 L_{[S1,S2]} U; returns the coefficient matrix of [S1,S2].
CMatrix commutator_coefficients(const CMatrix& S1, const CMatrix& S2);

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

}  // namespace heisolv

#endif
