#ifndef HEISOLV_KERNEL_HPP
#define HEISOLV_KERNEL_HPP

#include "heisolv/core.hpp"

#include <vector>

namespace heisolv {

// cos(tau S) and tan(tau S); tan throws FocalTimeError when |det cos| < tol.det.
CMatrix matrix_cos(const CMatrix& S, Complex tau);
CMatrix matrix_tan(const CMatrix& S, Complex tau, const Tolerances& tol = {});

struct SqrtDetCos {
    Complex value{1.0, 0.0};
    int steps = 0;
    double branch_residual = 0.0;  // |value^2 - det| / |det|
};

// Square root of det cos(2 pi t S) continued along the segment [0, t] from 1.
SqrtDetCos sqrt_det_cos(const CMatrix& S, Complex t, const Tolerances& tol = {});

// The same quantity as the eigenvalue product prod cos(2 pi t lambda_j), one
// lambda per +-pair (cos is even, so the choice inside a pair is irrelevant).
Complex sqrt_det_cos_eigen(const CMatrix& S, Complex t, const Tolerances& tol = {});

struct KernelHat {
    double mu = 1.0;
    Complex t{0.0, 0.0};
    Complex sqrt_det{1.0, 0.0};
    Complex prefactor{1.0, 0.0};  // 1 / sqrt_det
    CMatrix E;                    // symmetrized J tan(2 pi t S)
    double identity_residual = 0.0;
};

// hat Gamma_t(w) = prefactor * exp(-(2 pi/|mu|) w^T E w)
KernelHat kernel_hat(const CMatrix& S, double mu, Complex t, const Tolerances& tol = {});
Complex gamma_hat(const KernelHat& k, const CVector& w);
Complex gamma_hat(const CMatrix& S, double mu, Complex t, const CVector& w, const Tolerances& tol = {});

// cosh(2 pi t)^{-1} exp(-2 pi tanh(2 pi t) |w|^2), the S = -J, mu = 1 kernel.
Complex mehler_hat(double t, double w1, double w2);

struct PdeResidual {
    Complex lhs, rhs;
    double residual = 0.0;
    double scale = 0.0;  // |lhs| + |Gamma| (|T_2| + |T_1| + |T_0|), the size of the terms that cancel
};

// |mu| d/dt hat Gamma versus hat L hat Gamma with hat V_j = (mu/2) d_{w_j} - 2 pi i (J w)_j.
// The t-derivative is the five-point central difference of step h; w-derivatives are exact.
PdeResidual pde_residual(const CMatrix& S, double mu, double t, const CVector& w, double h,
                         const Tolerances& tol = {});

struct SeriesValue {
    Complex partial, exact;
    double error = 0.0;
    double tail_bound = 0.0;
};

// 1/cos(t w) = 2 sum_m (-1)^m e^{(2m+1) i t w}, M terms; Im w > 0.
SeriesValue series_inv_cos(Complex omega, double t, int M);
// tan(t w) = i - 2i sum_p (-1)^p e^{2 i (p+1) w t}, M terms; Im w > 0.
SeriesValue series_tan(Complex omega, double t, int M);

struct DecayFit {
    double slope = 0.0;      // fitted d/dt log prod |cos t w_j|^{-1}
    double intercept = 0.0;  // log C
    double nu = 0.0;
};

DecayFit decay_fit(const std::vector<Complex>& omegas, const std::vector<double>& ts);

struct QtForm {
    CMatrix Q;                     // symmetrized J tan(t S_i)
    bool semisimple = false;
    double decomposition_residual = 0.0;  // |Q - sum tan(w_j t) Q_j0|, semisimple case only
    std::vector<Complex> omegas;
    std::vector<CMatrix> Q0;
};

QtForm q_t_form(const CMatrix& S_i, double t, const Tolerances& tol = {});

// Space-side kernel of a block with nonzero sine product:
//   c (|mu|/2)^k / prod sin(theta lambda_j) * exp((pi/2)|mu| sigma(v, cot(theta S) v))
// where k = n and lambda_j runs over one eigenvalue per +-pair (Re > 0, or
// Re = 0 and Im > 0). theta = 2 pi t in the kernel time t. For real spectrum
// the kernel is a chirp at real theta and a decaying Gaussian once Im theta < 0.
struct RealBlockKernel {
    double mu = 1.0;
    Complex theta{0.0, 0.0};
    Complex sine_product{1.0, 0.0};
    CMatrix cot_form;  // symmetrized J cot(theta S)
    Complex c{1.0, 0.0};
    Complex value_without_c(const RVector& v) const;
    Complex value(const RVector& v) const { return c * value_without_c(v); }
};

RealBlockKernel real_block_kernel(const CMatrix& S, double mu, Complex theta, const Tolerances& tol = {});

// <Gamma_{theta/2pi}, phi> for phi = exp(-pi |v|^2), whose adapted transform is itself:
//   int hat Gamma(w) e^{-pi |w|^2} dw = prefactor * pi^n / sqrt det(kappa E + pi I).
// The ratio to |mu|^{delta n2} (1 + |mu|^{n2})^{1-delta} / (prod |sin theta lambda_k|^delta prod |cos theta omega_j|)
// is bounded by a constant C; the fit is the max ratio over the theta grid.
struct PairingBound {
    std::vector<double> thetas;      // grid points that were evaluated
    std::vector<double> ratios;
    double C = 0.0;                  // max ratio over the grid
    double C_half = 0.0;             // max ratio over every other grid point
    int skipped = 0;                 // focal or near-focal points
};

Complex gaussian_pairing(const CMatrix& S, double mu, double theta, const Tolerances& tol = {});
PairingBound pairing_bound(const CMatrix& S, double mu, const std::vector<double>& thetas, double delta,
                           const Tolerances& tol = {});

}  // namespace heisolv

#endif
