#include "heisolv/kernel.hpp"
#include "heisolv/matfun.hpp"
#include "heisolv/spectral.hpp"
#include "heisolv/symplectic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace heisolv {

namespace {

int half(const CMatrix& S) { return static_cast<int>(S.rows() / 2); }

CMatrix symmetrize(const CMatrix& M) { return 0.5 * (M + M.transpose()); }

// One representative per +-pair: Re > 0, or Re == 0 and Im > 0. Zero clusters
// contribute alg_mult/2 copies of 0.
std::vector<std::pair<Complex, int>> pair_representatives(const ClusterSet& cs) {
    std::vector<std::pair<Complex, int>> out;
    for (std::size_t a = 0; a < cs.clusters.size(); ++a) {
        const auto& c = cs.clusters[a];
        if (c.pair == static_cast<int>(a)) {
            out.emplace_back(Complex(0.0), c.alg_mult / 2);
            continue;
        }
        const Complex l = c.lambda;
        if (l.real() > 0.0 || (l.real() == 0.0 && l.imag() > 0.0)) out.emplace_back(l, c.alg_mult);
    }
    return out;
}

}  // namespace

CMatrix matrix_cos(const CMatrix& S, Complex tau) { return matrix_cos_sin(CMatrix(tau * S)).cos; }

CMatrix matrix_tan(const CMatrix& S, Complex tau, const Tolerances& tol) {
    CosSin cs = matrix_cos_sin(CMatrix(tau * S));
    const Complex det = cs.cos.determinant();
    if (std::abs(det) < tol.det)
        throw FocalTimeError("near focal point: |det cos| = " + std::to_string(std::abs(det)), tau,
                             std::abs(det));
    return cs.cos.partialPivLu().solve(cs.sin);
}

SqrtDetCos sqrt_det_cos(const CMatrix& S, Complex t, const Tolerances& tol) {
    SqrtDetCos out;
    if (t == Complex(0.0)) return out;
    auto det_at = [&](double s) { return matrix_cos_sin(CMatrix((2.0 * kPi * s * t) * S)).cos.determinant(); };

    // Zeros of cos(s w), w = 2 pi t lambda over all eigenvalues, sit at s = (k + 1/2) pi / w. Along real s the path passes
    // closest at Re of that point, at distance |Im|. A real double zero leaves det cos positive on
    // both sides, so these points are sampled exactly and the step shrinks near them.
    struct Approach {
        double s, dist;
    };
    std::vector<Approach> near;
    double wmax = 1.0;
    const Eigen::ComplexEigenSolver<CMatrix> es(S, false);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        Complex w = 2.0 * kPi * t * es.eigenvalues()(j);
        if (std::abs(w) == 0.0) continue;
        wmax = std::max(wmax, std::abs(w));
        if ((kPi / w).real() < 0.0) w = -w;
        const Complex inv = kPi / w;
        // Beyond |Im| |w| = 3 the path stays where |cos| > 10 and needs no refinement.
        for (int k = 0;; ++k) {
            const Complex z = (k + 0.5) * inv;
            if (z.real() > 1.0 || std::abs(z.imag()) * std::abs(w) > 3.0) break;
            if (z.real() > 0.0) near.push_back({z.real(), std::abs(z.imag())});
        }
    }
    std::sort(near.begin(), near.end(), [](const Approach& a, const Approach& b) { return a.s < b.s; });

    double s = 0.0, h = 1.0 / 64.0;
    Complex d_prev = 1.0, r_prev = 1.0;
    std::size_t next = 0;
    while (s < 1.0) {
        while (next < near.size() && near[next].s <= s) ++next;
        double cap = 1.0 / (8.0 * wmax);
        for (const auto& a : near) cap = std::min(cap, std::max(1e-12, 0.25 * (std::abs(s - a.s) + a.dist)));
        double s_next = std::min({1.0, s + std::min(h, cap)});
        if (next < near.size()) s_next = std::min(s_next, near[next].s);
        const Complex d = det_at(s_next);
        if (std::abs(d) < tol.det)
            throw FocalTimeError("continuation path meets a focal time, |det cos| = " +
                                     std::to_string(std::abs(d)),
                                 s_next * t, std::abs(d));
        const double dphase = std::abs(std::arg(d / d_prev));
        if (dphase > kPi / 2 && h > 1e-12) {
            h *= 0.5;
            continue;
        }
        Complex r = std::sqrt(d);
        if (std::real(r * std::conj(r_prev)) < 0.0) r = -r;
        r_prev = r;
        d_prev = d;
        s = s_next;
        ++out.steps;
        if (dphase < kPi / 16) h = std::min(2.0 * h, 0.25);
    }
    out.value = r_prev;
    out.branch_residual = std::abs(r_prev * r_prev - d_prev) / std::abs(d_prev);
    return out;
}

Complex sqrt_det_cos_eigen(const CMatrix& S, Complex t, const Tolerances& tol) {
    const ClusterSet cs = spectrum_clusters(S, tol);
    Complex p = 1.0;
    for (const auto& [l, m] : pair_representatives(cs))
        for (int k = 0; k < m; ++k) p *= std::cos(2.0 * kPi * t * l);
    return p;
}

KernelHat kernel_hat(const CMatrix& S, double mu, Complex t, const Tolerances& tol) {
    if (mu == 0.0) throw InputError("mu must be nonzero");
    KernelHat k;
    k.mu = mu;
    k.t = t;
    const int n = half(S);
    if (t == Complex(0.0)) {
        k.E = CMatrix::Zero(2 * n, 2 * n);
        return k;
    }
    const SqrtDetCos sd = sqrt_det_cos(S, t, tol);
    CosSin cs = matrix_cos_sin(CMatrix((2.0 * kPi * t) * S));
    const Complex det = cs.cos.determinant();
    if (std::abs(det) < tol.det)
        throw FocalTimeError("near focal point: |det cos| = " + std::to_string(std::abs(det)), t, std::abs(det));
    const CMatrix tn = cs.cos.partialPivLu().solve(cs.sin);
    k.sqrt_det = sd.value;
    k.prefactor = 1.0 / sd.value;
    k.E = symmetrize(standard_J(n).cast<Complex>() * tn);
    k.identity_residual = cs.identity_residual;
    return k;
}

Complex gamma_hat(const KernelHat& k, const CVector& w) {
    const Complex q = w.transpose() * k.E * w;
    return k.prefactor * std::exp(-(2.0 * kPi / std::abs(k.mu)) * q);
}

Complex gamma_hat(const CMatrix& S, double mu, Complex t, const CVector& w, const Tolerances& tol) {
    return gamma_hat(kernel_hat(S, mu, t, tol), w);
}

Complex mehler_hat(double t, double w1, double w2) {
    const double a = 2.0 * kPi * t;
    return std::exp(-2.0 * kPi * std::tanh(a) * (w1 * w1 + w2 * w2)) / std::cosh(a);
}

PdeResidual pde_residual(const CMatrix& S, double mu, double t, const CVector& w, double h, const Tolerances& tol) {
    const int n = half(S);
    const CMatrix A = coefficient_from_S(S);
    const CMatrix J = standard_J(n).cast<Complex>();
    const KernelHat k0 = kernel_hat(S, mu, t, tol);
    auto at = [&](double dt) { return gamma_hat(kernel_hat(S, mu, t + dt, tol), w); };
    const Complex g0 = gamma_hat(k0, w);
    PdeResidual r;
    r.lhs = std::abs(mu) * (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);

    // hat Gamma = c exp(-kappa w^T E w): d_j = g_j Gamma, d_j d_k = (g_j g_k - 2 kappa E_jk) Gamma
    const double kappa = 2.0 * kPi / std::abs(mu);
    const CVector g = -2.0 * kappa * (k0.E * w);
    const CVector b = (-2.0 * kPi * kI) * (J * w);
    const Complex t2 = (mu * mu / 4.0) * (Complex(g.transpose() * A * g) - 2.0 * kappa * (A * k0.E).trace());
    const Complex t1 = (mu / 2.0) * ((-2.0 * kPi * kI) * (A * J).trace() + 2.0 * Complex(b.transpose() * A * g));
    const Complex t0 = b.transpose() * A * b;
    r.rhs = g0 * (t2 + t1 + t0);
    r.residual = std::abs(r.lhs - r.rhs);
    r.scale = std::abs(r.lhs) + std::abs(g0) * (std::abs(t2) + std::abs(t1) + std::abs(t0));
    return r;
}

SeriesValue series_inv_cos(Complex omega, double t, int M) {
    if (!(omega.imag() > 0.0)) throw InputError("series needs Im omega > 0");
    if (!(t > 0.0)) throw InputError("series needs t > 0");
    SeriesValue s;
    const Complex q = std::exp(kI * t * omega);
    Complex sum = 0.0;
    for (int m = 0; m < M; ++m) sum += (m % 2 ? -1.0 : 1.0) * std::pow(q, 2 * m + 1);
    s.partial = 2.0 * sum;
    s.exact = 1.0 / std::cos(t * omega);
    s.error = std::abs(s.partial - s.exact);
    const double a = std::abs(q);
    s.tail_bound = 2.0 * std::pow(a, 2 * M + 1) / (1.0 - a * a);
    return s;
}

SeriesValue series_tan(Complex omega, double t, int M) {
    if (!(omega.imag() > 0.0)) throw InputError("series needs Im omega > 0");
    if (!(t > 0.0)) throw InputError("series needs t > 0");
    SeriesValue s;
    const Complex q = std::exp(kI * t * omega);
    Complex sum = 0.0;
    for (int p = 0; p < M; ++p) sum += (p % 2 ? -1.0 : 1.0) * std::pow(q, 2 * (p + 1));
    s.partial = kI - 2.0 * kI * sum;
    s.exact = std::tan(t * omega);
    s.error = std::abs(s.partial - s.exact);
    const double a = std::abs(q);
    s.tail_bound = 2.0 * std::pow(a, 2 * M + 2) / (1.0 - a * a);
    return s;
}

DecayFit decay_fit(const std::vector<Complex>& omegas, const std::vector<double>& ts) {
    DecayFit f;
    for (const auto& w : omegas) f.nu += w.imag();
    const double m = static_cast<double>(ts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double t : ts) {
        double y = 0.0;
        for (const auto& w : omegas) y -= std::log(std::abs(std::cos(t * w)));
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    f.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / m;
    return f;
}

QtForm q_t_form(const CMatrix& S_i, double t, const Tolerances& tol) {
    const int n = half(S_i);
    const CMatrix J = standard_J(n).cast<Complex>();
    QtForm q;
    q.Q = symmetrize(J * matrix_tan(S_i, t, tol));
    const ClusterSet cs = spectrum_clusters(S_i, tol);
    const JordanPair jp = jordan_pair(cs);
    q.semisimple = opnorm(jp.N) <= tol.structure * std::max(cs.norm, 1.0);
    if (!q.semisimple) return q;
    CMatrix recon = CMatrix::Zero(2 * n, 2 * n);
    for (std::size_t a = 0; a < cs.clusters.size(); ++a) {
        const auto& c = cs.clusters[a];
        if (c.real || c.lambda.imag() <= 0.0) continue;
        const CMatrix Q0 = symmetrize(J * (c.projector - cs.clusters[c.pair].projector));
        q.omegas.push_back(c.lambda);
        q.Q0.push_back(Q0);
        recon += std::tan(c.lambda * t) * Q0;
    }
    q.decomposition_residual = opnorm(CMatrix(q.Q - recon)) / std::max(1.0, opnorm(q.Q));
    return q;
}

Complex RealBlockKernel::value_without_c(const RVector& v) const {
    const int n = static_cast<int>(v.size() / 2);
    const CVector vc = v.cast<Complex>();
    const Complex q = vc.transpose() * cot_form * vc;
    return std::pow(std::abs(mu) / 2.0, n) / sine_product * std::exp((kPi / 2.0) * std::abs(mu) * q);
}

RealBlockKernel real_block_kernel(const CMatrix& S, double mu, Complex theta, const Tolerances& tol) {
    if (mu == 0.0) throw InputError("mu must be nonzero");
    RealBlockKernel k;
    k.mu = mu;
    k.theta = theta;
    const ClusterSet cs = spectrum_clusters(S, tol);
    for (const auto& [l, m] : pair_representatives(cs))
        for (int j = 0; j < m; ++j) k.sine_product *= std::sin(theta * l);
    if (std::abs(k.sine_product) < tol.det)
        throw FocalTimeError("sine product vanishes", theta / (2.0 * kPi), std::abs(k.sine_product));
    CosSin csn = matrix_cos_sin(CMatrix(theta * S));
    const CMatrix cot = csn.sin.partialPivLu().solve(csn.cos);
    k.cot_form = symmetrize(standard_J(half(S)).cast<Complex>() * cot);
    return k;
}

Complex gaussian_pairing(const CMatrix& S, double mu, double theta, const Tolerances& tol) {
    const int n = half(S);
    const KernelHat k = kernel_hat(S, mu, theta / (2.0 * kPi), tol);
    const CMatrix M = (2.0 * kPi / std::abs(mu)) * k.E + kPi * CMatrix::Identity(2 * n, 2 * n);
    // Re M >= pi I, so every eigenvalue has positive real part and the principal roots give the right branch.
    Eigen::ComplexEigenSolver<CMatrix> es(M, false);
    Complex root = 1.0;
    for (int j = 0; j < M.rows(); ++j) root *= std::sqrt(es.eigenvalues()(j));
    return k.prefactor * std::pow(kPi, n) / root;
}

PairingBound pairing_bound(const CMatrix& S, double mu, const std::vector<double>& thetas, double delta,
                           const Tolerances& tol) {
    if (delta < 0.0 || delta > 1.0) throw InputError("delta must lie in [0, 1]");
    const ClusterSet cs = spectrum_clusters(S, tol);
    std::vector<Complex> omegas;
    std::vector<double> lambdas;
    for (const auto& [l, m] : pair_representatives(cs))
        for (int j = 0; j < m; ++j) {
            if (l == Complex(0.0)) continue;
            if (std::abs(l.imag()) <= tol.real * std::max(1.0, cs.norm)) lambdas.push_back(std::abs(l.real()));
            else omegas.push_back(l.imag() > 0 ? l : -l);
        }
    const double n2 = static_cast<double>(lambdas.size());
    PairingBound pb;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const double th = thetas[i];
        double den = 1.0;
        for (double l : lambdas) den *= std::pow(std::abs(std::sin(th * l)), delta);
        for (const auto& w : omegas) den *= std::abs(std::cos(th * w));
        const double rhs = std::pow(std::abs(mu), delta * n2) * std::pow(1.0 + std::pow(std::abs(mu), n2), 1.0 - delta) / den;
        Complex val;
        try {
            val = gaussian_pairing(S, mu, th, tol);
        } catch (const FocalTimeError&) {
            ++pb.skipped;
            continue;
        }
        if (!std::isfinite(rhs)) {
            ++pb.skipped;
            continue;
        }
        const double r = std::abs(val) / rhs;
        pb.thetas.push_back(th);
        pb.ratios.push_back(r);
        pb.C = std::max(pb.C, r);
        if (i % 2 == 0) pb.C_half = std::max(pb.C_half, r);
    }
    return pb;
}

}  // namespace heisolv
