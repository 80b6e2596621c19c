#ifndef HEISOLV_SPECTRAL_HPP
#define HEISOLV_SPECTRAL_HPP

#include "heisolv/core.hpp"
#include "heisolv/operator_spec.hpp"

#include <optional>
#include <string>
#include <vector>

namespace heisolv {

struct SpectrumCluster {
    Complex lambda;      // symmetrized center: lambda(pair) == -lambda exactly
    int alg_mult = 0;
    CMatrix basis;       // orthonormal basis of the generalized eigenspace
    CMatrix projector;   // spectral projector onto it along the other clusters
    int pair = -1;       // index of the cluster at -lambda (itself for 0)
    bool real = false;   // |Im lambda| <= tol.real * |S|
    double spread = 0.0; // max distance of the raw eigenvalues from the center
};

struct ClusterSet {
    CMatrix S;
    double norm = 0.0;
    std::vector<SpectrumCluster> clusters;
    double min_gap = 0.0;             // smallest distance between distinct centers
    double projector_residual = 0.0;  // |sum P - I|
    Tolerances tol;
};

// Schur-based clustering. Eigenvalues within tol.cluster*|S| merge; wider groups
// (up to the Jordan-block perturbation radius) merge only if (S - mean)^k has a
// k-dimensional numerical kernel. Throws ClusteringAmbiguity / NumericError.
ClusterSet spectrum_clusters(const CMatrix& S, const Tolerances& tol = {});

struct SplitDecomposition {
    CMatrix S_r, S_i;
    CMatrix P_r, P_i;
    CMatrix basis_Vr, basis_Vi;
    CMatrix D_r, N_r, D_i, N_i;
};

SplitDecomposition split_real_nonreal(const ClusterSet& cs);

struct JordanPair {
    CMatrix D, N;
    double commutator_residual = 0.0;  // |DN - ND|
    double nilpotent_residual = 0.0;   // |N^{2n}|
    double sp_residual = 0.0;          // max over D, N
};

JordanPair jordan_pair(const ClusterSet& cs);

// Smallest k with |N^k| <= tol * scale^k; N = 0 gives 1. Throws if none <= dim.
int nilpotency_step(const CMatrix& N, double scale, double tol = 1e-9);

struct PairDistance {
    Complex lambda;
    double distance = 0.0;
};

struct PropertyR {
    bool holds = true;
    bool vacuous = true;
    std::vector<PairDistance> witnesses;
};

PropertyR check_property_R(const ClusterSet& cs);

struct PropertyC {
    bool holds = false;
    double residual = 0.0;
};

PropertyC check_property_C(const CMatrix& D, const Tolerances& tol = {});

struct ReQSr {
    bool holds = false;
    bool subspace_test = false;
    bool form_test = false;
    double subspace_residual = 0.0;
    double form_min_eigenvalue = 0.0;
    bool cross_check_applies = false;  // Re Q_S >= 0, so both tests must agree
};

// Throws NumericError if Re Q_S >= 0 and the two tests disagree.
ReQSr check_re_q_sr(const ClusterSet& cs, const SplitDecomposition& split);

// Hermitian-form test of Re Q_X >= 0 on V^C, i.e. Re(J X) psd.
double re_q_min_eigenvalue(const CMatrix& X);

struct KernelPairCheck {
    Complex lambda;
    int dim = 0;
    double conj_distance = 0.0;   // conj Ker(S - lambda) vs Ker(S + lambda)
    double s1_annihilation = 0.0; // |Re S * basis|
    bool holds = false;
};

struct ConjugateEigenspaceChecks {
    std::vector<KernelPairCheck> checks;
    bool holds = true;
};

// Requires Re Q_S >= 0, otherwise HypothesisError.
ConjugateEigenspaceChecks conjugate_eigenspace_checks(const ClusterSet& cs);

struct SubspacePair {
    RMatrix W, K;  // orthonormal real bases
    int W_dim = 0, K_dim = 0;
    bool w_isotropic = false;
    bool w_in_k = false;
    bool s1_kills_k = false;
    bool s2_keeps_k = false;
    bool s2_keeps_w = false;
    bool n_products_vanish = false;  // N1N2 = N2N1 = N1^2 = N2^2 = 0
    bool k_is_kernel = false;        // K = Ker N1 cap Ker N2
    bool s1_squared_zero = false;
    bool s1s2_commutator_matches = false;  // [S1, S2] = [D1, D2]
    std::vector<std::pair<std::string, double>> residuals;
    bool all() const {
        return w_isotropic && w_in_k && s1_kills_k && s2_keeps_k && s2_keeps_w &&
               n_products_vanish && k_is_kernel && s1_squared_zero && s1s2_commutator_matches;
    }
};

// Requires real spectrum, Re Q_S >= 0 and N^2 = 0, otherwise HypothesisError.
SubspacePair compute_W_K(const ClusterSet& cs, const JordanPair& jp);

struct ConeCondition {
    bool holds = false;
    double constant_lower_bound = 0.0;  // max |Im Q| / Re Q over sampled unit vectors
    double constant = 0.0;              // exact value from the generalized eigenproblem
    std::optional<RVector> witness;     // Re Q(v) <= tol, |Im Q(v)| > tol
    double witness_re = 0.0, witness_im = 0.0;
};

ConeCondition cone_condition(const CMatrix& S, const Tolerances& tol = {}, int samples = 4096);

struct StructuralReport {
    int n = 0;
    std::vector<Complex> spectrum;  // cluster centers repeated by multiplicity
    std::vector<std::pair<Complex, int>> clusters;
    std::vector<Complex> omegas;    // eigenvalues of S_i with Im > 0, with multiplicity
    std::vector<double> nu_list;
    double nu = 0.0, nu_min = 0.0;
    std::vector<double> lambdas;    // |real eigenvalues| > 0, one per pair, with multiplicity
    bool re_q_psd = false;
    double re_q_min_eig = 0.0;
    PropertyR property_R;
    PropertyC property_C;
    bool re_q_sr_psd = false, re_q_si_psd = false;
    ReQSr re_q_sr;
    ConeCondition cone;
    int nilpotency_N = 1, nilpotency_Nr = 1;
    bool s_r_zero = false, s_i_zero = false;
    bool re_s_zero = false, re_d_r_zero = false;
    int W_dim = -1, K_dim = -1;  // -1 when the hypotheses of compute_W_K fail
    double norm_S = 0.0;
    Tolerances tol;
};

StructuralReport structural_report(const OperatorSpec& spec, const Tolerances& tol = {});

// Real orthonormal basis for the null space of M (SVD cut tol * max(1, |M|)).
CMatrix null_space(const CMatrix& M, double tol);
RMatrix null_space(const RMatrix& M, double tol);
// Largest principal angle surrogate |(I - P_B) A| for orthonormal A, B.
double subspace_distance(const CMatrix& A, const CMatrix& B);

}  // namespace heisolv

#endif
