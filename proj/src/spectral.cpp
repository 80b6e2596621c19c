#include "heisolv/spectral.hpp"
#include "heisolv/symplectic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace heisolv {

namespace {

constexpr double kUnit = std::numeric_limits<double>::epsilon() / 2;

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

// Swap diagonal entries k, k+1 of a complex Schur form by a Givens rotation.
void swap_adjacent(CMatrix& T, CMatrix& Q, int k) {
    const Complex a = T(k, k), b = T(k, k + 1), c = T(k + 1, k + 1);
    const Complex x1 = b, x2 = c - a;
    const double r = std::hypot(std::abs(x1), std::abs(x2));
    if (r == 0.0) return;
    Eigen::Matrix2cd G;
    G << x1 / r, -std::conj(x2 / r), x2 / r, std::conj(x1 / r);
    T.middleCols(k, 2) = T.middleCols(k, 2) * G;
    T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
    Q.middleCols(k, 2) = Q.middleCols(k, 2) * G;
    T(k + 1, k) = 0.0;
}

// Moves the flagged diagonal positions to the leading block, preserving order.
void reorder_schur(CMatrix& T, CMatrix& Q, std::vector<bool> sel) {
    const int d = static_cast<int>(T.rows());
    int top = 0;
    for (int j = 0; j < d; ++j) {
        if (!sel[j]) continue;
        for (int k = j; k > top; --k) {
            swap_adjacent(T, Q, k - 1);
            std::swap(sel[k - 1], sel[k]);
        }
        ++top;
    }
}

// Solves T11 X - X T22 = C with both T's upper triangular.
CMatrix triangular_sylvester(const CMatrix& T11, const CMatrix& T22, const CMatrix& C) {
    const auto k = T11.rows(), m = T22.rows();
    CMatrix X(k, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        CVector rhs = C.col(j);
        for (Eigen::Index i = 0; i < j; ++i) rhs += X.col(i) * T22(i, j);
        CMatrix M = T11 - T22(j, j) * CMatrix::Identity(k, k);
        X.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
    }
    return X;
}

CMatrix orthonormalize(const CMatrix& M, double tol) {
    if (M.cols() == 0) return CMatrix(M.rows(), 0);
    Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s(0));
    int r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return svd.matrixU().leftCols(r);
}

RMatrix orthonormalize(const RMatrix& M, double tol) {
    if (M.cols() == 0) return RMatrix(M.rows(), 0);
    Eigen::JacobiSVD<RMatrix> svd(M, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s(0));
    int r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return svd.matrixU().leftCols(r);
}

double safe_norm(double x) { return x > 0.0 ? x : 1.0; }

}  // namespace

CMatrix null_space(const CMatrix& M, double tol) {
    Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s.size() ? s(0) : 0.0);
    int r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return svd.matrixV().rightCols(M.cols() - r);
}

RMatrix null_space(const RMatrix& M, double tol) {
    Eigen::JacobiSVD<RMatrix> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s.size() ? s(0) : 0.0);
    int r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return svd.matrixV().rightCols(M.cols() - r);
}

double subspace_distance(const CMatrix& A, const CMatrix& B) {
    if (A.cols() == 0) return 0.0;
    if (B.cols() == 0) return 1.0;
    return opnorm(CMatrix(A - B * (B.adjoint() * A)));
}

ClusterSet spectrum_clusters(const CMatrix& S, const Tolerances& tol) {
    const int d = static_cast<int>(S.rows());
    if (S.cols() != d || d % 2 != 0) throw InputError("S must be square of even size");
    ClusterSet out;
    out.S = S;
    out.tol = tol;
    out.norm = opnorm(S);

    if (out.norm == 0.0) {
        SpectrumCluster c;
        c.lambda = 0.0;
        c.alg_mult = d;
        c.basis = CMatrix::Identity(d, d);
        c.projector = CMatrix::Identity(d, d);
        c.pair = 0;
        c.real = true;
        out.clusters.push_back(c);
        out.min_gap = std::numeric_limits<double>::infinity();
        return out;
    }

    Eigen::ComplexSchur<CMatrix> schur(S);
    if (schur.info() != Eigen::Success) throw NumericError("Schur decomposition failed");
    const CMatrix T0 = schur.matrixT();
    const CMatrix Q0 = schur.matrixU();
    std::vector<Complex> ev(d);
    for (int i = 0; i < d; ++i) ev[i] = T0(i, i);

    const double tol_c = tol.cluster * out.norm;
    const double loose = std::max(tol_c, 10.0 * std::pow(kUnit, 1.0 / d) * out.norm);

    UnionFind tight(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (std::abs(ev[i] - ev[j]) <= tol_c) tight.unite(i, j);
    UnionFind wide(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (std::abs(ev[i] - ev[j]) <= loose) wide.unite(i, j);

    // Wide groups made of several tight groups are accepted only if the
    // mean has the full algebraic multiplicity as a numerical kernel dimension.
    std::vector<int> label(d);
    for (int i = 0; i < d; ++i) label[i] = tight.find(i);
    for (int root = 0; root < d; ++root) {
        std::vector<int> members;
        for (int i = 0; i < d; ++i)
            if (wide.find(i) == root) members.push_back(i);
        if (members.size() < 2) continue;
        bool several = false;
        for (int i : members) several = several || label[i] != label[members[0]];
        if (!several) continue;
        Complex mean = 0.0;
        for (int i : members) mean += ev[i];
        mean /= static_cast<double>(members.size());
        const int k = static_cast<int>(members.size());
        CMatrix shifted = S - mean * CMatrix::Identity(d, d);
        CMatrix P = CMatrix::Identity(d, d);
        for (int p = 0; p < k; ++p) P = P * shifted;
        Eigen::JacobiSVD<CMatrix> svd(P);
        const auto& s = svd.singularValues();
        const double cut = 1e-8 * std::pow(out.norm, k);
        int kernel = 0;
        for (int i = 0; i < s.size(); ++i)
            if (s(i) <= cut) ++kernel;
        if (kernel >= k)
            for (int i : members) label[i] = label[members[0]];
    }

    std::vector<std::vector<int>> groups;
    {
        std::vector<int> roots;
        for (int i = 0; i < d; ++i)
            if (std::find(roots.begin(), roots.end(), label[i]) == roots.end()) roots.push_back(label[i]);
        for (int r : roots) {
            std::vector<int> g;
            for (int i = 0; i < d; ++i)
                if (label[i] == r) g.push_back(i);
            groups.push_back(g);
        }
    }
    std::vector<Complex> centers;
    for (const auto& g : groups) {
        Complex m = 0.0;
        for (int i : g) m += ev[i];
        centers.push_back(m / static_cast<double>(g.size()));
    }
    std::vector<int> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (centers[a].real() != centers[b].real()) return centers[a].real() < centers[b].real();
        return centers[a].imag() < centers[b].imag();
    });

    for (int gi : order) {
        SpectrumCluster c;
        c.lambda = centers[gi];
        c.alg_mult = static_cast<int>(groups[gi].size());
        for (int i : groups[gi]) c.spread = std::max(c.spread, std::abs(ev[i] - c.lambda));
        out.clusters.push_back(c);
    }
    const int nc = static_cast<int>(out.clusters.size());

    out.min_gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < nc; ++a)
        for (int b = a + 1; b < nc; ++b)
            out.min_gap = std::min(out.min_gap, std::abs(out.clusters[a].lambda - out.clusters[b].lambda));
    if (out.min_gap <= 2.0 * tol_c)
        throw ClusteringAmbiguity("eigenvalue clusters within twice the merge radius, gap " +
                                      std::to_string(out.min_gap),
                                  out.min_gap);

    // +-lambda pairing
    for (int a = 0; a < nc; ++a) {
        auto& c = out.clusters[a];
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int b = 0; b < nc; ++b) {
            double dd = std::abs(c.lambda + out.clusters[b].lambda);
            if (dd < bd) {
                bd = dd;
                best = b;
            }
        }
        const double ptol = 2.0 * loose + c.spread + out.clusters[best].spread;
        if (bd > ptol || out.clusters[best].alg_mult != c.alg_mult)
            throw NumericError("eigenvalue " + std::to_string(c.lambda.real()) + "+" +
                               std::to_string(c.lambda.imag()) + "i has no partner at -lambda");
        c.pair = best;
    }
    for (int a = 0; a < nc; ++a) {
        if (out.clusters[out.clusters[a].pair].pair != a)
            throw NumericError("inconsistent +-lambda pairing of eigenvalue clusters");
    }
    std::vector<Complex> sym(nc);
    for (int a = 0; a < nc; ++a) {
        const auto& c = out.clusters[a];
        sym[a] = c.pair == a ? Complex(0.0) : 0.5 * (c.lambda - out.clusters[c.pair].lambda);
    }
    const double tol_r = tol.real * out.norm;
    for (int a = 0; a < nc; ++a) {
        auto& c = out.clusters[a];
        c.lambda = sym[a];
        const double im = std::abs(c.lambda.imag());
        if (im > tol_r && im <= 2.0 * tol_r)
            throw ClusteringAmbiguity("eigenvalue with |Im| " + std::to_string(im) +
                                          " too close to the real cut",
                                      im - tol_r);
        c.real = im <= tol_r;
        if (c.real) c.lambda = Complex(c.lambda.real(), 0.0);
    }

    // generalized eigenspaces and spectral projectors
    std::vector<int> pos_cluster(d);
    for (int a = 0; a < nc; ++a)
        for (int i : groups[order[a]]) pos_cluster[i] = a;
    CMatrix Psum = CMatrix::Zero(d, d);
    for (int a = 0; a < nc; ++a) {
        auto& c = out.clusters[a];
        CMatrix T = T0, Q = Q0;
        std::vector<bool> sel(d);
        for (int i = 0; i < d; ++i) sel[i] = pos_cluster[i] == a;
        reorder_schur(T, Q, sel);
        const int k = c.alg_mult;
        c.basis = Q.leftCols(k);
        if (k == d) {
            c.projector = CMatrix::Identity(d, d);
        } else {
            CMatrix X = triangular_sylvester(T.topLeftCorner(k, k), T.bottomRightCorner(d - k, d - k),
                                             -T.topRightCorner(k, d - k));
            CMatrix E = CMatrix::Zero(d, d);
            E.topLeftCorner(k, k).setIdentity();
            E.topRightCorner(k, d - k) = -X;
            c.projector = Q * E * Q.adjoint();
        }
        Psum += c.projector;
    }
    out.projector_residual = opnorm(CMatrix(Psum - CMatrix::Identity(d, d)));
    return out;
}

SplitDecomposition split_real_nonreal(const ClusterSet& cs) {
    const auto d = cs.S.rows();
    SplitDecomposition sp;
    sp.P_r = CMatrix::Zero(d, d);
    sp.D_r = CMatrix::Zero(d, d);
    sp.D_i = CMatrix::Zero(d, d);
    CMatrix br(d, 0), bi(d, 0);
    for (const auto& c : cs.clusters) {
        CMatrix& target = c.real ? br : bi;
        CMatrix grown(d, target.cols() + c.basis.cols());
        grown << target, c.basis;
        target = grown;
        if (c.real) {
            sp.P_r += c.projector;
            sp.D_r += c.lambda * c.projector;
        } else {
            sp.D_i += c.lambda * c.projector;
        }
    }
    sp.P_i = CMatrix::Identity(d, d) - sp.P_r;
    sp.S_r = cs.S * sp.P_r;
    sp.S_i = cs.S * sp.P_i;
    sp.N_r = sp.S_r - sp.D_r;
    sp.N_i = sp.S_i - sp.D_i;
    sp.basis_Vr = orthonormalize(br, 1e-10);
    sp.basis_Vi = orthonormalize(bi, 1e-10);
    return sp;
}

JordanPair jordan_pair(const ClusterSet& cs) {
    const auto d = cs.S.rows();
    JordanPair jp;
    jp.D = CMatrix::Zero(d, d);
    for (const auto& c : cs.clusters) jp.D += c.lambda * c.projector;
    jp.N = cs.S - jp.D;
    jp.commutator_residual = opnorm(commutator(jp.D, jp.N));
    CMatrix P = CMatrix::Identity(d, d);
    for (Eigen::Index k = 0; k < d; ++k) P = P * jp.N;
    jp.nilpotent_residual = opnorm(P);
    jp.sp_residual = std::max(sp_residual(jp.D), sp_residual(jp.N));
    return jp;
}

int nilpotency_step(const CMatrix& N, double scale, double tol) {
    const auto d = N.rows();
    const double s = safe_norm(scale);
    CMatrix P = N;
    for (int k = 1; k <= d; ++k) {
        if (opnorm(P) <= tol * std::pow(s, k)) return k;
        P = P * N;
    }
    throw NumericError("matrix is not nilpotent within tolerance");
}

PropertyR check_property_R(const ClusterSet& cs) {
    PropertyR r;
    for (std::size_t a = 0; a < cs.clusters.size(); ++a) {
        const auto& c = cs.clusters[a];
        if (!c.real || c.lambda.real() <= 0.0) continue;
        const auto& p = cs.clusters[c.pair];
        CMatrix both(c.basis.rows(), c.basis.cols() + p.basis.cols());
        both << c.basis, p.basis;
        CMatrix U = orthonormalize(both, 1e-10);
        PairDistance w{c.lambda, subspace_distance(U.conjugate(), U)};
        r.vacuous = false;
        if (w.distance > cs.tol.subspace) r.holds = false;
        r.witnesses.push_back(w);
    }
    return r;
}

PropertyC check_property_C(const CMatrix& D, const Tolerances& tol) {
    PropertyC c;
    const RMatrix D1 = D.real(), D2 = D.imag();
    c.residual = opnorm(RMatrix(D1 * D2 - D2 * D1));
    const double nd = opnorm(D);
    c.holds = c.residual <= tol.structure * std::max(nd * nd, 1e-300);
    if (nd == 0.0) c.holds = true;
    return c;
}

double re_q_min_eigenvalue(const CMatrix& X) {
    const CMatrix M = quadratic_form_matrix(X);
    const RMatrix R = 0.5 * (M.real() + M.real().transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(R, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

ReQSr check_re_q_sr(const ClusterSet& cs, const SplitDecomposition& split) {
    ReQSr r;
    const double ns = safe_norm(cs.norm);
    if (split.basis_Vr.cols() == 0) {
        r.subspace_test = true;
    } else {
        const CMatrix Z = (cs.S * split.basis_Vr).conjugate();
        r.subspace_residual = opnorm(CMatrix(Z - split.basis_Vr * (split.basis_Vr.adjoint() * Z))) / ns;
        r.subspace_test = r.subspace_residual <= cs.tol.subspace;
    }
    r.form_min_eigenvalue = re_q_min_eigenvalue(split.S_r);
    r.form_test = r.form_min_eigenvalue >= -cs.tol.psd * (1.0 + cs.norm);
    r.cross_check_applies = re_q_psd(cs.S, cs.tol).psd;
    if (r.cross_check_applies && r.subspace_test != r.form_test)
        throw NumericError("Re Q_{S_r} tests disagree: subspace residual " +
                           std::to_string(r.subspace_residual) + ", form min eigenvalue " +
                           std::to_string(r.form_min_eigenvalue));
    r.holds = r.form_test;
    return r;
}

ConjugateEigenspaceChecks conjugate_eigenspace_checks(const ClusterSet& cs) {
    if (!re_q_psd(cs.S, cs.tol).psd) throw HypothesisError("Re Q_S is not positive semidefinite");
    ConjugateEigenspaceChecks out;
    const auto d = cs.S.rows();
    const double ns = safe_norm(cs.norm);
    const RMatrix S1 = cs.S.real();
    for (const auto& c : cs.clusters) {
        if (!c.real || c.lambda.real() < 0.0) continue;
        const CMatrix I = CMatrix::Identity(d, d);
        const CMatrix Kp = null_space(CMatrix(cs.S - c.lambda * I), 1e-8);
        const CMatrix Km = null_space(CMatrix(cs.S + c.lambda * I), 1e-8);
        KernelPairCheck k;
        k.lambda = c.lambda;
        k.dim = static_cast<int>(Kp.cols());
        k.conj_distance = Kp.cols() == Km.cols() ? subspace_distance(Kp.conjugate(), Km) : 1.0;
        const CMatrix S1c = S1.cast<Complex>();
        k.s1_annihilation = std::max(opnorm(CMatrix(S1c * Kp)), opnorm(CMatrix(S1c * Km))) / ns;
        k.holds = k.conj_distance <= cs.tol.subspace && k.s1_annihilation <= cs.tol.subspace;
        out.holds = out.holds && k.holds;
        out.checks.push_back(k);
    }
    return out;
}

SubspacePair compute_W_K(const ClusterSet& cs, const JordanPair& jp) {
    for (const auto& c : cs.clusters)
        if (!c.real) throw HypothesisError("spectrum is not real");
    if (!re_q_psd(cs.S, cs.tol).psd) throw HypothesisError("Re Q_S is not positive semidefinite");
    const double ns = safe_norm(cs.norm);
    const double t = 10.0 * cs.tol.structure;
    if (opnorm(CMatrix(jp.N * jp.N)) > t * ns * ns) throw HypothesisError("N^2 is not zero");

    const auto d = cs.S.rows();
    const int n = static_cast<int>(d / 2);
    const RMatrix J = standard_J(n);
    const RMatrix N1 = jp.N.real(), N2 = jp.N.imag();
    const RMatrix S1 = cs.S.real(), S2 = cs.S.imag();
    const RMatrix D1 = jp.D.real(), D2 = jp.D.imag();

    SubspacePair sp;
    RMatrix both(d, 2 * d);
    both << N1, N2;
    if (opnorm(both) <= t * ns)
        sp.W = RMatrix(d, 0);
    else
        sp.W = orthonormalize(both, 1e-7);
    sp.K = sp.W.cols() == 0 ? RMatrix(RMatrix::Identity(d, d)) : null_space(RMatrix(sp.W.transpose() * J), 1e-8);
    sp.W_dim = static_cast<int>(sp.W.cols());
    sp.K_dim = static_cast<int>(sp.K.cols());

    auto rec = [&](const std::string& name, double v, double lim) {
        sp.residuals.emplace_back(name, v);
        return v <= lim;
    };
    const RMatrix Id = RMatrix::Identity(d, d);
    const RMatrix PK = sp.K * sp.K.transpose();
    const RMatrix PW = sp.W * sp.W.transpose();
    sp.w_isotropic = rec("W isotropic", sp.W_dim ? opnorm(RMatrix(sp.W.transpose() * J * sp.W)) : 0.0, t);
    sp.w_in_k = rec("W in K", sp.W_dim ? opnorm(RMatrix(sp.W - PK * sp.W)) : 0.0, 1e-7);
    sp.s1_kills_k = rec("S1 K = 0", opnorm(RMatrix(S1 * sp.K)) / ns, 1e-7);
    sp.s2_keeps_k = rec("S2 K in K", opnorm(RMatrix((Id - PK) * S2 * sp.K)) / ns, 1e-7);
    sp.s2_keeps_w = rec("S2 W in W", sp.W_dim ? opnorm(RMatrix((Id - PW) * S2 * sp.W)) / ns : 0.0, 1e-7);
    const double np = std::max({opnorm(RMatrix(N1 * N2)), opnorm(RMatrix(N2 * N1)), opnorm(RMatrix(N1 * N1)),
                                opnorm(RMatrix(N2 * N2))});
    sp.n_products_vanish = rec("N1N2, N2N1, N1^2, N2^2", np / (ns * ns), t);
    RMatrix stacked(2 * d, d);
    stacked << N1, N2;
    RMatrix kerN = opnorm(stacked) <= t * ns ? RMatrix(RMatrix::Identity(d, d)) : null_space(stacked, 1e-7);
    double kd = 1.0;
    if (kerN.cols() == sp.K.cols())
        kd = subspace_distance(kerN.cast<Complex>(), sp.K.cast<Complex>());
    sp.k_is_kernel = rec("K = Ker N1 cap Ker N2", kd, 1e-7);
    sp.s1_squared_zero = rec("S1^2", opnorm(RMatrix(S1 * S1)) / (ns * ns), t);
    sp.s1s2_commutator_matches =
        rec("[S1,S2] - [D1,D2]", opnorm(RMatrix((S1 * S2 - S2 * S1) - (D1 * D2 - D2 * D1))) / (ns * ns), t);
    return sp;
}

ConeCondition cone_condition(const CMatrix& S, const Tolerances& tol, int samples) {
    const int d = static_cast<int>(S.rows());
    const CMatrix A = coefficient_from_S(S);
    const RMatrix A1 = 0.5 * (A.real() + A.real().transpose());
    const RMatrix A2 = 0.5 * (A.imag() + A.imag().transpose());
    const RMatrix J = standard_J(d / 2);
    const double na = safe_norm(opnorm(A));
    const double wt = tol.psd * (1.0 + opnorm(A));
    ConeCondition cc;

    // Q_S(v) = (J v)^T A (J v); work with u = J v and map witnesses back by v = -J u.
    auto report_witness = [&](const RVector& u) {
        RVector v = -J * u;
        v /= v.norm();
        RVector uu = J * v;
        cc.witness = v;
        cc.witness_re = uu.dot(A1 * uu);
        cc.witness_im = uu.dot(A2 * uu);
    };

    // quasi-random lower bound on |Im Q| / Re Q
    auto radical_inverse = [](int i, int base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        return r;
    };
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (int s = 1; s <= samples; ++s) {
        RVector u(d);
        for (int j = 0; j < d; ++j) u(j) = 2.0 * radical_inverse(s, primes[j % 12]) - 1.0;
        const double nu = u.norm();
        if (nu == 0.0) continue;
        u /= nu;
        const double re = u.dot(A1 * u), im = u.dot(A2 * u);
        if (re > wt) cc.constant_lower_bound = std::max(cc.constant_lower_bound, std::abs(im) / re);
    }

    Eigen::SelfAdjointEigenSolver<RMatrix> es(A1);
    if (es.eigenvalues()(0) < -wt) {
        report_witness(es.eigenvectors().col(0));
        cc.holds = false;
        return cc;
    }
    int r = 0;
    while (r < d && es.eigenvalues()(r) <= wt) ++r;
    const RMatrix K0 = es.eigenvectors().leftCols(r);
    const RMatrix B = es.eigenvectors().rightCols(d - r);
    const RMatrix A2K = A2 * K0;
    if (r > 0 && opnorm(A2K) > 1e-9 * na) {
        cc.holds = false;
        // a kernel direction with Im Q != 0 is a witness by itself
        Eigen::SelfAdjointEigenSolver<RMatrix> ek(RMatrix(K0.transpose() * A2 * K0));
        const int top = ek.eigenvalues().cwiseAbs().maxCoeff() > 1e-6 * na ? 1 : 0;
        if (top) {
            Eigen::Index idx;
            ek.eigenvalues().cwiseAbs().maxCoeff(&idx);
            report_witness(K0 * ek.eigenvectors().col(idx));
        } else {
            Eigen::JacobiSVD<RMatrix> svd(A2K, Eigen::ComputeThinV);
            const RVector k = K0 * svd.matrixV().col(0);
            const RVector w = A2 * k;
            const double a = std::max(w.dot(A1 * w), 1e-300);
            const double eps = std::sqrt(0.1 * wt / a);
            // unnormalized on purpose: Re Q tiny, Im Q of order eps |A2 k|^2
            RVector u = k + eps * w;
            cc.witness = RVector(-J * u);
            cc.witness_re = u.dot(A1 * u);
            cc.witness_im = u.dot(A2 * u);
        }
        return cc;
    }
    cc.holds = true;
    if (d - r > 0) {
        const RMatrix P = B.transpose() * A1 * B;
        const RMatrix R = B.transpose() * A2 * B;
        Eigen::LLT<RMatrix> llt(P);
        const RMatrix L = llt.matrixL();
        const RMatrix Li = L.inverse();
        Eigen::SelfAdjointEigenSolver<RMatrix> eg(RMatrix(Li * R * Li.transpose()), Eigen::EigenvaluesOnly);
        cc.constant = eg.eigenvalues().cwiseAbs().maxCoeff();
    }
    return cc;
}

StructuralReport structural_report(const OperatorSpec& spec, const Tolerances& tol) {
    validate_spec(spec);
    StructuralReport r;
    r.n = spec.n;
    r.tol = tol;
    const CMatrix S = hamilton_from_A(spec.A);
    const ClusterSet cs = spectrum_clusters(S, tol);
    r.norm_S = cs.norm;
    const double ns = safe_norm(cs.norm);
    const double zt = tol.structure * ns;
    for (const auto& c : cs.clusters) {
        r.clusters.emplace_back(c.lambda, c.alg_mult);
        for (int k = 0; k < c.alg_mult; ++k) r.spectrum.push_back(c.lambda);
        if (!c.real && c.lambda.imag() > 0.0)
            for (int k = 0; k < c.alg_mult; ++k) r.omegas.push_back(c.lambda);
        if (c.real && c.lambda.real() > 0.0)
            for (int k = 0; k < c.alg_mult; ++k) r.lambdas.push_back(c.lambda.real());
    }
    for (const auto& w : r.omegas) r.nu_list.push_back(w.imag());
    r.nu = std::accumulate(r.nu_list.begin(), r.nu_list.end(), 0.0);
    r.nu_min = r.nu_list.empty() ? 0.0 : *std::min_element(r.nu_list.begin(), r.nu_list.end());

    const PsdResult psd = re_q_psd(S, tol);
    r.re_q_psd = psd.psd;
    r.re_q_min_eig = psd.min_eigenvalue;

    const SplitDecomposition split = split_real_nonreal(cs);
    const JordanPair jp = jordan_pair(cs);
    r.property_R = check_property_R(cs);
    r.property_C = check_property_C(jp.D, tol);
    r.re_q_sr = check_re_q_sr(cs, split);
    r.re_q_sr_psd = r.re_q_sr.holds;
    r.re_q_si_psd = re_q_min_eigenvalue(split.S_i) >= -tol.psd * (1.0 + cs.norm);
    r.cone = cone_condition(S, tol);
    r.nilpotency_N = nilpotency_step(jp.N, ns, tol.structure);
    r.nilpotency_Nr = nilpotency_step(split.N_r, ns, tol.structure);
    r.s_r_zero = opnorm(split.S_r) <= zt;
    r.s_i_zero = opnorm(split.S_i) <= zt;
    r.re_s_zero = opnorm(RMatrix(S.real())) <= zt;
    r.re_d_r_zero = opnorm(RMatrix(split.D_r.real())) <= zt;
    try {
        const SubspacePair wk = compute_W_K(cs, jp);
        r.W_dim = wk.W_dim;
        r.K_dim = wk.K_dim;
    } catch (const HypothesisError&) {
    }
    return r;
}

}  // namespace heisolv
