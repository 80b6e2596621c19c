#include "heisolv/classifier.hpp"
#include "heisolv/fixtures.hpp"
#include "heisolv/symplectic.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace heisolv {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Continued-fraction snap with denominator <= max_den; empty if the residual exceeds tol * max(1, |x|).
std::optional<Rational> snap(double x, double tol = 1e-12, long long max_den = 1000000) {
    if (!std::isfinite(x)) return std::nullopt;
    if (x == std::floor(x) && std::abs(x) < 1e15) return Rational(static_cast<long long>(x));
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        const double a = std::floor(r);
        if (std::abs(a) > 1e15) break;
        const long long ai = static_cast<long long>(a);
        const long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= tol * std::max(1.0, std::abs(x)))
            return Rational(h1, k1);
        const double frac = r - a;
        if (frac == 0.0) break;
        r = 1.0 / frac;
    }
    return std::nullopt;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

std::string fmt(Complex z) {
    std::ostringstream os;
    os.precision(6);
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

std::string fmt_k(const std::vector<int>& k) {
    std::string s = "(";
    for (std::size_t j = 0; j < k.size(); ++j) s += (j ? "," : "") + std::to_string(k[j]);
    return s + ")";
}

double min_eig_re(const CMatrix& A) {
    const RMatrix R = 0.5 * (A.real() + A.real().transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(R, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

RMatrix real_span(const CMatrix& M, double tol) {
    RMatrix both(M.rows(), 2 * M.cols());
    both << M.real(), M.imag();
    Eigen::JacobiSVD<RMatrix> svd(both, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s.size() ? s(0) : 0.0);
    int r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return svd.matrixU().leftCols(r);
}

// Signed frequencies of a semisimple purely imaginary S with real spectrum: the sign of
// lambda_j is the sign of Im Q_S on the real invariant plane of +-lambda_j.
std::vector<double> signed_frequencies(const CMatrix& S, const Tolerances& tol) {
    const ClusterSet cs = spectrum_clusters(S, tol);
    const CMatrix Q = quadratic_form_matrix(S);
    const RMatrix Qi = 0.5 * (Q.imag() + Q.imag().transpose());
    std::vector<double> out;
    for (const auto& c : cs.clusters) {
        if (!c.real || c.lambda.real() <= 0.0) continue;
        const CMatrix P = c.projector + cs.clusters[c.pair].projector;
        const RMatrix B = real_span(P, 1e-8);
        const RMatrix F = B.transpose() * Qi * B;
        Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (F + F.transpose()), Eigen::EigenvaluesOnly);
        int pos = 0, neg = 0;
        for (int k = 0; k < es.eigenvalues().size(); ++k) (es.eigenvalues()(k) > 0.0 ? pos : neg)++;
        for (int k = 0; k < pos / 2; ++k) out.push_back(c.lambda.real());
        for (int k = 0; k < neg / 2; ++k) out.push_back(-c.lambda.real());
    }
    return out;
}

void add(Certificate& c, const std::string& name, bool value) { c.hypotheses.emplace_back(name, value); }

}  // namespace

// ---------------------------------------------------------------------------

ConditionQReport condition_2q(Complex alpha, const std::vector<double>& lambdas_in, int k_max, int m_max,
                              bool exact_mode) {
    ConditionQReport r;
    r.k_max = k_max;
    r.m_max = m_max;
    const int n = static_cast<int>(lambdas_in.size());
    if (n == 0) throw InputError("condition scan needs at least one frequency");
    if (k_max < 0 || m_max < 0) throw InputError("K_max and M_max must be nonnegative");
    for (double l : lambdas_in)
        if (!std::isfinite(l) || l == 0.0) throw InputError("frequencies must be finite and nonzero");
    std::vector<double> lambdas = lambdas_in;

    // Exact arithmetic when every input snaps to a rational.
    std::vector<Rational> lq;
    std::optional<Rational> are, aim;
    bool rational = exact_mode;
    if (rational) {
        are = snap(alpha.real());
        aim = snap(alpha.imag());
        rational = are && aim;
        for (double l : lambdas) {
            const auto q = snap(l);
            if (!q) {
                rational = false;
                break;
            }
            lq.push_back(*q);
        }
    }
    r.exact = rational;

    const double scale = std::max(1.0, std::abs(alpha));
    auto is_zero = [&](const std::vector<int>& k, int sign) {
        if (rational) {
            if (*are != 0) return false;
            Rational s = 0;
            for (int j = 0; j < n; ++j) s += (2 * k[j] + 1) * lq[j];
            return *aim + sign * s == 0;
        }
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += (2 * k[j] + 1) * lambdas[j];
        return std::abs(alpha + Complex(0.0, sign * s)) <= 1e-12 * scale;
    };
    auto record_zero = [&](const std::vector<int>& k, int sign) {
        for (std::size_t z = 0; z < r.zero_witnesses.size(); ++z)
            if (r.zero_witnesses[z] == k && r.zero_signs[z] == sign) return;
        r.zero_witnesses.push_back(k);
        r.zero_signs.push_back(sign);
    };

    // Shell scan |k|_1 = K for K <= k_max.
    r.shell_min.assign(k_max + 1, std::numeric_limits<double>::infinity());
    r.min_distance = std::numeric_limits<double>::infinity();
    std::vector<int> k(n, 0);
    std::function<void(int, int, int)> shell = [&](int j, int left, int K) {
        if (j == n - 1) {
            k[j] = left;
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += (2 * k[a] + 1) * lambdas[a];
            for (int sign : {1, -1}) {
                ++r.scanned;
                double d = std::abs(alpha + Complex(0.0, sign * s));
                if (d < 1e-6 * scale && is_zero(k, sign)) {
                    record_zero(k, sign);
                    d = 0.0;
                }
                if (d < r.shell_min[K]) r.shell_min[K] = d;
                if (d < r.min_distance) {
                    r.min_distance = d;
                    r.argmin_k = k;
                    r.argmin_sign = sign;
                }
            }
            return;
        }
        for (int v = 0; v <= left; ++v) {
            k[j] = v;
            shell(j + 1, left - v, K);
        }
    };
    for (int K = 0; K <= k_max; ++K) shell(0, K, K);

    // With frequencies of one sign the sums grow without bound, so zeros can only occur where
    // sum (2k_j+1)|lambda_j| <= |Im alpha|; that region is searched completely.
    const bool same_sign = std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return l > 0; }) ||
                           std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return l < 0; });
    bool complete = false;
    if (same_sign) {
        complete = true;
        const double budget = std::abs(alpha.imag()) + 1e-9 * scale;
        std::vector<double> al(n);
        for (int j = 0; j < n; ++j) al[j] = std::abs(lambdas[j]);
        std::size_t nodes = 0;
        std::function<void(int, double)> dfs = [&](int j, double used) {
            if (++nodes > 20000000) {
                complete = false;
                return;
            }
            double rest = 0.0;
            for (int a = j; a < n; ++a) rest += al[a];
            if (used + rest > budget) return;
            if (j == n) {
                for (int sign : {1, -1})
                    if (is_zero(k, sign)) record_zero(k, sign);
                return;
            }
            for (int v = 0;; ++v) {
                k[j] = v;
                if (used + (2 * v + 1) * al[j] + (rest - al[j]) > budget || !complete) break;
                dfs(j + 1, used + (2 * v + 1) * al[j]);
            }
            k[j] = 0;
        };
        dfs(0, 0.0);
    }

    // Smallest M whose running bound min_K D(K)(1+K)^M is attained in the first half of the scan.
    for (int M = 0; M <= m_max; ++M) {
        double c = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int K = 0; K <= k_max; ++K) {
            const double v = r.shell_min[K] * std::pow(1.0 + K, M);
            if (v < c) {
                c = v;
                arg = K;
            }
        }
        if (c > 0.0 && 2 * arg <= k_max) {
            r.fit_C = c;
            r.fit_M = M;
            break;
        }
    }

    if (!r.zero_witnesses.empty())
        r.classification = QClass::Violated;
    else if ((rational && same_sign && complete) || (same_sign && complete && r.min_distance > 1e-12 * scale))
        r.classification = QClass::Plausible;
    else if (rational && r.fit_M >= 0)
        r.classification = QClass::Plausible;
    else
        r.classification = QClass::Inconclusive;
    return r;
}

// ---------------------------------------------------------------------------

std::vector<Complex> ExceptionalSet::alphas() const {
    std::vector<Complex> out;
    for (const auto& v : values) out.push_back(v.alpha);
    return out;
}

std::vector<Complex> ExceptionalSet::u_coefficients() const {
    std::vector<Complex> out;
    for (const auto& v : values) out.push_back(v.u_coefficient);
    return out;
}

ExceptionalSet exceptional_set(const std::vector<Complex>& omegas, double bound) {
    for (const auto& w : omegas)
        if (!(w.imag() > 0.0) || !std::isfinite(w.real())) throw InputError("exceptional set needs Im omega_j > 0");
    ExceptionalSet es;
    es.omegas = omegas;
    es.bound = bound;
    const int n = static_cast<int>(omegas.size());
    if (n == 0) return es;
    const double eps = 1e-12 * std::max(1.0, std::abs(bound));
    std::vector<int> k(n, 0);
    std::function<void(int, double, Complex)> dfs = [&](int j, double weight, Complex sum) {
        if (j == n) {
            for (int sign : {1, -1}) {
                ExceptionalValue v;
                v.alpha = static_cast<double>(sign) * kI * sum;
                v.u_coefficient = kI * v.alpha;
                v.k = k;
                v.sign = sign;
                v.weight = weight;
                es.values.push_back(v);
            }
            return;
        }
        double rest = 0.0;
        for (int a = j + 1; a < n; ++a) rest += omegas[a].imag();
        for (int v = 0;; ++v) {
            const double w = weight + (2 * v + 1) * omegas[j].imag();
            if (w + rest > bound + eps) break;
            k[j] = v;
            dfs(j + 1, w, sum + static_cast<double>(2 * v + 1) * omegas[j]);
        }
        k[j] = 0;
    };
    dfs(0, 0.0, Complex(0.0));
    std::sort(es.values.begin(), es.values.end(), [](const ExceptionalValue& a, const ExceptionalValue& b) {
        if (a.weight != b.weight) return a.weight < b.weight;
        if (a.alpha.real() != b.alpha.real()) return a.alpha.real() < b.alpha.real();
        return a.alpha.imag() < b.alpha.imag();
    });
    std::vector<ExceptionalValue> unique;
    for (const auto& v : es.values) {
        const bool dup = std::any_of(unique.begin(), unique.end(), [&](const ExceptionalValue& u) {
            return std::abs(u.alpha - v.alpha) <= 1e-12 * std::max(1.0, std::abs(v.alpha));
        });
        if (!dup) unique.push_back(v);
    }
    es.values = std::move(unique);
    return es;
}

Membership exceptional_membership(const std::vector<Complex>& omegas, Complex value, bool as_u_coefficient,
                                  double tol) {
    const Complex alpha = as_u_coefficient ? -kI * value : value;
    // Members have |Re alpha| = sum (2k_j+1) Im omega_j.
    const ExceptionalSet es = exceptional_set(omegas, std::abs(alpha.real()) + 1.0);
    Membership m;
    m.distance = std::numeric_limits<double>::infinity();
    for (const auto& v : es.values) {
        const double d = std::abs(v.alpha - alpha);
        if (d < m.distance) {
            m.distance = d;
            m.witness = v;
        }
    }
    m.member = m.distance <= tol * std::max(1.0, std::abs(alpha));
    if (!m.member) m.witness.reset();
    return m;
}

// ---------------------------------------------------------------------------

HormanderPoint hormander_point_check(const CMatrix& S1, const CMatrix& S2, const RVector& w, double tol) {
    if (S1.rows() != S1.cols() || S1.rows() != S2.rows() || S2.rows() != S2.cols() || S1.rows() != w.size() ||
        S1.rows() % 2)
        throw InputError("Hamilton maps and point must share dimension 2n");
    if (opnorm(RMatrix(S1.imag())) > tol * (1.0 + opnorm(S1)) || opnorm(RMatrix(S2.imag())) > tol * (1.0 + opnorm(S2)))
        throw InputError("bracket point check needs real Hamilton maps");
    const RMatrix A1 = coefficient_from_S(S1).real();
    const RMatrix A2 = coefficient_from_S(S2).real();
    const RMatrix Ac = commutator_coefficients(S1, S2).real();
    HormanderPoint h;
    h.p1 = w.dot(A1 * w);
    h.p2 = w.dot(A2 * w);
    h.bracket = w.dot(Ac * w);

    // Exact evaluation when every entry snaps to a rational.
    const int d = static_cast<int>(w.size());
    auto snap_all = [&](const RMatrix& M, std::vector<Rational>& out) {
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) {
                const auto q = snap(M(i, j), 1e-10);
                if (!q) return false;
                out.push_back(*q);
            }
        return true;
    };
    std::vector<Rational> q1, q2, qc, qw;
    const RMatrix wm = w;
    if (snap_all(A1, q1) && snap_all(A2, q2) && snap_all(Ac, qc) && snap_all(wm, qw)) {
        auto form = [&](const std::vector<Rational>& q) {
            Rational s = 0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s += qw[i] * q[i * d + j] * qw[j];
            return s;
        };
        const Rational r1 = form(q1), r2 = form(q2), rc = form(qc);
        h.exact = true;
        h.satisfied = r1 == 0 && r2 == 0 && rc != 0;
        return h;
    }
    const double scale = std::max(1.0, w.squaredNorm());
    h.satisfied = std::abs(h.p1) <= tol * scale * (1.0 + A1.norm()) && std::abs(h.p2) <= tol * scale * (1.0 + A2.norm()) &&
                  std::abs(h.bracket) > tol * scale * (1.0 + Ac.norm());
    return h;
}

// ---------------------------------------------------------------------------

NilpotentNormalForm nilpotent_normal_form(const CMatrix& S, const Tolerances& tol) {
    if (S.rows() != S.cols() || S.rows() % 2) throw InputError("Hamilton map must be 2n x 2n");
    const int n = static_cast<int>(S.rows() / 2);
    const double ns = std::max(1.0, opnorm(S));
    if (opnorm(CMatrix(S * S)) > tol.structure * ns * ns) throw HypothesisError("normal form needs S^2 = 0");
    if (!re_q_psd(S, tol).psd) throw HypothesisError("normal form needs Re Q_S >= 0");
    const RMatrix J = standard_J(n);

    // W = real span of the range of S; it is isotropic and carries the Y directions.
    const RMatrix W = real_span(S, tol.rank);
    const int m = static_cast<int>(W.cols());
    if (m > n) throw HypothesisError("range of S has dimension above n, so it cannot be isotropic");
    if (m > 0 && (W.transpose() * J * W).norm() > tol.subspace)
        throw HypothesisError("range of S is not isotropic");
    // X_j = J W_j gives sigma(X_i, Y_j) = delta_ij and isotropic X.
    const RMatrix X = J * W;

    // Complement H: the sigma-orthogonal of span(X, Y), made symplectic by a Gram-Schmidt sweep.
    RMatrix XY(2 * n, 2 * m);
    XY << X, W;
    RMatrix Hb = m ? null_space(RMatrix(XY.transpose() * J), tol.rank) : RMatrix(RMatrix::Identity(2 * n, 2 * n));
    if (Hb.cols() != 2 * (n - m)) throw HypothesisError("degenerate complement: rank deficiency in the basis sweep");
    std::vector<RVector> pool;
    for (int c = 0; c < Hb.cols(); ++c) pool.push_back(Hb.col(c));
    std::vector<RVector> hx, hy;
    auto sig = [&](const RVector& a, const RVector& b) { return a.dot(J * b); };
    while (!pool.empty()) {
        const RVector e = pool.front();
        std::size_t best = 0;
        double bv = 0.0;
        for (std::size_t k = 1; k < pool.size(); ++k)
            if (std::abs(sig(e, pool[k])) > bv) {
                bv = std::abs(sig(e, pool[k]));
                best = k;
            }
        if (bv <= tol.rank) throw HypothesisError("degenerate complement: no symplectic partner");
        RVector f = pool[best] / sig(e, pool[best]);
        std::vector<RVector> rest;
        for (std::size_t k = 1; k < pool.size(); ++k) {
            if (k == best) continue;
            rest.push_back(pool[k] - sig(pool[k], f) * e + sig(pool[k], e) * f);
        }
        hx.push_back(e);
        hy.push_back(f);
        pool = std::move(rest);
    }

    NilpotentNormalForm nf;
    nf.m = m;
    nf.basis = RMatrix(2 * n, 2 * n);
    for (int j = 0; j < m; ++j) {
        nf.basis.col(j) = X.col(j);
        nf.basis.col(n + j) = W.col(j);
    }
    for (int j = 0; j < n - m; ++j) {
        nf.basis.col(m + j) = hx[j];
        nf.basis.col(n + m + j) = hy[j];
    }
    nf.symplectic_residual = symplectic_residual(nf.basis);
    const CMatrix A = coefficient_from_S(S);
    const CMatrix Tinv = nf.basis.inverse().cast<Complex>();
    nf.A_new = Tinv * A * Tinv.transpose();
    nf.B = nf.A_new.block(n, n, m, m);
    CMatrix outside = nf.A_new;
    outside.block(n, n, m, m).setZero();
    nf.form_residual = opnorm(outside) / ns;
    return nf;
}

// ---------------------------------------------------------------------------

double rotation_family_q(double m, double c1, double c2, double theta) {
    return m + c1 * std::cos(2.0 * theta) + c2 * std::sin(2.0 * theta);
}

double rotation_family_Q(double m, double c1, double c2, double theta0, double theta) {
    auto psi = [&](double t) { return 0.5 * c1 * std::sin(2.0 * t) - 0.5 * c2 * std::cos(2.0 * t); };
    return m * (theta - theta0) + psi(theta) - psi(theta0);
}

namespace {

// log |1 - e^z| without overflow.
double log_abs_one_minus_exp(Complex z) {
    if (z.real() > 0.0) return z.real() + std::log(std::abs(1.0 - std::exp(-z)));
    return std::log(std::abs(1.0 - std::exp(z)));
}

// log |x / (1 - e^{-pi x})|, continuous at x = 0 with value -log pi.
double log_even_factor(double x) {
    if (std::abs(x) < 1e-8) return -std::log(kPi);
    const double y = -kPi * x;
    const double log_den = y > 30.0 ? y : std::log(std::abs(std::expm1(y)));
    return std::log(std::abs(x)) - log_den;
}

// sup over (mu, r0, theta0, theta) of |mu r0 G| (generic branch) or |mu r0 (a - mu m r0^2) G| (even branch).
double sampled_sup(double m, double c1, double c2, Complex alpha, bool even, int samples, double mu_scale = 1.0) {
    static const double base[] = {-100.0, -10.0, -1.0, -0.1, -0.01, 0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> mus;
    for (double b : base) mus.push_back(b * mu_scale);
    static const double r0s[] = {0.05, 0.2, 0.5, 1.0, 2.0, 5.0};
    const double a = alpha.real();
    double best = -std::numeric_limits<double>::infinity();
    for (double mu : mus)
        for (double r0 : r0s) {
            const double s = mu * r0 * r0;
            const double log_den = even ? -log_even_factor(a - s * m) + std::log(2.0)
                                        : std::log(2.0) + log_abs_one_minus_exp(-kPi * alpha + kPi * s * m);
            for (int i = 0; i < samples; ++i) {
                const double th0 = 2.0 * kPi * i / samples;
                for (int j = 0; j < samples; ++j) {
                    const double phi = 2.0 * kPi * j / samples;
                    const double logF = -0.5 * a * phi + 0.5 * s * rotation_family_Q(m, c1, c2, th0, th0 + phi);
                    best = std::max(best, logF - log_den);
                }
            }
        }
    return std::exp(best);
}

}  // namespace

RotationFamilyReport rotation_family_symbol_check(double m, double c1, double c2, Complex alpha, int samples) {
    if (c1 == 0.0 && c2 == 0.0) throw InputError("rotation family needs c1^2 + c2^2 > 0");
    if (samples < 8) throw InputError("rotation family check needs at least 8 samples");
    RotationFamilyReport r;
    r.samples = samples;
    const double amp = std::hypot(c1, c2);
    r.critical_angle = 0.5 * (std::atan2(c2, c1) + kPi);
    r.min_q = rotation_family_q(m, c1, c2, r.critical_angle);
    const int fine = 16 * samples;
    for (int i = 0; i < fine; ++i) r.min_q = std::min(r.min_q, rotation_family_q(m, c1, c2, kPi * i / fine));
    const double eps = 1e-12 * (std::abs(m) + amp);
    r.q_nonnegative = r.min_q >= -eps;
    r.amplitude_condition = m >= amp - eps;
    r.min_Q_forward = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double th0 = 2.0 * kPi * i / samples;
        r.q_full_period_error =
            std::max(r.q_full_period_error, std::abs(rotation_family_Q(m, c1, c2, th0, th0 + 2.0 * kPi) - 2.0 * kPi * m));
        for (int j = 0; j <= fine; ++j)
            r.min_Q_forward = std::min(r.min_Q_forward, rotation_family_Q(m, c1, c2, th0, th0 + 2.0 * kPi * j / fine));
    }
    // Generic branch uses alpha itself unless Im alpha is even; the even branch uses the nearest even Im alpha.
    const double b = alpha.imag();
    const bool b_even = std::abs(b / 2.0 - std::round(b / 2.0)) < 1e-12;
    const Complex a_generic = b_even ? alpha + Complex(0.0, 1.0) : alpha;
    const Complex a_even(alpha.real(), 2.0 * std::round(b / 2.0));
    r.sup_generic = sampled_sup(m, c1, c2, a_generic, false, samples);
    r.sup_generic_refined = sampled_sup(m, c1, c2, a_generic, false, 2 * samples);
    r.sup_even = sampled_sup(m, c1, c2, a_even, true, samples);
    r.sup_even_refined = sampled_sup(m, c1, c2, a_even, true, 2 * samples);
    auto close = [](double x, double y) { return std::isfinite(x) && std::isfinite(y) && std::abs(x - y) <= 0.05 * y; };
    r.stable = close(r.sup_generic, r.sup_generic_refined) && close(r.sup_even, r.sup_even_refined);
    r.range_growth_generic = sampled_sup(m, c1, c2, a_generic, false, samples, 10.0) / r.sup_generic;
    r.range_growth_even = sampled_sup(m, c1, c2, a_even, true, samples, 10.0) / r.sup_even;
    return r;
}

namespace {

RotationFamilyMatch match_pattern(const CMatrix& A, double tol) {
    RotationFamilyMatch out;
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    auto near = [&](Complex z, Complex w) { return std::abs(z - w) <= tol * scale; };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (!near(A(i, j), 0.0)) return out;
    if (!near(A(0, 2), 0.0) || !near(A(1, 3), 0.0) || !near(A(0, 3), kI) || !near(A(1, 2), -kI)) return out;
    for (int i = 2; i < 4; ++i)
        for (int j = 2; j < 4; ++j)
            if (!near(Complex(0.0, A(i, j).imag()), 0.0)) return out;
    const double m = 0.5 * (A(2, 2).real() + A(3, 3).real());
    const double c1 = 0.5 * (A(2, 2).real() - A(3, 3).real());
    const double c2 = A(2, 3).real();
    const double amp = std::hypot(c1, c2);
    if (!(amp > tol * scale) || m < amp - tol * scale) return out;
    out.matched = true;
    out.m = m;
    out.c1 = c1;
    out.c2 = c2;
    out.m_over_amplitude = m / amp;
    return out;
}

double sigma(const RVector& a, const RVector& b) { return a.dot(standard_J(2) * b); }

}  // namespace

RotationFamilyMatch match_rotation_family(const OperatorSpec& spec, double tol) {
    RotationFamilyMatch out;
    if (spec.n != 2 || spec.A.rows() != 4) return out;
    out = match_pattern(spec.A, tol);
    if (out.matched) return out;

    // Canonical frame: Im S / kappa is a complex structure preserving a Lagrangian L with range Re S in L in ker Re S.
    const CMatrix S = hamilton_from_A(spec.A);
    const double k2 = -(S.imag() * S.imag()).trace() / 4.0;
    if (!(k2 > 0.0)) return out;
    const double kappa = std::sqrt(k2);
    const RMatrix R = S.real() / kappa, I = S.imag() / kappa;
    const double loose = 1e3 * tol;
    if ((I * I + RMatrix::Identity(4, 4)).norm() > loose) return out;
    Eigen::JacobiSVD<RMatrix> svd(R, Eigen::ComputeFullU);
    const auto sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(2) > loose * sv(0)) return out;
    if ((R * R).norm() > loose * sv(0) * sv(0)) return out;
    // L = span(r, I r) for the leading direction r of range Re S; it must be Lagrangian and contain range Re S.
    RMatrix L(4, 2);
    L.col(0) = svd.matrixU().col(0);
    L.col(1) = I * L.col(0);
    L.col(1) -= L.col(0).dot(L.col(1)) * L.col(0);
    if (!(L.col(1).norm() > 0.5)) return out;
    L.col(1).normalize();
    if (std::abs(sigma(L.col(0), L.col(1))) > loose) return out;
    if ((R * L).norm() > loose * sv(0) || (R - L * (L.transpose() * R)).norm() > loose * sv(0)) return out;
    const RVector y1 = L.col(0), y2 = -I * y1;
    Eigen::Matrix<double, 2, 4> rows;
    rows.row(0) = (standard_J(2) * y1).transpose();
    rows.row(1) = (standard_J(2) * y2).transpose();
    RVector x1 = rows.completeOrthogonalDecomposition().solve(Eigen::Vector2d(1.0, 0.0));
    x1 += 0.5 * sigma(x1, -I * x1) * y2;
    const RVector x2 = -I * x1;
    RMatrix T(4, 4);
    T << x1, x2, y1, y2;
    if (symplectic_residual(T) > loose * std::max(1.0, T.squaredNorm())) return out;
    const CMatrix Sc = T.inverse().cast<Complex>() * (S / kappa) * T.cast<Complex>();
    RotationFamilyMatch canon = match_pattern(coefficient_from_S(Sc), loose);
    if (!canon.matched) return out;
    canon.kappa = kappa;
    canon.canonical_frame = true;
    return canon;
}

namespace {

// Traces of all words of length <= 6 in (Re S, Im S) / max|lambda|; invariant under real symplectic
// conjugation and positive scaling.
std::vector<double> conjugation_fingerprint(const CMatrix& S) {
    Eigen::ComplexEigenSolver<CMatrix> es(S, false);
    double r = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) r = std::max(r, std::abs(es.eigenvalues()(i)));
    std::vector<double> out;
    if (!(r > 0.0)) return out;
    const RMatrix P[2] = {S.real() / r, S.imag() / r};
    std::vector<RMatrix> level = {RMatrix::Identity(S.rows(), S.cols())};
    for (int len = 1; len <= 6; ++len) {
        std::vector<RMatrix> next;
        for (const auto& w : level)
            for (const auto& p : P) {
                next.push_back(w * p);
                out.push_back(next.back().trace());
            }
        level = std::move(next);
    }
    return out;
}

}  // namespace

bool match_conjugation_breaking_fixture(const OperatorSpec& spec, double tol) {
    if (spec.n != 3) return false;
    const OperatorSpec f = fixture("conjugation_breaking_n3");
    if ((spec.A - f.A).cwiseAbs().maxCoeff() <= tol * std::max(1.0, f.A.cwiseAbs().maxCoeff())) return true;
    const auto a = conjugation_fingerprint(hamilton_from_A(spec.A));
    const auto b = conjugation_fingerprint(hamilton_from_A(f.A));
    if (a.size() != b.size() || a.empty()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e3 * tol * std::max(1.0, std::abs(b[i]))) return false;
    return true;
}

// ---------------------------------------------------------------------------

std::string status_name(Status s) {
    switch (s) {
        case Status::Solvable: return "Solvable";
        case Status::SolvableExceptUnknownExceptional: return "SolvableExceptUnknownExceptional";
        case Status::ExceptionalValueUnknown: return "ExceptionalValueUnknown";
        case Status::NotSolvable: return "NotSolvable";
        case Status::OutsideScope: return "OutsideScope";
        case Status::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

RotationSearch rotated_sign_condition(const CMatrix& A, int samples, const Tolerances& tol) {
    if (samples < 4) throw InputError("rotation search needs at least 4 samples");
    auto f = [&](double th) { return min_eig_re(CMatrix(std::exp(Complex(0.0, th)) * A)); };
    RotationSearch r;
    r.min_eigenvalue = -std::numeric_limits<double>::infinity();
    const double h = 2.0 * kPi / samples;
    for (int i = 0; i < samples; ++i) {
        const double v = f(i * h);
        if (v > r.min_eigenvalue) {
            r.min_eigenvalue = v;
            r.theta = i * h;
        }
    }
    // Golden-section refinement on the bracketing cell; f is concave in e^{i theta} A locally.
    double lo = r.theta - h, hi = r.theta + h;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo), f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    const double xm = 0.5 * (lo + hi), fm = f(xm);
    if (fm > r.min_eigenvalue) {
        r.min_eigenvalue = fm;
        r.theta = xm;
    }
    r.theta = std::remainder(r.theta, 2.0 * kPi);
    r.found = r.min_eigenvalue >= -tol.psd * (1.0 + opnorm(A));
    return r;
}

// ---------------------------------------------------------------------------

Verdict classify(const OperatorSpec& spec_in, const ClassifyOptions& opt) {
    validate_spec(spec_in);
    const Tolerances& tol = opt.tol;
    Verdict v;
    Certificate& cert = v.certificate;
    OperatorSpec spec = spec_in;
    cert.quantities["tol.psd"] = tol.psd;
    cert.quantities["tol.cluster"] = tol.cluster;
    cert.quantities["tol.real"] = tol.real;
    cert.quantities["tol.structure"] = tol.structure;
    cert.quantities["tol.subspace"] = tol.subspace;
    cert.quantities["tol.zero"] = tol.zero;
    if (opt.alpha_uniform) v.trace.push_back("alpha-uniform mode: the verdict must hold for every alpha");

    // (0) sign condition, possibly after a rotation e^{i theta}.
    const PsdResult psd = re_a_psd(spec.A, tol);
    add(cert, "Re Q_S >= 0", psd.psd);
    if (!psd.psd) {
        const RotationSearch rs = rotated_sign_condition(spec.A, opt.theta_samples, tol);
        cert.quantities["rotation.best_min_eigenvalue"] = rs.min_eigenvalue;
        add(cert, "Re(e^{i theta} Q_S) >= 0 for some theta", rs.found);
        if (!rs.found) {
            v.status = Status::OutsideScope;
            v.trace.push_back("Re Q_S is not psd and no rotation e^{i theta} fixes it (best min eigenvalue " +
                              fmt(rs.min_eigenvalue) + ")");
            return v;
        }
        const Complex rot = std::exp(Complex(0.0, rs.theta));
        spec.A = rot * spec.A;
        spec.alpha = rot * spec.alpha;
        v.rotation = rs.theta;
        cert.quantities["rotation.theta"] = rs.theta;
        v.trace.push_back("rotated by e^{i theta}, theta = " + fmt(rs.theta) + "; alpha becomes " + fmt(spec.alpha));
    }
    const Complex alpha = spec.alpha;

    StructuralReport sr;
    try {
        sr = structural_report(spec, tol);
    } catch (const ClusteringAmbiguity& e) {
        v.status = Status::Inconclusive;
        v.trace.push_back(std::string("spectral clustering is ambiguous: ") + e.what());
        return v;
    } catch (const NumericError& e) {
        v.status = Status::Inconclusive;
        v.trace.push_back(std::string("structure computation failed: ") + e.what());
        return v;
    }
    v.structure = sr;
    const CMatrix S = hamilton_from_A(spec.A);
    const double ns = std::max(1.0, sr.norm_S);
    cert.quantities["nu"] = sr.nu;
    cert.quantities["norm_S"] = sr.norm_S;
    cert.quantities["re_alpha"] = alpha.real();
    cert.quantities["im_alpha"] = alpha.imag();

    const bool si_nonzero = !sr.s_i_zero;
    const bool R = sr.property_R.holds;
    const bool nr2 = sr.nilpotency_Nr <= 2;
    const bool sr_nonzero = !sr.s_r_zero;
    const bool strip = si_nonzero && std::abs(alpha.real()) < sr.nu;
    const double alpha_eps = tol.zero * ns;

    if (si_nonzero) {
        add(cert, "S_i != 0", true);
        add(cert, "property (R)", R);
        v.trace.push_back("nonreal spectrum present, nu = " + fmt(sr.nu) + ", property (R) " + (R ? "holds" : "fails"));
        const bool mixed = R && nr2 && sr.re_d_r_zero;
        if (mixed && sr_nonzero) {
            add(cert, "N_r^2 = 0", nr2);
            add(cert, "Re D_r = 0 (equivalently (C) for S_r under (R))", sr.re_d_r_zero);
            add(cert, "S_r != 0", true);
            cert.rule = kRuleMixedNonzeroReal;
            v.status = Status::Solvable;
            v.trace.push_back("N_r^2 = 0, Re D_r = 0 and S_r != 0: solvable for every alpha");
            return v;
        }
        if (R && strip && !opt.alpha_uniform) {
            add(cert, "|Re alpha| < nu", true);
            cert.quantities["strip_bound"] = sr.nu;
            cert.rule = kRuleStrip;
            v.status = Status::Solvable;
            v.trace.push_back("|Re alpha| = " + fmt(std::abs(alpha.real())) + " < nu: tempered fundamental solution");
            return v;
        }
        if (!R && strip && !opt.alpha_uniform && match_conjugation_breaking_fixture(spec)) {
            add(cert, "|Re alpha| < nu", true);
            add(cert, "known fixture where the strip result survives without (R)", true);
            cert.quantities["strip_bound"] = sr.nu;
            cert.rule = kRuleStrip;
            cert.notes.push_back("property (R) waived: the strip result is known to hold for this fixture");
            v.status = Status::Solvable;
            v.trace.push_back("(R) fails, but the operator is the known fixture for which the strip result still holds");
            return v;
        }
        if (mixed && !sr_nonzero) {
            add(cert, "N_r^2 = 0", nr2);
            add(cert, "Re D_r = 0", true);
            add(cert, "S_r != 0", false);
            const ExceptionalSet sample = exceptional_set(sr.omegas, std::max(sr.nu, 1.0) * 5.0);
            cert.quantities["exceptional.sample_size"] = static_cast<double>(sample.values.size());
            if (opt.alpha_uniform) {
                v.status = Status::SolvableExceptUnknownExceptional;
                v.trace.push_back("S_r = 0: solvable off the exceptional set; the exceptional values are undecided");
                return v;
            }
            const Membership mem = exceptional_membership(sr.omegas, alpha, false, 1e-9);
            v.exceptional = mem;
            add(cert, "alpha outside the exceptional set", !mem.member);
            cert.quantities["exceptional.distance"] = mem.distance;
            if (mem.member) {
                v.status = Status::ExceptionalValueUnknown;
                v.trace.push_back("alpha is exceptional, witness k = " + fmt_k(mem.witness->k) +
                                  ", sign " + std::to_string(mem.witness->sign) + "; nothing is proved there");
                return v;
            }
            cert.rule = kRuleMixedOffExceptional;
            v.status = Status::Solvable;
            v.trace.push_back("S_r = 0 and alpha is not exceptional (distance " + fmt(mem.distance) + ")");
            return v;
        }
        v.trace.push_back(
            "the reduction to the real part is conditional on finitely many real-spectrum operators; it is "
            "applied only where those cases are decided, which coincides with the mixed-spectrum rule");
        v.status = Status::Inconclusive;
        if (!R) v.trace.push_back("failed hypothesis: property (R)");
        else if (!nr2) v.trace.push_back("failed hypothesis: N_r^2 = 0 (nilpotency step " + std::to_string(sr.nilpotency_Nr) + ")");
        else if (!sr.re_d_r_zero) v.trace.push_back("failed hypothesis: Re D_r = 0");
        if (!strip) v.trace.push_back("|Re alpha| >= nu, outside the strip");
        return v;
    }

    // Real spectrum.
    add(cert, "S_i = 0", true);
    const bool n2 = sr.nilpotency_N <= 2;
    const bool C = sr.property_C.holds;
    const bool s_zero = opnorm(S) == 0.0;
    const double s2 = opnorm(CMatrix(S * S));
    const bool square_zero = s2 <= tol.structure * ns * ns;
    if (square_zero) {
        try {
            v.normal_form = nilpotent_normal_form(S, tol);
        } catch (const HypothesisError& e) {
            v.trace.push_back(std::string("normal form not available: ") + e.what());
        }
    }
    if (!s_zero && n2 && C) {
        add(cert, "N^2 = 0", true);
        add(cert, "property (C)", true);
        const bool re_alpha_nonzero = std::abs(alpha.real()) > alpha_eps;
        if (!sr.re_s_zero || (re_alpha_nonzero && !opt.alpha_uniform)) {
            add(cert, "Re S != 0 or Re alpha != 0", true);
            cert.rule = kRuleRealDissipative;
            v.status = Status::Solvable;
            v.trace.push_back(!sr.re_s_zero ? "real spectrum with Re S != 0" : "real spectrum with Re alpha != 0");
            return v;
        }
        const bool n_nonzero = sr.nilpotency_N == 2;
        if (n_nonzero) {
            add(cert, "N != 0", true);
            cert.rule = kRuleRealNilpotent;
            v.status = Status::Solvable;
            v.trace.push_back(opt.alpha_uniform
                                  ? "Re S = 0 and N != 0: Re alpha != 0 and Re alpha = 0 are both covered"
                                  : "Re S = 0, Re alpha = 0 and N != 0");
            return v;
        }
        // Semisimple, purely imaginary: diagonal form sum i lambda_j (X_j^2 + Y_j^2).
        add(cert, "N = 0", true);
        if (opt.alpha_uniform) {
            v.status = Status::Inconclusive;
            v.trace.push_back("diagonal form: solvability depends on alpha through the diophantine condition");
            return v;
        }
        const std::vector<double> lam = signed_frequencies(S, tol);
        for (std::size_t j = 0; j < lam.size(); ++j) cert.quantities["lambda_" + std::to_string(j + 1)] = lam[j];
        const ConditionQReport q = condition_2q(alpha, lam, opt.k_max, opt.m_max, opt.exact);
        v.condition_q = q;
        cert.quantities["q.min_distance"] = q.min_distance;
        cert.quantities["q.k_max"] = q.k_max;
        if (q.fit_M >= 0) {
            cert.quantities["q.C"] = q.fit_C;
            cert.quantities["q.M"] = q.fit_M;
        }
        add(cert, "diophantine lower bound", q.classification == QClass::Plausible);
        if (q.classification == QClass::Violated) {
            v.status = Status::NotSolvable;
            v.trace.push_back("diophantine condition fails exactly at k = " + fmt_k(q.zero_witnesses.front()) +
                              ", sign " + std::to_string(q.zero_signs.front()) + "; the criterion is an equivalence");
            return v;
        }
        if (q.classification == QClass::Plausible) {
            cert.rule = kRuleRealDiophantine;
            cert.notes.push_back("bounded diophantine check up to K_max = " + std::to_string(q.k_max));
            v.status = Status::Solvable;
            v.trace.push_back("diophantine condition plausible, min distance " + fmt(q.min_distance));
            return v;
        }
        v.status = Status::Inconclusive;
        v.trace.push_back("diophantine condition undecided by the bounded scan");
        return v;
    }

    if (square_zero && v.normal_form) {
        const auto& nf = *v.normal_form;
        add(cert, "S^2 = 0", true);
        cert.quantities["normal_form.m"] = nf.m;
        cert.quantities["normal_form.residual"] = nf.form_residual;
        const bool b_zero = nf.m == 0 || opnorm(nf.B) <= tol.structure * ns;
        if (b_zero && std::abs(alpha) <= alpha_eps) {
            v.status = opt.alpha_uniform ? Status::SolvableExceptUnknownExceptional : Status::NotSolvable;
            v.trace.push_back(opt.alpha_uniform ? "constant coefficients; only alpha = 0 gives the zero operator"
                                                : "the operator is zero");
            return v;
        }
        cert.rule = kRuleSquareZero;
        v.status = b_zero && opt.alpha_uniform ? Status::SolvableExceptUnknownExceptional : Status::Solvable;
        v.trace.push_back("S^2 = 0: constant-coefficient normal form in m = " + std::to_string(nf.m) + " variables");
        return v;
    }

    const RotationFamilyMatch fam = match_rotation_family(spec);
    if (fam.matched) {
        add(cert, "rotation family pattern", true);
        cert.quantities["family.m"] = fam.m;
        cert.quantities["family.c1"] = fam.c1;
        cert.quantities["family.c2"] = fam.c2;
        cert.quantities["family.m_over_amplitude"] = fam.m_over_amplitude;
        if (fam.canonical_frame) cert.notes.push_back("family parameters read in a symplectic frame where Im S / kappa is standard");
        cert.rule = kRuleRotationFamily;
        cert.notes.push_back("family-specific result; property (C) fails");
        v.status = Status::Solvable;
        v.trace.push_back("matches the two-dimensional rotation family with m >= sqrt(c1^2 + c2^2)");
        return v;
    }

    v.status = Status::Inconclusive;
    if (!n2) v.trace.push_back("failed hypothesis: N^2 = 0 (nilpotency step " + std::to_string(sr.nilpotency_N) + ")");
    else if (!C) v.trace.push_back("failed hypothesis: property (C)");
    add(cert, "N^2 = 0", n2);
    add(cert, "property (C)", C);
    return v;
}

}  // namespace heisolv
