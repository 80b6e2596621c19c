#include "heisolv/classifier.hpp"
#include "heisolv/fixtures.hpp"
#include "heisolv/kernel.hpp"
#include "heisolv/spectral.hpp"
#include "heisolv/symplectic.hpp"
#include "heisolv/twisted.hpp"
#include "heisolv/verify.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace heisolv;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex I1(0.0, 1.0);

double maxabs(const CMatrix& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }
CMatrix S_of(const OperatorSpec& s) { return hamilton_from_A(s.A); }
CMatrix S_of(const std::string& name, const std::vector<double>& p = {}) { return S_of(fixture(name, p)); }

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Line {
    std::ostringstream note;
    bool ok = true;
    void need(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            note << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void run(int id, const std::string& title, const std::function<void(Line&)>& body) {
    Line l;
    try {
        body(l);
    } catch (const std::exception& e) {
        l.ok = false;
        l.note << " [exception: " << e.what() << "]";
    }
    if (!l.ok) ++failures;
    std::cout << (l.ok ? "PASS" : "FAIL") << "  " << (id < 10 ? " " : "") << id << "  " << title << ":"
              << l.note.str() << std::endl;
}

CVector random_w(int d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CVector w(d);
    for (int a = 0; a < d; ++a) w(a) = u(rng);
    return w;
}

bool spectra_match(const std::vector<Complex>& a, const std::vector<Complex>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (auto z : a) {
        double best = 1e300;
        for (auto w : b) best = std::min(best, std::abs(z - w));
        if (best > tol) return false;
    }
    return true;
}

}  // namespace

int main() {
    run(1, "rotation-family structure", [](Line& l) {
        const ClusterSet cs = spectrum_clusters(S_of("rotation_family_n2"));
        const JordanPair jp = jordan_pair(cs);
        const double d2 = maxabs(CMatrix(jp.D * jp.D - CMatrix::Identity(4, 4)));
        const double n2 = maxabs(CMatrix(jp.N * jp.N));
        const double dn = maxabs(CMatrix(jp.D * jp.N - jp.N * jp.D));
        std::set<double> spec;
        for (const auto& c : cs.clusters) spec.insert(std::round(c.lambda.real() * 1e9) / 1e9);
        bool real = true;
        for (const auto& c : cs.clusters) real = real && std::abs(c.lambda.imag()) < 1e-9;
        const int step = nilpotency_step(jp.N, cs.norm);
        const bool prop_c = check_property_C(jp.D).holds;
        l.note << " |D^2-I|=" << fmt(d2) << " |N^2|=" << fmt(n2) << " |[D,N]|=" << fmt(dn) << " spec={-1,+1}:"
               << (spec == std::set<double>{-1.0, 1.0} && real) << " step(N)=" << step << " (C)=" << prop_c;
        l.need(d2 <= 1e-9 && n2 <= 1e-9 && dn <= 1e-9, "residuals");
        l.need(spec == std::set<double>{-1.0, 1.0} && real, "spectrum");
        l.need(step == 2, "step");
        l.need(!prop_c, "(C)");
    });

    run(2, "rotation-family psd boundary and det C", [](Line& l) {
        const bool at = re_q_psd(S_of("rotation_family_n2", {5, 3, 4})).psd;
        const bool below = re_q_psd(S_of("rotation_family_n2", {4.99, 3, 4})).psd;
        // Lower-left block of D in the fixture basis is C = [[c1, c2], [c2, -c1]].
        const JordanPair jp = jordan_pair(spectrum_clusters(S_of("rotation_family_n2", {5, 3, 4})));
        const CMatrix C = jp.D.block(2, 0, 2, 2);
        const Complex detC = C.determinant();
        l.note << " psd(5,3,4)=" << at << " psd(4.99,3,4)=" << below << " det C=" << fmt(detC.real()) << "+"
               << fmt(detC.imag()) << "i (expect -25)";
        l.need(at && !below, "psd boundary");
        l.need(std::abs(detC + 25.0) <= 1e-9 * 25.0, "det C");
    });

    run(3, "coupled chain: step 4, (R) holds, Re Q on S_r fails", [](Line& l) {
        const ClusterSet cs = spectrum_clusters(S_of("coupled_chain_n3"));
        const SplitDecomposition sp = split_real_nonreal(cs);
        const int step = nilpotency_step(sp.S_r, cs.norm);
        const bool r = check_property_R(cs).holds;
        const bool q = check_re_q_sr(cs, sp).holds;
        l.note << " step(S_r)=" << step << " (R)=" << r << " ReQ_Sr>=0:" << q;
        l.need(step == 4 && r && !q, "flags");
    });

    run(4, "conjugation-breaking fixture: (R) fails, nu = 1, strip verdict, bracket points", [](Line& l) {
        OperatorSpec s = fixture("conjugation_breaking_n3");
        const StructuralReport rep = structural_report(s);
        s.alpha = 0.5;
        const Verdict v = classify(s);
        const ClusterSet cs = spectrum_clusters(S_of(s));
        const SplitDecomposition sp = split_real_nonreal(cs);
        RVector wr(6), wi = RVector::Zero(6);
        wr << 1, 1, 1, -1, -1, -1;
        wi(2) = 1.0;
        wi(4) = 1.0;
        const bool hr = hormander_point_check(sp.S_r.real().cast<Complex>(), sp.S_r.imag().cast<Complex>(), wr).satisfied;
        const bool hi = hormander_point_check(sp.S_i.real().cast<Complex>(), sp.S_i.imag().cast<Complex>(), wi).satisfied;
        l.note << " (R)=" << rep.property_R.holds << " nu=" << fmt(rep.nu) << " verdict=" << status_name(v.status) << "/"
               << v.certificate.rule << " H(S_r)=" << hr << " H(S_i)=" << hi;
        l.need(!rep.property_R.holds && std::abs(rep.nu - 1.0) < 1e-9, "structure");
        l.need(v.status == Status::Solvable && v.certificate.rule == kRuleStrip, "verdict");
        l.need(hr && hi, "bracket points");
    });

    run(5, "mixed spectrum: cone fails with witness, all-alpha verdict", [](Line& l) {
        const OperatorSpec base = fixture("mixed_spectrum_n2");
        const StructuralReport rep = structural_report(base);
        l.note << " cone=" << rep.cone.holds << " witness=" << rep.cone.witness.has_value();
        l.need(!rep.cone.holds && rep.cone.witness.has_value(), "cone");
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-10.0, 10.0);
        int good = 0;
        for (int k = 0; k < 10; ++k) {
            OperatorSpec s = base;
            s.alpha = k == 0 ? Complex(0.3) : Complex(u(rng), u(rng));
            const Verdict v = classify(s);
            good += v.status == Status::Solvable && v.certificate.rule == kRuleMixedNonzeroReal;
        }
        l.note << " verdicts " << good << "/10 " << kRuleMixedNonzeroReal;
        l.need(good == 10, "verdicts");
    });

    run(6, "Mehler closed form, 100 samples", [](Line& l) {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> ut(0.0, 1.0), uw(-2.0, 2.0);
        const CMatrix S = -standard_J(1).cast<Complex>();
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double t = ut(rng);
            CVector w(2);
            w << uw(rng), uw(rng);
            const double r2 = std::norm(w(0)) + std::norm(w(1));
            const Complex expect = std::exp(-kTwoPi * std::tanh(kTwoPi * t) * r2) / std::cosh(kTwoPi * t);
            worst = std::max(worst, std::abs(gamma_hat(S, 1.0, t, w) - expect) / std::abs(expect));
        }
        l.note << " max rel err=" << fmt(worst) << " (tol 1e-10)";
        l.need(worst <= 1e-10, "tolerance");
    });

    run(7, "heat equation residual, 100 samples per fixture", [](Line& l) {
        std::mt19937_64 rng(7);
        for (const std::string name : {"sublaplacian_n1", "rotation_family_n2", "coupled_chain_n3"}) {
            const CMatrix S = S_of(name);
            const double t_max = std::min(0.3, 0.4 * first_focal_time(S));
            std::uniform_real_distribution<double> ut(0.02 * t_max, t_max);
            double worst = 0.0;
            for (int k = 0; k < 100; ++k) {
                const PdeResidual r = pde_residual(S, 1.0, ut(rng), random_w(static_cast<int>(S.rows()), rng), 1e-4);
                worst = std::max(worst, r.residual / r.scale);
            }
            l.note << " " << name << "=" << fmt(worst);
            l.need(worst <= 1e-5, name);
        }
        l.note << " (tol 1e-5 * scale)";
    });

    run(8, "semigroup law and contraction on the 64-point Mehler grid", [](Line& l) {
        const SemigroupReport r =
            semigroup_check(-standard_J(1).cast<Complex>(), 1.0, 0.1, 0.1, Grid{1, 64, 8.0}, 1, 10);
        l.note << " err_semigroup=" << fmt(r.err_semigroup) << " (tol 1e-3) contraction slack="
               << fmt(r.err_contraction) << " (tol 1e-6) over " << r.samples << " f";
        l.need(r.err_semigroup <= 1e-3 && r.err_contraction <= 1e-6 && r.samples == 10, "tolerance");
    });

    run(9, "series tails and decay fit", [](Line& l) {
        int within = 0, total = 0;
        for (Complex w : {I1, Complex(1.0, 1.0), Complex(0.0, 2.0)})
            for (double t : {0.5, 1.0, 2.0})
                for (int M : {5, 10, 20}) {
                    const SeriesValue a = series_inv_cos(w, t, M), b = series_tan(w, t, M);
                    const Complex ea = 1.0 / std::cos(t * w), eb = std::tan(t * w);
                    // Rounding floor of a sum of O(1) terms.
                    const double floor = 1e-15;
                    within += std::abs(a.partial - ea) <= a.tail_bound + floor;
                    within += std::abs(b.partial - eb) <= b.tail_bound + floor;
                    total += 2;
                }
        const StructuralReport rep = structural_report(fixture("coupled_chain_n3"));
        std::vector<double> ts;
        for (int k = 0; k <= 90; ++k) ts.push_back(1.0 + 0.1 * k);
        const DecayFit fit = decay_fit(rep.omegas, ts);
        l.note << " within bound " << within << "/" << total << "; fitted rate " << fmt(-fit.slope) << " >= nu-0.01 = "
               << fmt(rep.nu - 0.01);
        l.need(within == total, "tails");
        l.need(-fit.slope >= rep.nu - 0.01, "decay");
    });

    run(10, "diophantine scan and exceptional set", [](Line& l) {
        const ConditionQReport a = condition_2q(2.0 * I1, {1.0, 1.0});
        const ConditionQReport b = condition_2q(I1, {1.0, 1.0});
        const bool a_ok = a.classification == QClass::Violated && !a.zero_witnesses.empty() &&
                          a.zero_witnesses.front() == std::vector<int>{0, 0};
        const bool b_ok = b.classification == QClass::Plausible && std::abs(b.min_distance - 1.0) < 1e-12;
        const ExceptionalSet e = exceptional_set({I1}, 7.0);
        std::set<long> u, alpha;
        for (auto z : e.u_coefficients())
            if (std::abs(z.real()) < 1e-12) u.insert(std::lround(z.imag()));
        for (auto z : e.alphas()) alpha.insert(std::lround(z.real()));
        const std::set<long> want = {-7, -5, -3, -1, 1, 3, 5, 7};
        l.note << " alpha=2i violated at k=(0,0):" << a_ok << " alpha=i plausible, min dist " << fmt(b.min_distance)
               << ":" << b_ok << " U-coefficients {+-i,..,+-7i}:" << (u == want && e.values.size() == 8)
               << " (alpha values {+-1,..,+-7}:" << (alpha == want) << ")";
        l.need(a_ok && b_ok, "scan");
        l.need(u == want && e.values.size() == 8, "exceptional set");
    });

    run(11, "invariance under 20 symplectic conjugations; +- pairing on 100 random A", [](Line& l) {
        int checked = 0, bad = 0;
        for (const auto& f : fixture_list()) {
            OperatorSpec base = fixture(f.name);
            base.alpha = 0.5;
            const Verdict v0 = classify(base);
            const StructuralReport r0 = structural_report(base);
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                const OperatorSpec c = conjugate_spec(base, random_real_symplectic(base.n, seed + 1000, 0.3));
                const Verdict v = classify(c);
                const StructuralReport r = structural_report(c);
                const bool same = v.status == v0.status && v.certificate.rule == v0.certificate.rule &&
                                  std::abs(r.nu - r0.nu) <= 1e-8 && spectra_match(r.spectrum, r0.spectrum, 1e-8);
                ++checked;
                if (!same) {
                    ++bad;
                    l.note << " [" << f.name << " seed " << seed << "]";
                }
            }
        }
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g;
        int paired = 0;
        for (int k = 0; k < 100; ++k) {
            const int d = 2 * (1 + k % 3);
            CMatrix A(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j) A(i, j) = A(j, i) = Complex(g(rng), g(rng));
            Eigen::ComplexEigenSolver<CMatrix> es(hamilton_from_A(A), false);
            std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + d), neg;
            for (auto z : ev) neg.push_back(-z);
            paired += spectra_match(ev, neg, 1e-8);
        }
        l.note << " conjugations consistent " << (checked - bad) << "/" << checked << "; paired spectra " << paired
               << "/100";
        l.need(bad == 0, "conjugation");
        l.need(paired == 100, "pairing");
    });

    run(12, "factorization and positivity on all fixtures", [](Line& l) {
        std::mt19937_64 rng(12);
        double fact = 0.0, pos = std::numeric_limits<double>::infinity();
        int nf = 0, np = 0;
        for (const auto& f : fixture_list()) {
            const CMatrix S = S_of(f.name);
            const double tf = std::min(1.0, first_focal_time(S));
            const SplitDecomposition sp = split_real_nonreal(spectrum_clusters(S));
            const bool both = maxabs(sp.S_r) > 1e-12 && maxabs(sp.S_i) > 1e-12;
            for (int k = 0; k < 10 && both; ++k) {
                const double t = (0.05 + 0.05 * k) * tf;
                const CVector w = random_w(static_cast<int>(S.rows()), rng);
                const Complex full = gamma_hat(S, 1.0, t, w);
                const Complex prod = gamma_hat(sp.S_r, 1.0, t, w) * gamma_hat(sp.S_i, 1.0, t, w);
                fact = std::max(fact, std::abs(full - prod) / std::abs(full));
                ++nf;
            }
            if (!re_q_psd(S).psd) continue;
            for (double frac : {0.01, 0.1, 0.3, 0.6, 0.9}) {
                const KernelHat k = kernel_hat(S, 1.0, frac * tf);
                for (int s = 0; s < 200; ++s) {
                    const CVector w = random_w(static_cast<int>(S.rows()), rng);
                    pos = std::min(pos, (w.transpose() * k.E * w)(0, 0).real() / w.squaredNorm());
                    ++np;
                }
            }
        }
        l.note << " factorization max rel err=" << fmt(fact) << " over " << nf << " samples (tol 1e-8); min Re w^T E w/|w|^2="
               << fmt(pos) << " over " << np << " samples (tol -1e-9)";
        l.need(fact <= 1e-8, "factorization");
        l.need(pos >= -1e-9, "positivity");
    });

    std::cout << (failures ? "FAIL" : "PASS") << "  all: " << 12 - failures << "/12 criteria" << std::endl;
    return failures ? 1 : 0;
}
