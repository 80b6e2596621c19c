#include "heisolv/report.hpp"
#include "heisolv/verify.hpp"
#include "heisolv/kernel.hpp"
#include "heisolv/symplectic.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace heisolv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string qclass_name(QClass c) {
    switch (c) {
        case QClass::Violated: return "violated";
        case QClass::Plausible: return "plausible";
        case QClass::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Json complex_list(const std::vector<Complex>& zs) {
    Json a = Json::array();
    for (const auto& z : zs) a.push_back(to_json(z));
    return a;
}

void walk_nulls(Json& j, const std::string& path, Json& out) {
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (!std::isfinite(x)) {
            out.push_back({{"path", path}, {"reason", std::isnan(x) ? "not applicable or undefined" : "infinite"}});
            j = nullptr;
        }
        return;
    }
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) walk_nulls(it.value(), path + "/" + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) walk_nulls(j[i], path + "/" + std::to_string(i), out);
    }
}

void compare(const Json& e, const Json& a, const std::string& path, double rel, double abs_tol,
             const std::vector<std::string>& ignore, std::vector<std::string>& out) {
    if (e.is_number() && a.is_number()) {
        const double x = e.get<double>(), y = a.get<double>();
        if (std::abs(x - y) > std::max(abs_tol, rel * std::abs(x)))
            out.push_back(path + ": expected " + e.dump() + ", got " + a.dump());
        return;
    }
    if (e.type() != a.type()) {
        out.push_back(path + ": type differs, expected " + e.dump() + ", got " + a.dump());
        return;
    }
    if (e.is_object()) {
        for (auto it = e.begin(); it != e.end(); ++it) {
            if (std::find(ignore.begin(), ignore.end(), it.key()) != ignore.end()) continue;
            if (!a.contains(it.key())) {
                out.push_back(path + "/" + it.key() + ": missing");
                continue;
            }
            compare(it.value(), a.at(it.key()), path + "/" + it.key(), rel, abs_tol, ignore, out);
        }
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!e.contains(it.key()) && std::find(ignore.begin(), ignore.end(), it.key()) == ignore.end())
                out.push_back(path + "/" + it.key() + ": unexpected");
        return;
    }
    if (e.is_array()) {
        if (e.size() != a.size()) {
            out.push_back(path + ": length " + std::to_string(e.size()) + " vs " + std::to_string(a.size()));
            return;
        }
        for (std::size_t i = 0; i < e.size(); ++i)
            compare(e[i], a[i], path + "/" + std::to_string(i), rel, abs_tol, ignore, out);
        return;
    }
    if (e != a) out.push_back(path + ": expected " + e.dump() + ", got " + a.dump());
}

}  // namespace

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const CMatrix& M) {
    Json rows = Json::array();
    for (int i = 0; i < M.rows(); ++i) {
        Json r = Json::array();
        for (int j = 0; j < M.cols(); ++j) r.push_back(to_json(M(i, j)));
        rows.push_back(r);
    }
    return rows;
}

Json to_json(const Tolerances& t) {
    return {{"sp", t.sp},         {"psd", t.psd},   {"cluster", t.cluster}, {"real", t.real},
            {"structure", t.structure}, {"rank", t.rank}, {"subspace", t.subspace}, {"det", t.det},
            {"zero", t.zero}};
}

Json to_json(const OperatorSpec& s) { return {{"n", s.n}, {"A", to_json(s.A)}, {"alpha", to_json(s.alpha)}}; }

Json to_json(const StructuralReport& r) {
    Json clusters = Json::array();
    for (const auto& [l, m] : r.clusters) clusters.push_back({{"lambda", to_json(l)}, {"multiplicity", m}});
    Json rw = Json::array();
    for (const auto& w : r.property_R.witnesses) rw.push_back({{"lambda", to_json(w.lambda)}, {"distance", w.distance}});
    Json cone = {{"holds", r.cone.holds},
                 {"constant", r.cone.holds ? r.cone.constant : kNaN},
                 {"constant_lower_bound", r.cone.constant_lower_bound}};
    if (r.cone.witness) {
        Json w = Json::array();
        for (int i = 0; i < r.cone.witness->size(); ++i) w.push_back((*r.cone.witness)(i));
        cone["witness"] = w;
        cone["witness_re_q"] = r.cone.witness_re;
        cone["witness_im_q"] = r.cone.witness_im;
    } else {
        cone["witness"] = nullptr;
    }
    return {{"n", r.n},
            {"norm_S", r.norm_S},
            {"spectrum", complex_list(r.spectrum)},
            {"clusters", clusters},
            {"omegas", complex_list(r.omegas)},
            {"nu_list", r.nu_list},
            {"nu", r.nu},
            {"nu_min", r.nu_min},
            {"lambdas", r.lambdas},
            {"re_q_psd", r.re_q_psd},
            {"re_q_min_eigenvalue", r.re_q_min_eig},
            {"property_R", {{"holds", r.property_R.holds}, {"vacuous", r.property_R.vacuous}, {"witnesses", rw}}},
            {"property_C", {{"holds", r.property_C.holds}, {"residual", r.property_C.residual}}},
            {"re_q_sr_psd", r.re_q_sr_psd},
            {"re_q_si_psd", r.re_q_si_psd},
            {"re_q_sr_tests",
             {{"subspace", r.re_q_sr.subspace_test},
              {"form", r.re_q_sr.form_test},
              {"subspace_residual", r.re_q_sr.subspace_residual},
              {"form_min_eigenvalue", r.re_q_sr.form_min_eigenvalue}}},
            {"cone", cone},
            {"nilpotency_step_N", r.nilpotency_N},
            {"nilpotency_step_N_r", r.nilpotency_Nr},
            {"S_r_zero", r.s_r_zero},
            {"S_i_zero", r.s_i_zero},
            {"re_S_zero", r.re_s_zero},
            {"re_D_r_zero", r.re_d_r_zero},
            {"W_dim", r.W_dim >= 0 ? Json(r.W_dim) : Json(nullptr)},
            {"K_dim", r.K_dim >= 0 ? Json(r.K_dim) : Json(nullptr)}};
}

Json to_json(const ConditionQReport& q) {
    Json z = Json::array();
    for (std::size_t i = 0; i < q.zero_witnesses.size(); ++i)
        z.push_back({{"k", q.zero_witnesses[i]}, {"sign", q.zero_signs[i]}});
    return {{"K_max", q.k_max},
            {"M_max", q.m_max},
            {"exact", q.exact},
            {"classification", qclass_name(q.classification)},
            {"min_distance", q.min_distance},
            {"argmin_k", q.argmin_k},
            {"argmin_sign", q.argmin_sign},
            {"zero_witnesses", z},
            {"fit_C", q.fit_M >= 0 ? q.fit_C : kNaN},
            {"fit_M", q.fit_M >= 0 ? Json(q.fit_M) : Json(nullptr)},
            {"scanned", q.scanned}};
}

Json to_json(const Membership& m) {
    Json j = {{"member", m.member}, {"distance", m.distance}};
    if (m.witness)
        j["witness"] = {{"k", m.witness->k}, {"sign", m.witness->sign}, {"alpha", to_json(m.witness->alpha)}};
    else
        j["witness"] = nullptr;
    return j;
}

Json to_json(const NilpotentNormalForm& nf) {
    return {{"m", nf.m},
            {"B", to_json(nf.B)},
            {"symplectic_residual", nf.symplectic_residual},
            {"form_residual", nf.form_residual}};
}

Json to_json(const Verdict& v) {
    Json hyp = Json::array();
    for (const auto& [name, ok] : v.certificate.hypotheses) hyp.push_back({{"name", name}, {"holds", ok}});
    Json q = Json::object();
    for (const auto& [k, x] : v.certificate.quantities) q[k] = x;
    Json j = {{"status", status_name(v.status)},
              {"certificate",
               {{"rule", v.certificate.rule.empty() ? Json(nullptr) : Json(v.certificate.rule)},
                {"hypotheses", hyp},
                {"quantities", q},
                {"notes", v.certificate.notes}}},
              {"rotation_theta", v.rotation},
              {"trace", v.trace}};
    j["condition_q"] = v.condition_q ? to_json(*v.condition_q) : Json(nullptr);
    j["exceptional"] = v.exceptional ? to_json(*v.exceptional) : Json(nullptr);
    j["normal_form"] = v.normal_form ? to_json(*v.normal_form) : Json(nullptr);
    return j;
}

KernelSummary kernel_summary(const OperatorSpec& spec, std::uint64_t seed, const Tolerances& tol) {
    KernelSummary k;
    const CMatrix S = hamilton_from_A(spec.A);
    const int d = 2 * spec.n;
    std::mt19937_64 rng(seed);
    const double t_max = std::min(0.2, 0.4 * first_focal_time(S, tol));
    std::uniform_real_distribution<double> ut(0.05 * t_max, t_max), uw(-1.0, 1.0);
    k.positivity_min = kNaN;
    for (int s = 0; s < 5; ++s) {
        const double t = ut(rng);
        CVector w(d);
        for (int a = 0; a < d; ++a) w(a) = uw(rng);
        try {
            const PdeResidual r = pde_residual(S, 1.0, t, w, 1e-4, tol);
            k.pde_max_ratio = std::max(k.pde_max_ratio, r.residual / std::max(r.scale, 1e-300));
            ++k.samples;
        } catch (const FocalTimeError& e) {
            k.skipped.push_back(std::string("pde sample: ") + e.what());
        }
    }
    try {
        k.branch_residual = sqrt_det_cos(S, 0.5 * t_max, tol).branch_residual;
    } catch (const FocalTimeError& e) {
        k.branch_residual = kNaN;
        k.skipped.push_back(std::string("branch: ") + e.what());
    }
    if (re_q_psd(S, tol).psd) {
        double mn = std::numeric_limits<double>::infinity();
        for (double t : {0.25 * t_max, 0.5 * t_max}) {
            try {
                const KernelHat kh = kernel_hat(S, 1.0, t, tol);
                for (int s = 0; s < 50; ++s) {
                    CVector w(d);
                    for (int a = 0; a < d; ++a) w(a) = uw(rng);
                    const Complex q = w.transpose() * kh.E * w;
                    mn = std::min(mn, q.real() / w.squaredNorm());
                }
            } catch (const FocalTimeError& e) {
                k.skipped.push_back(std::string("positivity: ") + e.what());
            }
        }
        if (std::isfinite(mn)) k.positivity_min = mn;
    } else {
        k.skipped.push_back("positivity: Re Q_S is not psd");
    }
    try {
        const ClusterSet cs = spectrum_clusters(S, tol);
        const SplitDecomposition sp = split_real_nonreal(cs);
        const double zt = tol.structure * std::max(1.0, cs.norm);
        if (opnorm(sp.S_r) > zt && opnorm(sp.S_i) > zt) {
            double err = 0.0;
            for (double t : {0.15 * t_max, 0.35 * t_max}) {
                const KernelHat a = kernel_hat(S, 1.0, t, tol), b = kernel_hat(sp.S_r, 1.0, t, tol),
                                c = kernel_hat(sp.S_i, 1.0, t, tol);
                for (int s = 0; s < 5; ++s) {
                    CVector w(d);
                    for (int i = 0; i < d; ++i) w(i) = uw(rng);
                    const Complex full = gamma_hat(a, w), prod = gamma_hat(b, w) * gamma_hat(c, w);
                    err = std::max(err, std::abs(full - prod) / std::abs(full));
                }
            }
            k.factorization_error = err;
        } else {
            k.skipped.push_back("factorization: S_r or S_i is zero");
        }
    } catch (const NumericError& e) {
        k.factorization_error = kNaN;
        k.skipped.push_back(std::string("factorization: ") + e.what());
    }
    return k;
}

Json to_json(const KernelSummary& k) {
    return {{"mu", 1.0},
            {"samples", k.samples},
            {"pde_max_relative_residual", k.pde_max_ratio},
            {"sqrt_det_branch_residual", k.branch_residual},
            {"positivity_min", k.positivity_min},
            {"factorization_error", k.factorization_error >= 0.0 || std::isnan(k.factorization_error)
                                        ? Json(k.factorization_error)
                                        : Json(nullptr)},
            {"skipped", k.skipped}};
}

Json analysis_report(const AnalysisInput& in) {
    Json r;
    r["schema_version"] = kSchemaVersion;
    r["tool"] = {{"name", "heisolv"}, {"version", kToolVersion}};
    r["source"] = in.source;
    r["spec"] = to_json(in.spec);
    r["options"] = {{"k_max", in.options.k_max},
                    {"m_max", in.options.m_max},
                    {"exact", in.options.exact},
                    {"alpha_uniform", in.options.alpha_uniform},
                    {"theta_samples", in.options.theta_samples},
                    {"seed", in.seed}};
    r["tolerances"] = to_json(in.options.tol);
    const Verdict v = classify(in.spec, in.options);
    r["structure"] = v.structure ? to_json(*v.structure) : Json(nullptr);
    r["verdict"] = to_json(v);
    if (in.kernel_checks) {
        OperatorSpec rotated = in.spec;
        rotated.A *= std::exp(Complex(0.0, v.rotation));
        r["kernel_checks"] = to_json(kernel_summary(rotated, in.seed, in.options.tol));
    } else {
        r["kernel_checks"] = nullptr;
    }
    finalize_nulls(r);
    return r;
}

void finalize_nulls(Json& report) {
    Json out = Json::array();
    walk_nulls(report, "", out);
    if (report.contains("null_fields")) {
        for (auto& x : out) report["null_fields"].push_back(x);
    } else {
        report["null_fields"] = out;
    }
}

std::vector<std::string> compare_reports(const Json& expected, const Json& actual, double rel_tol, double abs_tol,
                                         const std::vector<std::string>& ignore) {
    std::vector<std::string> out;
    compare(expected, actual, "", rel_tol, abs_tol, ignore, out);
    return out;
}

}  // namespace heisolv
