#include "heisolv/classifier.hpp"
#include "heisolv/fixtures.hpp"
#include "heisolv/kernel.hpp"
#include "heisolv/operator_spec.hpp"
#include "heisolv/report.hpp"
#include "heisolv/symplectic.hpp"
#include "heisolv/twisted.hpp"
#include "heisolv/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace heisolv;

namespace {

struct Input {
    std::string spec_path, expr, fixture_name, alpha;
    int n = 0;
    std::vector<double> params, lambdas;
    std::optional<double> m, c1, c2;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
    std::string format;
    Tolerances tol;
};

void add_input(CLI::App* cmd, Input& in) {
    auto* g = cmd->add_option_group("input", "operator source");
    g->add_option("--spec", in.spec_path, "JSON spec file");
    g->add_option("--expr", in.expr, "operator expression, e.g. \"X1^2+Y1^2\"");
    g->add_option("--fixture", in.fixture_name, "named fixture (see `heisolv fixtures`)");
    g->require_option(1);
    cmd->add_option("--n", in.n, "dimension for --expr (default: largest index)");
    cmd->add_option("--param", in.params, "fixture parameters in order");
    cmd->add_option("--m", in.m, "rotation_family_n2: m");
    cmd->add_option("--c1", in.c1, "rotation_family_n2: c1");
    cmd->add_option("--c2", in.c2, "rotation_family_n2: c2");
    cmd->add_option("--lambda", in.lambdas, "diagonal_form: lambda list")->delimiter(',');
    cmd->add_option("--alpha", in.alpha, "U coefficient: RE,IM or a complex literal such as 1+2i");
    cmd->add_option("--seed", in.seed, "seed for sampled checks");
    cmd->add_option("--threads", in.threads, "worker threads for grid convolution (1 = reference mode)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", in.out, "output path (default stdout)");
    cmd->add_option("--tol-sp", in.tol.sp);
    cmd->add_option("--tol-psd", in.tol.psd);
    cmd->add_option("--tol-cluster", in.tol.cluster);
    cmd->add_option("--tol-real", in.tol.real);
    cmd->add_option("--tol-structure", in.tol.structure);
    cmd->add_option("--tol-rank", in.tol.rank);
    cmd->add_option("--tol-subspace", in.tol.subspace);
    cmd->add_option("--tol-det", in.tol.det);
    cmd->add_option("--tol-zero", in.tol.zero);
}

std::pair<OperatorSpec, std::string> load(const Input& in) {
    OperatorSpec spec;
    std::string source;
    if (!in.spec_path.empty()) {
        spec = load_spec_file(in.spec_path);
        source = "spec:" + in.spec_path;
    } else if (!in.expr.empty()) {
        const int n = in.n > 0 ? in.n : infer_dimension(in.expr);
        if (n < 1) throw InputError("cannot infer n from the expression; pass --n");
        spec = spec_from_expression(in.expr, n);
        source = "expr:" + in.expr;
    } else {
        std::vector<double> p = in.params;
        if (in.m || in.c1 || in.c2) p = {in.m.value_or(5.0), in.c1.value_or(3.0), in.c2.value_or(4.0)};
        if (!in.lambdas.empty()) p = in.lambdas;
        spec = fixture(in.fixture_name, p);
        source = "fixture:" + in.fixture_name;
        if (!p.empty()) {
            std::ostringstream os;
            for (std::size_t k = 0; k < p.size(); ++k) os << (k ? "," : "(") << p[k];
            source += os.str() + ")";
        }
    }
    if (!in.alpha.empty()) spec.alpha += parse_complex(in.alpha);
    validate_spec(spec);
    return {spec, source};
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

int run(int argc, char** argv) {
    CLI::App app{"heisolv: structure, kernels and local solvability of left-invariant second-order operators "
                 "on Heisenberg groups"};
    app.require_subcommand(1);
    Input in;

    auto* analyze = app.add_subcommand("analyze", "full pipeline; JSON report");
    add_input(analyze, in);
    ClassifyOptions copt;
    bool no_exact = false, no_kernel = false;
    analyze->add_option("--kmax", copt.k_max, "shell radius of the diophantine scan");
    analyze->add_option("--mmax", copt.m_max, "largest exponent tried in the polynomial fit");
    analyze->add_option("--theta-samples", copt.theta_samples, "angles in the rotated sign search");
    analyze->add_flag("--no-exact", no_exact, "skip rational snapping in the diophantine scan");
    analyze->add_flag("--alpha-uniform", copt.alpha_uniform, "verdict for all alpha at once");
    analyze->add_flag("--no-kernel-checks", no_kernel, "omit the sampled kernel checks");
    analyze->add_option("--format", in.format, "json")->check(CLI::IsMember({"json"}));

    auto* kernel = app.add_subcommand("kernel", "kernel samples: hat Gamma on a w-grid, or Gamma in space");
    add_input(kernel, in);
    double t = 0.1, s = 0.1, mu = 1.0, extent = 8.0;
    int grid = 64;
    bool space = false;
    kernel->add_option("--t", t, "time");
    kernel->add_option("--mu", mu, "central frequency (nonzero)");
    kernel->add_option("--grid", grid, "points per axis");
    kernel->add_option("--extent", extent, "grid extent L, domain [-L/2, L/2)^{2n}");
    kernel->add_flag("--space", space, "Gamma_t on the space grid via the adapted Fourier transform");
    kernel->add_option("--format", in.format, "csv|binary")->check(CLI::IsMember({"csv", "binary"}));

    auto* verify = app.add_subcommand("verify", "invariant suites; one PASS/FAIL/SKIP row per check");
    add_input(verify, in);
    std::string suite = "all";
    VerifyOptions vopt;
    verify->add_option("--suite", suite, "structure|kernel|twisted|classifier|all")
        ->check(CLI::IsMember({"structure", "kernel", "twisted", "classifier", "all"}));
    verify->add_option("--conjugations", vopt.conjugations, "random symplectic conjugations");
    verify->add_option("--grid", vopt.grid, "points per axis for twisted checks");
    verify->add_option("--extent", vopt.extent, "grid extent for twisted checks");
    verify->add_option("--format", in.format, "text|json")->check(CLI::IsMember({"text", "json"}));

    auto* convolve = app.add_subcommand("convolve", "twisted convolution with Gamma_t on a grid");
    add_input(convolve, in);
    bool semigroup = false;
    std::string input_grid;
    convolve->add_option("--t", t, "time");
    convolve->add_option("--s", s, "second time for --semigroup");
    convolve->add_option("--mu", mu, "central frequency (nonzero)");
    convolve->add_option("--grid", grid, "points per axis");
    convolve->add_option("--extent", extent, "grid extent");
    convolve->add_option("--input", input_grid, "binary grid function f (default: seeded Gaussian mixture)");
    convolve->add_flag("--semigroup", semigroup, "report semigroup and contraction errors as JSON");
    convolve->add_option("--format", in.format, "csv|binary|json")->check(CLI::IsMember({"csv", "binary", "json"}));

    app.add_subcommand("fixtures", "list named fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.got_subcommand("fixtures")) {
        for (const auto& f : fixture_list())
            std::cout << f.name << "  n=" << (f.n > 0 ? std::to_string(f.n) : "len(lambda)") << "  params(" << f.parameters
                      << ")  " << f.description << '\n';
        return 0;
    }

    const auto [spec, source] = load(in);
    copt.tol = in.tol;
    vopt.tol = in.tol;
    vopt.seed = in.seed;
    vopt.threads = in.threads;

    if (analyze->parsed()) {
        copt.exact = !no_exact;
        AnalysisInput ai{spec, source, copt, in.seed, !no_kernel};
        emit(in.out, analysis_report(ai).dump(2) + "\n");
        return 0;
    }

    const CMatrix S = hamilton_from_A(spec.A);
    const Grid g{spec.n, grid, extent};

    if (kernel->parsed()) {
        validate_grid(g);
        GridFunction f(g);
        if (space) {
            f = kernel_on_grid(S, mu, t, g);
        } else {
            const KernelHat k = kernel_hat(S, mu, t, in.tol);
            for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = gamma_hat(k, g.point(i).cast<Complex>());
        }
        if (in.format == "binary") {
            if (in.out.empty()) throw InputError("--format binary needs --out");
            write_binary(f, in.out);
        } else {
            emit(in.out, to_csv(f));
        }
        return 0;
    }

    if (verify->parsed()) {
        const auto rows = verify_suite(suite, spec, vopt);
        bool ok = true;
        for (const auto& r : rows) ok = ok && r.passed;
        if (in.format == "json") {
            Json out = Json::array();
            for (const auto& r : rows)
                out.push_back({{"suite", r.suite},
                               {"name", r.name},
                               {"passed", r.passed},
                               {"skipped", r.skipped},
                               {"value", r.value},
                               {"threshold", r.threshold},
                               {"note", r.note}});
            emit(in.out, out.dump(2) + "\n");
        } else {
            emit(in.out, format_rows(rows));
        }
        return ok ? 0 : 1;
    }

    if (convolve->parsed()) {
        if (semigroup) {
            const SemigroupReport r = semigroup_check(S, mu, t, s, g, in.seed, 4, ParallelOptions{in.threads});
            Json j = {{"source", source},
                      {"t", t},
                      {"s", s},
                      {"mu", mu},
                      {"grid", {{"n", g.n}, {"m", g.m}, {"extent", g.L}}},
                      {"err_semigroup", r.err_semigroup},
                      {"err_contraction", r.err_contraction},
                      {"max_ratio", r.max_ratio},
                      {"err_ground_state", r.err_ground_state < 0.0 ? Json(nullptr) : Json(r.err_ground_state)},
                      {"boundary_mass", r.boundary_mass},
                      {"samples", r.samples}};
            emit(in.out, j.dump(2) + "\n");
            return 0;
        }
        const GridFunction f = input_grid.empty() ? random_gaussian_mixture(g, in.seed) : read_binary(input_grid);
        const GridFunction out = twisted_convolve(f, kernel_on_grid(S, mu, t, f.grid), mu, ParallelOptions{in.threads});
        if (in.format == "binary") {
            if (in.out.empty()) throw InputError("--format binary needs --out");
            write_binary(out, in.out);
        } else {
            emit(in.out, to_csv(out));
        }
        return 0;
    }
    return 4;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}
