#include "heisolv/twisted.hpp"
#include "heisolv/kernel.hpp"
#include "heisolv/symplectic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace heisolv {

namespace {

std::vector<int> unflatten(std::size_t flat, int dims, int m) {
    std::vector<int> idx(dims);
    for (int a = dims - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % m);
        flat /= m;
    }
    return idx;
}

std::size_t flatten(const std::vector<int>& idx, int m) {
    std::size_t f = 0;
    for (int i : idx) f = f * m + i;
    return f;
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn fn) {
    threads = std::max(1, threads);
    if (threads == 1 || count < 2) {
        fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) {
        const std::size_t b = k * chunk, e = std::min(count, b + chunk);
        if (b >= e) break;
        pool.emplace_back([=] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (a.grid.n != b.grid.n || a.grid.m != b.grid.m || a.grid.L != b.grid.L)
        throw InputError("grid functions live on different grids");
}

template <class T>
void put(std::ostream& os, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is) {
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw InputError("truncated grid file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < 2 * n; ++a) s *= static_cast<std::size_t>(m);
    return s;
}

RVector Grid::point(std::size_t flat) const {
    const auto idx = unflatten(flat, 2 * n, m);
    RVector v(2 * n);
    for (int a = 0; a < 2 * n; ++a) v(a) = coord(idx[a]);
    return v;
}

void validate_grid(const Grid& g) {
    if (g.n != 1 && g.n != 2) throw InputError("grid dimension n must be 1 or 2");
    if (g.m < 8 || (g.m & (g.m - 1)) != 0) throw InputError("grid points per axis must be a power of two >= 8");
    if (!(g.L > 0.0) || !std::isfinite(g.L)) throw InputError("grid extent must be positive");
}

GridFunction::GridFunction(const Grid& g) : grid(g), values(g.size(), Complex(0.0)) {}

GridFunction GridFunction::sample(const Grid& g, const std::function<Complex(const RVector&)>& f) {
    validate_grid(g);
    GridFunction out(g);
    for (std::size_t p = 0; p < out.values.size(); ++p) out.values[p] = f(g.point(p));
    return out;
}

double GridFunction::l1() const {
    double s = 0.0;
    for (const auto& z : values) s += std::abs(z);
    return s * std::pow(grid.h(), 2 * grid.n);
}

double GridFunction::l2() const {
    double s = 0.0;
    for (const auto& z : values) s += std::norm(z);
    return std::sqrt(s * std::pow(grid.h(), 2 * grid.n));
}

double GridFunction::max_abs() const {
    double s = 0.0;
    for (const auto& z : values) s = std::max(s, std::abs(z));
    return s;
}

double GridFunction::boundary_mass() const {
    const int band = std::max(1, grid.m / 16);
    double edge = 0.0, total = 0.0;
    for (std::size_t p = 0; p < values.size(); ++p) {
        const double a = std::abs(values[p]);
        total += a;
        const auto idx = unflatten(p, 2 * grid.n, grid.m);
        const bool near = std::any_of(idx.begin(), idx.end(),
                                      [&](int i) { return i < band || i >= grid.m - band; });
        if (near) edge += a;
    }
    return total > 0.0 ? edge / total : 0.0;
}

Complex inner(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b);
    Complex s = 0.0;
    for (std::size_t p = 0; p < a.values.size(); ++p) s += a.values[p] * std::conj(b.values[p]);
    return s * std::pow(a.grid.h(), 2 * a.grid.n);
}

double relative_l2(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b);
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < a.values.size(); ++p) {
        num += std::norm(a.values[p] - b.values[p]);
        den += std::norm(b.values[p]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

void check_boundary(const GridFunction& f, double limit, const std::string& what) {
    const double b = f.boundary_mass();
    if (b > limit)
        throw AliasingError(what + " has boundary mass " + std::to_string(b) + " above " + std::to_string(limit), b);
}

GridFunction twisted_convolve(const GridFunction& f, const GridFunction& g, double mu, const ParallelOptions& par,
                              bool check) {
    require_same_grid(f, g);
    const Grid& gr = f.grid;
    validate_grid(gr);
    if (check) {
        check_boundary(f, 1e-6, "first factor");
        check_boundary(g, 1e-6, "second factor");
    }
    const int n = gr.n, m = gr.m, d = 2 * n, half = m / 2;
    // phase[a*m + b] = e^{-pi i mu c_a c_b}
    std::vector<Complex> phase(static_cast<std::size_t>(m) * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) phase[a * m + b] = std::exp(Complex(0.0, -kPi * mu * gr.coord(a) * gr.coord(b)));
    const double w = std::pow(gr.h(), d);
    GridFunction out(gr);
    const std::size_t N = gr.size();
    std::vector<int> index(N * d);
    for (std::size_t q = 0; q < N; ++q) {
        const auto iq = unflatten(q, d, m);
        std::copy(iq.begin(), iq.end(), index.begin() + q * d);
    }
    parallel_for(N, par.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const int* I = &index[p * d];
            Complex acc = 0.0;
            for (std::size_t q = 0; q < N; ++q) {
                const Complex gq = g.values[q];
                if (gq == Complex(0.0)) continue;
                const int* Jx = &index[q * d];
                std::size_t src = 0;
                bool inside = true;
                for (int a = 0; a < d; ++a) {
                    const int sh = I[a] - Jx[a] + half;
                    if (sh < 0 || sh >= m) {
                        inside = false;
                        break;
                    }
                    src = src * m + sh;
                }
                if (!inside) continue;
                // sigma(v, v') = sum_j x_j y'_j - y_j x'_j
                Complex ph = 1.0;
                for (int j = 0; j < n; ++j)
                    ph *= phase[I[j] * m + Jx[n + j]] * std::conj(phase[I[n + j] * m + Jx[j]]);
                acc += f.values[src] * gq * ph;
            }
            out.values[p] = acc * w;
        }
    });
    return out;
}

GridFunction twisted_derivative(const GridFunction& f, int axis, Side side, double mu) {
    const Grid& gr = f.grid;
    const int n = gr.n, m = gr.m, d = 2 * n;
    if (axis < 0 || axis >= d) throw InputError("derivative axis out of range");
    const int partner = axis < n ? axis + n : axis - n;
    // Right side: x-axis gets -pi i mu y, y-axis gets +pi i mu x; left side flips both signs.
    double sgn = axis < n ? -1.0 : 1.0;
    if (side == Side::Left) sgn = -sgn;
    const double h = gr.h();
    GridFunction out(gr);
    std::size_t stride = 1;
    for (int a = d - 1; a > axis; --a) stride *= m;
    for (std::size_t p = 0; p < out.values.size(); ++p) {
        const auto idx = unflatten(p, d, m);
        const Complex fp = idx[axis] + 1 < m ? f.values[p + stride] : Complex(0.0);
        const Complex fm = idx[axis] > 0 ? f.values[p - stride] : Complex(0.0);
        out.values[p] = (fp - fm) / (2.0 * h) + Complex(0.0, sgn * kPi * mu * gr.coord(idx[partner])) * f.values[p];
    }
    return out;
}

GridFunction apply_L_tilde(const CMatrix& A, const GridFunction& f, double mu) {
    const int d = 2 * f.grid.n;
    if (A.rows() != d || A.cols() != d) throw InputError("coefficient matrix does not match the grid dimension");
    GridFunction out(f.grid);
    std::vector<GridFunction> first;
    for (int k = 0; k < d; ++k) first.push_back(twisted_derivative(f, k, Side::Right, mu));
    for (int j = 0; j < d; ++j) {
        bool any = false;
        for (int k = 0; k < d; ++k) any = any || A(j, k) != Complex(0.0);
        if (!any) continue;
        GridFunction inner_sum(f.grid);
        for (int k = 0; k < d; ++k) {
            if (A(j, k) == Complex(0.0)) continue;
            for (std::size_t p = 0; p < inner_sum.values.size(); ++p) inner_sum.values[p] += A(j, k) * first[k].values[p];
        }
        const GridFunction vj = twisted_derivative(inner_sum, j, Side::Right, mu);
        for (std::size_t p = 0; p < out.values.size(); ++p) out.values[p] += vj.values[p];
    }
    return out;
}

GridFunction adapted_fourier(const GridFunction& f) {
    const Grid& gr = f.grid;
    validate_grid(gr);
    const int n = gr.n, m = gr.m, d = 2 * n;
    const std::size_t N = gr.size();
    // With x_j = (j - m/2) h and xi_k = (k - m/2)/L, e^{-2 pi i xi_k x_j} = (-1)^{j+k} e^{-2 pi i jk/m}
    // when 4 | m.
    std::vector<Complex> buf(N);
    for (std::size_t p = 0; p < N; ++p) {
        const auto idx = unflatten(p, d, m);
        int parity = 0;
        for (int i : idx) parity += i;
        buf[p] = (parity % 2 ? -1.0 : 1.0) * f.values[p];
    }
    std::vector<int> dims(d, m);
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = fftw_plan_dft(d, dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    const double w = std::pow(gr.h(), d);
    for (std::size_t p = 0; p < N; ++p) {
        const auto idx = unflatten(p, d, m);
        int parity = 0;
        for (int i : idx) parity += i;
        buf[p] *= (parity % 2 ? -1.0 : 1.0) * w;
    }
    // hat f(w) = F(xi) with xi = -J w: xi_x = -w_y, xi_y = w_x.
    GridFunction out(Grid{n, m, m / gr.L});
    std::vector<int> src(d);
    for (std::size_t p = 0; p < N; ++p) {
        const auto idx = unflatten(p, d, m);
        for (int j = 0; j < n; ++j) {
            src[j] = (m - idx[n + j]) % m;
            src[n + j] = idx[j];
        }
        out.values[p] = buf[flatten(src, m)];
    }
    return out;
}

GridFunction kernel_on_grid(const CMatrix& S, double mu, double t, const Grid& grid) {
    validate_grid(grid);
    if (S.rows() != 2 * grid.n) throw InputError("Hamilton map does not match the grid dimension");
    const KernelHat k = kernel_hat(S, mu, t);
    GridFunction hat = GridFunction::sample(grid.dual(), [&](const RVector& w) {
        return gamma_hat(k, CVector(w.cast<Complex>()));
    });
    check_boundary(hat, 1e-6, "kernel transform");
    GridFunction out = adapted_fourier(hat);
    out.grid = grid;
    return out;
}

GridFunction random_gaussian_mixture(const Grid& g, std::uint64_t seed, int components) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uc(-0.5, 0.5), uw(0.5, 1.0), uz(-1.0, 1.0);
    const int d = 2 * g.n;
    std::vector<RVector> centers;
    std::vector<double> widths;
    std::vector<Complex> weights;
    for (int c = 0; c < components; ++c) {
        RVector ctr(d);
        for (int a = 0; a < d; ++a) ctr(a) = uc(rng);
        centers.push_back(ctr);
        widths.push_back(uw(rng));
        const double re = uz(rng), im = uz(rng);
        weights.emplace_back(re, im);
    }
    return GridFunction::sample(g, [&](const RVector& v) {
        Complex s = 0.0;
        for (int c = 0; c < components; ++c)
            s += weights[c] * std::exp(-kPi * (v - centers[c]).squaredNorm() / (widths[c] * widths[c]));
        return s;
    });
}

SemigroupReport semigroup_check(const CMatrix& S, double mu, double t, double s, const Grid& grid,
                                std::uint64_t seed, int samples, const ParallelOptions& par) {
    if (!re_q_psd(S).psd) throw HypothesisError("semigroup check needs Re Q_S >= 0");
    SemigroupReport r;
    const GridFunction gt = kernel_on_grid(S, mu, t, grid);
    const GridFunction gs = kernel_on_grid(S, mu, s, grid);
    const GridFunction gts = kernel_on_grid(S, mu, t + s, grid);
    r.boundary_mass = std::max({gt.boundary_mass(), gs.boundary_mass(), gts.boundary_mass()});
    r.err_semigroup = relative_l2(twisted_convolve(gt, gs, mu, par), gts);
    r.max_ratio = 0.0;
    for (int k = 0; k < samples; ++k) {
        const GridFunction f = random_gaussian_mixture(grid, seed + static_cast<std::uint64_t>(k));
        r.max_ratio = std::max(r.max_ratio, twisted_convolve(f, gt, mu, par).l2() / f.l2());
    }
    r.err_contraction = r.max_ratio - 1.0;
    r.samples = samples;
    const CMatrix mJ = -standard_J(grid.n).cast<Complex>();
    if (opnorm(CMatrix(S - mJ)) <= 1e-12) {
        const double a = kPi * std::abs(mu) / 2.0;
        const GridFunction f = GridFunction::sample(grid, [&](const RVector& v) { return Complex(std::exp(-a * v.squaredNorm())); });
        GridFunction expect = f;
        for (auto& z : expect.values) z *= std::exp(-2.0 * kPi * t);
        r.err_ground_state = relative_l2(twisted_convolve(f, gt, mu, par), expect);
    }
    return r;
}

CentralTransformReport central_transform_identity(const GroupFunction& f, const GroupFunction& g, double mu,
                                                  const Grid3& gr, const ParallelOptions& par) {
    if (gr.m < 8 || gr.m > 32 || gr.m_u < 8 || gr.m_u > 64) throw InputError("H_1 grid needs 8 <= m <= 32, 8 <= m_u <= 64");
    const int m = gr.m, mu_n = gr.m_u;
    const double h = gr.L / m, hu = gr.Lu / mu_n;
    auto xc = [&](int i) { return -0.5 * gr.L + i * h; };
    auto uc = [&](int k) { return -0.5 * gr.Lu + k * hu; };
    std::vector<Complex> ch(mu_n);
    for (int k = 0; k < mu_n; ++k) ch[k] = std::exp(Complex(0.0, -2.0 * kPi * mu * uc(k))) * hu;

    // Left side: group convolution (v,u)(v',u')^{-1} = (v - v', u - u' - sigma(v,v')/2), then the u-transform.
    const Grid g2{1, m, gr.L};
    GridFunction lhs(g2);
    std::vector<Complex> gvals(static_cast<std::size_t>(m) * m * mu_n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < mu_n; ++k) gvals[(i * m + j) * mu_n + k] = g(xc(i), xc(j), uc(k));
    parallel_for(static_cast<std::size_t>(m) * m, par.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const int i = static_cast<int>(p / m), j = static_cast<int>(p % m);
            const double x = xc(i), y = xc(j);
            Complex acc = 0.0;
            for (int k = 0; k < mu_n; ++k) {
                const double u = uc(k);
                Complex conv = 0.0;
                for (int i2 = 0; i2 < m; ++i2)
                    for (int j2 = 0; j2 < m; ++j2) {
                        const double x2 = xc(i2), y2 = xc(j2);
                        const double sig = x * y2 - y * x2;
                        for (int k2 = 0; k2 < mu_n; ++k2)
                            conv += f(x - x2, y - y2, u - uc(k2) - 0.5 * sig) * gvals[(i2 * m + j2) * mu_n + k2];
                    }
                acc += conv * h * h * hu * ch[k];
            }
            lhs.values[p] = acc;
        }
    });

    GridFunction fm(g2), gm(g2);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            Complex a = 0.0, b = 0.0;
            for (int k = 0; k < mu_n; ++k) {
                a += f(xc(i), xc(j), uc(k)) * ch[k];
                b += gvals[(i * m + j) * mu_n + k] * ch[k];
            }
            fm.values[i * m + j] = a;
            gm.values[i * m + j] = b;
        }
    const GridFunction rhs = twisted_convolve(fm, gm, mu, par, false);
    CentralTransformReport r;
    r.relative_error = relative_l2(lhs, rhs);
    r.norm = rhs.l2();
    return r;
}

RealBlockCalibration calibrate_real_block(const CMatrix& S, double mu, Complex t, const Grid& grid,
                                          const std::vector<RVector>& points) {
    validate_grid(grid);
    if (S.rows() != 2 * grid.n) throw InputError("Hamilton map does not match the grid dimension");
    const KernelHat k = kernel_hat(S, mu, t);
    GridFunction hat = GridFunction::sample(grid.dual(), [&](const RVector& w) {
        return gamma_hat(k, CVector(w.cast<Complex>()));
    });
    check_boundary(hat, 1e-6, "kernel transform");
    GridFunction space = adapted_fourier(hat);
    space.grid = grid;
    const RealBlockKernel rb = real_block_kernel(S, mu, 2.0 * kPi * t);
    const int d = 2 * grid.n;
    auto nearest = [&](const RVector& v) {
        std::vector<int> idx(d);
        for (int a = 0; a < d; ++a)
            idx[a] = std::clamp(static_cast<int>(std::lround((v(a) + 0.5 * grid.L) / grid.h())), 0, grid.m - 1);
        return idx;
    };
    const std::vector<int> origin(d, grid.m / 2);
    RealBlockCalibration cal;
    cal.c = space.values[flatten(origin, grid.m)] / rb.value_without_c(RVector::Zero(d));
    cal.modulus_error = std::abs(std::abs(cal.c) - 1.0);
    for (const auto& v : points) {
        const auto idx = nearest(v);
        RVector snapped(d);
        for (int a = 0; a < d; ++a) snapped(a) = grid.coord(idx[a]);
        const Complex model = cal.c * rb.value_without_c(snapped);
        const double err = std::abs(space.values[flatten(idx, grid.m)] - model) / std::abs(model);
        cal.max_relative_error = std::max(cal.max_relative_error, err);
        ++cal.points;
    }
    return cal;
}

void write_binary(const GridFunction& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open " + path + " for writing");
    put<std::int64_t>(os, f.grid.n);
    put<std::int64_t>(os, f.grid.m);
    put<double>(os, f.grid.L);
    for (const auto& z : f.values) {
        put<double>(os, z.real());
        put<double>(os, z.imag());
    }
}

GridFunction read_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open " + path);
    Grid g;
    g.n = static_cast<int>(get<std::int64_t>(is));
    g.m = static_cast<int>(get<std::int64_t>(is));
    g.L = get<double>(is);
    validate_grid(g);
    GridFunction f(g);
    for (auto& z : f.values) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        z = Complex(re, im);
        if (!std::isfinite(re) || !std::isfinite(im)) throw InputError("non-finite sample in " + path);
    }
    return f;
}

std::string to_csv(const GridFunction& f) {
    std::ostringstream os;
    os.precision(17);
    const int d = 2 * f.grid.n;
    for (int a = 0; a < d; ++a) os << (a < f.grid.n ? "x" : "y") << (a % f.grid.n + 1) << ',';
    os << "re,im\n";
    for (std::size_t p = 0; p < f.values.size(); ++p) {
        const RVector v = f.grid.point(p);
        for (int a = 0; a < d; ++a) os << v(a) << ',';
        os << f.values[p].real() << ',' << f.values[p].imag() << '\n';
    }
    return os.str();
}

}  // namespace heisolv
