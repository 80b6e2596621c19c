#ifndef HEISOLV_TEST_HELPERS_HPP
#define HEISOLV_TEST_HELPERS_HPP

#include "heisolv/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

namespace heisolv::test {

inline double maxabs(const CMatrix& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

// Eigenvalues sorted by (Re, Im), from a plain dense eigensolve.
inline std::vector<Complex> eigenvalues(const CMatrix& M) {
    Eigen::ComplexEigenSolver<CMatrix> es(M, false);
    std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        if (std::abs(a.real() - b.real()) > 1e-6) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

inline CMatrix random_symmetric(int d, std::mt19937_64& rng, bool complex_part = true) {
    std::normal_distribution<double> g;
    CMatrix A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) A(i, j) = A(j, i) = Complex(g(rng), complex_part ? g(rng) : 0.0);
    return A;
}

}  // namespace heisolv::test

#endif
