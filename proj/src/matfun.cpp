#include "heisolv/matfun.hpp"

#include <cmath>
#include <limits>

namespace heisolv {

namespace {

constexpr double kUnit = std::numeric_limits<double>::epsilon() / 2;

int scaling_power(double norm) {
    if (norm <= 0.5) return 0;
    return static_cast<int>(std::ceil(std::log2(norm / 0.5)));
}

template <class M>
M exp_impl(const M& X) {
    const double nrm = X.cwiseAbs().colwise().sum().maxCoeff();
    const int s = scaling_power(nrm);
    const M Y = X / std::ldexp(1.0, s);
    const double y = nrm / std::ldexp(1.0, s);
    const auto d = X.rows();
    M sum = M::Identity(d, d);
    M term = M::Identity(d, d);
    double bound = 1.0;
    for (int k = 1; k < 60; ++k) {
        term = term * Y / static_cast<double>(k);
        sum += term;
        bound *= y / k;
        if (bound / (1.0 - y / (k + 1)) < kUnit) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

}  // namespace

CMatrix matrix_exp(const CMatrix& X) { return exp_impl(X); }
RMatrix matrix_exp(const RMatrix& X) { return exp_impl(X); }

CosSin matrix_cos_sin(const CMatrix& X) {
    const auto d = X.rows();
    const double nrm = X.cwiseAbs().colwise().sum().maxCoeff();
    const int s = scaling_power(nrm);
    const CMatrix Y = X / std::ldexp(1.0, s);
    const double y = nrm / std::ldexp(1.0, s);
    const CMatrix Y2 = Y * Y;

    CMatrix c = CMatrix::Identity(d, d);
    CMatrix sn = Y;
    CMatrix ct = CMatrix::Identity(d, d);
    CMatrix st = Y;
    double bound = y;  // |Y|^k / k! for the last term added
    for (int k = 2; k < 80; k += 2) {
        ct = -(ct * Y2) / static_cast<double>(k * (k - 1));
        st = -(st * Y2) / static_cast<double>(k * (k + 1));
        c += ct;
        sn += st;
        bound *= y * y / (k * (k + 1));
        if (bound / (1.0 - y / (k + 2)) < kUnit) break;
    }
    for (int i = 0; i < s; ++i) {
        CMatrix c2 = c * c - sn * sn;
        CMatrix s2 = 2.0 * (sn * c);
        c = std::move(c2);
        sn = std::move(s2);
    }
    CosSin out;
    out.cos = std::move(c);
    out.sin = std::move(sn);
    out.squarings = s;
    const CMatrix id = out.cos * out.cos + out.sin * out.sin - CMatrix::Identity(d, d);
    const double scale = std::max({1.0, std::pow(opnorm(out.cos), 2), std::pow(opnorm(out.sin), 2)});
    out.identity_residual = opnorm(id) / scale;
    return out;
}

CMatrix matrix_tan(const CMatrix& X) {
    CosSin cs = matrix_cos_sin(X);
    Eigen::PartialPivLU<CMatrix> lu(cs.cos);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) throw NumericError("cos(X) numerically singular, rcond " + std::to_string(rc));
    return lu.solve(cs.sin);
}

double opnorm(const CMatrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(M);
    return svd.singularValues()(0);
}

double opnorm(const RMatrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<RMatrix> svd(M);
    return svd.singularValues()(0);
}

}  // namespace heisolv
