#ifndef HEISOLV_MATFUN_HPP
#define HEISOLV_MATFUN_HPP

#include "heisolv/core.hpp"

namespace heisolv {

// Scaling-and-squaring Taylor evaluation. The Taylor tail is bounded by
// |X|^k/k! * 1/(1 - |X|/(k+1)) after scaling |X| <= 1/2, and summation stops
// once that bound drops below unit roundoff.
CMatrix matrix_exp(const CMatrix& X);
RMatrix matrix_exp(const RMatrix& X);

struct CosSin {
    CMatrix cos;
    CMatrix sin;
    double identity_residual = 0.0;  // |cos^2 + sin^2 - I| / max(1, |cos|^2, |sin|^2)
    int squarings = 0;
};

// cos and sin together, recovered from the scaled pair by double-angle steps.
CosSin matrix_cos_sin(const CMatrix& X);

// tan = cos^{-1} sin via LU; throws NumericError if cos is numerically singular.
CMatrix matrix_tan(const CMatrix& X);

}  // namespace heisolv

#endif
