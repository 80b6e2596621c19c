#ifndef HEISOLV_CORE_HPP
#define HEISOLV_CORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace heisolv {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;
inline const Complex kI{0.0, 1.0};

// Error hierarchy. InputError maps to CLI exit code 2, NumericError to 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : InputError(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class HypothesisError : public NumericError {
public:
    using NumericError::NumericError;
};

class ClusteringAmbiguity : public NumericError {
public:
    ClusteringAmbiguity(const std::string& msg, double g)
        : NumericError(msg), gap(g) {}
    double gap;
};

class FocalTimeError : public NumericError {
public:
    FocalTimeError(const std::string& msg, Complex t, double det)
        : NumericError(msg), time(t), det_abs(det) {}
    Complex time;
    double det_abs;
};

class AliasingError : public NumericError {
public:
    AliasingError(const std::string& msg, double mass)
        : NumericError(msg), boundary_mass(mass) {}
    double boundary_mass;
};

// All tolerances in one place; relative ones are scaled by the norm noted.
struct Tolerances {
    double sp = 1e-10;         // membership in sp, times (1 + |S|)
    double psd = 1e-9;         // min eigenvalue of Re A, times (1 + |A|)
    double cluster = 1e-6;     // eigenvalue merge radius, times |S|
    double real = 1e-8;        // |Im lambda| cut for "real", times |S|
    double structure = 1e-9;   // residual checks on D, N, commutators, times |S|^k
    double rank = 1e-9;        // numerical rank cut for subspaces
    double subspace = 1e-7;    // subspace containment / principal angle checks
    double det = 1e-8;         // focal time guard on |det cos|
    double zero = 1e-12;       // exact zero threshold for non-rational scans
};

// Spectral norm, used to scale relative tolerances.
double opnorm(const CMatrix& M);
double opnorm(const RMatrix& M);

}  // namespace heisolv

#endif
