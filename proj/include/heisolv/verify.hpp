#ifndef HEISOLV_VERIFY_HPP
#define HEISOLV_VERIFY_HPP

#include "heisolv/core.hpp"
#include "heisolv/operator_spec.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace heisolv {

struct CheckRow {
    std::string suite;
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string note;
    bool skipped = false;  // hypotheses of the check do not apply
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    int conjugations = 5;
    int grid = 64;
    double extent = 8.0;
    int threads = 1;
    Tolerances tol;
};

// Suites: structure, kernel, twisted, classifier, all. Rows whose hypotheses do not apply are marked SKIP.
std::vector<CheckRow> verify_suite(const std::string& suite, const OperatorSpec& spec, const VerifyOptions& opt = {});

std::string format_rows(const std::vector<CheckRow>& rows);

// Smallest t > 0 with det cos(2 pi t S) = 0, from the real eigenvalues; infinity if there are none.
double first_focal_time(const CMatrix& S, const Tolerances& tol = {});

}  // namespace heisolv

#endif
