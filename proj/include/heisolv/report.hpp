#ifndef HEISOLV_REPORT_HPP
#define HEISOLV_REPORT_HPP

#include "heisolv/classifier.hpp"
#include "heisolv/core.hpp"
#include "heisolv/operator_spec.hpp"
#include "heisolv/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace heisolv {

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

Json to_json(Complex z);  // [re, im]
Json to_json(const CMatrix& M);  // rows of [re, im]
Json to_json(const Tolerances& tol);
Json to_json(const OperatorSpec& spec);
Json to_json(const StructuralReport& r);
Json to_json(const ConditionQReport& q);
Json to_json(const Membership& m);
Json to_json(const NilpotentNormalForm& nf);
Json to_json(const Verdict& v);

// Pointwise kernel checks on a few seeded (t, w) samples.
struct KernelSummary {
    double pde_max_ratio = 0.0;          // max residual / scale
    double branch_residual = 0.0;        // sqrt det cos at half the sampled t range
    double positivity_min = 0.0;         // min Re(w^T E w) / |w|^2, Re Q_S >= 0 only
    double factorization_error = -1.0;   // -1 when S_r or S_i is zero
    int samples = 0;
    std::vector<std::string> skipped;    // reasons for skipped evaluations
};

KernelSummary kernel_summary(const OperatorSpec& spec, std::uint64_t seed, const Tolerances& tol = {});
Json to_json(const KernelSummary& k);

struct AnalysisInput {
    OperatorSpec spec;
    std::string source;  // "expr:...", "fixture:...", "spec:PATH"
    ClassifyOptions options;
    std::uint64_t seed = 1;
    bool kernel_checks = true;
};

Json analysis_report(const AnalysisInput& in);

// Replaces non-finite numbers by null and records {"path", "reason"} under "null_fields".
void finalize_nulls(Json& report);

// Field-wise comparison: numbers within max(abs_tol, rel_tol * |expected|), everything else exactly.
// Keys listed in ignore are skipped at any depth. Returns one line per difference.
std::vector<std::string> compare_reports(const Json& expected, const Json& actual, double rel_tol = 1e-7,
                                         double abs_tol = 1e-9, const std::vector<std::string>& ignore = {});

}  // namespace heisolv

#endif
