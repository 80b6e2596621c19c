#ifndef HEISOLV_CLASSIFIER_HPP
#define HEISOLV_CLASSIFIER_HPP

#include "heisolv/core.hpp"
#include "heisolv/operator_spec.hpp"
#include "heisolv/spectral.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heisolv {

// --- Diophantine condition |alpha +- sum (2k_j+1) i lambda_j| >= C (1+|k|)^{-M} ---

enum class QClass { Violated, Plausible, Inconclusive };

struct ConditionQReport {
    int k_max = 0;
    int m_max = 0;
    bool exact = false;  // alpha and lambdas are Gaussian-rational and were scanned exactly
    double min_distance = 0.0;
    std::vector<int> argmin_k;
    int argmin_sign = 1;
    std::vector<std::vector<int>> zero_witnesses;  // k with a zero, sign folded in zero_signs
    std::vector<int> zero_signs;
    std::vector<double> shell_min;  // min distance over |k|_1 = K, K = 0..k_max
    double fit_C = 0.0;
    int fit_M = -1;  // -1 if no M <= m_max gives a bound whose minimum is attained early
    QClass classification = QClass::Inconclusive;
    std::size_t scanned = 0;
};

ConditionQReport condition_2q(Complex alpha, const std::vector<double>& lambdas, int k_max = 50, int m_max = 8,
                              bool exact_mode = true);

// --- Exceptional values: alpha = +- sum (2k_j+1) i omega_j ---

struct ExceptionalValue {
    Complex alpha;          // value of alpha in L + i alpha U
    Complex u_coefficient;  // i alpha, the coefficient of U
    std::vector<int> k;
    int sign = 1;
    double weight = 0.0;    // sum (2k_j+1) Im omega_j
};

struct ExceptionalSet {
    std::vector<Complex> omegas;
    double bound = 0.0;
    std::vector<ExceptionalValue> values;  // sorted by (weight, Re, Im), deduplicated within 1e-12

    std::vector<Complex> alphas() const;
    std::vector<Complex> u_coefficients() const;
};

ExceptionalSet exceptional_set(const std::vector<Complex>& omegas, double bound);

struct Membership {
    bool member = false;
    std::optional<ExceptionalValue> witness;
    double distance = 0.0;  // to the nearest enumerated value
};

// Membership of alpha (or of the U coefficient i alpha when as_u_coefficient).
Membership exceptional_membership(const std::vector<Complex>& omegas, Complex value, bool as_u_coefficient = false,
                                  double tol = 1e-9);

// --- Point check of the bracket condition for a pair of real quadratic symbols ---

struct HormanderPoint {
    Complex p1, p2, bracket;  // symbols w^T A w of L_{S1}, L_{S2}, L_{[S1,S2]}
    bool exact = false;
    bool satisfied = false;
};

// S1, S2 real Hamilton maps, w = (xi, eta) in R^{2n}.
HormanderPoint hormander_point_check(const CMatrix& S1, const CMatrix& S2, const RVector& w, double tol = 1e-12);

// --- Normal form for S^2 = 0 ---

struct NilpotentNormalForm {
    int m = 0;
    CMatrix B;              // m x m block on Y_1..Y_m
    RMatrix basis;          // columns X_1..X_n, Y_1..Y_n in the original coordinates
    double symplectic_residual = 0.0;
    double form_residual = 0.0;  // |A' outside the Y_1..Y_m block|
    CMatrix A_new;
};

NilpotentNormalForm nilpotent_normal_form(const CMatrix& S, const Tolerances& tol = {});

// --- Two-dimensional rotation family: symbol q(theta) = m + c1 cos 2 theta + c2 sin 2 theta ---

// The sups run over mu in +-{0.01, .., 100}, r0 in {0.05, .., 5} and theta0, theta on a uniform grid.
struct RotationFamilyReport {
    double min_q = 0.0;
    double critical_angle = 0.0;
    bool q_nonnegative = false;
    bool amplitude_condition = false;         // m >= sqrt(c1^2 + c2^2)
    double q_full_period_error = 0.0;         // |Q_{theta0}(theta0 + 2 pi) - 2 pi m|
    double min_Q_forward = 0.0;               // min over theta >= theta0 of Q_{theta0}(theta)
    double sup_generic = 0.0;                 // sup |mu r0 G| when Im alpha is not an even integer
    double sup_generic_refined = 0.0;
    double sup_even = 0.0;                    // sup |mu r0 (a - mu m r0^2) G| when Im alpha is even
    double sup_even_refined = 0.0;
    bool stable = false;                      // angle-refined sups within 5% of the coarse ones
    double range_growth_generic = 0.0;        // sup with the mu grid scaled by 10, over the base sup
    double range_growth_even = 0.0;
    int samples = 0;
};

double rotation_family_q(double m, double c1, double c2, double theta);
double rotation_family_Q(double m, double c1, double c2, double theta0, double theta);

RotationFamilyReport rotation_family_symbol_check(double m, double c1, double c2, Complex alpha, int samples = 64);

struct RotationFamilyMatch {
    bool matched = false;
    double m = 0.0, c1 = 0.0, c2 = 0.0;
    double m_over_amplitude = 0.0;  // invariant under conjugation and scaling
    double kappa = 1.0;             // Im-part scale divided out in the canonical frame
    bool canonical_frame = false;   // parameters read after a change of symplectic basis
};

// Pattern n = 2, A_XX = 0, A_XY = [[0, i], [-i, 0]], A_YY = [[m+c1, c2], [c2, m-c1]] real, m >= |c| > 0,
// matched directly or after a positive rescaling and a real symplectic change of basis.
RotationFamilyMatch match_rotation_family(const OperatorSpec& spec, double tol = 1e-9);

// The three-dimensional fixture whose real-eigenvalue pair is not self-conjugate (the strip result
// is known to survive there), up to real symplectic conjugation and positive scaling.
bool match_conjugation_breaking_fixture(const OperatorSpec& spec, double tol = 1e-9);

// --- Verdict ---

enum class Status {
    Solvable,
    SolvableExceptUnknownExceptional,
    ExceptionalValueUnknown,
    NotSolvable,
    OutsideScope,
    Inconclusive
};

std::string status_name(Status s);

struct Certificate {
    std::string rule;  // one of the rule tags below, empty if none applies
    std::vector<std::pair<std::string, bool>> hypotheses;
    std::map<std::string, double> quantities;
    std::vector<std::string> notes;
};

// Rule tags.
inline constexpr const char* kRuleStrip = "nonreal-strip";                       // |Re alpha| < nu
inline constexpr const char* kRuleMixedNonzeroReal = "mixed-spectrum-real-part-nonzero";
inline constexpr const char* kRuleMixedOffExceptional = "mixed-spectrum-off-exceptional";
inline constexpr const char* kRuleRealDissipative = "real-spectrum-nonzero-real-part";
inline constexpr const char* kRuleRealNilpotent = "real-spectrum-nonzero-nilpotent";
inline constexpr const char* kRuleRealDiophantine = "real-spectrum-diophantine";
inline constexpr const char* kRuleSquareZero = "square-zero-constant-coefficients";
inline constexpr const char* kRuleRotationFamily = "rotation-family";

struct ClassifyOptions {
    int k_max = 50;
    int m_max = 8;
    bool exact = true;
    bool alpha_uniform = false;  // verdict for every alpha at once
    int theta_samples = 360;
    Tolerances tol;
};

struct Verdict {
    Status status = Status::Inconclusive;
    Certificate certificate;
    std::vector<std::string> trace;
    double rotation = 0.0;  // theta with Re(e^{i theta} Q_S) >= 0 that was applied
    std::optional<ConditionQReport> condition_q;
    std::optional<Membership> exceptional;
    std::optional<NilpotentNormalForm> normal_form;
    std::optional<StructuralReport> structure;
};

struct RotationSearch {
    bool found = false;
    double theta = 0.0;
    double min_eigenvalue = 0.0;  // of Re(e^{i theta} A) at the best theta
};

// Maximizes the minimum eigenvalue of Re(e^{i theta} A) over a theta grid plus golden-section refinement.
RotationSearch rotated_sign_condition(const CMatrix& A, int samples = 360, const Tolerances& tol = {});

Verdict classify(const OperatorSpec& spec, const ClassifyOptions& options = {});

}  // namespace heisolv

#endif
