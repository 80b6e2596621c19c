#include "heisolv/fixtures.hpp"
#include "heisolv/operator_spec.hpp"

#include <doctest.h>

using namespace heisolv;

namespace {
const Complex I1(0.0, 1.0);
}

TEST_SUITE("operator-spec") {

TEST_CASE("parser keeps terms in source order without merging") {
    const auto e = parse_operator("X1^2+X2^2+i*(X2*Y2+Y2*X2)", 2);
    REQUIRE(e.terms.size() == 4);
    CHECK(e.terms[0].word == std::vector<int>{0, 0});
    CHECK(e.terms[1].word == std::vector<int>{1, 1});
    CHECK(e.terms[2].word == std::vector<int>{1, 3});
    CHECK(e.terms[3].word == std::vector<int>{3, 1});
    CHECK(e.terms[2].coeff == I1);
    CHECK(e.terms[3].coeff == I1);
    CHECK(normalize_to_matrix(e).alpha == Complex(0.0));
}

TEST_CASE("central generator alone") {
    const auto e = parse_operator("U", 1);
    REQUIRE(e.terms.size() == 1);
    CHECK(e.terms[0].word == std::vector<int>{2});
    const OperatorSpec s = normalize_to_matrix(e);
    CHECK(s.A.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.alpha == -I1);  // i alpha U = U
}

TEST_CASE("scalar times a mixed product") {
    const auto e = parse_operator("2*X1*Y1", 1);
    REQUIRE(e.terms.size() == 1);
    CHECK(e.terms[0].coeff == Complex(2.0));
    CHECK(e.terms[0].word == std::vector<int>{0, 1});
}

TEST_CASE("X1 Y1 splits into a symmetric part and half the commutator") {
    const OperatorSpec s = spec_from_expression("X1*Y1", 1);
    CHECK(s.A(0, 1) == Complex(0.5));
    CHECK(s.A(1, 0) == Complex(0.5));
    CHECK(s.A(0, 0) == Complex(0.0));
    CHECK(std::abs(s.alpha - Complex(0.0, -0.5)) < 1e-15);
}

TEST_CASE("mixed-spectrum fixture coefficients") {
    const OperatorSpec s = fixture("mixed_spectrum_n2");
    CMatrix A = CMatrix::Zero(4, 4);
    A(0, 0) = A(1, 1) = 1.0;
    A(1, 3) = A(3, 1) = I1;
    CHECK((s.A - A).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.alpha == Complex(0.0));
}

TEST_CASE("rotation-family fixture coefficients match the block display") {
    const double m = 5, c1 = 3, c2 = 4;
    const OperatorSpec s = fixture("rotation_family_n2", {m, c1, c2});
    CMatrix A(4, 4);
    A << 0, 0, 0, I1, 0, 0, -I1, 0, 0, -I1, m + c1, c2, I1, 0, c2, m - c1;
    CHECK((s.A - A).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("JSON round trip and loader variants") {
    const OperatorSpec s = fixture("rotation_family_n2");
    const OperatorSpec r = load_spec_json(save_spec_json(s));
    CHECK(r.n == 2);
    CHECK((r.A - s.A).cwiseAbs().maxCoeff() == 0.0);
    const OperatorSpec z = load_spec_json(R"({"n":1,"A":[[0,0],[0,0]],"alpha":0})");
    CHECK(z.A.cwiseAbs().maxCoeff() == 0.0);
    const OperatorSpec e = load_spec_json(R"({"n":1,"expr":"X1^2+Y1^2","alpha":[0.5,0]})");
    CHECK(e.alpha == Complex(0.5));
    CHECK(e.A(0, 0) == Complex(1.0));
}

TEST_CASE("loader rejects asymmetric matrices and malformed documents") {
    CHECK_THROWS_AS(load_spec_json(R"({"n":1,"A":[[0,1],[0,0]],"alpha":0})"), InputError);
    CHECK_THROWS_AS(load_spec_json(R"({"n":1,"A":[[0,0]]})"), InputError);
    CHECK_THROWS_AS(load_spec_json("{"), InputError);
    CHECK_THROWS_AS(load_spec_json(R"({"A":[[0]]})"), InputError);
}

TEST_CASE("parser errors carry positions") {
    CHECK_THROWS_AS(parse_operator("X1^2+", 1), ParseError);
    CHECK_THROWS_AS(parse_operator("X3^2", 2), InputError);
    CHECK_THROWS_AS(parse_operator("X1^3", 1), InputError);
    try {
        parse_operator("X1^2+*Y1", 1);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position == 5);
    }
}

TEST_CASE("complex literals") {
    CHECK(parse_complex("0.3") == Complex(0.3, 0.0));
    CHECK(parse_complex("3i") == Complex(0.0, 3.0));
    CHECK(parse_complex("i") == Complex(0.0, 1.0));
    CHECK(parse_complex("-i") == Complex(0.0, -1.0));
    CHECK(parse_complex("1+2i") == Complex(1.0, 2.0));
    CHECK(parse_complex("1 - 2.5i") == Complex(1.0, -2.5));
    CHECK(parse_complex("1e-3-1e-3i") == Complex(1e-3, -1e-3));
    CHECK(parse_complex("0.5,-1") == Complex(0.5, -1.0));
    CHECK_THROWS_AS(parse_complex("abc"), ParseError);
    CHECK_THROWS_AS(parse_complex(""), ParseError);
}

TEST_CASE("dimension inference") {
    CHECK(infer_dimension("X1^2+Y3^2") == 3);
    CHECK(infer_dimension("U") == 0);
    CHECK(infer_dimension("X12*Y1") == 12);
}

}
