#include "heisolv/fixtures.hpp"

#include <sstream>

namespace heisolv {

namespace {

std::string num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double param(const std::vector<double>& p, std::size_t i, double fallback) { return i < p.size() ? p[i] : fallback; }

void expect_at_most(const std::string& name, const std::vector<double>& p, std::size_t k) {
    if (p.size() > k) throw InputError("fixture " + name + " takes at most " + std::to_string(k) + " parameters");
}

}  // namespace

const std::vector<FixtureInfo>& fixture_list() {
    static const std::vector<FixtureInfo> list = {
        {"conjugation_breaking_n3", 3, "", "real pair whose eigenspaces are not self-conjugate, plus a nonreal pair at +-i"},
        {"coupled_chain_n3", 3, "b=1", "nilpotent real part coupled to an oscillator"},
        {"rotation_family_n2", 2, "m=5,c1=3,c2=4", "anisotropic rotation family"},
        {"mixed_spectrum_n2", 2, "", "real nilpotent block plus a nonreal pair"},
        {"sublaplacian_n1", 1, "", "X1^2 + Y1^2"},
        {"diagonal_form", 0, "lambda_1..lambda_n=1", "sum i lambda_j (X_j^2 + Y_j^2)"},
    };
    return list;
}

std::string fixture_expression(const std::string& name, const std::vector<double>& p) {
    if (name == "conjugation_breaking_n3") {
        expect_at_most(name, p, 0);
        return "Y1^2+X3^2+2*X3*Y1+Y3^2+2i*(X1*Y2-X2*Y1-Y2*Y3)";
    }
    if (name == "coupled_chain_n3") {
        expect_at_most(name, p, 1);
        return "X2^2+X3^2+Y3^2+2i*(X1*Y2+" + num(param(p, 0, 1.0)) + "*X2*Y3)";
    }
    if (name == "rotation_family_n2") {
        expect_at_most(name, p, 3);
        const double m = param(p, 0, 5.0), c1 = param(p, 1, 3.0), c2 = param(p, 2, 4.0);
        return "(" + num(m + c1) + ")*Y1^2+(" + num(m - c1) + ")*Y2^2+(" + num(2.0 * c2) +
               ")*Y1*Y2+2i*(X1*Y2-X2*Y1)";
    }
    if (name == "mixed_spectrum_n2") {
        expect_at_most(name, p, 0);
        return "X1^2+X2^2+i*(X2*Y2+Y2*X2)";
    }
    if (name == "sublaplacian_n1") {
        expect_at_most(name, p, 0);
        return "X1^2+Y1^2";
    }
    if (name == "diagonal_form") {
        const std::vector<double> lam = p.empty() ? std::vector<double>{1.0} : p;
        std::string s;
        for (std::size_t j = 0; j < lam.size(); ++j) {
            if (j) s += "+";
            const std::string k = std::to_string(j + 1);
            s += "(" + num(lam[j]) + "i)*(X" + k + "^2+Y" + k + "^2)";
        }
        return s;
    }
    throw InputError("unknown fixture '" + name + "'");
}

int fixture_dimension(const std::string& name, const std::vector<double>& p) {
    if (name == "diagonal_form") return p.empty() ? 1 : static_cast<int>(p.size());
    for (const auto& f : fixture_list())
        if (f.name == name) return f.n;
    throw InputError("unknown fixture '" + name + "'");
}

OperatorSpec fixture(const std::string& name, const std::vector<double>& params) {
    return spec_from_expression(fixture_expression(name, params), fixture_dimension(name, params));
}

}  // namespace heisolv
