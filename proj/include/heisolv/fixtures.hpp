#ifndef HEISOLV_FIXTURES_HPP
#define HEISOLV_FIXTURES_HPP

#include "heisolv/operator_spec.hpp"

#include <string>
#include <vector>

namespace heisolv {

struct FixtureInfo {
    std::string name;
    int n = 0;
    std::string parameters;  // names and defaults, comma separated
    std::string description;
};

// Fixtures:
//   conjugation_breaking_n3  real pair whose eigenspaces are not conjugate, nonreal pair at +-i
//   coupled_chain_n3         b (1): nilpotent real part coupled to a harmonic oscillator
//   rotation_family_n2       m, c1, c2 (5, 3, 4): anisotropic rotation family
//   mixed_spectrum_n2        real nilpotent block plus a nonreal pair
//   sublaplacian_n1          X1^2 + Y1^2
//   diagonal_form            lambda_1, .., lambda_n (1): sum i lambda_j (X_j^2 + Y_j^2)
const std::vector<FixtureInfo>& fixture_list();

std::string fixture_expression(const std::string& name, const std::vector<double>& params = {});
int fixture_dimension(const std::string& name, const std::vector<double>& params = {});
OperatorSpec fixture(const std::string& name, const std::vector<double>& params = {});

}  // namespace heisolv

#endif
