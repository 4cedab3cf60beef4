#pragma once

#include <array>

#include <json.hpp>

#include "h221/common.hpp"

namespace h221 {

struct ParameterSet {
    cplx kappa0{}, kappa1{}, gamma1{}, gamma2{};
    cplx kappa{};
    cplx theta0{}, theta1{}, theta1_inf{}, theta2_inf{};
};

// Solves theta0, the infinity exponents and kappa from the five free constants.
ParameterSet make_parameter_set(cplx kappa0, cplx kappa1, cplx gamma1, cplx gamma2, cplx theta1);

// absolute residuals of the four relations
struct ConstraintResiduals {
    double fuchs = 0;          // theta0 + theta1 + theta1_inf + theta2_inf
    double theta0_link = 0;    // theta0 - (kappa0 - 2) gamma1
    double infinity_link = 0;  // theta2_inf - theta1_inf - (kappa1 - 2) gamma2
    double kappa_link = 0;     // kappa minus its closed form

    // magnitude of the terms entering each relation, floored at 1
    std::array<double, 4> scales{1, 1, 1, 1};

    std::array<double, 4> values() const { return {fuchs, theta0_link, infinity_link, kappa_link}; }
    double max_relative() const;
};

ConstraintResiduals validate(const ParameterSet& p);
bool satisfies_constraints(const ParameterSet& p, double tol = 1e-12);
cplx kappa_closed_form(const ParameterSet& p);

nlohmann::json cplx_to_json(cplx z);
cplx cplx_from_json(const nlohmann::json& j);

// input block holds the five free constants; output also carries the derived ones
ParameterSet params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ParameterSet& p);

}  // namespace h221
