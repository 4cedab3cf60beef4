#include "h221/params.hpp"

#include <algorithm>
#include <cstdio>

namespace h221 {

std::string format_cplx(cplx z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.6g%+.6gi)", z.real(), z.imag());
    return buf;
}

cplx kappa_closed_form(const ParameterSet& p) {
    const cplx a = p.kappa0 - 2.0, b = p.kappa1 - 2.0;
    return a * a / 4.0 + b * b / 4.0 + p.kappa0 * p.kappa1 / 2.0 - p.theta1 * p.theta1 / 4.0 - 2.0;
}

ParameterSet make_parameter_set(cplx kappa0, cplx kappa1, cplx gamma1, cplx gamma2, cplx theta1) {
    ParameterSet p;
    p.kappa0 = kappa0;
    p.kappa1 = kappa1;
    p.gamma1 = gamma1;
    p.gamma2 = gamma2;
    p.theta1 = theta1;
    p.theta0 = (kappa0 - 2.0) * gamma1;
    // difference fixed by kappa1, gamma2; sum fixed by the Fuchs relation
    const cplx diff = (kappa1 - 2.0) * gamma2;
    const cplx sum = -(p.theta0 + theta1);
    p.theta1_inf = (sum - diff) / 2.0;
    p.theta2_inf = (sum + diff) / 2.0;
    p.kappa = kappa_closed_form(p);
    return p;
}

double ConstraintResiduals::max_relative() const {
    auto v = values();
    double m = 0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, v[i] / scales[i]);
    return m;
}

namespace {

double scale_of(std::initializer_list<cplx> terms) {
    double scale = 1.0;
    for (cplx t : terms) scale = std::max(scale, std::abs(t));
    return scale;
}

}  // namespace

ConstraintResiduals validate(const ParameterSet& p) {
    ConstraintResiduals r;
    r.fuchs = std::abs(p.theta0 + p.theta1 + p.theta1_inf + p.theta2_inf);
    r.scales[0] = scale_of({p.theta0, p.theta1, p.theta1_inf, p.theta2_inf});
    const cplx t0 = (p.kappa0 - 2.0) * p.gamma1;
    r.theta0_link = std::abs(p.theta0 - t0);
    r.scales[1] = scale_of({p.theta0, t0});
    const cplx d = (p.kappa1 - 2.0) * p.gamma2;
    r.infinity_link = std::abs(p.theta2_inf - p.theta1_inf - d);
    r.scales[2] = scale_of({p.theta2_inf, p.theta1_inf, d});
    const cplx k = kappa_closed_form(p);
    r.kappa_link = std::abs(p.kappa - k);
    r.scales[3] = scale_of({p.kappa, k});
    return r;
}

bool satisfies_constraints(const ParameterSet& p, double tol) { return validate(p).max_relative() < tol; }

nlohmann::json cplx_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::invalid_argument("expected a complex number as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

ParameterSet params_from_json(const nlohmann::json& j) {
    auto field = [&](const char* key) {
        if (!j.contains(key)) throw std::invalid_argument(std::string("missing parameter '") + key + "'");
        return cplx_from_json(j.at(key));
    };
    return make_parameter_set(field("kappa0"), field("kappa1"), field("gamma1"), field("gamma2"), field("theta1"));
}

nlohmann::json params_to_json(const ParameterSet& p) {
    return {{"kappa0", cplx_to_json(p.kappa0)},        {"kappa1", cplx_to_json(p.kappa1)},
            {"gamma1", cplx_to_json(p.gamma1)},        {"gamma2", cplx_to_json(p.gamma2)},
            {"kappa", cplx_to_json(p.kappa)},          {"theta0", cplx_to_json(p.theta0)},
            {"theta1", cplx_to_json(p.theta1)},        {"theta1_inf", cplx_to_json(p.theta1_inf)},
            {"theta2_inf", cplx_to_json(p.theta2_inf)}};
}

}  // namespace h221
