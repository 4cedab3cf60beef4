#include <doctest.h>

#include <random>

#include "h221/params.hpp"

using namespace h221;

TEST_CASE("params: neutral exponents give the zero set") {
    const ParameterSet p = make_parameter_set(2.0, 2.0, 1.0, 1.0, 0.0);
    CHECK(std::abs(p.theta0) == 0.0);
    CHECK(std::abs(p.theta1_inf) == 0.0);
    CHECK(std::abs(p.theta2_inf) == 0.0);
    CHECK(std::abs(p.kappa) < 1e-15);
}

TEST_CASE("params: hand-solved closure") {
    const ParameterSet p = make_parameter_set(4.0, 2.0, 1.0, 0.0, 0.0);
    CHECK(std::abs(p.theta0 - 2.0) < 1e-15);
    CHECK(std::abs(p.theta1_inf + 1.0) < 1e-15);
    CHECK(std::abs(p.theta2_inf + 1.0) < 1e-15);
    CHECK(std::abs(p.kappa - 3.0) < 1e-15);

    // the relations themselves, written out again
    const cplx fuchs = p.theta0 + p.theta1 + p.theta1_inf + p.theta2_inf;
    const cplx kappa = (p.kappa0 - 2.0) * (p.kappa0 - 2.0) / 4.0 + (p.kappa1 - 2.0) * (p.kappa1 - 2.0) / 4.0 +
                       p.kappa0 * p.kappa1 / 2.0 - p.theta1 * p.theta1 / 4.0 - 2.0;
    CHECK(std::abs(fuchs) < 1e-15);
    CHECK(std::abs(kappa - p.kappa) < 1e-15);
}

TEST_CASE("params: random closures validate") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const ParameterSet p = make_parameter_set({d(rng), d(rng)}, {d(rng), d(rng)}, {d(rng), d(rng)},
                                                  {d(rng), d(rng)}, {d(rng), d(rng)});
        CHECK(validate(p).max_relative() < 1e-12);
        CHECK(satisfies_constraints(p));
    }
}

TEST_CASE("params: perturbations show up in the residuals") {
    ParameterSet p = make_parameter_set({2.5, 0.1}, {3.0, -0.05}, {0.7, 0.05}, {0.4, 0.02}, {0.3, 0.1});
    SUBCASE("theta0") {
        p.theta0 += 1e-3;
        const ConstraintResiduals r = validate(p);
        CHECK(r.fuchs == doctest::Approx(1e-3).epsilon(1e-9));
        CHECK(r.theta0_link == doctest::Approx(1e-3).epsilon(1e-9));
        CHECK(r.infinity_link < 1e-14);
        CHECK_FALSE(satisfies_constraints(p));
    }
    SUBCASE("kappa") {
        p.kappa += cplx(0.0, 0.25);
        const ConstraintResiduals r = validate(p);
        CHECK(r.kappa_link == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(r.fuchs < 1e-14);
    }
}

TEST_CASE("params: json round trip") {
    const ParameterSet p = make_parameter_set({2.5, 0.1}, {3.0, -0.05}, {0.7, 0.05}, {0.4, 0.02}, {0.3, 0.1});
    const nlohmann::json j = params_to_json(p);
    CHECK(j.contains("kappa"));
    CHECK(j.contains("theta2_inf"));
    const ParameterSet q = params_from_json(j);
    CHECK(q.kappa == p.kappa);
    CHECK(q.theta1_inf == p.theta1_inf);
    CHECK(cplx_from_json(nlohmann::json::array({1.5, -2.0})) == cplx(1.5, -2.0));
    CHECK_THROWS(params_from_json(nlohmann::json::object({{"kappa0", 1.0}})));
}
