#include <doctest.h>

#include <sstream>

#include "h221/convergence.hpp"
#include "h221/lax.hpp"
#include "h221/prlg.hpp"

using namespace h221;

namespace {

const ParameterSet demo = make_parameter_set({2.5, 0.1}, {3.0, -0.05}, {0.7, 0.05}, {0.4, 0.02}, {0.3, 0.1});
const KnsState demo_state{{0.3, 0.05}, {0.5, -0.1}, {0.2, 0.03}, {0.8, 0.05}, {1.0, 0.1}};

GridStates small_grid() {
    TimeGrid g;
    g.origin = {Chart::TAU, {1.0, 0.0}, {0.5, 0.0}};
    g.n1 = 3;
    g.n2 = 3;
    g.d1 = 0.03;
    g.d2 = 0.03;
    FlowOptions fo;
    fo.tol = 1e-11;
    return integrate_grid({Form::kns, demo}, g, to_vec(demo_state), fo);
}

}  // namespace

TEST_CASE("prlg: extraction at special momenta") {
    struct Case {
        cplx P2, u, c, d, e;
    };
    for (const Case& k :
         {Case{0.5, 1.0, 0.0, -0.5, -0.5}, Case{0.0, 1.0, -0.5, 0.0, -1.0}, Case{1.0, 2.0, 0.5, -2.0, 0.0}}) {
        const PrlgState s = extract_prlg({0.3, 0.4, 0.2, k.P2, k.u}, demo);
        CHECK(std::abs(s.c - k.c) < 1e-15);
        CHECK(std::abs(s.d - k.d) < 1e-15);
        CHECK(std::abs(s.e - k.e) < 1e-15);
        CHECK(std::abs(s.constraint()) < 1e-15);
    }
    CHECK_THROWS_AS(extract_prlg({0.3, 0.4, 0.2, 0.5, 0.0}, demo), GaugeZero);
}

TEST_CASE("prlg: a and b are the off-diagonal entries of the tau1 coefficient") {
    const TimePoint tau{Chart::TAU, {1.2, 0.1}, {0.4, 0.2}};
    const PrlgState s = extract_prlg(demo_state, demo);
    const LaxMatrices b = build_B(tau, demo_state, demo);
    CHECK(std::abs(s.b - tau.c1 * b.B1(0, 1)) < 1e-14);
    CHECK(std::abs(s.a - tau.c1 * b.B1(1, 0)) < 1e-14);
    // the tau2 coefficient in terms of c, d, e
    const Mat2 V = -b.B0m1 / tau.c2;
    CHECK(std::abs(V(0, 0) - s.c) < 1e-14);
    CHECK(std::abs(V(0, 1) - s.d) < 1e-14);
    CHECK(std::abs(V(1, 0) - s.e) < 1e-14);
}

TEST_CASE("prlg: root continuation") {
    CHECK(continue_root(2.0, 1.9) == cplx(2.0));
    CHECK(continue_root(2.0, -1.9) == cplx(-2.0));
    CHECK(continue_root({0.0, 1.0}, {0.1, -0.9}) == cplx(0.0, -1.0));
    CHECK_THROWS_AS(continue_root(1.0, {0.0, 1.0}), BranchAmbiguity);
}

TEST_CASE("prlg: constraint holds along the flow") {
    const GridStates gs = small_grid();
    for (const Vec& y : gs.states) CHECK(std::abs(extract_prlg(kns_from(y), demo).constraint()) < 1e-10);
}

TEST_CASE("prlg: residuals fall at second order and the d flip plateaus") {
    const GridStates gs = small_grid();
    const Dynamics dyn{Form::kns, demo};
    const std::vector<double> steps{2e-3, 1e-3, 5e-4};
    std::vector<std::vector<cplx>> first(steps.size()), second(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) {
        for (const PrlgNodeResidual& r : prlg_residuals(dyn, gs, steps[k])) {
            first[k].insert(first[k].end(), r.system.begin(), r.system.end());
            second[k].insert(second[k].end(), r.second.begin(), r.second.end());
        }
    }
    const ConvergenceStudy s1 = study_signed(steps, first), s2 = study_signed(steps, second);
    CHECK(s1.order > 1.8);
    CHECK(s1.floor < 1e-7);
    CHECK(s2.order > 1.8);
    CHECK(s2.floor < 1e-7);

    // the root stays on the branch near tau1
    for (const PrlgNodeResidual& r : prlg_residuals(dyn, gs, 1e-3))
        CHECK(std::abs(r.root - r.tau.c1) < std::abs(r.root + r.tau.c1));

    PrlgOptions flip;
    flip.flip_d = true;
    double worst = 0;
    for (const PrlgNodeResidual& r : prlg_residuals(dyn, gs, 5e-4, flip))
        worst = std::max(worst, std::abs(r.system[1]));
    CHECK(worst > 1e-2);
}

TEST_CASE("prlg: csv has a schema line and one row per node") {
    const GridStates gs = small_grid();
    std::ostringstream os;
    write_prlg_csv(os, prlg_residuals({Form::kns, demo}, gs, 1e-3));
    const std::string text = os.str();
    CHECK(text.rfind("#", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2 + gs.grid.size());
}
