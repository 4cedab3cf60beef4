#include <doctest.h>

#include <random>
#include <sstream>

#include "h221/flows.hpp"

using namespace h221;

namespace {

const ParameterSet demo = make_parameter_set({2.5, 0.1}, {3.0, -0.05}, {0.7, 0.05}, {0.4, 0.02}, {0.3, 0.1});
const KnsState demo_state{{0.3, 0.05}, {0.5, -0.1}, {0.2, 0.03}, {0.8, 0.05}, {1.0, 0.1}};
const TimePoint base{Chart::TAU, {1.0, 0.0}, {0.5, 0.0}};

double rel_diff(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST_CASE("flows: zero-length path leaves the state alone") {
    const Dynamics dyn{Form::kns, demo};
    const Vec y = to_vec(demo_state);
    const Trajectory tr = integrate(dyn, 1, base, y, base.c1);
    CHECK((tr.final_state() - y).norm() == 0.0);
    CHECK(commute_check(dyn, base, y, 0.0, 0.1) == 0.0);
    CHECK(commute_check(dyn, base, y, 0.1, 0.0) == 0.0);
}

TEST_CASE("flows: gauge scalar against a quadrature of its linear equation") {
    // along t2, t2 u_t2 = -u Q2, so log(u1/u0) = -int Q2/t2 dt2 over the recorded Q2 samples
    const Dynamics dyn{Form::kns, demo};
    const TimePoint t0{Chart::T, {1.0, 0.1}, {0.5, 0.0}};
    const cplx target(0.9, 0.2);
    FlowOptions fo;
    fo.tol = 1e-12;
    fo.samples_per_segment = 199;
    const Trajectory tr = integrate(dyn, 2, t0, to_vec(demo_state), target, fo);
    REQUIRE(tr.states.size() == 201);

    const cplx d = target - t0.c2;
    const std::size_t n = tr.states.size() - 1;
    cplx sum = 0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum += w * tr.states[k][1] / tr.times[k].c2;
    }
    const cplx integral = sum * d / (3.0 * double(n));
    const cplx log_ratio = std::log(tr.final_state()[4] / tr.states.front()[4]);
    CHECK(std::abs(log_ratio + integral) < 1e-9);
    // Q2 really moves here, so this is not the frozen case
    CHECK(std::abs(tr.final_state()[1] - demo_state.Q2) > 1e-2);
}

TEST_CASE("flows: tolerance consistency and reversibility") {
    const Dynamics dyn{Form::kns, demo};
    const Vec y = to_vec(demo_state);
    FlowOptions loose, tight;
    loose.tol = 1e-8;
    tight.tol = 1e-10;
    const FlowPath path{base, {{1, {1.2, 0.1}}, {2, {0.6, -0.1}}}};
    const Vec a = integrate_path(dyn, path, y, loose).final_state();
    const Vec b = integrate_path(dyn, path, y, tight).final_state();
    CHECK(rel_diff(a, b) < 1e-7);

    const Trajectory fwd = integrate(dyn, 1, base, y, {1.3, 0.2}, tight);
    const Trajectory back = integrate(dyn, 1, fwd.final_time(), fwd.final_state(), base.c1, tight);
    CHECK((back.final_state() - y).norm() < 10 * tight.tol);
}

TEST_CASE("flows: KNS flows commute at random regular states") {
    const Dynamics dyn{Form::kns, demo};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    FlowOptions fo;
    fo.tol = 1e-10;
    for (int k = 0; k < 5; ++k) {
        Vec y = to_vec(demo_state);
        for (int i = 0; i < 4; ++i) y[i] += cplx(d(rng), d(rng));
        const double dev = commute_check(dyn, base, y, 0.1, 0.1, fo);
        CHECK(dev < 1e-8);
    }
}

TEST_CASE("flows: a flipped velocity sign breaks commutativity") {
    Dynamics dyn{Form::kns, demo};
    dyn.flipped_component = 2;
    FlowOptions fo;
    fo.tol = 1e-10;
    CHECK(commute_check(dyn, base, to_vec(demo_state), 0.1, 0.1, fo) > 1e-3);
}

TEST_CASE("flows: rational and polynomial forms commute") {
    FlowOptions fo;
    fo.tol = 1e-10;
    const RationalState r{{2.3, 0.2}, {-0.7, 0.3}, {0.4, 0.1}, {-0.3, 0.2}};
    CHECK(commute_check({Form::rational, demo}, base, to_vec(r), 0.1, 0.1, fo) < 1e-8);
    CHECK(commute_check({Form::polynomial, demo}, base.to_s(), to_vec(map_rational_state(base, r)), 0.05, -0.1, fo) <
          1e-8);
}

TEST_CASE("flows: the gauge scalar never vanishes") {
    const Dynamics dyn{Form::kns, demo};
    FlowOptions fo;
    fo.samples_per_segment = 20;
    const Trajectory tr = integrate_path(dyn, {base, {{1, {1.4, 0.3}}, {2, {0.9, 0.2}}}}, to_vec(demo_state), fo);
    for (const Vec& y : tr.states) CHECK(std::abs(y[4]) > 0.1);
}

TEST_CASE("flows: segments near a zero time are refused") {
    CHECK_THROWS_AS(check_segment_clearance(base, 1, {-1.0, 0.0}, 0.05), ZeroTimeError);
    CHECK_NOTHROW(check_segment_clearance(base, 1, {-1.0, 0.5}, 0.05));
    const Dynamics dyn{Form::kns, demo};
    CHECK_THROWS_AS(integrate(dyn, 2, base, to_vec(demo_state), {-0.5, 0.0}), ZeroTimeError);
}

TEST_CASE("flows: grid nodes and stencils") {
    const Dynamics dyn{Form::kns, demo};
    TimeGrid grid;
    grid.origin = base;
    grid.n1 = 3;
    grid.n2 = 2;
    grid.d1 = 0.05;
    grid.d2 = cplx(0.0, 0.05);
    FlowOptions fo;
    fo.tol = 1e-11;
    const GridStates gs = integrate_grid(dyn, grid, to_vec(demo_state), fo);
    CHECK(gs.states.size() == 6);
    CHECK((gs.at(0, 0) - to_vec(demo_state)).norm() == 0.0);

    // node (2, 1) reached the other way round
    const TimePoint far = grid.node(2, 1);
    const Vec other = integrate_path(dyn, {base, {{2, far.c2}, {1, far.c1}}}, to_vec(demo_state), fo).final_state();
    CHECK(rel_diff(gs.at(2, 1), other) < 1e-9);

    const Stencil st = sample_stencil(dyn, grid.node(1, 0), gs.at(1, 0), 1e-3, true);
    CHECK((st.center - gs.at(1, 0)).norm() == 0.0);
    // central difference of the stencil against the velocity
    const Vec fd = (st.plus[0] - st.minus[0]) / 2e-3;
    const Vec v = vector_field(Form::kns, 1, grid.node(1, 0), gs.at(1, 0), demo);
    CHECK(rel_diff(fd, v) < 1e-5);
}

TEST_CASE("flows: trajectory csv") {
    const Dynamics dyn{Form::kns, demo};
    FlowOptions fo;
    fo.samples_per_segment = 3;
    const Trajectory tr = integrate(dyn, 1, base.to_t(), to_vec(demo_state), {1.1, 0.0}, fo);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line.rfind("#", 0) == 0);
    std::getline(is, line);
    CHECK(line.rfind("t1_re,t1_im,t2_re,t2_im", 0) == 0);
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == int(tr.states.size()));
}
