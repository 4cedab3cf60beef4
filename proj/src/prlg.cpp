#include "h221/prlg.hpp"

#include <algorithm>
#include <ostream>

#include "h221/lax.hpp"

namespace h221 {

PrlgState extract_prlg(const KnsState& s, const ParameterSet& p) {
    if (std::abs(s.u) < singular_tol) throw GaugeZero("gauge scalar u vanishes");
    // a, b are time independent combinations, the time argument only feeds the A-family builder
    const AFamily A = build_A({Chart::T, 1.0, 1.0}, s, p);
    PrlgState r;
    r.a = A.A00(1, 0) + A.A10(1, 0);
    r.b = A.A00(0, 1) + A.A10(0, 1);
    r.c = s.P2 - 0.5;
    r.d = -s.u * s.P2;
    r.e = (s.P2 - 1.0) / s.u;
    return r;
}

cplx continue_root(cplx principal, cplx reference) {
    const double plus = std::abs(principal - reference), minus = std::abs(-principal - reference);
    if (std::min(plus, minus) > 0.5 * std::max(plus, minus))
        throw BranchAmbiguity("square root sign cannot be continued between adjacent nodes");
    return plus <= minus ? principal : -principal;
}

std::vector<PrlgNodeResidual> prlg_residuals(const Dynamics& dyn, const GridStates& grid, double h,
                                             const PrlgOptions& opt) {
    const auto& g = grid.grid;
    const ParameterSet& p = dyn.params;
    auto value = [&](const Vec& y) {
        PrlgState v = extract_prlg(kns_from(y), p);
        if (opt.flip_d) v.d = -v.d;
        return v;
    };
    std::vector<PrlgNodeResidual> out(std::size_t(g.size()));
    for (int i = 0; i < g.n1; ++i) {
        for (int j = 0; j < g.n2; ++j) {
            PrlgNodeResidual& r = out[std::size_t(i * g.n2 + j)];
            r.i = i;
            r.j = j;
            r.tau = g.node(i, j);
            const Stencil st = sample_stencil(dyn, r.tau, grid.at(i, j), h, true, opt.substeps);
            const PrlgState v = value(st.center);
            const PrlgState p1 = value(st.plus[0]), m1 = value(st.minus[0]);
            const PrlgState p2 = value(st.plus[1]), m2 = value(st.minus[1]);
            const PrlgState pp = value(st.corner[0][0]), pm = value(st.corner[0][1]);
            const PrlgState mp = value(st.corner[1][0]), mm = value(st.corner[1][1]);
            auto d1 = [&](cplx PrlgState::* f) { return (p1.*f - m1.*f) / (2.0 * h); };
            auto d2 = [&](cplx PrlgState::* f) { return (p2.*f - m2.*f) / (2.0 * h); };
            auto d12 = [&](cplx PrlgState::* f) { return (pp.*f - pm.*f - mp.*f + mm.*f) / (4.0 * h * h); };
            const cplx t1 = r.tau.c1;
            r.value = v;
            r.system[0] = t1 * d1(&PrlgState::c) - (v.e * v.b - v.a * v.d);
            r.system[1] = t1 * d1(&PrlgState::d) + 2.0 * v.b * v.c;
            r.system[2] = t1 * d1(&PrlgState::e) - 2.0 * v.a * v.c;
            r.system[3] = d2(&PrlgState::b) - t1 * v.d;
            r.system[4] = d2(&PrlgState::a) + v.e * t1;
            const cplx a2 = d2(&PrlgState::a), b2 = d2(&PrlgState::b);
            const cplx principal = std::sqrt(t1 * t1 + 4.0 * a2 * b2);
            cplx reference;
            if (i == 0 && j == 0)
                reference = t1;
            else if (j == 0)
                reference = out[std::size_t((i - 1) * g.n2)].root;
            else
                reference = out[std::size_t(i * g.n2 + j - 1)].root;
            r.root = continue_root(principal, reference);
            r.second[0] = t1 * d12(&PrlgState::b) - b2 + v.b * r.root;
            r.second[1] = t1 * d12(&PrlgState::a) - a2 + v.a * r.root;
        }
    }
    return out;
}

void write_prlg_csv(std::ostream& os, const std::vector<PrlgNodeResidual>& nodes) {
    os << "# schema: prlg v1\n";
    os << "tau1_re,tau1_im,tau2_re,tau2_im";
    for (const char* n : {"a", "b", "c", "d", "e"}) os << ',' << n << "_re," << n << "_im";
    os << ",constraint_residual\n";
    os.precision(17);
    for (const auto& r : nodes) {
        os << r.tau.c1.real() << ',' << r.tau.c1.imag() << ',' << r.tau.c2.real() << ',' << r.tau.c2.imag();
        for (cplx z : {r.value.a, r.value.b, r.value.c, r.value.d, r.value.e}) os << ',' << z.real() << ',' << z.imag();
        os << ',' << std::abs(r.value.constraint()) << '\n';
    }
}

}  // namespace h221
