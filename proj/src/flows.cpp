#include "h221/flows.hpp"

#include <algorithm>
#include <ostream>

namespace h221 {

Vec Dynamics::velocity(int j, const TimePoint& t, const Vec& y) const {
    Vec v = vector_field(form, j, t, y, params);
    if (j == 1 && flipped_component >= 0 && flipped_component < v.size()) v[flipped_component] = -v[flipped_component];
    return v;
}

TimePoint FlowPath::end() const {
    TimePoint t = start;
    for (const auto& s : segments) t = t.with(s.j, s.target);
    return t;
}

void check_segment_clearance(const TimePoint& from, int j, cplx to, double clearance) {
    const cplx a = from[j], b = to;
    const cplx other = from[3 - j];
    if (std::abs(other) < clearance) throw ZeroTimeError("fixed time coordinate lies within clearance of zero");
    // distance from the origin to the segment [a, b]
    const cplx d = b - a;
    double dist;
    if (std::abs(d) == 0) {
        dist = std::abs(a);
    } else {
        const double s = std::clamp(-(std::conj(d) * a).real() / std::norm(d), 0.0, 1.0);
        dist = std::abs(a + s * d);
    }
    if (dist < clearance) throw ZeroTimeError("time path passes within clearance of zero");
}

namespace {

Rhs segment_rhs(const Dynamics& dyn, int j, const TimePoint& from, cplx to) {
    const cplx a = from[j], d = to - from[j];
    return [&dyn, j, from, a, d](double s, const Vec& y) -> Vec {
        return d * dyn.velocity(j, from.with(j, a + s * d), y);
    };
}

void append_segment(const Dynamics& dyn, int j, const TimePoint& from, const Vec& state, cplx to,
                    const FlowOptions& opt, Trajectory& out) {
    check_segment_clearance(from, j, to, opt.clearance);
    const Rhs f = segment_rhs(dyn, j, from, to);
    const cplx a = from[j], d = to - a;
    std::vector<double> nodes;
    for (int i = 1; i <= opt.samples_per_segment; ++i) nodes.push_back(double(i) / (opt.samples_per_segment + 1));
    AdaptiveOptions ao;
    ao.tol = opt.tol;
    Vec end = integrate_adaptive(f, state, 0.0, 1.0, ao, &out.stats, &nodes, [&](double s, const Vec& y) {
        out.times.push_back(from.with(j, a + s * d));
        out.states.push_back(y);
    });
    out.times.push_back(from.with(j, to));
    out.states.push_back(std::move(end));
}

}  // namespace

Trajectory integrate(const Dynamics& dyn, int j, const TimePoint& from, const Vec& state, cplx to,
                     const FlowOptions& opt) {
    Trajectory tr;
    tr.form = dyn.form;
    tr.tol = opt.tol;
    tr.times.push_back(from);
    tr.states.push_back(state);
    append_segment(dyn, j, from, state, to, opt, tr);
    return tr;
}

Trajectory integrate_path(const Dynamics& dyn, const FlowPath& path, const Vec& state, const FlowOptions& opt) {
    Trajectory tr;
    tr.form = dyn.form;
    tr.tol = opt.tol;
    tr.times.push_back(path.start);
    tr.states.push_back(state);
    for (const auto& seg : path.segments) {
        const TimePoint from = tr.times.back();
        const Vec y = tr.states.back();
        append_segment(dyn, seg.j, from, y, seg.target, opt, tr);
    }
    return tr;
}

Vec hop(const Dynamics& dyn, int j, const TimePoint& from, const Vec& state, cplx to, int substeps) {
    if (to == from[j]) return state;
    return integrate_fixed(segment_rhs(dyn, j, from, to), state, 0.0, 1.0, substeps);
}

double commute_check(const Dynamics& dyn, const TimePoint& from, const Vec& state, cplx dt1, cplx dt2,
                     const FlowOptions& opt) {
    if (dt1 == 0.0 || dt2 == 0.0) return 0.0;
    FlowPath a{from, {{1, from.c1 + dt1}, {2, from.c2 + dt2}}};
    FlowPath b{from, {{2, from.c2 + dt2}, {1, from.c1 + dt1}}};
    const Vec ya = integrate_path(dyn, a, state, opt).final_state();
    const Vec yb = integrate_path(dyn, b, state, opt).final_state();
    return (ya - yb).norm();
}

Stencil sample_stencil(const Dynamics& dyn, const TimePoint& center, const Vec& state, double h, bool corners,
                       int substeps) {
    Stencil st;
    st.center = state;
    for (int j = 1; j <= 2; ++j) {
        st.plus[j - 1] = hop(dyn, j, center, state, center[j] + h, substeps);
        st.minus[j - 1] = hop(dyn, j, center, state, center[j] - h, substeps);
    }
    if (corners) {
        for (int a = 0; a < 2; ++a) {
            const double d1 = a == 0 ? h : -h;
            const TimePoint t1 = center.with(1, center.c1 + d1);
            const Vec& y1 = a == 0 ? st.plus[0] : st.minus[0];
            for (int b = 0; b < 2; ++b) {
                const double d2 = b == 0 ? h : -h;
                st.corner[a][b] = hop(dyn, 2, t1, y1, center.c2 + d2, substeps);
            }
        }
    }
    return st;
}

TimePoint TimeGrid::node(int i, int j) const {
    return {origin.chart, origin.c1 + double(i) * d1, origin.c2 + double(j) * d2};
}

namespace {

// states at equally spaced points along coordinate j, first entry = start
std::vector<Vec> march(const Dynamics& dyn, int j, const TimePoint& from, const Vec& state, cplx step, int count,
                       const FlowOptions& opt, StepStats& stats) {
    std::vector<Vec> out{state};
    if (count <= 1) return out;
    const cplx to = from[j] + double(count - 1) * step;
    check_segment_clearance(from, j, to, opt.clearance);
    std::vector<double> nodes;
    for (int k = 1; k < count - 1; ++k) nodes.push_back(double(k) / (count - 1));
    AdaptiveOptions ao;
    ao.tol = opt.tol;
    Vec end = integrate_adaptive(segment_rhs(dyn, j, from, to), state, 0.0, 1.0, ao, &stats, &nodes,
                                 [&](double, const Vec& y) { out.push_back(y); });
    out.push_back(std::move(end));
    return out;
}

}  // namespace

GridStates integrate_grid(const Dynamics& dyn, const TimeGrid& grid, const Vec& origin_state, const FlowOptions& opt) {
    GridStates gs;
    gs.grid = grid;
    gs.states.resize(std::size_t(grid.size()));
    const auto column = march(dyn, 1, grid.origin, origin_state, grid.d1, grid.n1, opt, gs.stats);
    for (int i = 0; i < grid.n1; ++i) {
        const auto row = march(dyn, 2, grid.node(i, 0), column[std::size_t(i)], grid.d2, grid.n2, opt, gs.stats);
        for (int j = 0; j < grid.n2; ++j) gs.states[std::size_t(i * grid.n2 + j)] = row[std::size_t(j)];
    }
    return gs;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    static const char* rational_names[] = {"lambda1", "lambda2", "mu1", "mu2"};
    static const char* poly_names[] = {"q1", "q2", "p1", "p2"};
    static const char* kns_names[] = {"Q1", "Q2", "P1", "P2", "u"};
    const char** names = traj.form == Form::rational     ? rational_names
                         : traj.form == Form::polynomial ? poly_names
                                                         : kns_names;
    const int n = traj.states.empty() ? 0 : int(traj.states.front().size());
    os << "# schema: trajectory v1; form " << form_name(traj.form) << "; chart "
       << (traj.times.empty() ? "tau" : chart_name(traj.times.front().chart)) << "\n";
    os << "t1_re,t1_im,t2_re,t2_im";
    for (int i = 0; i < n; ++i) os << ',' << names[i] << "_re," << names[i] << "_im";
    os << '\n';
    os.precision(17);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& t = traj.times[k];
        os << t.c1.real() << ',' << t.c1.imag() << ',' << t.c2.real() << ',' << t.c2.imag();
        for (int i = 0; i < n; ++i) os << ',' << traj.states[k][i].real() << ',' << traj.states[k][i].imag();
        os << '\n';
    }
}

}  // namespace h221
