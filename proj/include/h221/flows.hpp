#pragma once

#include <iosfwd>
#include <vector>

#include "h221/hamiltonians.hpp"
#include "h221/integrator.hpp"

namespace h221 {

struct Dynamics {
    Form form = Form::kns;
    ParameterSet params;
    // negative control: flips the sign of this component of the first flow's velocity
    int flipped_component = -1;

    Vec velocity(int j, const TimePoint& t, const Vec& y) const;
};

// one active time per segment; `target` is the final value of coordinate j
struct Segment {
    int j = 1;
    cplx target;
};

struct FlowPath {
    TimePoint start;
    std::vector<Segment> segments;

    TimePoint end() const;
};

struct Trajectory {
    Form form = Form::kns;
    std::vector<TimePoint> times;
    std::vector<Vec> states;
    StepStats stats;
    double tol = 0;

    const Vec& final_state() const { return states.back(); }
    const TimePoint& final_time() const { return times.back(); }
};

struct FlowOptions {
    double tol = 1e-10;
    double clearance = 0.05;
    int samples_per_segment = 0;  // interior samples recorded per segment
};

// throws ZeroTimeError when the straight segment passes within `clearance` of a zero time
void check_segment_clearance(const TimePoint& from, int j, cplx to, double clearance);

Trajectory integrate(const Dynamics& dyn, int j, const TimePoint& from, const Vec& state, cplx to,
                     const FlowOptions& opt = {});
Trajectory integrate_path(const Dynamics& dyn, const FlowPath& path, const Vec& state, const FlowOptions& opt = {});

// fixed-step transport along coordinate j; smooth in the endpoint, used for finite-difference stencils
Vec hop(const Dynamics& dyn, int j, const TimePoint& from, const Vec& state, cplx to, int substeps = 4);

// |state(c1 + dt1 then c2 + dt2) - state(c2 + dt2 then c1 + dt1)|
double commute_check(const Dynamics& dyn, const TimePoint& from, const Vec& state, cplx dt1, cplx dt2,
                     const FlowOptions& opt = {});

// states around a centre, offsets of +-h along each time coordinate and optionally the four corners
struct Stencil {
    Vec center;
    Vec plus[2], minus[2];
    Vec corner[2][2];  // [sign of c1 offset][sign of c2 offset], index 0 = +h, 1 = -h
};

Stencil sample_stencil(const Dynamics& dyn, const TimePoint& center, const Vec& state, double h, bool corners,
                       int substeps = 4);

// rectangular grid of tau-chart nodes origin + (i d1, j d2)
struct TimeGrid {
    TimePoint origin{Chart::TAU, 1.0, 1.0};
    int n1 = 1, n2 = 1;
    cplx d1{0.0}, d2{0.0};

    TimePoint node(int i, int j) const;
    int size() const { return n1 * n2; }
};

// states at every grid node; reached along tau1 at the origin's tau2, then along tau2
struct GridStates {
    TimeGrid grid;
    std::vector<Vec> states;  // row-major, index i * n2 + j
    StepStats stats;

    const Vec& at(int i, int j) const { return states[std::size_t(i * grid.n2 + j)]; }
};

GridStates integrate_grid(const Dynamics& dyn, const TimeGrid& grid, const Vec& origin_state,
                          const FlowOptions& opt = {});

// header comment, then t1_re, t1_im, t2_re, t2_im and interleaved state components
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace h221
