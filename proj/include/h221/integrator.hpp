#pragma once

#include <functional>
#include <vector>

#include "h221/common.hpp"

namespace h221 {

// dy/ds for a real path parameter s
using Rhs = std::function<Vec(double s, const Vec& y)>;

struct StepStats {
    int accepted = 0;
    int rejected = 0;
    int evaluations = 0;

    StepStats& operator+=(const StepStats& o) {
        accepted += o.accepted;
        rejected += o.rejected;
        evaluations += o.evaluations;
        return *this;
    }
};

struct AdaptiveOptions {
    double tol = 1e-10;       // used as both absolute and relative tolerance
    double initial_step = 0;  // 0 picks a starting step automatically
    int max_steps = 200000;
};

// Dormand-Prince 5(4) with PI step control from s0 to s1. When `nodes` is given the
// integrator lands exactly on each node (requires s1 > s0, nodes ascending) and calls `on_node`.
Vec integrate_adaptive(const Rhs& f, Vec y, double s0, double s1, const AdaptiveOptions& opt,
                       StepStats* stats = nullptr, const std::vector<double>* nodes = nullptr,
                       const std::function<void(double, const Vec&)>& on_node = {});

// n equal Dormand-Prince steps; the result is a smooth function of the endpoints.
Vec integrate_fixed(const Rhs& f, Vec y, double s0, double s1, int n);

}  // namespace h221
