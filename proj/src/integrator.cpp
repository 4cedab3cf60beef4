#include "h221/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace h221 {

namespace {

// Dormand-Prince tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// fifth minus fourth order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

struct StepResult {
    Vec y;
    Vec k7;
    Vec err;
};

// one step from (s, y) with first stage k1 already known (FSAL)
StepResult dp_step(const Rhs& f, double s, const Vec& y, const Vec& k1, double h, bool embedded = true) {
    const Vec k2 = f(s + c2 * h, y + h * (a21 * k1));
    const Vec k3 = f(s + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Vec k4 = f(s + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = f(s + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = f(s + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    StepResult r;
    r.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    if (!embedded) return r;
    r.k7 = f(s + h, r.y);
    r.err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * r.k7);
    return r;
}

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double tol) {
    double acc = 0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = tol + tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e = std::abs(err[i]) / sc;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

bool finite(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
    return true;
}

}  // namespace

Vec integrate_adaptive(const Rhs& f, Vec y, double s0, double s1, const AdaptiveOptions& opt, StepStats* stats,
                       const std::vector<double>* nodes, const std::function<void(double, const Vec&)>& on_node) {
    StepStats local;
    StepStats& st = stats ? *stats : local;
    std::size_t next_node = 0;
    auto emit_nodes_at = [&](double s) {
        while (nodes && next_node < nodes->size() && (*nodes)[next_node] <= s) {
            if (on_node) on_node((*nodes)[next_node], y);
            ++next_node;
        }
    };
    if (s1 == s0) {
        emit_nodes_at(s1);
        return y;
    }
    const double dir = s1 > s0 ? 1.0 : -1.0;
    const double span = std::abs(s1 - s0);
    double s = s0;
    Vec k1 = f(s, y);
    ++st.evaluations;

    double h = opt.initial_step > 0 ? opt.initial_step : 0;
    if (h == 0) {
        // standard starting-step heuristic
        const double d0 = y.norm() / std::sqrt(double(y.size())), d1 = k1.norm() / std::sqrt(double(y.size()));
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * (d0 + opt.tol) / d1;
        h = std::min(h, span);
        h = std::max(h, 1e-12 * span);
    }
    const double safety = 0.9, min_factor = 0.2, max_factor = 5.0;
    const double alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
    double err_prev = 1e-4;
    bool last_rejected = false;
    emit_nodes_at(s0);

    while (dir * (s1 - s) > 0) {
        if (st.accepted + st.rejected >= opt.max_steps) throw StepFailure("step budget exhausted");
        double target = s1;
        if (nodes && next_node < nodes->size() && dir > 0) target = std::min(target, (*nodes)[next_node]);
        double step = std::min(h, std::abs(target - s));
        if (step < 1e-14 * span) throw StepFailure("step size underflow near a singularity");
        bool lands = step == std::abs(target - s);
        StepResult r = dp_step(f, s, y, k1, dir * step);
        st.evaluations += 6;
        const double err = finite(r.y) ? error_norm(r.err, y, r.y, opt.tol) : INFINITY;
        if (err <= 1.0) {
            s = lands ? target : s + dir * step;
            y = std::move(r.y);
            k1 = std::move(r.k7);
            ++st.accepted;
            double factor = err == 0 ? max_factor : safety * std::pow(err, -alpha) * std::pow(err_prev, beta);
            factor = std::clamp(factor, min_factor, max_factor);
            if (last_rejected) factor = std::min(factor, 1.0);
            // a step shortened to hit a node keeps the previous size
            h = (lands && step < h) ? h : step * factor;
            err_prev = std::max(err, 1e-4);
            last_rejected = false;
            if (lands) emit_nodes_at(s);
        } else {
            ++st.rejected;
            const double factor = std::isfinite(err) ? std::max(min_factor, safety * std::pow(err, -0.2)) : min_factor;
            h = step * factor;
            last_rejected = true;
        }
    }
    return y;
}

Vec integrate_fixed(const Rhs& f, Vec y, double s0, double s1, int n) {
    const double h = (s1 - s0) / n;
    for (int i = 0; i < n; ++i) {
        const double s = s0 + i * h;
        const Vec k1 = f(s, y);
        y = dp_step(f, s, y, k1, h, false).y;
    }
    return y;
}

}  // namespace h221
