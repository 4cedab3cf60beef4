#include "h221/psi.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

namespace h221 {

namespace {

constexpr int state_size = 5;
constexpr int s_index = 5;

int z_offset(int k) { return state_size + 1 + 4 * k; }

Mat2 read_Z(const Vec& y, int offset) {
    Mat2 Z;
    Z << y[offset], y[offset + 2], y[offset + 1], y[offset + 3];
    return Z;
}

void write_Z(Vec& y, int offset, const Mat2& Z) {
    y[offset] = Z(0, 0);
    y[offset + 1] = Z(1, 0);
    y[offset + 2] = Z(0, 1);
    y[offset + 3] = Z(1, 1);
}

Vec pack(const Mat2& Z) {
    Vec v(4);
    write_Z(v, 0, Z);
    return v;
}

double segment_distance(cplx a, cplx b, cplx point) {
    const cplx d = b - a;
    if (std::abs(d) == 0) return std::abs(a - point);
    const double s = std::clamp((std::conj(d) * (point - a)).real() / std::norm(d), 0.0, 1.0);
    return std::abs(a + s * d - point);
}

void check_spectral_segment(cplx a, cplx b, double clearance) {
    if (segment_distance(a, b, 0.0) < clearance || segment_distance(a, b, 1.0) < clearance)
        throw SpectralPole("spectral path passes within clearance of a pole");
}

// d/dtau_j of [state, S, Z_0, ...] for the listed spectral points
struct JointSystem {
    Dynamics dyn;
    std::vector<cplx> points;
    bool corrupt_s = false;

    Vec rate(int j, const TimePoint& tau, const Vec& y) const {
        Vec out(y.size());
        const Vec state = y.head(state_size);
        out.head(state_size) = dyn.velocity(j, tau, state);
        const TimeState ts{tau, kns_from(state)};
        out[s_index] = s_rate(j, ts, dyn.params, corrupt_s) / tau[j];
        if (!points.empty()) {
            const LaxMatrices B = build_B(tau, ts.state, dyn.params);
            for (std::size_t k = 0; k < points.size(); ++k) {
                const int off = z_offset(int(k));
                write_Z(out, off, rhs_tau(B, j, points[k]) * read_Z(y, off));
            }
        }
        return out;
    }

    Rhs leg(int j, const TimePoint& from, cplx to) const {
        const cplx a = from[j], d = to - a;
        return [this, j, from, a, d](double s, const Vec& y) -> Vec { return d * rate(j, from.with(j, a + s * d), y); };
    }
};

Vec joint_vector(const Vec& state, cplx S, const std::vector<Mat2>& Zs) {
    Vec y(state_size + 1 + 4 * int(Zs.size()));
    y.head(state_size) = state;
    y[s_index] = S;
    for (std::size_t k = 0; k < Zs.size(); ++k) write_Z(y, z_offset(int(k)), Zs[k]);
    return y;
}

// adaptive march along coordinate j, returning the joint vector at from + k step, k < count
std::vector<Vec> march(const JointSystem& sys, int j, const TimePoint& from, const Vec& y0, cplx step, int count,
                       const PsiConfig& cfg, StepStats& stats) {
    std::vector<Vec> out{y0};
    if (count <= 1) return out;
    const cplx to = from[j] + double(count - 1) * step;
    check_segment_clearance(from, j, to, cfg.clearance);
    std::vector<double> nodes;
    for (int k = 1; k < count - 1; ++k) nodes.push_back(double(k) / (count - 1));
    AdaptiveOptions ao;
    ao.tol = cfg.tol;
    Vec end = integrate_adaptive(sys.leg(j, from, to), y0, 0.0, 1.0, ao, &stats, &nodes,
                                 [&](double, const Vec& y) { out.push_back(y); });
    out.push_back(std::move(end));
    return out;
}

Vec adaptive_leg(const JointSystem& sys, int j, const TimePoint& from, const Vec& y0, cplx to, const PsiConfig& cfg,
                 StepStats* stats) {
    if (to == from[j]) return y0;
    check_segment_clearance(from, j, to, cfg.clearance);
    AdaptiveOptions ao;
    ao.tol = cfg.tol;
    return integrate_adaptive(sys.leg(j, from, to), y0, 0.0, 1.0, ao, stats);
}

Rhs eta_leg(const LaxMatrices& B, cplx from, cplx to) {
    const cplx d = to - from;
    return [B, from, d](double s, const Vec& y) -> Vec { return pack(d * rhs_eta(B, from + s * d) * read_Z(y, 0)); };
}

Mat2 hop_eta(const LaxMatrices& B, cplx from, cplx to, const Mat2& Z, int substeps) {
    return read_Z(integrate_fixed(eta_leg(B, from, to), pack(Z), 0.0, 1.0, substeps), 0);
}

Mat2 inverse(const Mat2& Z) {
    if (std::abs(Z.determinant()) < 1e-12) throw SingularZ("fundamental solution is not invertible");
    return Z.inverse();
}

}  // namespace

Mat2 transport_eta(const LaxMatrices& B, cplx from, cplx to, const Mat2& Z0, double tol, double clearance,
                   StepStats* stats) {
    if (to == from) return Z0;
    check_spectral_segment(from, to, clearance);
    AdaptiveOptions ao;
    ao.tol = tol;
    return read_Z(integrate_adaptive(eta_leg(B, from, to), pack(Z0), 0.0, 1.0, ao, stats), 0);
}

void validate_psi_config(const PsiConfig& cfg) {
    if (!satisfies_constraints(cfg.params))
        throw ConstraintViolation("parameter set violates the linking constraints required for the gauge chain");
    if (cfg.base_state.size() != state_size) throw std::invalid_argument("base state needs Q1, Q2, P1, P2, u");
    if (cfg.zeta.empty() || cfg.eta.empty()) throw std::invalid_argument("empty spectral grid");
    if (cfg.grid.origin.chart != Chart::TAU) throw std::invalid_argument("psi time grid must use the tau chart");
    for (int i = 0; i < cfg.grid.n1; ++i)
        for (int j = 0; j < cfg.grid.n2; ++j) {
            const TimePoint t = cfg.grid.node(i, j);
            if (std::abs(t.c1) < cfg.clearance || std::abs(t.c2) < cfg.clearance)
                throw ZeroTimeError("time grid node within clearance of zero");
        }
    auto check_point = [&](cplx s) {
        if (std::abs(s) < cfg.clearance || std::abs(s - 1.0) < cfg.clearance)
            throw SpectralPole("spectral node within clearance of a pole");
        const cplx x = spectral_map(s);
        if (std::abs(x) < cfg.clearance || std::abs(x - 1.0) < cfg.clearance)
            throw MapPole("mapped spectral node within clearance of a pole");
    };
    check_point(cfg.base_eta);
    for (cplx z : cfg.zeta) check_point(z);
    for (cplx e : cfg.eta) check_point(e);
    for (cplx z : cfg.zeta)
        for (cplx e : cfg.eta) {
            if (std::abs(z - e) < cfg.clearance) throw CoincidentSpectral("zeta and eta nodes too close");
            if (std::abs(spectral_map(z) - spectral_map(e)) < cfg.clearance)
                throw CoincidentSpectral("mapped zeta and eta nodes too close");
        }
}

Mat2 FundamentalSolutionGrid::Z(int node, int k) const { return read_Z(joint[std::size_t(node)], z_offset(k)); }

cplx FundamentalSolutionGrid::S(int node) const { return joint[std::size_t(node)][s_index]; }

KnsState FundamentalSolutionGrid::state(int node) const { return kns_from(joint[std::size_t(node)].head(state_size)); }

FundamentalSolutionGrid build_Z_grid(const PsiConfig& cfg, bool corrupt_s) {
    validate_psi_config(cfg);
    FundamentalSolutionGrid g;
    g.config = cfg;
    g.corrupt_s = corrupt_s;
    g.points = cfg.zeta;
    g.points.insert(g.points.end(), cfg.eta.begin(), cfg.eta.end());

    const TimePoint origin = cfg.grid.origin;
    const LaxMatrices B = build_B(origin, kns_from(cfg.base_state), cfg.params);
    std::vector<Mat2> Zs;
    for (cplx s : g.points)
        Zs.push_back(transport_eta(B, cfg.base_eta, s, Mat2::Identity(), cfg.tol, cfg.clearance, &g.stats));

    const JointSystem sys{Dynamics{Form::kns, cfg.params}, g.points, corrupt_s};
    const Vec y0 = joint_vector(cfg.base_state, 0.0, Zs);
    const TimeGrid& tg = cfg.grid;
    g.joint.resize(std::size_t(tg.size()));
    const auto column = march(sys, 1, origin, y0, tg.d1, tg.n1, cfg, g.stats);
    for (int i = 0; i < tg.n1; ++i) {
        const auto row = march(sys, 2, tg.node(i, 0), column[std::size_t(i)], tg.d2, tg.n2, cfg, g.stats);
        for (int j = 0; j < tg.n2; ++j) g.joint[std::size_t(i * tg.n2 + j)] = row[std::size_t(j)];
    }
    return g;
}

Mat2 kernel_M(const FundamentalSolutionGrid& g, int node, int zeta_i, int eta_j) {
    return inverse(g.Z(node, g.eta_index(eta_j))) * g.Z(node, g.zeta_index(zeta_i));
}

PsiInvariants psi_invariants(const FundamentalSolutionGrid& g) {
    const PsiConfig& cfg = g.config;
    PsiInvariants inv;
    const int nodes = cfg.grid.size();
    const int nz = int(cfg.zeta.size()), ne = int(cfg.eta.size());
    for (int n = 0; n < nodes; ++n) {
        for (std::size_t k = 0; k < g.points.size(); ++k)
            inv.det_deviation = std::max(inv.det_deviation, std::abs(g.Z(n, int(k)).determinant() - 1.0));
        for (int i = 0; i < nz; ++i) {
            const Mat2 Zz = g.Z(n, g.zeta_index(i));
            inv.diagonal_identity = std::max(inv.diagonal_identity, max_abs(inverse(Zz) * Zz - Mat2::Identity()));
            const cplx x = spectral_map(cfg.zeta[std::size_t(i)]);
            for (int j = 0; j < ne; ++j) {
                const Mat2 Ze = g.Z(n, g.eta_index(j));
                const Mat2 M = inverse(Ze) * Zz;
                const Mat2 Mback = inverse(Zz) * Ze;
                inv.inverse_identity = std::max(inv.inverse_identity, max_abs(M * Mback - Mat2::Identity()));
                const cplx y = spectral_map(cfg.eta[std::size_t(j)]);
                const TimePoint tau = g.time(n);
                const cplx ef =
                    std::exp(-gauge_f1(x, y, tau, cfg.params, Variant::derived) - gauge_f2(tau, cfg.params));
                const cplx es = std::exp(-g.S(n));
                const Mat2 grouped_right = ef * (es * M);
                const Mat2 grouped_left = (ef * es) * M;
                const double scale = std::max(max_abs(grouped_right), 1e-300);
                inv.gauge_associativity =
                    std::max(inv.gauge_associativity, max_abs(grouped_right - grouped_left) / scale);
                const Mat2 back = (1.0 / ef) * (ef * M);
                inv.gauge_roundtrip = std::max(inv.gauge_roundtrip, max_abs(back - M) / std::max(max_abs(M), 1e-300));
            }
        }
    }
    inv.s_base = std::abs(g.S(0));

    // closed loops (tau, base_eta) -> (tau, point) -> (tau + delta e_j, point) -> (tau + delta e_j, base_eta) -> back
    const Dynamics dyn{Form::kns, cfg.params};
    const TimePoint origin = cfg.grid.origin;
    const cplx deltas[2] = {cfg.grid.n1 > 1 ? double(cfg.grid.n1 - 1) * cfg.grid.d1 : cplx(0.1),
                            cfg.grid.n2 > 1 ? double(cfg.grid.n2 - 1) * cfg.grid.d2 : cplx(0.1)};
    const LaxMatrices B0 = build_B(origin, kns_from(cfg.base_state), cfg.params);
    for (cplx point : g.points) {
        const Mat2 Z1 = transport_eta(B0, cfg.base_eta, point, Mat2::Identity(), cfg.tol, cfg.clearance);
        for (int j = 1; j <= 2; ++j) {
            const JointSystem at_point{dyn, {point}, false};
            const JointSystem at_base{dyn, {cfg.base_eta}, false};
            const cplx far = origin[j] + deltas[j - 1];
            const Vec y1 =
                adaptive_leg(at_point, j, origin, joint_vector(cfg.base_state, 0.0, {Z1}), far, cfg, nullptr);
            const TimePoint t1 = origin.with(j, far);
            const LaxMatrices B1 = build_B(t1, kns_from(y1.head(state_size)), cfg.params);
            const Mat2 Z2 = transport_eta(B1, point, cfg.base_eta, read_Z(y1, z_offset(0)), cfg.tol, cfg.clearance);
            const Vec y2 =
                adaptive_leg(at_base, j, t1, joint_vector(y1.head(state_size), 0.0, {Z2}), origin[j], cfg, nullptr);
            inv.loop_deviation = std::max(inv.loop_deviation, max_abs(read_Z(y2, z_offset(0)) - Mat2::Identity()));
        }
    }

    // S at the far corner by the opposite quadrature order
    const JointSystem s_only{dyn, {}, g.corrupt_s};
    const int far = nodes - 1;
    const TimePoint corner = g.time(far);
    const Vec y0 = joint_vector(cfg.base_state, 0.0, {});
    const Vec ya = adaptive_leg(s_only, 2, origin, y0, corner.c2, cfg, nullptr);
    const Vec yb = adaptive_leg(s_only, 1, origin.with(2, corner.c2), ya, corner.c1, cfg, nullptr);
    inv.s_order_swap = std::abs(yb[s_index] - g.S(far));
    return inv;
}

const ResidualFamily& PsiResiduals::family(const std::string& id) const {
    for (const auto& f : families)
        if (f.id == id) return f;
    throw std::out_of_range("unknown residual family " + id);
}

namespace {

// values of a matrix field around a node: spectral offsets in (1, 2), time offsets along tau1, tau2
struct Field {
    Mat2 c, p1, m1, p2, m2;
    Mat2 tp[2], tm[2];
};

Mat2 pde_residual(const Field& f, const PdeCoefficients& c, int j, cplx T, double h) {
    const Mat2 d1 = (f.p1 - f.m1) / (2.0 * h), d11 = (f.p1 - 2.0 * f.c + f.m1) / (h * h);
    const Mat2 d2 = (f.p2 - f.m2) / (2.0 * h), d22 = (f.p2 - 2.0 * f.c + f.m2) / (h * h);
    const Mat2 dt = (f.tp[j - 1] - f.tm[j - 1]) / (2.0 * h);
    return (T * dt - (c.a1 * d11 + c.a2 * d22 + c.b1 * d1 + c.b2 * d2 + c.g * f.c)) / (1.0 + max_abs(f.c));
}

// samples at one node for one step
struct NodeSamples {
    TimePoint tau, tp[2], tm[2];
    Vec center, yp[2], ym[2];
    std::vector<Mat2> sp, sm, xp, xm;  // point +-h and mapped point +-h, centre time
};

NodeSamples sample_node(const FundamentalSolutionGrid& g, const JointSystem& sys, int node, double h) {
    const PsiConfig& cfg = g.config;
    NodeSamples s;
    s.tau = g.time(node);
    s.center = g.joint[std::size_t(node)];
    for (int j = 1; j <= 2; ++j) {
        s.tp[j - 1] = s.tau.with(j, s.tau[j] + h);
        s.tm[j - 1] = s.tau.with(j, s.tau[j] - h);
        s.yp[j - 1] = integrate_fixed(sys.leg(j, s.tau, s.tp[j - 1][j]), s.center, 0.0, 1.0, cfg.substeps);
        s.ym[j - 1] = integrate_fixed(sys.leg(j, s.tau, s.tm[j - 1][j]), s.center, 0.0, 1.0, cfg.substeps);
    }
    const LaxMatrices B = build_B(s.tau, kns_from(s.center.head(state_size)), cfg.params);
    for (std::size_t k = 0; k < g.points.size(); ++k) {
        const cplx sigma = g.points[k], w = spectral_map(sigma);
        const Mat2 Z = read_Z(s.center, z_offset(int(k)));
        s.sp.push_back(hop_eta(B, sigma, sigma + h, Z, cfg.substeps));
        s.sm.push_back(hop_eta(B, sigma, sigma - h, Z, cfg.substeps));
        s.xp.push_back(hop_eta(B, sigma, spectral_map(w + h), Z, cfg.substeps));
        s.xm.push_back(hop_eta(B, sigma, spectral_map(w - h), Z, cfg.substeps));
    }
    return s;
}

struct Collector {
    std::vector<ResidualFamily> families;
    std::size_t step = 0;

    ResidualFamily& get(const std::string& id, bool gating) {
        for (auto& f : families)
            if (f.id == id) return f;
        families.push_back(ResidualFamily{id, gating, {}, {}, {}});
        return families.back();
    }

    void add(const std::string& id, bool gating, const std::array<int, 4>& key, cplx value) {
        ResidualFamily& f = get(id, gating);
        if (f.per_step.size() <= step) f.per_step.resize(step + 1);
        if (step == 0) f.keys.push_back(key);
        f.per_step[step].push_back(value);
    }

    void add_matrix(const std::string& id, bool gating, int node, int i, int j, const Mat2& R) {
        for (int e = 0; e < 4; ++e) add(id, gating, {node, i, j, e}, R(e % 2, e / 2));
    }
};

}  // namespace

PsiResiduals psi_residuals(const FundamentalSolutionGrid& g, const std::vector<double>& steps, const PsiMutation& mut) {
    const PsiConfig& cfg = g.config;
    const ParameterSet& p = cfg.params;
    const JointSystem sys{Dynamics{Form::kns, p}, g.points, g.corrupt_s};
    const int nz = int(cfg.zeta.size()), ne = int(cfg.eta.size());
    Collector col;

    for (std::size_t si = 0; si < steps.size(); ++si) {
        col.step = si;
        const double h = steps[si];
        for (int n = 0; n < cfg.grid.size(); ++n) {
            const NodeSamples smp = sample_node(g, sys, n, h);
            const TimePoint& tau = smp.tau;
            const cplx t1 = tau.c1, t2 = tau.c2;
            const TimeState ts{tau, kns_from(smp.center.head(state_size))};
            auto S_at = [](const Vec& y) { return y[s_index]; };
            const cplx Sc = S_at(smp.center);

            // gauge S: both defining equations and their cross-derivative compatibility
            {
                const cplx r1 = t1 * (S_at(smp.yp[0]) - S_at(smp.ym[0])) / (2.0 * h) - s_rate(1, ts, p);
                const cplx r2 = t2 * (S_at(smp.yp[1]) - S_at(smp.ym[1])) / (2.0 * h) - s_rate(2, ts, p);
                auto rate_over = [&](int j, const TimePoint& t, const Vec& y) {
                    return s_rate(j, {t, kns_from(y.head(state_size))}, p) / t[j];
                };
                const cplx compat =
                    (rate_over(1, smp.tp[1], smp.yp[1]) - rate_over(1, smp.tm[1], smp.ym[1])) / (2.0 * h) -
                    (rate_over(2, smp.tp[0], smp.yp[0]) - rate_over(2, smp.tm[0], smp.ym[0])) / (2.0 * h);
                col.add("s_tau1", true, {n, -1, -1, 0}, r1);
                col.add("s_tau2", true, {n, -1, -1, 0}, r2);
                col.add("s_compat", true, {n, -1, -1, 0}, compat);
            }

            for (int i = 0; i < nz; ++i) {
                const int kz = g.zeta_index(i);
                const cplx zeta = g.points[std::size_t(kz)], x = spectral_map(zeta);
                for (int j = 0; j < ne; ++j) {
                    const int ke = g.eta_index(j);
                    const cplx eta = g.points[std::size_t(ke)], y = spectral_map(eta);
                    const Mat2 Zz = read_Z(smp.center, z_offset(kz)), Ze = read_Z(smp.center, z_offset(ke));
                    const Mat2 Ze_inv = inverse(Ze);

                    Field M;
                    M.c = Ze_inv * Zz;
                    M.p1 = Ze_inv * smp.sp[std::size_t(kz)];
                    M.m1 = Ze_inv * smp.sm[std::size_t(kz)];
                    M.p2 = inverse(smp.sp[std::size_t(ke)]) * Zz;
                    M.m2 = inverse(smp.sm[std::size_t(ke)]) * Zz;
                    for (int d = 0; d < 2; ++d) {
                        M.tp[d] = inverse(read_Z(smp.yp[d], z_offset(ke))) * read_Z(smp.yp[d], z_offset(kz));
                        M.tm[d] = inverse(read_Z(smp.ym[d], z_offset(ke))) * read_Z(smp.ym[d], z_offset(kz));
                    }
                    PdeCoefficients c1 = kernel_tau1(zeta, eta, ts, p);
                    c1.g += mut.g1_shift;
                    col.add_matrix("kernel_tau1", true, n, i, j, pde_residual(M, c1, 1, t1, h));
                    col.add_matrix("kernel_tau2", true, n, i, j,
                                   pde_residual(M, kernel_tau2(zeta, eta, ts, p), 2, t2, h));

                    // W = exp(-S) M
                    const cplx es = std::exp(-Sc);
                    Field W;
                    W.c = es * M.c;
                    W.p1 = es * M.p1;
                    W.m1 = es * M.m1;
                    W.p2 = es * M.p2;
                    W.m2 = es * M.m2;
                    for (int d = 0; d < 2; ++d) {
                        W.tp[d] = std::exp(-S_at(smp.yp[d])) * M.tp[d];
                        W.tm[d] = std::exp(-S_at(smp.ym[d])) * M.tm[d];
                    }
                    col.add_matrix("scalar_tau1", true, n, i, j,
                                   pde_residual(W, scalar_tau1(zeta, eta, tau, p), 1, t1, h));
                    col.add_matrix("scalar_tau2", true, n, i, j,
                                   pde_residual(W, scalar_tau2(zeta, eta, tau, p), 2, t2, h));

                    // W in (x, y): spectral offsets through the map
                    const Mat2 Zz_xp = smp.xp[std::size_t(kz)], Zz_xm = smp.xm[std::size_t(kz)];
                    const Mat2 Ze_yp_inv = inverse(smp.xp[std::size_t(ke)]),
                               Ze_ym_inv = inverse(smp.xm[std::size_t(ke)]);
                    Field Wm = W;
                    Wm.p1 = es * Ze_inv * Zz_xp;
                    Wm.m1 = es * Ze_inv * Zz_xm;
                    Wm.p2 = es * Ze_yp_inv * Zz;
                    Wm.m2 = es * Ze_ym_inv * Zz;
                    for (Variant v : {Variant::derived, Variant::printed}) {
                        const bool gating = v == Variant::derived;
                        const std::string suffix = gating ? "" : "_printed";
                        col.add_matrix("mapped_tau1" + suffix, gating, n, i, j,
                                       pde_residual(Wm, mapped_tau1(x, y, tau, p, v), 1, t1, h));
                        col.add_matrix("mapped_tau2" + suffix, gating, n, i, j,
                                       pde_residual(Wm, mapped_tau2(x, y, tau, p, v), 2, t2, h));
                    }

                    // Psi = exp(-f1 - f2) W, plus the corners needed for the mixed derivative
                    for (Variant v : {Variant::derived, Variant::printed}) {
                        const bool gating = v == Variant::derived;
                        const std::string suffix = gating ? "" : "_printed";
                        auto gauge = [&](cplx xx, cplx yy, const TimePoint& t) {
                            return std::exp(-gauge_f1(xx, yy, t, p, v) - gauge_f2(t, p));
                        };
                        Field Psi;
                        Psi.c = gauge(x, y, tau) * Wm.c;
                        Psi.p1 = gauge(x + h, y, tau) * Wm.p1;
                        Psi.m1 = gauge(x - h, y, tau) * Wm.m1;
                        Psi.p2 = gauge(x, y + h, tau) * Wm.p2;
                        Psi.m2 = gauge(x, y - h, tau) * Wm.m2;
                        for (int d = 0; d < 2; ++d) {
                            Psi.tp[d] = gauge(x, y, smp.tp[d]) * Wm.tp[d];
                            Psi.tm[d] = gauge(x, y, smp.tm[d]) * Wm.tm[d];
                        }
                        col.add_matrix("final_tau1" + suffix, gating, n, i, j,
                                       pde_residual(Psi, final_tau1(x, y, tau, p, v, mut.kappa_shift), 1, t1, h));
                        col.add_matrix("final_tau2" + suffix, gating, n, i, j,
                                       pde_residual(Psi, final_tau2(x, y, tau, p, v, mut.kappa_shift), 2, t2, h));

                        // polynomial chart
                        const Mat2 pp = gauge(x + h, y + h, tau) * es * Ze_yp_inv * Zz_xp;
                        const Mat2 pm = gauge(x + h, y - h, tau) * es * Ze_ym_inv * Zz_xp;
                        const Mat2 mp = gauge(x - h, y + h, tau) * es * Ze_yp_inv * Zz_xm;
                        const Mat2 mm = gauge(x - h, y - h, tau) * es * Ze_ym_inv * Zz_xm;
                        const Mat2 Px = (Psi.p1 - Psi.m1) / (2.0 * h), Py = (Psi.p2 - Psi.m2) / (2.0 * h);
                        const Mat2 Pxx = (Psi.p1 - 2.0 * Psi.c + Psi.m1) / (h * h);
                        const Mat2 Pyy = (Psi.p2 - 2.0 * Psi.c + Psi.m2) / (h * h);
                        const Mat2 Pxy = (pp - pm - mp + mm) / (4.0 * h * h);
                        const Mat2 Pt1 = (Psi.tp[0] - Psi.tm[0]) / (2.0 * h), Pt2 = (Psi.tp[1] - Psi.tm[1]) / (2.0 * h);

                        const PolynomialChart pc = polynomial_chart(x, y, tau);
                        const cplx r = pc.r, rho = pc.rho, s1 = pc.s1, s2 = pc.s2;
                        const cplx rx = pc.jacobian(0, 0), ry = pc.jacobian(0, 1), qx = pc.jacobian(1, 0),
                                   qy = pc.jacobian(1, 1);
                        const cplx det = pc.jacobian.determinant();
                        const Mat2 Pr = (qy * Px - qx * Py) / det, Pq = (rx * Py - ry * Px) / det;
                        Eigen::Matrix3cd H;
                        H << rx * rx, 2.0 * rx * qx, qx * qx, rx * ry, rx * qy + ry * qx, qx * qy, ry * ry,
                            2.0 * ry * qy, qy * qy;
                        const Eigen::Matrix3cd Hi = H.inverse();
                        const Mat2 rhs[3] = {Pxx, Pxy - Pr / t1 - Pq, Pyy};
                        Mat2 second[3];
                        for (int a = 0; a < 3; ++a)
                            second[a] = Hi(a, 0) * rhs[0] + Hi(a, 1) * rhs[1] + Hi(a, 2) * rhs[2];
                        const Mat2 Ps1 = -t1 * t1 * Pt1 - t1 * r * Pr, Ps2 = -Pt2;
                        const double scale = 1.0 + max_abs(Psi.c);
                        auto poly_rhs = [&](const PolyCoefficients& k) {
                            return k.rr * second[0] + k.rq * second[1] + k.qq * second[2] + k.r * Pr + k.q * Pq +
                                   k.v * Psi.c;
                        };
                        const PolyCoefficients k1 = poly_s1(r, rho, s1, s2, p, v, mut.kappa_shift);
                        const PolyCoefficients k2 = poly_s2(r, rho, s1, s2, p, v, mut.kappa_shift);
                        col.add_matrix("poly_s1" + suffix, gating, n, i, j, (s1 * s1 * Ps1 - poly_rhs(k1)) / scale);
                        col.add_matrix("poly_s2" + suffix, gating, n, i, j, (-s2 * Ps2 - poly_rhs(k2)) / scale);
                    }
                }
            }
        }
    }

    PsiResiduals out;
    out.steps = steps;
    out.families = std::move(col.families);
    for (auto& f : out.families) f.study = study_signed(steps, f.per_step);
    return out;
}

void write_psi_csv(std::ostream& os, const FundamentalSolutionGrid& g, const PsiResiduals& r) {
    os << "# schema: psi_residuals v1\n";
    os << "family,node,tau1_re,tau1_im,tau2_re,tau2_im,zeta_index,eta_index,entry";
    for (std::size_t k = 0; k < r.steps.size(); ++k) os << ",residual_h" << k;
    os << '\n';
    os.precision(17);
    for (const auto& f : r.families) {
        for (std::size_t n = 0; n < f.keys.size(); ++n) {
            const auto& key = f.keys[n];
            const TimePoint t = g.time(key[0]);
            os << f.id << ',' << key[0] << ',' << t.c1.real() << ',' << t.c1.imag() << ',' << t.c2.real() << ','
               << t.c2.imag() << ',' << key[1] << ',' << key[2] << ',' << key[3];
            for (const auto& step : f.per_step) os << ',' << std::abs(step[n]);
            os << '\n';
        }
    }
}

}  // namespace h221
