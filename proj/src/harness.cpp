#include "h221/harness.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>

#include "h221/lax.hpp"
#include "h221/prlg.hpp"
#include "h221/psi.hpp"

namespace h221 {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* tool_version = "1.0.0";

json steps_json(const std::vector<double>& v) { return json(v); }

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Check error_check(const std::string& id, const std::exception& e, bool gating = true) {
    Check c;
    c.id = id;
    c.gating = gating;
    c.pass = false;
    c.detail = {{"kind", "error"}, {"error", e.what()}};
    return c;
}

// runs `body`, turning numerical exceptions into a failing check
template <class F>
void guarded(std::vector<Check>& out, const std::string& id, F body) {
    try {
        body();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        out.push_back(error_check(id, e));
    }
}

void check_steps_option(const std::vector<double>& steps, double tol) {
    if (steps.size() < 3) throw ConfigError("--steps: at least three step sizes are needed for an order fit");
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (!(steps[k] > 0)) throw ConfigError("--steps: step sizes must be positive");
        if (k > 0 && !(steps[k] < steps[k - 1])) throw ConfigError("--steps: step sizes must decrease");
    }
    if (!(tol < 0.1 * steps.back() * steps.back()))
        throw ConfigError("--steps: integrator tolerance must stay below 0.1 h_min^2");
}

void write_text(const fs::path& dir, const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + (dir / name).string());
    body(os);
}

double max_abs_vec(const Vec& v) { return v.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------- flow

std::vector<Check> run_flow(const RunConfig& cfg, const RunOptions& opt, const fs::path* dir) {
    std::vector<Check> out;
    Dynamics dyn{Form::kns, cfg.params};
    if (opt.mutation == "flow_sign") dyn.flipped_component = 0;
    const TimePoint base = cfg.base_time;
    const Vec s0 = to_vec(cfg.initial_state);
    FlowOptions fo;
    fo.tol = cfg.flow_tol;
    fo.clearance = cfg.clearance;
    const std::vector<double> sweep = opt.steps.empty() ? cfg.flow.tol_sweep : opt.steps;

    guarded(out, "flow_zero_length", [&] {
        const Trajectory tr = integrate(dyn, 1, base, s0, base.c1, fo);
        out.push_back(invariant_check("flow_zero_length", max_abs_vec(tr.final_state() - s0), thresholds::invariant));
    });

    guarded(out, "flow_trajectory", [&] {
        const TimeGrid& g = cfg.time_grid;
        const FlowPath path{base, {{1, base.c1 + double(g.n1 - 1) * g.d1}, {2, base.c2 + double(g.n2 - 1) * g.d2}}};
        FlowOptions so = fo;
        so.samples_per_segment = cfg.flow.samples_per_segment;
        const Trajectory tr = integrate_path(dyn, path, s0, so);
        double u_min = std::abs(tr.states.front()[4]);
        for (const Vec& y : tr.states) u_min = std::min(u_min, std::abs(y[4]));
        Check c;
        c.id = "flow_u_nonzero";
        c.pass = u_min > thresholds::invariant;
        c.detail = {{"kind", "invariant_lower"},           {"value", u_min},
                    {"threshold", thresholds::invariant},  {"samples", tr.states.size()},
                    {"accepted_steps", tr.stats.accepted}, {"rejected_steps", tr.stats.rejected}};
        out.push_back(c);
        if (dir) write_text(*dir, "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); });
    });

    guarded(out, "flow_reversibility", [&] {
        const Trajectory fwd = integrate(dyn, 1, base, s0, base.c1 + cfg.flow.dt1, fo);
        const Trajectory back = integrate(dyn, 1, fwd.final_time(), fwd.final_state(), base.c1, fo);
        const double dev = max_abs_vec(back.final_state() - s0) / (1.0 + max_abs_vec(s0));
        out.push_back(invariant_check("flow_reversibility", dev, 10.0 * cfg.flow_tol));
    });

    // initial state plus seeded random perturbations of it
    std::vector<Vec> states{s0};
    std::mt19937_64 rng(cfg.flow.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k < cfg.flow.random_states; ++k) {
        Vec s = s0;
        for (int c = 0; c < 5; ++c) s[c] += cfg.flow.random_radius * cplx(unif(rng), unif(rng));
        states.push_back(s);
    }

    json rows = json::array();
    guarded(out, "commute_kns", [&] {
        double worst = 0, envelope = 0, min_slope = 1e300;
        bool monotone = true;
        for (std::size_t k = 0; k < states.size(); ++k) {
            worst = std::max(worst, commute_check(dyn, base, states[k], cfg.flow.dt1, cfg.flow.dt2, fo));
            std::vector<double> devs;
            for (double tol : sweep) {
                FlowOptions t = fo;
                t.tol = tol;
                const double d = commute_check(dyn, base, states[k], cfg.flow.dt1, cfg.flow.dt2, t);
                devs.push_back(d);
                envelope = std::max(envelope, d / tol);
                rows.push_back({{"form", "kns"}, {"state", k}, {"tol", tol}, {"deviation", d}});
            }
            if (devs.back() > devs.front()) monotone = false;
            min_slope = std::min(min_slope, fitted_order(sweep, devs));
        }
        Check c = invariant_check("commute_kns", worst, thresholds::commutativity);
        c.detail["states"] = states.size();
        c.detail["tol"] = cfg.flow_tol;
        out.push_back(c);
        Check e;
        e.id = "commute_kns_tol_envelope";
        e.pass = envelope <= 1.0 && monotone;
        e.detail = {{"kind", "envelope"},
                    {"max_deviation_over_tol", envelope},
                    {"threshold", 1.0},
                    {"decreasing_with_tol", monotone},
                    {"min_fitted_slope", min_slope},
                    {"tol_sweep", sweep}};
        out.push_back(e);
    });

    auto other_form = [&](const std::string& id, Form form, const TimePoint& t, const Vec& s) {
        guarded(out, id, [&] {
            const Dynamics d{form, cfg.params, dyn.flipped_component};
            const double dev = commute_check(d, t, s, cfg.flow.dt1, cfg.flow.dt2, fo);
            std::vector<double> devs;
            for (double tol : sweep) {
                FlowOptions o = fo;
                o.tol = tol;
                devs.push_back(commute_check(d, t, s, cfg.flow.dt1, cfg.flow.dt2, o));
                rows.push_back({{"form", form_name(form)}, {"state", 0}, {"tol", tol}, {"deviation", devs.back()}});
            }
            Check c = invariant_check(id, dev, thresholds::commutativity);
            c.detail["fitted_slope"] = fitted_order(sweep, devs);
            out.push_back(c);
        });
    };
    const TimePoint base_s = base.to_s();
    other_form("commute_rational", Form::rational, base, to_vec(cfg.rational_state));
    other_form("commute_polynomial", Form::polynomial, base_s, to_vec(map_rational_state(base, cfg.rational_state)));

    guarded(out, "chart_consistency", [&] {
        const Dynamics rat{Form::rational, cfg.params};
        const Dynamics pol{Form::polynomial, cfg.params};
        const TimePoint end_tau = base.with(1, base.c1 + cfg.flow.dt1).with(2, base.c2 + cfg.flow.dt2);
        const TimePoint end_s = end_tau.to_s();
        const Trajectory tr =
            integrate_path(rat, {base, {{1, end_tau.c1}, {2, end_tau.c2}}}, to_vec(cfg.rational_state), fo);
        const Trajectory tp = integrate_path(pol, {base_s, {{1, end_s.c1}, {2, end_s.c2}}},
                                             to_vec(map_rational_state(base, cfg.rational_state)), fo);
        const PolynomialState mapped = map_rational_state(end_tau, rational_from(tr.final_state()));
        const PolynomialState direct = polynomial_from(tp.final_state());
        const double dq = std::max(std::abs(mapped.q1 - direct.q1), std::abs(mapped.q2 - direct.q2));
        const double dp = std::max(std::abs(mapped.p1 - direct.p1), std::abs(mapped.p2 - direct.p2));
        out.push_back(invariant_check("chart_consistency_coordinates", dq, thresholds::chart_consistency));
        out.push_back(invariant_check("chart_consistency_momenta", dp, thresholds::chart_consistency, false));
    });

    if (dir) {
        write_text(*dir, "commutativity.csv", [&](std::ostream& os) {
            os << "# schema: commutativity v1\nform,state,tol,deviation\n";
            os.precision(17);
            for (const auto& r : rows)
                os << r["form"].get<std::string>() << ',' << r["state"].get<int>() << ',' << r["tol"].get<double>()
                   << ',' << r["deviation"].get<double>() << '\n';
        });
    }
    return out;
}

// ---------------------------------------------------------------- lax

std::vector<Check> run_lax(const RunConfig& cfg, const RunOptions& opt, const fs::path* dir) {
    std::vector<Check> out;
    const Dynamics dyn{Form::kns, cfg.params};
    const std::vector<double> steps = opt.steps.empty() ? cfg.lax.steps : opt.steps;
    FlowOptions fo;
    fo.tol = cfg.integrator_tol;
    fo.clearance = cfg.clearance;
    const bool offset = opt.mutation == "state_offset";

    GridStates gs;
    try {
        gs = integrate_grid(dyn, cfg.time_grid, to_vec(cfg.initial_state), fo);
    } catch (const std::exception& e) {
        out.push_back(error_check("lax_trajectory", e));
        return out;
    }
    const TimeGrid& g = cfg.time_grid;

    guarded(out, "lax_algebraic", [&] {
        double traceless = 0, det = 0, offdiag = 0, structure = 0;
        for (int i = 0; i < g.n1; ++i)
            for (int j = 0; j < g.n2; ++j) {
                const TimePoint tau = g.node(i, j);
                const KnsState s = kns_from(gs.at(i, j));
                const LaxMatrices B = build_B(tau, s, cfg.params);
                const AFamily A = build_A(tau.to_t(), s, cfg.params);
                for (const Mat2* m : {&B.B0m1, &B.B00, &B.B10, &B.Binf, &B.F2, &B.B1})
                    traceless = std::max(traceless, std::abs(m->trace()) / std::max(1.0, max_abs(*m)));
                det = std::max(
                    det, std::abs(B.B0m1.determinant() + tau.c2 * tau.c2 / 4.0) / std::max(1.0, std::norm(tau.c2)));
                for (auto [a, b] : {std::pair{A.A00, B.B00}, std::pair{A.A10, B.B10}})
                    offdiag = std::max({offdiag, std::abs(a(0, 1) - b(0, 1)), std::abs(a(1, 0) - b(1, 0))});
                Mat2 F2, Binf, B1;
                F2 << -0.5, 0.0, 0.0, 0.5;
                Binf << -tau.c1 / 2.0, 0.0, 0.0, tau.c1 / 2.0;
                B1 << 0.0, (A.A00(0, 1) + A.A10(0, 1)) / tau.c1, (A.A00(1, 0) + A.A10(1, 0)) / tau.c1, 0.0;
                structure = std::max({structure, max_abs(B.F2 - F2), max_abs(B.Binf - Binf), max_abs(B.B1 - B1)});
            }
        out.push_back(invariant_check("lax_traceless", traceless, thresholds::traceless_relative));
        out.push_back(invariant_check("lax_det_residue", det, thresholds::invariant));
        out.push_back(invariant_check("lax_offdiagonal_agreement", offdiag, thresholds::invariant));
        out.push_back(invariant_check("lax_fixed_structure", structure, thresholds::invariant));
    });

    guarded(out, "lax_gauge_consistency", [&] {
        // Y from the untransformed system, gauged, against Z integrated directly
        const TimePoint tau = g.origin;
        const KnsState s = kns_from(gs.at(0, 0));
        const LaxMatrices B = build_B(tau, s, cfg.params);
        const AFamily A = build_A(tau.to_t(), s, cfg.params);
        double worst = 0;
        for (cplx e0 : cfg.lax.eta) {
            const cplx e1 = e0 + cplx(0.0, e0.imag() >= 0 ? 0.1 : -0.1);
            const cplx d = e1 - e0;
            auto pack = [](const Mat2& m) {
                Vec v(4);
                v << m(0, 0), m(1, 0), m(0, 1), m(1, 1);
                return v;
            };
            auto unpack = [](const Vec& v) {
                Mat2 m;
                m << v[0], v[2], v[1], v[3];
                return m;
            };
            AdaptiveOptions ao;
            ao.tol = cfg.integrator_tol;
            const Vec y1 =
                integrate_adaptive([&](double t, const Vec& y) { return pack(d * rhs_eta(A, e0 + t * d) * unpack(y)); },
                                   pack(Mat2::Identity()), 0.0, 1.0, ao);
            const Mat2 Z0 = gauge_Y_to_Z(Mat2::Identity(), tau, e0, cfg.params);
            const Vec z1 =
                integrate_adaptive([&](double t, const Vec& y) { return pack(d * rhs_eta(B, e0 + t * d) * unpack(y)); },
                                   pack(Z0), 0.0, 1.0, ao);
            const Mat2 gauged = gauge_Y_to_Z(unpack(y1), tau, e1, cfg.params);
            worst = std::max(worst, max_abs(gauged - unpack(z1)) / std::max(1.0, max_abs(gauged)));
        }
        out.push_back(invariant_check("lax_gauge_consistency", worst, thresholds::gauge_consistency));
    });

    struct PairData {
        LaxPair pair;
        std::vector<std::vector<cplx>> residuals;
        std::vector<std::vector<double>> norms;
    };
    std::vector<PairData> pairs{{LaxPair::eta_tau1, {}, {}}, {LaxPair::eta_tau2, {}, {}}, {LaxPair::tau1_tau2, {}, {}}};
    for (auto& pd : pairs) {
        pd.residuals.resize(steps.size());
        pd.norms.resize(steps.size());
    }
    std::string failure;
    try {
        for (std::size_t k = 0; k < steps.size(); ++k)
            for (int i = 0; i < g.n1; ++i)
                for (int j = 0; j < g.n2; ++j) {
                    const TimePoint tau = g.node(i, j);
                    const Stencil st = sample_stencil(dyn, tau, gs.at(i, j), steps[k], false);
                    Vec shifted = gs.at(i, j);
                    shifted[3] += 0.1;
                    for (auto& pd : pairs)
                        for (cplx eta : cfg.lax.eta) {
                            const Mat2 R = zero_curvature_matrix(pd.pair, tau, st, steps[k], eta, cfg.params,
                                                                 offset ? &shifted : nullptr);
                            for (int e = 0; e < 4; ++e) pd.residuals[k].push_back(R(e % 2, e / 2));
                            pd.norms[k].push_back(R.norm());
                        }
                }
    } catch (const std::exception& e) {
        failure = e.what();
    }
    for (auto& pd : pairs) {
        const std::string id = std::string("zero_curvature_") + pair_name(pd.pair);
        if (!failure.empty()) {
            out.push_back(error_check(id, std::runtime_error(failure)));
            continue;
        }
        out.push_back(
            convergence_check(id, study_signed(steps, pd.residuals), pd.norms[0].size(), thresholds::curvature_floor));
    }
    if (dir && failure.empty()) {
        write_text(*dir, "zero_curvature.csv", [&](std::ostream& os) {
            os << "# schema: zero_curvature v1\npair,i,j,eta_re,eta_im";
            for (std::size_t k = 0; k < steps.size(); ++k) os << ",residual_h" << k;
            os << '\n';
            os.precision(17);
            for (const auto& pd : pairs) {
                std::size_t n = 0;
                for (int i = 0; i < g.n1; ++i)
                    for (int j = 0; j < g.n2; ++j)
                        for (cplx eta : cfg.lax.eta) {
                            os << pair_name(pd.pair) << ',' << i << ',' << j << ',' << eta.real() << ',' << eta.imag();
                            for (std::size_t k = 0; k < steps.size(); ++k) os << ',' << pd.norms[k][n];
                            os << '\n';
                            ++n;
                        }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- prlg

std::vector<Check> run_prlg(const RunConfig& cfg, const RunOptions& opt, const fs::path* dir) {
    std::vector<Check> out;
    const Dynamics dyn{Form::kns, cfg.params};
    const std::vector<double> steps = opt.steps.empty() ? cfg.prlg.steps : opt.steps;
    FlowOptions fo;
    fo.tol = cfg.integrator_tol;
    fo.clearance = cfg.clearance;
    PrlgOptions po;
    po.flip_d = opt.mutation == "d_sign";

    const char* names[7] = {"prlg_c_tau1", "prlg_d_tau1",   "prlg_e_tau1",  "prlg_b_tau2",
                            "prlg_a_tau2", "prlg_second_b", "prlg_second_a"};
    std::vector<std::vector<cplx>> fam[7];
    for (auto& f : fam) f.resize(steps.size());
    std::vector<PrlgNodeResidual> first;
    try {
        const GridStates gs = integrate_grid(dyn, cfg.prlg.grid, to_vec(cfg.initial_state), fo);
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const auto nodes = prlg_residuals(dyn, gs, steps[k], po);
            if (k == 0) first = nodes;
            for (const auto& n : nodes) {
                for (int e = 0; e < 5; ++e) fam[e][k].push_back(n.system[std::size_t(e)]);
                for (int e = 0; e < 2; ++e) fam[5 + e][k].push_back(n.second[std::size_t(e)]);
            }
        }
    } catch (const std::exception& e) {
        out.push_back(error_check("prlg", e));
        return out;
    }
    double constraint = 0;
    for (const auto& n : first) constraint = std::max(constraint, std::abs(n.value.constraint()));
    out.push_back(invariant_check("prlg_constraint", constraint, thresholds::invariant));
    for (int e = 0; e < 7; ++e)
        out.push_back(convergence_check(names[e], study_signed(steps, fam[e]), first.size(), thresholds::prlg_floor));
    if (dir) write_text(*dir, "prlg.csv", [&](std::ostream& os) { write_prlg_csv(os, first); });
    return out;
}

// ---------------------------------------------------------------- psi

std::vector<Check> run_psi(const RunConfig& cfg, const RunOptions& opt, const fs::path* dir) {
    std::vector<Check> out;
    const std::vector<double> steps = opt.steps.empty() ? cfg.psi.steps : opt.steps;
    PsiConfig pc;
    pc.params = cfg.params;
    pc.base_state = to_vec(cfg.initial_state);
    pc.grid = cfg.time_grid;
    pc.base_eta = cfg.psi.base_eta;
    pc.tol = cfg.integrator_tol;
    pc.clearance = cfg.clearance;
    pc.path_tol = cfg.path_tol;
    try {
        for (cplx x : cfg.psi.x.values()) pc.zeta.push_back(spectral_map(x));
        for (cplx y : cfg.psi.y.values()) pc.eta.push_back(spectral_map(y));
        validate_psi_config(pc);
    } catch (const std::exception& e) {
        throw ConfigError(cfg.source + ": psi: " + e.what());
    }
    PsiMutation mut;
    if (opt.mutation == "kappa") mut.kappa_shift = 0.1;
    if (opt.mutation == "s_det") mut.corrupt_s = true;
    if (opt.mutation == "g1_shift") mut.g1_shift = 1.0;

    FundamentalSolutionGrid g;
    try {
        g = build_Z_grid(pc, mut.corrupt_s);
    } catch (const std::exception& e) {
        out.push_back(error_check("psi_fundamental_solution", e));
        return out;
    }

    guarded(out, "psi_invariants", [&] {
        const PsiInvariants inv = psi_invariants(g);
        out.push_back(invariant_check("psi_det_z", inv.det_deviation, thresholds::det_z));
        out.push_back(invariant_check("psi_loop_path_independence", inv.loop_deviation, cfg.path_tol));
        out.push_back(invariant_check("psi_kernel_diagonal", inv.diagonal_identity, thresholds::kernel_identity));
        out.push_back(invariant_check("psi_kernel_inverse", inv.inverse_identity, thresholds::kernel_identity));
        out.push_back(invariant_check("psi_s_base", inv.s_base, thresholds::invariant));
        out.push_back(invariant_check("psi_s_order_swap", inv.s_order_swap, thresholds::s_order_swap));
        out.push_back(invariant_check("psi_gauge_associativity", inv.gauge_associativity, thresholds::gauge_relative));
        out.push_back(invariant_check("psi_gauge_roundtrip", inv.gauge_roundtrip, thresholds::gauge_relative));
    });

    guarded(out, "psi_kernel_swap_symmetry", [&] {
        // relabelling zeta <-> eta exchanges the two spectral slots of both kernel equations
        double worst = 0;
        for (int n = 0; n < g.config.grid.size(); ++n) {
            const TimeState ts{g.time(n), g.state(n)};
            for (cplx z : pc.zeta)
                for (cplx e : pc.eta) {
                    for (int j = 1; j <= 2; ++j) {
                        const PdeCoefficients a =
                            j == 1 ? kernel_tau1(z, e, ts, pc.params) : kernel_tau2(z, e, ts, pc.params);
                        const PdeCoefficients b =
                            j == 1 ? kernel_tau1(e, z, ts, pc.params) : kernel_tau2(e, z, ts, pc.params);
                        const double scale = 1.0 + std::max({std::abs(a.a1), std::abs(a.a2), std::abs(a.b1),
                                                             std::abs(a.b2), std::abs(a.g)});
                        worst = std::max({worst, std::abs(a.a1 - b.a2) / scale, std::abs(a.a2 - b.a1) / scale,
                                          std::abs(a.b1 - b.b2) / scale, std::abs(a.b2 - b.b1) / scale,
                                          std::abs(a.g - b.g) / scale});
                    }
                }
        }
        out.push_back(invariant_check("psi_kernel_swap_symmetry", worst, thresholds::invariant));
    });

    PsiResiduals res;
    try {
        res = psi_residuals(g, steps, mut);
    } catch (const std::exception& e) {
        out.push_back(error_check("psi_residuals", e));
        return out;
    }
    for (const auto& f : res.families)
        out.push_back(convergence_check("psi_" + f.id, f.study, f.keys.size(), thresholds::psi_floor, f.gating));
    if (dir) write_text(*dir, "psi_residuals.csv", [&](std::ostream& os) { write_psi_csv(os, g, res); });
    return out;
}

}  // namespace

Check invariant_check(const std::string& id, double value, double threshold, bool gating) {
    Check c;
    c.id = id;
    c.gating = gating;
    c.pass = value < threshold;
    c.detail = {{"kind", "invariant"}, {"value", value}, {"threshold", threshold}};
    return c;
}

Check convergence_check(const std::string& id, const ConvergenceStudy& s, std::size_t nodes, double max_floor,
                        bool gating) {
    Check c;
    c.id = id;
    c.gating = gating;
    c.pass = s.passes(thresholds::min_order, max_floor);
    c.detail = {{"kind", "convergence"},
                {"nodes", nodes},
                {"steps", steps_json(s.steps)},
                {"max_residual", s.max_residual},
                {"order", s.order},
                {"floor", s.floor},
                {"min_order", thresholds::min_order},
                {"max_floor", max_floor}};
    return c;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"flow", "lax-check", "prlg", "psi"};
    return names;
}

const std::vector<std::string>& mutations_for(const std::string& command) {
    static const std::vector<std::string> flow{"flow_sign"}, lax{"state_offset"}, prlg{"d_sign"},
        psi{"kappa", "s_det", "g1_shift"}, none;
    if (command == "flow") return flow;
    if (command == "lax-check") return lax;
    if (command == "prlg") return prlg;
    if (command == "psi") return psi;
    return none;
}

std::string git_blob_sha1(const std::string& bytes) {
    const std::string framed = "blob " + std::to_string(bytes.size()) + std::string(1, '\0') + bytes;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(framed.data()), framed.size(), digest);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char b : digest) {
        out += hex[b >> 4];
        out += hex[b & 15];
    }
    return out;
}

RunResult run_command(const std::string& command, const RunConfig& cfg, const RunOptions& opt) {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end()) throw ConfigError("unknown command " + command);
    if (!opt.mutation.empty()) {
        const auto& allowed = mutations_for(command);
        if (std::find(allowed.begin(), allowed.end(), opt.mutation) == allowed.end())
            throw ConfigError("mutation " + opt.mutation + " is not defined for " + command);
    }
    if (!opt.steps.empty()) {
        if (command == "flow") {
            if (opt.steps.size() < 2) throw ConfigError("--steps: at least two tolerances are needed");
            for (std::size_t k = 1; k < opt.steps.size(); ++k)
                if (!(opt.steps[k] < opt.steps[k - 1]) || !(opt.steps[k] > 0))
                    throw ConfigError("--steps: tolerances must be positive and decreasing");
        } else {
            check_steps_option(opt.steps, cfg.integrator_tol);
        }
    }

    std::optional<fs::path> dir;
    if (opt.write_files) {
        dir = fs::path(opt.out_dir.empty() ? cfg.output_dir : opt.out_dir);
        std::error_code ec;
        fs::create_directories(*dir, ec);
        if (ec) throw ConfigError("cannot create output directory " + dir->string() + ": " + ec.message());
    }
    const fs::path* d = dir ? &*dir : nullptr;

    std::vector<Check> checks;
    if (command == "flow") checks = run_flow(cfg, opt, d);
    if (command == "lax-check") checks = run_lax(cfg, opt, d);
    if (command == "prlg") checks = run_prlg(cfg, opt, d);
    if (command == "psi") checks = run_psi(cfg, opt, d);

    RunResult r;
    r.pass = true;
    json arr = json::array();
    int gating = 0, failed = 0;
    for (const Check& c : checks) {
        json j = c.detail;
        j["id"] = c.id;
        j["gating"] = c.gating;
        j["pass"] = c.pass;
        arr.push_back(j);
        if (c.gating) {
            ++gating;
            if (!c.pass) {
                ++failed;
                r.pass = false;
            }
        }
    }
    r.report = {
        {"command", command},
        {"mutation", opt.mutation.empty() ? json(nullptr) : json(opt.mutation)},
        {"generated_at", utc_now()},
        {"provenance",
         {{"config_hash", git_blob_sha1(cfg.raw)},
          {"config_source", cfg.source},
          {"tool_version", tool_version},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}}},
        {"parameters", params_to_json(cfg.params)},
        {"tolerances",
         {{"integrator", cfg.integrator_tol},
          {"flow", cfg.flow_tol},
          {"clearance", cfg.clearance},
          {"path", cfg.path_tol}}},
        {"checks", arr},
        {"summary", {{"checks", checks.size()}, {"gating", gating}, {"failed", failed}}},
        {"pass", r.pass},
    };
    if (d) write_text(*d, "report.json", [&](std::ostream& os) { os << r.report.dump(2) << '\n'; });
    return r;
}

json strip_timestamp(json report) {
    report.erase("generated_at");
    return report;
}

}  // namespace h221
