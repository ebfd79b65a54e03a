#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "gwp/design.hpp"
#include "gwp/evolve.hpp"
#include "gwp/oracle.hpp"
#include "gwp/scenario.hpp"
#include "gwp/trigger.hpp"

namespace gwp::cli {

using scenario::json;

enum ExitCode : int { ok = 0, usage = 1, schema = 2, infeasible = 3, numeric = 4, verification = 5 };

inline const char* category_name(int code) {
    switch (code) {
        case ok: return "ok";
        case usage: return "usage";
        case schema: return "schema";
        case infeasible: return "infeasible";
        case numeric: return "numeric";
        default: return "verification";
    }
}

// Error already classified with its exit code.
struct Failure : std::runtime_error {
    int code;
    std::string type;
    json details;
    Failure(int c, std::string t, const std::string& msg, json d = json::object())
        : std::runtime_error(msg), code(c), type(std::move(t)), details(std::move(d)) {}
};

struct Options {
    std::string command;
    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<double> tolerance;
    std::optional<std::uint64_t> seed;
};

enum class Stage { build, execute };

inline Failure classify(const std::exception& e, Stage stage) {
    if (auto f = dynamic_cast<const Failure*>(&e)) return *f;
    if (auto x = dynamic_cast<const scenario::SchemaError*>(&e))
        return {schema, "SchemaError", e.what(), {{"pointer", x->pointer}}};
    if (dynamic_cast<const json::exception*>(&e)) return {schema, "ParseError", e.what()};
    if (auto x = dynamic_cast<const InfeasibleTarget*>(&e))
        return {infeasible, "InfeasibleTarget", e.what(),
                {{"A0", x->A0}, {"B0", x->B0}, {"tan_omega_T", x->tan_omega_T}, {"n_o_sq", x->n_o_sq}}};
    if (dynamic_cast<const NoSolution*>(&e)) return {infeasible, "NoSolution", e.what()};
    if (auto x = dynamic_cast<const TruncationError*>(&e))
        return {numeric, "TruncationError", e.what(), {{"suggested_size", x->suggested_size}}};
    if (dynamic_cast<const StepSizeError*>(&e)) return {numeric, "StepSizeError", e.what()};
    if (dynamic_cast<const DomainEscape*>(&e)) return {numeric, "DomainEscape", e.what()};
    if (dynamic_cast<const NumericError*>(&e)) return {numeric, "NumericError", e.what()};
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return {usage, "FileSystemError", e.what()};
    if (dynamic_cast<const DomainError*>(&e)) {
        std::string type = "DomainError";
        if (dynamic_cast<const FocalSingularity*>(&e)) type = "FocalSingularity";
        else if (dynamic_cast<const ConstraintError*>(&e)) type = "ConstraintError";
        else if (dynamic_cast<const DegenerateGeometry*>(&e)) type = "DegenerateGeometry";
        else if (dynamic_cast<const SingularParameter*>(&e)) type = "SingularParameter";
        else if (dynamic_cast<const ModelDomainError*>(&e)) type = "ModelDomainError";
        // Bad values caught while loading count as schema errors; later they mean no solution.
        return {stage == Stage::build ? schema : infeasible, type, e.what()};
    }
    return {numeric, "Error", e.what()};
}

inline json error_record(const Failure& f) {
    return {{"exit_code", f.code},
            {"category", category_name(f.code)},
            {"type", f.type},
            {"message", f.what()},
            {"details", f.details}};
}

struct GridSettings {
    std::optional<std::size_t> points;
    std::optional<double> x_min, x_max;
    double max_dt = 0.002;
};

struct GridVerification {
    oracle::ComparisonReport report;
    UniformGrid grid;
};

namespace detail {
// The oracle's potential is c x^2 / 2, so a trap enters as c = m omega^2.
inline oracle::GridHamiltonian grid_hamiltonian(const PulseSegment& seg, double m) {
    oracle::GridHamiltonian H;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, InverseFreeSegment>) H.kinetic_sign = -1.0;
            if constexpr (std::is_same_v<T, HarmonicSegment> || std::is_same_v<T, InverseHarmonicSegment>)
                H.c = [k = m * x.omega * x.omega](double) { return k; };
            if constexpr (std::is_same_v<T, ForcedHarmonicSegment>) {
                H.c = [k = m * x.omega * x.omega](double) { return k; };
                H.f = [f = x.force](double t) { return f(t); };
            }
            if constexpr (std::is_same_v<T, GeneralQuadraticSegment>) {
                H.b = [q = x.coeffs](double t) { return q.b(t); };
                H.c = [q = x.coeffs](double t) { return q.c(t); };
                H.d = [q = x.coeffs](double t) { return q.d(t); };
                H.f = [q = x.coeffs](double t) { return q.f(t); };
            }
        },
        seg);
    return H;
}
}  // namespace detail

// Runs a schedule on the grid oracle from `initial` and compares with `analytic`.
// The analytic path sets the default domain and resolution.
inline GridVerification grid_verify(const std::vector<PulseSegment>& segs, const GaussianState& initial,
                                    const GaussianState& analytic, const GridSettings& gs = {}) {
    double total = 0;
    for (const auto& s : segs) total += physical_duration(s);
    const auto path = total > 0 ? evolve_schedule(segs, initial, FixedStep{total / 256.0})
                                : evolve_schedule(segs, initial);
    double lo = initial.x_center(), hi = lo, smax = 0, smin = std::numeric_limits<double>::infinity();
    for (const auto& s : path.states) {
        lo = std::min(lo, s.x_center());
        hi = std::max(hi, s.x_center());
        smax = std::max(smax, s.position_sigma());
        smin = std::min(smin, s.position_sigma());
    }
    // Twelve sigmas clear the sampler's coverage check with room to spare.
    UniformGrid g = oracle::default_grid(lo, hi, smax, smin, 12.0);
    const double x_min = gs.x_min.value_or(g.x_min), x_max = gs.x_max.value_or(g.x_max());
    if (!(x_max > x_min)) throw scenario::SchemaError("/verify", "x_max must exceed x_min");
    g = UniformGrid::spanning(x_min, x_max, gs.points.value_or(g.n));
    // An oracle that cannot be set up on this grid is a numeric failure, not an infeasible task.
    try {
        auto psi = oracle::grid_from_gaussian(initial, g);
        for (const auto& seg : segs)
            psi = oracle::grid_evolve_for(detail::grid_hamiltonian(seg, initial.mass()), psi, physical_duration(seg), gs.max_dt);
        return {oracle::compare(analytic, psi), g};
    } catch (const DomainError& e) {
        throw Failure(numeric, "OracleDomainError", e.what());
    }
}

namespace detail {

inline const char* task_command(const std::string& kind) {
    if (kind == "evolve") return "evolve";
    if (kind == "trigger") return "trigger";
    return "design";
}

inline double default_tolerance(const std::string& kind) {
    if (kind == "trigger") return 0.02;
    if (kind == "design_roundtrip") return 1e-6;
    return 1e-8;
}

// Everything a task needs once the scenario is loaded.
struct Context {
    json doc;
    std::string kind;
    double m = 1, hbar = 1;
    GaussianState initial{1, 1, 0, 0, 1, 0};
    bool verify = false;
    double tolerance = 0;
    double selectivity_tolerance = 1e-10;
    std::uint64_t seed = 0;
    int precision = 17;
    json verify_cfg = json::object();
    std::vector<PulseSegment> segments;  // evolve tasks only
};

struct Outcome {
    json result = json::object();
    std::optional<Trajectory> trajectory;
    bool verified_ok = true;
    std::string verify_message;
};

// Grid-oracle cross-check rendered as a result record.
inline json grid_check(const Context& c, const std::vector<PulseSegment>& segs, const GaussianState& analytic,
                       bool& passed) {
    GridSettings gs;
    if (c.verify_cfg.contains("grid_points")) gs.points = c.verify_cfg["grid_points"].get<std::size_t>();
    if (c.verify_cfg.contains("x_min")) gs.x_min = c.verify_cfg["x_min"].get<double>();
    if (c.verify_cfg.contains("x_max")) gs.x_max = c.verify_cfg["x_max"].get<double>();
    gs.max_dt = c.verify_cfg.value("max_dt", gs.max_dt);
    const auto v = grid_verify(segs, c.initial, analytic, gs);
    const auto& rep = v.report;
    const auto& g = v.grid;
    const double max_dt = gs.max_dt;
    const double infid = 1.0 - rep.fidelity;
    passed = infid <= c.tolerance;
    json j{{"l2_error", rep.l2_error},
           {"fidelity", rep.fidelity},
           {"infidelity", infid},
           {"fitted_state", scenario::state_to_json(rep.fitted.state)},
           {"fit_residual", rep.fitted.residual},
           {"d_x_center", rep.d_x_center},
           {"d_mean_momentum", rep.d_mean_momentum},
           {"d_delta_sq", rep.d_delta_sq},
           {"d_tw", rep.d_tw},
           {"grid", {{"points", g.n}, {"x_min", g.x_min}, {"x_max", g.x_max()}, {"max_dt", max_dt}}},
           {"tolerance", c.tolerance},
           {"passed", passed}};
    if (rep.fitted.warning) j["fit_warning"] = *rep.fitted.warning;
    return j;
}

inline json segments_to_json(const std::vector<PulseSegment>& segs) {
    json a = json::array();
    for (const auto& s : segs) a.push_back(scenario::segment_to_json(s));
    return a;
}

inline SnapshotRule snapshot_rule(const Context& c) {
    const auto& out = c.doc.value("output", json::object());
    if (out.contains("snapshots") && out["snapshots"]["rule"] == "fixed_step")
        return FixedStep{out["snapshots"]["dt"].get<double>()};
    return PerSegment{};
}

inline bool wants_trajectory(const Context& c) {
    const auto& out = c.doc.value("output", json::object());
    return out.contains("snapshots") && out["snapshots"]["rule"] != "none";
}

// Shared tail of every schedule-based task.
inline void run_schedule(const Context& c, const std::vector<PulseSegment>& segs, Outcome& o) {
    auto tr = evolve_schedule(segs, c.initial, snapshot_rule(c));
    const auto& fin = tr.final_state();
    o.result["final_state"] = scenario::state_to_json(fin);
    o.result["final_state_derived"] = scenario::derived_to_json(fin);
    o.result["schedule"] = {{"segment_count", segs.size()}, {"boundaries", tr.boundaries}};
    if (c.verify) {
        bool passed = false;
        o.result["verification"] = grid_check(c, segs, fin, passed);
        if (!passed) {
            o.verified_ok = false;
            o.verify_message = "grid oracle infidelity above tolerance";
        }
    }
    if (wants_trajectory(c)) o.trajectory = std::move(tr);
}

inline Outcome task_evolve(const Context& c) {
    Outcome o;
    run_schedule(c, c.segments, o);
    return o;
}

inline Outcome task_design_linewidth(const Context& c) {
    Outcome o;
    const auto& t = c.doc["task"];
    const double w = t["omega"].get<double>();
    const design::LinewidthTarget target{t["target"]["delta_y_sq"].get<double>(), t["target"]["tw"].get<double>()};
    // The initial state supplies the starting linewidth and its imaginary part.
    const auto sol = design::solve_two_pulse(target, c.initial.delta_sq(), w, c.initial.tw(), c.m, c.hbar);
    o.result["solution"] = {{"omega", sol.omega},     {"T", sol.T},
                            {"omega_o", sol.omega_o}, {"T_o", sol.T_o},
                            {"A0", sol.A0},           {"B0", sol.B0},
                            {"n_o", sol.n_o},         {"branch", sol.branch},
                            {"achieved_delta_y_sq", sol.achieved_delta_y_sq},
                            {"achieved_tw", sol.achieved_tw}};
    const std::vector<PulseSegment> segs{HarmonicSegment{sol.omega, sol.T}, HarmonicSegment{sol.omega_o, sol.T_o}};
    o.result["segments"] = segments_to_json(segs);
    run_schedule(c, segs, o);
    return o;
}

inline Outcome task_design_inverse_free(const Context& c) {
    Outcome o;
    const auto& t = c.doc["task"];
    const double T = t["T"].get<double>(), w1 = t["omega1"].get<double>(), w2 = t["omega2"].get<double>();
    const auto br = t.value("branch", std::string("upper")) == "upper" ? SandwichBranch::upper : SandwichBranch::lower;
    const auto sol = inverse_free_sandwich(T, w1, w2, br);
    const std::vector<PulseSegment> segs{HarmonicSegment{w2, sol.T2}, FreeSegment{T}, HarmonicSegment{w1, sol.T1}};
    const auto built = compose_schedule(segs, c.m, c.hbar);
    const double flow_error = (built.flow() - inverse_free_direct(T, c.m, c.hbar).flow()).cwiseAbs().maxCoeff();
    o.result["solution"] = {{"T1", sol.T1},
                            {"T2", sol.T2},
                            {"branch", br == SandwichBranch::upper ? "upper" : "lower"},
                            {"flow_error", flow_error}};
    o.result["segments"] = segments_to_json(segs);
    run_schedule(c, segs, o);
    return o;
}

inline Outcome task_design_quarter_period(const Context& c) {
    Outcome o;
    const auto& t = c.doc["task"];
    const double w = t["omega"].get<double>(), wc = t["omega_c"].get<double>();
    const auto plan = design::quarter_period_resize(w, wc, c.m, c.hbar, t.value("k", 0));
    const double ground = c.hbar / (2.0 * c.m * w);
    o.result["solution"] = {{"T_c", plan.T_c},
                            {"new_delta_sq", plan.new_delta_sq},
                            {"initial_is_ground", std::abs(c.initial.delta_sq() - ground) <= 1e-12 * ground &&
                                                      c.initial.tw() == 0.0}};
    const std::vector<PulseSegment> segs{HarmonicSegment{wc, plan.T_c}};
    o.result["segments"] = segments_to_json(segs);
    run_schedule(c, segs, o);
    return o;
}

// Random feasible targets produced by forward design, then solved back.
inline Outcome task_design_roundtrip(const Context& c) {
    Outcome o;
    const auto& t = c.doc["task"];
    const int draws = t["draws"].get<int>();
    const double w = t.value("omega", 1.0);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    json records = json::array();
    double worst_dy = 0, worst_tw = 0, worst_infid = 0;
    bool all_passed = true;
    for (int k = 0; k < draws;) {
        const double wT = 0.1 + 2.9 * u(rng), n = 0.2 + 4.0 * u(rng);
        if (std::abs(wT - 0.5 * pi) < 0.05) continue;
        double woTo = std::atan(n / std::tan(wT));
        if (woTo <= 0) woTo += pi;
        const auto target = design::forward_two_pulse(w, wT / w, n * w, woTo / (n * w), c.initial.delta_sq(),
                                                      c.initial.tw(), c.m, c.hbar);
        const auto sol = design::solve_two_pulse(target, c.initial.delta_sq(), w, c.initial.tw(), c.m, c.hbar);
        const double e_dy = std::abs(sol.achieved_delta_y_sq - target.delta_y_sq) / target.delta_y_sq;
        const double e_tw = std::abs(sol.achieved_tw - target.tw);
        worst_dy = std::max(worst_dy, e_dy);
        worst_tw = std::max(worst_tw, e_tw);
        json r{{"target", {{"delta_y_sq", target.delta_y_sq}, {"tw", target.tw}}},
               {"solution", {{"T", sol.T}, {"omega_o", sol.omega_o}, {"T_o", sol.T_o}, {"branch", sol.branch}}},
               {"rel_error_delta_y_sq", e_dy},
               {"abs_error_tw", e_tw}};
        if (c.verify) {
            const std::vector<PulseSegment> segs{HarmonicSegment{w, sol.T}, HarmonicSegment{sol.omega_o, sol.T_o}};
            bool passed = false;
            const auto fin = evolve_schedule(segs, c.initial).final_state();
            auto v = grid_check(c, segs, fin, passed);
            worst_infid = std::max(worst_infid, v["infidelity"].get<double>());
            all_passed = all_passed && passed;
            r["verification"] = std::move(v);
        }
        records.push_back(std::move(r));
        ++k;
    }
    o.result["seed"] = c.seed;
    o.result["draws"] = std::move(records);
    o.result["max_rel_error_delta_y_sq"] = worst_dy;
    o.result["max_abs_error_tw"] = worst_tw;
    if (c.verify) {
        o.result["verification"] = {{"max_infidelity", worst_infid}, {"tolerance", c.tolerance}, {"passed", all_passed}};
        if (!all_passed) {
            o.verified_ok = false;
            o.verify_message = "grid oracle infidelity above tolerance for at least one draw";
        }
    }
    return o;
}

inline Outcome task_trigger(const Context& c) {
    using namespace trigger;
    Outcome o;
    const auto& t = c.doc["task"];
    const auto& dj = t["drive"];
    const MatchedDrive d{dj["alpha"].get<double>(), dj.value("gamma", 0.0), dj["rabi"].get<double>(),
                         dj.value("k_sum", 0.0), dj["k_diff"].get<double>()};
    const auto& pj = t["program"];
    const double dt = pj["dt"].get<double>();
    const int segments = pj.value("segments", 1);
    const auto prog = compile_Q_sequence(d, dt, parse_q_variant(pj["variant"].get<std::string>()), segments);
    const FockBasis basis(t["fock_size"].get<std::size_t>(), c.m, c.hbar, t["trap_omega"].get<double>());

    // First-order kick of the g0 branch; e gets the opposite sign and g1 none.
    const double p0 = kick_momentum(d.rabi, d.k_diff, dt, c.hbar) * std::sin(2.0 * d.alpha);
    const bool at_rest = c.initial.x_center() == 0.0 && c.initial.mean_momentum() == 0.0;
    json records = json::array();
    bool passed = true;
    for (const auto& name : t["branches"]) {
        const Level lv = scenario::level_from_string(name.get<std::string>());
        const auto r = apply_trigger(prog, lv, c.initial, basis);
        const double sign = lv == Level::g0 ? 1.0 : lv == Level::e ? -1.0 : 0.0;
        const double expected_p = c.initial.mean_momentum() + sign * p0;
        json pops = json::object(), moments = json::object();
        for (std::size_t l = 0; l < level_count; ++l) {
            const char* key = scenario::level_name(Level(l));
            pops[key] = r.branches[l].population;
            moments[key] = {{"mean_position", r.branches[l].mean_position},
                            {"mean_momentum", r.branches[l].mean_momentum}};
        }
        json rec{{"branch", name},
                 {"dominant", scenario::level_name(r.dominant)},
                 {"populations", pops},
                 {"moments", moments},
                 {"final_state", scenario::state_to_json(r.fit.state)},
                 {"fit_residual", r.fit.residual},
                 {"fitted_energy", r.fitted_energy},
                 {"initial_overlap", r.initial_overlap},
                 {"expected_mean_momentum", expected_p}};
        if (at_rest) rec["expected_energy"] = sign * sign * p0 * p0 / (2.0 * c.m);
        if (r.fit.warning) rec["fit_warning"] = *r.fit.warning;
        if (c.verify) {
            json v;
            bool ok = true;
            if (lv == Level::g1) {
                v["infidelity"] = 1.0 - r.initial_overlap;
                v["tolerance"] = c.selectivity_tolerance;
                ok = 1.0 - r.initial_overlap <= c.selectivity_tolerance;
            } else {
                const double scale = std::max(std::abs(p0), std::numeric_limits<double>::min());
                const double err = std::abs(r.fit.state.mean_momentum() - expected_p) / scale;
                v["kick_rel_error"] = err;
                v["tolerance"] = c.tolerance;
                ok = err <= c.tolerance;
                if (at_rest) {
                    const double want = p0 * p0 / (2.0 * c.m);
                    const double e_err = std::abs(r.fitted_energy - want) / std::max(want, std::numeric_limits<double>::min());
                    v["energy_rel_error"] = e_err;
                    ok = ok && e_err <= c.tolerance;
                }
            }
            v["passed"] = ok;
            passed = passed && ok;
            rec["verification"] = std::move(v);
        }
        records.push_back(std::move(rec));
    }
    o.result["program"] = {{"label", prog.label},
                           {"steps", prog.steps.size()},
                           {"error_exponent", prog.error_exponent},
                           {"realizable", prog.realizable()}};
    o.result["kick_momentum"] = p0;
    o.result["branches"] = std::move(records);
    if (c.verify && !passed) {
        o.verified_ok = false;
        o.verify_message = "trigger branch outside tolerance";
    }
    return o;
}

inline void write_trajectory(const std::filesystem::path& p, const Trajectory& tr, int precision) {
    std::ofstream f(p);
    if (!f) throw std::filesystem::filesystem_error("cannot write trajectory", p, std::make_error_code(std::errc::io_error));
    f << "t,x_center,mean_momentum,delta_sq,tw,phase\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const auto& s = tr.states[k];
        f << scenario::format_number(tr.times[k], precision) << ',' << scenario::format_number(s.x_center(), precision)
          << ',' << scenario::format_number(s.mean_momentum(), precision) << ','
          << scenario::format_number(s.delta_sq(), precision) << ',' << scenario::format_number(s.tw(), precision)
          << ',' << (s.global_phase() ? scenario::format_number(*s.global_phase(), precision) : "") << '\n';
    }
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
    if (!f) throw std::filesystem::filesystem_error("cannot write result", p, std::make_error_code(std::errc::io_error));
}

}  // namespace detail

// Loads, validates and runs one scenario. Diagnostics go to `err`, summaries to `out`.
inline int run_scenario(const Options& opt, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    json doc_out{{"format", "gwp-result"}, {"version", scenario::format_version}, {"command", opt.command}};
    std::string result_name = "result.json";
    int precision = 17;
    bool out_ready = false;
    Stage stage = Stage::build;

    auto fail = [&](const Failure& f) {
        doc_out["status"] = "error";
        doc_out["error"] = error_record(f);
        err << scenario::to_text(json{{"error", doc_out["error"]}}, precision);
        if (out_ready) {
            try {
                detail::write_text(fs::path(opt.out_dir) / result_name, scenario::to_text(doc_out, precision));
            } catch (const std::exception&) {
            }
        }
        return f.code;
    };

    try {
        std::ifstream in(opt.scenario_path);
        if (!in) throw Failure(usage, "UsageError", "cannot read scenario file " + opt.scenario_path);
        detail::Context c;
        try {
            c.doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw Failure(schema, "ParseError", e.what());
        }
        scenario::validate(c.doc);
        c.kind = c.doc["task"]["kind"].get<std::string>();
        doc_out["task"] = c.kind;
        const auto output = c.doc.value("output", json::object());
        result_name = output.value("result_file", result_name);
        precision = c.precision = output.value("precision", 17);
        if (opt.command != "verify" && opt.command != detail::task_command(c.kind))
            throw Failure(usage, "UsageError",
                          "task kind " + c.kind + " needs the " + detail::task_command(c.kind) + " or verify command");

        fs::create_directories(opt.out_dir);
        out_ready = true;

        c.m = c.doc["units"]["mass"].get<double>();
        c.hbar = c.doc["units"]["hbar"].get<double>();
        c.initial = scenario::state_from_json(c.doc["initial_state"], c.m, c.hbar);
        c.verify = opt.command == "verify";
        c.verify_cfg = c.doc.value("verify", json::object());
        c.tolerance = opt.tolerance.value_or(c.verify_cfg.value("tolerance", detail::default_tolerance(c.kind)));
        c.selectivity_tolerance = c.verify_cfg.value("selectivity_tolerance", 1e-10);
        c.seed = opt.seed.value_or(c.doc.value("seed", std::uint64_t(0)));
        if (c.kind == "evolve")
            for (const auto& seg : c.doc["task"]["segments"]) c.segments.push_back(scenario::segment_from_json(seg));
        if (opt.tolerance && !(*opt.tolerance > 0.0)) throw Failure(usage, "UsageError", "--tolerance must be positive");

        stage = Stage::execute;
        detail::Outcome o;
        if (c.kind == "evolve") o = detail::task_evolve(c);
        else if (c.kind == "design_linewidth") o = detail::task_design_linewidth(c);
        else if (c.kind == "design_inverse_free") o = detail::task_design_inverse_free(c);
        else if (c.kind == "design_quarter_period") o = detail::task_design_quarter_period(c);
        else if (c.kind == "design_roundtrip") o = detail::task_design_roundtrip(c);
        else o = detail::task_trigger(c);

        doc_out["initial_state"] = scenario::state_to_json(c.initial);
        doc_out["units"] = c.doc["units"];
        doc_out["result"] = std::move(o.result);
        if (o.trajectory) {
            const std::string traj = output.value("trajectory_file", std::string("trajectory.csv"));
            detail::write_trajectory(fs::path(opt.out_dir) / traj, *o.trajectory, precision);
            doc_out["trajectory_file"] = traj;
        }
        if (!o.verified_ok) return fail(Failure(verification, "VerificationFailure", o.verify_message));
        doc_out["status"] = "ok";
        detail::write_text(fs::path(opt.out_dir) / result_name, scenario::to_text(doc_out, precision));
        out << opt.command << ": ok, wrote " << (fs::path(opt.out_dir) / result_name).string() << "\n";
        return ok;
    } catch (const std::exception& e) {
        return fail(classify(e, stage));
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Gaussian wave packet scenario runner"};
    app.require_subcommand(1);
    Options opt;
    double tol = 0;
    std::uint64_t seed = 0;
    const std::vector<std::pair<const char*, const char*>> runners{
        {"evolve", "run an evolve scenario"},
        {"design", "run a design scenario"},
        {"trigger", "run a trigger scenario"},
        {"verify", "run any scenario and check it against an independent oracle"}};
    for (const auto& [name, help] : runners) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--scenario", opt.scenario_path, "scenario file")->required();
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--tolerance", tol, "override the verification threshold");
        sub->add_option("--seed", seed, "seed for randomized scenarios");
    }
    app.add_subcommand("schema", "print the scenario schema");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return ok;
        }
        const Failure f(usage, "UsageError", e.what());
        err << scenario::to_text(json{{"error", error_record(f)}});
        return usage;
    }
    auto* sub = app.get_subcommands().front();
    opt.command = sub->get_name();
    if (opt.command == "schema") {
        out << scenario::schema_text() << "\n";
        return ok;
    }
    if (sub->count("--tolerance")) opt.tolerance = tol;
    if (sub->count("--seed")) opt.seed = seed;
    return run_scenario(opt, out, err);
}

}  // namespace gwp::cli
