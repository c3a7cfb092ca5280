#include "accretive/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <set>

#include "accretive/error.hpp"
#include "accretive/io.hpp"
#include "accretive/resolvent.hpp"

namespace accretive {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{"ab_l1",   "pointwise_ab", "contraction",       "complete_regularity",
                                                "scaling", "smoothing",    "resolvent_scaling", "dtn_bessel"};
    return names;
}

namespace {

bool is_trajectory_check(const std::string& c) {
    return c != "resolvent_scaling" && c != "dtn_bessel";
}

bool wants(const ExperimentConfig& cfg, const char* check) {
    return std::find(cfg.checks.begin(), cfg.checks.end(), check) != cfg.checks.end();
}

bool needs_trajectory(const ExperimentConfig& cfg) {
    return std::any_of(cfg.checks.begin(), cfg.checks.end(), is_trajectory_check);
}

void parse_require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::config_parse, what);
}

double number(const json& j, const char* what) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return kInfinity;
    }
    parse_require(j.is_number(), std::string(what) + " must be a number or \"inf\"");
    return j.get<double>();
}

json number_json(double x) { return std::isinf(x) ? json("inf") : json(x); }

std::vector<double> number_list(const json& j, const char* what) {
    parse_require(j.is_array(), std::string(what) + " must be an array");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number(x, what));
    return out;
}

template <class T>
T field(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::config_parse, std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    parse_require(j.is_object(), "config must be a JSON object");
    static const std::set<std::string> allowed{"name",     "operator",     "perturbation", "initial",
                                               "forcing",  "horizon",      "steps",        "h_sweep",
                                               "q",        "checks",       "solver",       "seed",
                                               "output",   "scaling_lambda", "pair_offset", "smoothing_q",
                                               "window",   "resolvent_samples"};
    for (const auto& [k, v] : j.items())
        parse_require(allowed.count(k) > 0, "unknown config field '" + k + "'");
    parse_require(j.contains("operator"), "config needs an 'operator'");

    ExperimentConfig c;
    c.name = field(j, "name", c.name);
    c.op = io::operator_spec_from_json(j.at("operator"));
    if (j.contains("perturbation")) c.perturbation = io::perturbation_from_json(j.at("perturbation"));
    if (j.contains("initial")) {
        const auto& i = j.at("initial");
        parse_require(i.is_object(), "initial must be an object");
        c.initial.preset = field(i, "preset", c.initial.preset);
        c.initial.amplitude = field(i, "amplitude", c.initial.amplitude);
        c.initial.center = field(i, "center", c.initial.center);
        c.initial.width = field(i, "width", c.initial.width);
        c.initial.lo = field(i, "lo", c.initial.lo);
        c.initial.hi = field(i, "hi", c.initial.hi);
        c.initial.signed_values = field(i, "signed", c.initial.signed_values);
        c.initial.offset = field(i, "offset", c.initial.offset);
        static const std::set<std::string> presets{"bump", "constant", "random", "indicator"};
        parse_require(presets.count(c.initial.preset) > 0, "unknown initial preset '" + c.initial.preset + "'");
    }
    if (j.contains("forcing")) {
        const auto& f = j.at("forcing");
        parse_require(f.is_object(), "forcing must be an object");
        if (f.contains("breakpoints")) c.forcing.breakpoints = number_list(f.at("breakpoints"), "breakpoints");
        if (f.contains("levels")) c.forcing.levels = number_list(f.at("levels"), "levels");
        if (f.contains("plateaus"))
            for (const auto& p : f.at("plateaus")) c.forcing.plateaus.push_back(number_list(p, "plateau"));
    }
    c.horizon = field(j, "horizon", c.horizon);
    c.steps = field(j, "steps", c.steps);
    if (j.contains("h_sweep")) c.h_sweep = number_list(j.at("h_sweep"), "h_sweep");
    if (j.contains("q")) c.qs = number_list(j.at("q"), "q");
    c.checks = field(j, "checks", c.checks);
    for (const auto& name : c.checks)
        parse_require(std::find(known_checks().begin(), known_checks().end(), name) != known_checks().end(),
                      "unknown check '" + name + "'");
    if (j.contains("solver")) c.solver = io::solver_config_from_json(j.at("solver"));
    c.seed = field(j, "seed", c.seed);
    c.output = field(j, "output", c.output);
    c.scaling_lambda = field(j, "scaling_lambda", c.scaling_lambda);
    c.pair_offset = field(j, "pair_offset", c.pair_offset);
    if (j.contains("smoothing_q")) c.smoothing_q = number(j.at("smoothing_q"), "smoothing_q");
    if (j.contains("window")) {
        const auto& w = j.at("window");
        c.window.t_lo = field(w, "t_lo", c.window.t_lo);
        c.window.t_hi = field(w, "t_hi", c.window.t_hi);
        c.window.samples = field(w, "samples", c.window.samples);
    }
    c.resolvent_samples = field(j, "resolvent_samples", c.resolvent_samples);

    parse_require(c.horizon > 0.0, "horizon must be positive");
    parse_require(c.steps >= 1, "steps must be >= 1");
    parse_require(c.scaling_lambda > 0.0, "scaling_lambda must be positive");
    for (double h : c.h_sweep) parse_require(h > 0.0, "h_sweep entries must be positive");
    for (double q : c.qs) parse_require(q >= 1.0, "q entries must be >= 1");
    return c;
}

json to_json(const ExperimentConfig& c) {
    json qs = json::array();
    for (double q : c.qs) qs.push_back(number_json(q));
    json forcing{{"breakpoints", c.forcing.breakpoints}, {"levels", c.forcing.levels}};
    if (!c.forcing.plateaus.empty()) forcing["plateaus"] = c.forcing.plateaus;
    return json{{"name", c.name},
                {"operator", io::to_json(c.op)},
                {"perturbation", io::to_json(c.perturbation)},
                {"initial",
                 {{"preset", c.initial.preset},
                  {"amplitude", c.initial.amplitude},
                  {"center", c.initial.center},
                  {"width", c.initial.width},
                  {"lo", c.initial.lo},
                  {"hi", c.initial.hi},
                  {"signed", c.initial.signed_values},
                  {"offset", c.initial.offset}}},
                {"forcing", forcing},
                {"horizon", c.horizon},
                {"steps", c.steps},
                {"h_sweep", c.h_sweep},
                {"q", qs},
                {"checks", c.checks},
                {"solver", io::to_json(c.solver)},
                {"seed", c.seed},
                {"output", c.output},
                {"scaling_lambda", c.scaling_lambda},
                {"pair_offset", c.pair_offset},
                {"smoothing_q", number_json(c.smoothing_q)},
                {"window", {{"t_lo", c.window.t_lo}, {"t_hi", c.window.t_hi}, {"samples", c.window.samples}}},
                {"resolvent_samples", c.resolvent_samples}};
}

ExperimentConfig load_config(const fs::path& path) { return config_from_json(io::read_json(path)); }

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_json(cfg).dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"scalar-power-ab", "plaplacian-forced", "porous-medium-smoothing",
                                                "sign-flow",       "perturbed-arctan",  "dtn-bessel"};
    return names;
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    if (name == "scalar-power-ab") {
        c.op.kind = OperatorKind::scalar_power;
        c.op.alpha = 2.0;
        c.initial.preset = "constant";
        c.horizon = 1.0;
        c.steps = 1000;
        c.checks = {"ab_l1", "pointwise_ab", "contraction", "complete_regularity", "scaling", "resolvent_scaling"};
    } else if (name == "plaplacian-forced") {
        c.op.kind = OperatorKind::plaplacian_1d;
        c.op.p = 3.0;
        c.op.n = 64;
        c.forcing.breakpoints = {0.0, 0.5, 1.0};
        c.forcing.levels = {0.0, 0.5};
        c.horizon = 1.0;
        c.steps = 500;
        c.checks = {"ab_l1", "contraction", "scaling", "resolvent_scaling"};
    } else if (name == "porous-medium-smoothing") {
        c.op.kind = OperatorKind::porous_medium_1d;
        c.op.m = 2.0;
        c.op.n = 199;
        c.initial.preset = "bump";
        c.initial.width = 0.03;
        c.initial.amplitude = 1.6;
        c.horizon = 0.1;
        c.steps = 2000;
        c.h_sweep = {1e-2, 1e-3};
        c.checks = {"ab_l1", "pointwise_ab", "smoothing"};
    } else if (name == "sign-flow") {
        c.op.kind = OperatorKind::zero_order_sign;
        c.op.n = 16;
        c.initial.preset = "random";
        c.initial.signed_values = true;
        c.seed = 7;
        c.horizon = 1.0;
        c.steps = 1000;
        c.checks = {"ab_l1", "contraction", "scaling", "resolvent_scaling"};
    } else if (name == "perturbed-arctan") {
        c.op.kind = OperatorKind::plaplacian_1d;
        c.op.p = 3.0;
        c.op.n = 32;
        c.perturbation = Perturbation::scaled_arctan(0.5);
        c.forcing.breakpoints = {0.0, 0.5, 1.0};
        c.forcing.levels = {0.2, -0.2};
        c.horizon = 1.0;
        c.steps = 500;
        c.checks = {"ab_l1", "contraction"};
    } else if (name == "dtn-bessel") {
        c.op.kind = OperatorKind::dirichlet_to_neumann;
        c.op.p = 2.0;
        c.op.m = 1.0;
        c.op.mesh = {32, 64, 1.0};
        c.initial.preset = "constant";
        c.checks = {"dtn_bessel"};
    } else {
        throw Error(ErrorKind::config_parse, "unknown preset '" + name + "'");
    }
    return c;
}

namespace {

/// Normalized node coordinates for the initial-data presets.
std::vector<std::array<double, 2>> node_positions(const OperatorInstance& op) {
    const auto& s = op.spec();
    const std::size_t n = op.space()->size();
    std::vector<std::array<double, 2>> pos(n);
    switch (s.kind) {
        case OperatorKind::scalar_power: pos[0] = {0.5, 0.5}; break;
        case OperatorKind::plaplacian_2d: {
            const double L = (s.n + 1) * op.h();
            for (std::size_t j = 0; j < s.n; ++j)
                for (std::size_t i = 0; i < s.n; ++i) pos[j * s.n + i] = {(i + 1) * op.h() / L, (j + 1) * op.h() / L};
            break;
        }
        case OperatorKind::dirichlet_to_neumann:
            for (std::size_t j = 0; j < n; ++j) pos[j] = {static_cast<double>(j) / n, 0.5};
            break;
        default: {
            const double L = (n + 1) * op.h();
            for (std::size_t i = 0; i < n; ++i) pos[i] = {(i + 1) * op.h() / L, 0.5};
        }
    }
    return pos;
}

}  // namespace

State make_initial(const InitialSpec& spec, const OperatorInstance& op, std::uint64_t seed) {
    const auto pos = node_positions(op);
    const bool two_d = op.kind() == OperatorKind::plaplacian_2d;
    const bool periodic = op.kind() == OperatorKind::dirichlet_to_neumann;
    std::vector<double> v(pos.size(), 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < pos.size(); ++i) {
        double d = std::abs(pos[i][0] - spec.center);
        if (periodic) d = std::min(d, 1.0 - d);
        if (two_d) d = std::hypot(pos[i][0] - spec.center, pos[i][1] - spec.center);
        double x = 0.0;
        if (spec.preset == "bump") {
            if (op.kind() == OperatorKind::scalar_power) {
                x = spec.amplitude;
            } else if (d < spec.width) {
                const double c = std::cos(0.5 * std::numbers::pi * d / spec.width);
                x = spec.amplitude * c * c;
            }
        } else if (spec.preset == "constant") {
            x = spec.amplitude;
        } else if (spec.preset == "random") {
            const double r = unit(rng);
            x = spec.amplitude * (spec.signed_values ? 2.0 * r - 1.0 : r);
        } else if (spec.preset == "indicator") {
            const bool inside = two_d ? (pos[i][0] >= spec.lo && pos[i][0] <= spec.hi && pos[i][1] >= spec.lo &&
                                         pos[i][1] <= spec.hi)
                                      : (pos[i][0] >= spec.lo && pos[i][0] <= spec.hi);
            x = inside ? spec.amplitude : 0.0;
        } else {
            throw Error(ErrorKind::config_parse, "unknown initial preset '" + spec.preset + "'");
        }
        v[i] = x + spec.offset;
    }
    return State(op.space(), std::move(v));
}

StepForcing make_forcing(const ForcingSpec& spec, const OperatorInstance& op, double horizon) {
    std::vector<double> b = spec.breakpoints;
    if (b.empty()) b = {0.0, horizon};
    const std::size_t n_int = b.size() - 1;
    std::vector<State> plateaus;
    if (!spec.plateaus.empty()) {
        parse_require(spec.plateaus.size() == n_int, "forcing needs one plateau per interval");
        for (const auto& p : spec.plateaus) plateaus.emplace_back(op.space(), p);
    } else {
        parse_require(spec.levels.empty() || spec.levels.size() == n_int, "forcing needs one level per interval");
        for (std::size_t i = 0; i < n_int; ++i)
            plateaus.push_back(State::constant(op.space(), spec.levels.empty() ? 0.0 : spec.levels[i]));
    }
    return StepForcing(std::move(b), std::move(plateaus));
}

double dtn_bessel_oracle(double m, double radius) {
    const double k = std::sqrt(m);
    return k * std::cyl_bessel_i(1.0, k * radius) / std::cyl_bessel_i(0.0, k * radius);
}

void simulate(const ExperimentConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    const std::string hash = config_hash(cfg);
    io::write_json(dir / "config.json", to_json(cfg));
    if (!needs_trajectory(cfg)) return;

    auto op = make_operator(cfg.op);
    const State u0 = make_initial(cfg.initial, *op, cfg.seed);
    const StepForcing f = make_forcing(cfg.forcing, *op, cfg.horizon);
    io::write_state_csv(dir / "initial.csv", u0);

    Trajectory tr = evolve(op, cfg.perturbation, u0, f, cfg.horizon, cfg.steps, cfg.solver);
    tr.label = cfg.name;
    io::write_trajectory_json(dir / "trajectory.json", tr, hash);
    io::write_trajectory_csv(dir / "trajectory.csv", tr);

    if (wants(cfg, "contraction")) {
        InitialSpec noise;
        noise.preset = "random";
        noise.amplitude = cfg.pair_offset;
        const State u1 = u0 + make_initial(noise, *op, cfg.seed + 1);
        Trajectory pair = evolve(op, cfg.perturbation, u1, f, cfg.horizon, cfg.steps, cfg.solver);
        pair.label = cfg.name + "-pair";
        io::write_trajectory_json(dir / "pair.json", pair, hash);
    }
    if (wants(cfg, "pointwise_ab")) {
        bool nonneg = true;
        for (double x : u0.values) nonneg = nonneg && x >= 0.0;
        if (nonneg) io::write_trajectory_json(dir / "probe.json", order_probe(tr), hash);
    }
    if (wants(cfg, "scaling")) io::write_trajectory_json(dir / "scaled.json", scaled_run(tr, cfg.scaling_lambda), hash);
}

namespace {

EstimateReport dtn_bessel_report(const ExperimentConfig& cfg) {
    EstimateReport rep;
    rep.check_id = "dtn_bessel";
    auto op = make_operator(cfg.op);
    if (op->kind() != OperatorKind::dirichlet_to_neumann)
        throw Error(ErrorKind::kind_unsupported, "dtn_bessel needs a DirichletToNeumann operator");
    rep.add_input("operator", op->describe());
    if (op->spec().p != 2.0) {
        rep.skipped = true;
        rep.notes.push_back("the Bessel oracle covers p = 2 only");
        rep.finalize();
        return rep;
    }
    const double expect = dtn_bessel_oracle(op->spec().m, op->spec().mesh.radius);
    const State g = dtn_apply(*op, State::constant(op->space(), 1.0), cfg.solver);
    double worst = 0.0;
    for (double x : g.values) worst = std::max(worst, std::abs(x - expect) / expect);
    rep.add_input("oracle", expect);
    rep.add_hard(0.0, 0.0, kInfinity, worst, 0.02);
    rep.notes.push_back("mean response " + io::format_double(lq_norm(g, 1.0) / op->space()->total_weight()) +
                        ", oracle " + io::format_double(expect));
    rep.finalize();
    return rep;
}

EstimateReport resolvent_report(const ExperimentConfig& cfg, std::vector<io::ResolventRow>& rows) {
    EstimateReport rep;
    rep.check_id = "resolvent_scaling";
    auto op = make_operator(cfg.op);
    rep.add_input("operator", op->describe());
    std::mt19937_64 rng(cfg.seed + 17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < cfg.resolvent_samples; ++s) {
        const double lambda = 0.25 + 3.75 * unit(rng);
        const double mu = 0.05 + 0.95 * unit(rng);
        std::vector<double> v(op->space()->size()), fv(v.size());
        for (auto& x : v) x = 2.0 * unit(rng) - 1.0;
        const double fc = unit(rng) - 0.5;
        for (auto& x : fv) x = fc;
        const State vs(op->space(), v), fs(op->space(), fv);
        const auto chk = check_resolvent_scaling(*op, lambda, mu, vs, fs, cfg.solver);
        rep.add_hard(lambda, mu, 2.0, chk.discrepancy, chk.tolerance);
        const auto r = resolve(*op, lambda * mu, vs, cfg.solver);
        rows.push_back({op->describe(), std::string(to_string(op->kind())), lambda * mu, r.residual, r.iterations,
                        r.converged && r.residual <= cfg.solver.tol_resolvent});
    }
    rep.notes.push_back("rows carry t = lambda, h = mu");
    rep.finalize();
    return rep;
}

Trajectory read_required(const fs::path& p) {
    if (!fs::exists(p)) throw Error(ErrorKind::no_input, "missing " + p.string());
    return io::read_trajectory_json(p);
}

}  // namespace

std::vector<EstimateReport> verify(const ExperimentConfig& cfg, const fs::path& dir) {
    std::vector<EstimateReport> reports;
    std::optional<Trajectory> tr;
    if (needs_trajectory(cfg)) tr = read_required(dir / "trajectory.json");
    for (const auto& check : cfg.checks) {
        if (check == "ab_l1") {
            reports.push_back(check_ab_l1(*tr, cfg.qs, cfg.h_sweep, cfg.solver));
        } else if (check == "pointwise_ab") {
            std::optional<Trajectory> probe;
            if (fs::exists(dir / "probe.json")) probe = io::read_trajectory_json(dir / "probe.json");
            reports.push_back(check_pointwise_ab(*tr, {}, cfg.h_sweep, cfg.solver, probe ? &*probe : nullptr));
        } else if (check == "contraction") {
            reports.push_back(check_contraction(*tr, read_required(dir / "pair.json"), cfg.qs, cfg.solver));
        } else if (check == "complete_regularity") {
            reports.push_back(check_complete_regularity(*tr, cfg.qs, cfg.solver));
        } else if (check == "scaling") {
            const Trajectory direct = read_required(dir / "scaled.json");
            reports.push_back(check_trajectory_scaling(*tr, cfg.scaling_lambda, cfg.solver, &direct));
        } else if (check == "smoothing") {
            std::vector<Trajectory> family{*tr};
            reports.push_back(check_lq_linfty_smoothing(family, cfg.smoothing_q, cfg.solver, cfg.window));
        } else if (check == "resolvent_scaling") {
            std::vector<io::ResolventRow> rows;
            reports.push_back(resolvent_report(cfg, rows));
            io::write_resolvent_csv(dir / "resolvent.csv", rows);
        } else if (check == "dtn_bessel") {
            reports.push_back(dtn_bessel_report(cfg));
        }
    }
    return reports;
}

json write_artifacts(const std::vector<EstimateReport>& reports, const fs::path& dir) {
    io::write_report_csv(dir / "report.csv", reports);
    io::write_plot_csv(dir / "plot.csv", reports);
    json summary = io::summary_json(reports);
    io::write_json(dir / "summary.json", summary);
    return summary;
}

namespace {

int exit_code_for(const Error& e) {
    if (dynamic_cast<const SolverFailure*>(&e) != nullptr) return 3;
    switch (e.kind()) {
        case ErrorKind::solver_failure:
        case ErrorKind::fixedpoint_stall:
        case ErrorKind::step_too_large: return 3;
        default: return 2;
    }
}

template <class Body>
RunOutcome guarded(const fs::path& dir, Body&& body) {
    RunOutcome out;
    try {
        out.reports = body();
        out.summary = write_artifacts(out.reports, dir);
        out.exit_code = out.summary.at("hard_pass").get<bool>() ? 0 : 1;
        if (out.reports.empty()) out.summary["notes"] = json::array({"no checks configured"});
        io::write_json(dir / "summary.json", out.summary);
    } catch (const Error& e) {
        out.exit_code = exit_code_for(e);
        out.summary = json{{"pass", false}, {"hard_pass", false}, {"error", e.what()},
                           {"error_kind", std::string(to_string(e.kind()))}};
        if (const auto* sf = dynamic_cast<const SolverFailure*>(&e)) {
            out.summary["interval"] = sf->interval;
            out.summary["substep"] = sf->substep;
            out.summary["residual_history"] = sf->residual_history;
        }
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!ec) io::write_json(dir / "summary.json", out.summary);
    } catch (const std::exception& e) {
        out.exit_code = 2;
        out.summary = json{{"pass", false}, {"hard_pass", false}, {"error", e.what()}};
    }
    return out;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& dir) {
    return guarded(dir, [&] {
        simulate(cfg, dir);
        return verify(cfg, dir);
    });
}

RunOutcome verify_directory(const ExperimentConfig& cfg, const fs::path& dir) {
    return guarded(dir, [&] { return verify(cfg, dir); });
}

}  // namespace accretive
