#include "accretive/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "accretive/error.hpp"

namespace accretive::io {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    if (s == "nan") return std::nan("");
    double x = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw Error(ErrorKind::config_parse, "not a number: '" + s + "'");
    return x;
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::config_parse, what);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::config_parse, std::string("field '") + key + "': " + e.what());
    }
}

std::vector<double> doubles(const json& j, const char* what) {
    require(j.is_array(), std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& x : j) {
        require(x.is_number(), std::string(what) + " must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

SpacePtr space_for(const std::vector<double>& weights, const SpacePtr& hint) {
    if (hint && hint->weights == weights) return hint;
    return make_space(weights);
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::invalid_argument, "cannot write " + path.string());
    return os;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::vector<std::string>& header) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::no_input, "cannot read " + path.string());
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), path.string() + " is empty");
    const auto head = split_csv(line);
    if (!header.empty()) require(head == header, path.string() + ": unexpected header");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto row = split_csv(line);
        require(row.size() == head.size(), path.string() + ": ragged row");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

json to_json(const State& u) {
    return json{{"space", {{"weights", u.space->weights}}}, {"values", u.values}};
}

State state_from_json(const json& j, const SpacePtr& space) {
    require(j.is_object() && j.contains("space") && j.contains("values"), "state needs 'space' and 'values'");
    const auto w = doubles(j.at("space").at("weights"), "space.weights");
    return State(space_for(w, space), doubles(j.at("values"), "values"));
}

json to_json(const StepForcing& f) {
    json plateaus = json::array();
    for (const auto& p : f.plateaus()) plateaus.push_back(p.values);
    return json{{"space", {{"weights", f.space()->weights}}}, {"breakpoints", f.breakpoints()}, {"plateaus", plateaus}};
}

StepForcing forcing_from_json(const json& j, const SpacePtr& space) {
    require(j.is_object() && j.contains("breakpoints") && j.contains("plateaus"),
            "forcing needs 'breakpoints' and 'plateaus'");
    SpacePtr s = space;
    if (j.contains("space")) s = space_for(doubles(j.at("space").at("weights"), "space.weights"), space);
    require(s != nullptr, "forcing needs a space");
    std::vector<State> plateaus;
    for (const auto& p : j.at("plateaus")) plateaus.emplace_back(s, doubles(p, "plateau"));
    return StepForcing(doubles(j.at("breakpoints"), "breakpoints"), std::move(plateaus));
}

json to_json(const OperatorSpec& spec) {
    json j{{"kind", std::string(to_string(spec.kind))},
           {"alpha", spec.alpha},
           {"p", spec.p},
           {"m", spec.m},
           {"n", spec.n},
           {"h_x", spec.h_x}};
    if (spec.kind == OperatorKind::dirichlet_to_neumann)
        j["mesh"] = {{"n_r", spec.mesh.n_r}, {"n_theta", spec.mesh.n_theta}, {"radius", spec.mesh.radius}};
    return j;
}

OperatorSpec operator_spec_from_json(const json& j) {
    require(j.is_object() && j.contains("kind"), "operator needs a 'kind'");
    OperatorSpec s;
    s.kind = parse_operator_kind(j.at("kind").get<std::string>());
    s.alpha = get_or(j, "alpha", s.alpha);
    s.p = get_or(j, "p", s.p);
    s.m = get_or(j, "m", s.m);
    s.n = get_or(j, "n", s.n);
    s.h_x = get_or(j, "h_x", s.h_x);
    if (j.contains("mesh")) {
        const auto& m = j.at("mesh");
        s.mesh.n_r = get_or(m, "n_r", s.mesh.n_r);
        s.mesh.n_theta = get_or(m, "n_theta", s.mesh.n_theta);
        s.mesh.radius = get_or(m, "radius", s.mesh.radius);
    }
    return s;
}

json to_json(const Perturbation& F) {
    json j{{"kind", std::string(to_string(F.kind))}};
    switch (F.kind) {
        case PerturbationKind::zero: break;
        case PerturbationKind::linear: j["c"] = F.c; break;
        case PerturbationKind::scaled_arctan: j["scale"] = F.scale; break;
        case PerturbationKind::nodewise_lipschitz:
            j["knots_x"] = F.knots_x;
            j["knots_y"] = F.knots_y;
            j["node_scale"] = F.node_scale;
            break;
    }
    return j;
}

Perturbation perturbation_from_json(const json& j) {
    if (j.is_null()) return Perturbation::zero();
    require(j.is_object() && j.contains("kind"), "perturbation needs a 'kind'");
    switch (parse_perturbation_kind(j.at("kind").get<std::string>())) {
        case PerturbationKind::zero: return Perturbation::zero();
        case PerturbationKind::linear: return Perturbation::linear(get_or(j, "c", 0.0));
        case PerturbationKind::scaled_arctan:
            return Perturbation::scaled_arctan(get_or(j, "scale", get_or(j, "omega", 0.0)));
        case PerturbationKind::nodewise_lipschitz:
            return Perturbation::nodewise(doubles(j.at("knots_x"), "knots_x"), doubles(j.at("knots_y"), "knots_y"),
                                          j.contains("node_scale") ? doubles(j.at("node_scale"), "node_scale")
                                                                   : std::vector<double>{});
    }
    return Perturbation::zero();
}

json to_json(const SolverConfig& c) {
    return json{{"tol_resolvent", c.tol_resolvent},         {"max_newton_iters", c.max_newton_iters},
                {"max_fixedpoint_iters", c.max_fixedpoint_iters}, {"tol_fixedpoint", c.tol_fixedpoint},
                {"cl_steps", c.cl_steps},                   {"margin_eps", c.margin_eps},
                {"k_samples", c.k_samples}};
}

SolverConfig solver_config_from_json(const json& j) {
    SolverConfig c;
    if (j.is_null()) return c;
    require(j.is_object(), "solver must be an object");
    c.tol_resolvent = get_or(j, "tol_resolvent", c.tol_resolvent);
    c.max_newton_iters = get_or(j, "max_newton_iters", c.max_newton_iters);
    c.max_fixedpoint_iters = get_or(j, "max_fixedpoint_iters", c.max_fixedpoint_iters);
    c.tol_fixedpoint = get_or(j, "tol_fixedpoint", c.tol_fixedpoint);
    c.cl_steps = get_or(j, "cl_steps", c.cl_steps);
    c.margin_eps = get_or(j, "margin_eps", c.margin_eps);
    c.k_samples = get_or(j, "k_samples", c.k_samples);
    require(c.tol_resolvent > 0.0 && c.tol_fixedpoint > 0.0, "solver tolerances must be positive");
    require(c.max_newton_iters > 0 && c.max_fixedpoint_iters > 0, "iteration caps must be positive");
    return c;
}

json read_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::no_input, "cannot read " + path.string());
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::config_parse, path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

void write_state_csv(const fs::path& path, const State& u) {
    auto os = open_out(path);
    os << "node_index,weight,value\n";
    for (std::size_t i = 0; i < u.size(); ++i)
        os << i << ',' << format_double(u.space->weights[i]) << ',' << format_double(u[i]) << '\n';
}

State read_state_csv(const fs::path& path) {
    const auto rows = read_csv(path, {"node_index", "weight", "value"});
    std::vector<double> w, v;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i][0] == std::to_string(i), path.string() + ": node indices must run 0..n-1");
        w.push_back(parse_double(rows[i][1]));
        v.push_back(parse_double(rows[i][2]));
    }
    return State(make_space(std::move(w)), std::move(v));
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    auto os = open_out(path);
    os << 't';
    for (std::size_t i = 0; i < traj.initial().size(); ++i) os << ",node_" << i;
    os << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << format_double(traj.times[k]);
        for (double x : traj.states[k].values) os << ',' << format_double(x);
        os << '\n';
    }
}

TrajectoryTable read_trajectory_csv(const fs::path& path) {
    const auto rows = read_csv(path, {});
    TrajectoryTable t;
    for (const auto& r : rows) {
        t.times.push_back(parse_double(r[0]));
        std::vector<double> row;
        for (std::size_t i = 1; i < r.size(); ++i) row.push_back(parse_double(r[i]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

json to_json(const Trajectory& traj, const std::string& config_hash) {
    json states = json::array();
    for (const auto& s : traj.states) states.push_back(s.values);
    json steps = json::array();
    for (const auto& d : traj.steps)
        steps.push_back({{"interval", d.interval},
                         {"substep", d.substep},
                         {"dt", d.dt},
                         {"residual", d.residual},
                         {"iterations", d.iterations}});
    return json{{"label", traj.label},
                {"config_hash", config_hash},
                {"operator", to_json(traj.op->spec())},
                {"perturbation", to_json(traj.perturbation)},
                {"forcing", to_json(traj.forcing)},
                {"solver", to_json(traj.cfg)},
                {"steps_per_interval", traj.steps_per_interval},
                {"times", traj.times},
                {"states", states},
                {"steps", steps}};
}

Trajectory trajectory_from_json(const json& j) {
    for (const char* key : {"operator", "forcing", "times", "states", "steps"})
        require(j.contains(key), std::string("trajectory is missing '") + key + "'");
    Trajectory tr;
    tr.op = make_operator(operator_spec_from_json(j.at("operator")));
    tr.perturbation = perturbation_from_json(j.value("perturbation", json()));
    tr.forcing = forcing_from_json(j.at("forcing"), tr.op->space());
    tr.cfg = solver_config_from_json(j.value("solver", json()));
    tr.steps_per_interval = get_or(j, "steps_per_interval", 1);
    tr.label = get_or(j, "label", std::string());
    tr.times = doubles(j.at("times"), "times");
    for (const auto& s : j.at("states")) tr.states.emplace_back(tr.op->space(), doubles(s, "state"));
    for (const auto& d : j.at("steps"))
        tr.steps.push_back({d.at("interval").get<std::size_t>(), d.at("substep").get<std::size_t>(),
                            d.at("dt").get<double>(), d.at("residual").get<double>(), d.at("iterations").get<int>()});
    require(tr.times.size() == tr.states.size() && tr.steps.size() + 1 == tr.times.size() && !tr.times.empty(),
            "trajectory arrays have inconsistent lengths");
    return tr;
}

void write_trajectory_json(const fs::path& path, const Trajectory& traj, const std::string& config_hash) {
    auto os = open_out(path);
    os << to_json(traj, config_hash).dump() << '\n';
}

Trajectory read_trajectory_json(const fs::path& path) { return trajectory_from_json(read_json(path)); }

void write_report_csv(const fs::path& path, const std::vector<EstimateReport>& reports) {
    auto os = open_out(path);
    os << "check_id,t,h,q,lhs,rhs,margin,pass,severity\n";
    for (const auto& rep : reports)
        for (const auto& r : rep.records)
            os << quote(rep.check_id) << ',' << format_double(r.t) << ',' << format_double(r.h) << ','
               << format_double(r.q) << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
               << format_double(r.margin) << ',' << (r.pass ? 1 : 0) << ',' << to_string(r.severity) << '\n';
}

std::vector<ReportRow> read_report_csv(const fs::path& path) {
    const auto rows = read_csv(path, {"check_id", "t", "h", "q", "lhs", "rhs", "margin", "pass", "severity"});
    std::vector<ReportRow> out;
    for (const auto& r : rows) {
        require(r[7] == "0" || r[7] == "1", path.string() + ": pass must be 0 or 1");
        out.push_back({r[0],
                       {parse_double(r[1]), parse_double(r[2]), parse_double(r[3]), parse_double(r[4]),
                        parse_double(r[5]), parse_double(r[6]), r[7] == "1", parse_severity(r[8])}});
    }
    return out;
}

void write_plot_csv(const fs::path& path, const std::vector<EstimateReport>& reports) {
    auto os = open_out(path);
    os << "check_id,series,t,h,q,value\n";
    for (const auto& rep : reports)
        for (const auto& r : rep.records)
            for (auto [series, value] : {std::pair{"lhs", r.lhs}, std::pair{"rhs", r.rhs}})
                os << quote(rep.check_id) << ',' << series << ',' << format_double(r.t) << ',' << format_double(r.h)
                   << ',' << format_double(r.q) << ',' << format_double(value) << '\n';
}

std::vector<PlotRow> read_plot_csv(const fs::path& path) {
    const auto rows = read_csv(path, {"check_id", "series", "t", "h", "q", "value"});
    std::vector<PlotRow> out;
    for (const auto& r : rows)
        out.push_back({r[0], r[1], parse_double(r[2]), parse_double(r[3]), parse_double(r[4]), parse_double(r[5])});
    return out;
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(); }

}  // namespace

json summary_json(const std::vector<EstimateReport>& reports) {
    json checks = json::array();
    bool pass = true, hard_pass = true;
    for (const auto& rep : reports) {
        json inputs = json::object();
        for (const auto& [k, v] : rep.inputs) inputs[k] = v;
        std::size_t failed = 0, failed_hard = 0;
        for (const auto& r : rep.records) {
            if (r.severity == Severity::info || r.pass) continue;
            ++failed;
            if (r.severity == Severity::hard) ++failed_hard;
        }
        checks.push_back({{"check_id", rep.check_id},
                          {"pass", rep.pass},
                          {"skipped", rep.skipped},
                          {"records", rep.records.size()},
                          {"failed", failed},
                          {"failed_hard", failed_hard},
                          {"min_margin_hard", finite_or_null(rep.min_margin(Severity::hard))},
                          {"min_margin_soft", finite_or_null(rep.min_margin(Severity::soft))},
                          {"inputs", inputs},
                          {"notes", rep.notes}});
        pass = pass && rep.pass;
        hard_pass = hard_pass && failed_hard == 0;
    }
    return json{{"pass", pass}, {"hard_pass", hard_pass}, {"checks", checks}};
}

void write_resolvent_csv(const fs::path& path, const std::vector<ResolventRow>& rows) {
    auto os = open_out(path);
    os << "op,kind,lambda,residual,iterations,pass\n";
    for (const auto& r : rows)
        os << quote(r.op) << ',' << quote(r.kind) << ',' << format_double(r.lambda) << ','
           << format_double(r.residual) << ',' << r.iterations << ',' << (r.pass ? 1 : 0) << '\n';
}

std::vector<ResolventRow> read_resolvent_csv(const fs::path& path) {
    const auto rows = read_csv(path, {"op", "kind", "lambda", "residual", "iterations", "pass"});
    std::vector<ResolventRow> out;
    for (const auto& r : rows)
        out.push_back({r[0], r[1], parse_double(r[2]), parse_double(r[3]), std::stoi(r[4]), r[5] == "1"});
    return out;
}

}  // namespace accretive::io
