#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "accretive/error.hpp"
#include "accretive/estimates.hpp"
#include "accretive/experiment.hpp"
#include "accretive/io.hpp"
#include "accretive/kernels.hpp"

namespace fs = std::filesystem;
using namespace accretive;

namespace {

struct Common {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
};

void add_common(CLI::App* cmd, Common& c, bool out_required = false) {
    auto* cfg = cmd->add_option("--config", c.config, "experiment JSON config");
    auto* pre = cmd->add_option("--preset", c.preset, "built-in experiment");
    cfg->excludes(pre);
    auto* out = cmd->add_option("--out", c.out, "output directory");
    if (out_required) out->required();
    cmd->add_option("--seed", c.seed, "override the config seed");
    cmd->add_option("--steps", c.steps, "override steps per forcing interval");
}

ExperimentConfig resolve_config(const Common& c, const std::optional<fs::path>& fallback = std::nullopt) {
    ExperimentConfig cfg;
    if (!c.config.empty())
        cfg = load_config(c.config);
    else if (!c.preset.empty())
        cfg = preset_config(c.preset);
    else if (fallback && fs::exists(*fallback))
        cfg = load_config(*fallback);
    else
        throw Error(ErrorKind::no_input, "pass --config or --preset");
    if (!c.out.empty()) cfg.output = c.out;
    if (c.seed) cfg.seed = *c.seed;
    if (c.steps) {
        if (*c.steps < 1) throw Error(ErrorKind::config_parse, "--steps must be >= 1");
        cfg.steps = *c.steps;
    }
    return cfg;
}

int report_outcome(const RunOutcome& out) {
    if (out.summary.contains("error")) {
        std::cerr << "error: " << out.summary.at("error").get<std::string>() << '\n';
        return out.exit_code;
    }
    for (const auto& rep : out.reports) {
        std::size_t failed = 0;
        for (const auto& r : rep.records)
            if (r.severity != Severity::info && !r.pass) ++failed;
        std::cout << rep.check_id << ": " << (rep.skipped ? "SKIP" : rep.pass ? "PASS" : "FAIL") << " ("
                  << rep.records.size() << " records, " << failed << " failed";
        const double mh = rep.min_margin(Severity::hard);
        if (std::isfinite(mh)) std::cout << ", min hard margin " << io::format_double(mh);
        std::cout << ")\n";
        for (const auto& n : rep.notes) std::cout << "  " << n << '\n';
    }
    std::cout << "overall: " << (out.exit_code == 0 ? "PASS" : "FAIL") << '\n';
    return out.exit_code;
}

int error_exit(const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (dynamic_cast<const SolverFailure*>(&e) || e.kind() == ErrorKind::step_too_large ||
        e.kind() == ErrorKind::fixedpoint_stall || e.kind() == ErrorKind::solver_failure)
        return 3;
    return 2;
}

int cmd_run(const Common& c) {
    const auto cfg = resolve_config(c);
    return report_outcome(run_experiment(cfg, cfg.output));
}

int cmd_simulate(const Common& c) {
    const auto cfg = resolve_config(c);
    simulate(cfg, cfg.output);
    std::cout << "wrote " << cfg.output << '\n';
    return 0;
}

int cmd_verify(const Common& c) {
    const fs::path dir = c.out;
    if (!fs::is_directory(dir)) throw Error(ErrorKind::no_input, "no trajectory directory " + dir.string());
    auto cfg = resolve_config(c, dir / "config.json");
    cfg.output = dir.string();
    return report_outcome(verify_directory(cfg, dir));
}

int cmd_dtn(const Common& c) {
    const auto cfg = resolve_config(c);
    if (cfg.op.kind != OperatorKind::dirichlet_to_neumann)
        throw Error(ErrorKind::kind_unsupported, "dtn needs a DirichletToNeumann operator");
    auto op = make_operator(cfg.op);
    const State phi = make_initial(cfg.initial, *op, cfg.seed);
    const State g = dtn_apply(*op, phi, cfg.solver);
    io::json out{{"operator", io::to_json(cfg.op)}, {"phi", io::to_json(phi)}, {"response", io::to_json(g)}};
    std::cout << op->describe() << ": mean response "
              << io::format_double(lq_norm(g, 1.0) / op->space()->total_weight()) << '\n';
    if (cfg.op.p == 2.0 && cfg.initial.preset == "constant") {
        const double expect = cfg.initial.amplitude * dtn_bessel_oracle(cfg.op.m, cfg.op.mesh.radius);
        double worst = 0.0;
        for (double x : g.values) worst = std::max(worst, std::abs(x - expect) / std::abs(expect));
        out["oracle"] = expect;
        out["max_relative_error"] = worst;
        std::cout << "Bessel oracle " << io::format_double(expect) << ", max relative error "
                  << io::format_double(worst) << '\n';
    }
    io::write_json(fs::path(cfg.output) / "dtn.json", out);
    return 0;
}

int cmd_exponents(const std::vector<int>& Ns, const std::vector<double>& ps, const std::vector<double>& qs,
                  const std::string& out) {
    std::vector<std::string> lines{"N,p,q,q0,alpha_q,beta_q,gamma_q,q0_from_critical,status"};
    for (int N : Ns)
        for (double p : ps)
            for (double q : qs) {
                std::string row = std::to_string(N) + "," + io::format_double(p) + "," + io::format_double(q) + ",";
                try {
                    const auto e = smoothing_exponents(N, p, q);
                    row += io::format_double(e.q0) + "," + io::format_double(e.alpha_q) + "," +
                           io::format_double(e.beta_q) + "," + io::format_double(e.gamma_q) + "," +
                           (e.q0_from_critical ? "1" : "0") + ",ok";
                } catch (const Error& err) {
                    row += "nan,nan,nan,nan,0," + std::string(to_string(err.kind()));
                }
                lines.push_back(row);
            }
    for (const auto& l : lines) std::cout << l << '\n';
    if (!out.empty()) {
        fs::create_directories(out);
        std::FILE* f = std::fopen((fs::path(out) / "exponents.csv").c_str(), "w");
        if (!f) throw Error(ErrorKind::invalid_argument, "cannot write exponents.csv");
        for (const auto& l : lines) std::fprintf(f, "%s\n", l.c_str());
        std::fclose(f);
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    std::vector<EstimateReport> merged;
    for (const auto& in : inputs) {
        fs::path p = in;
        if (fs::is_directory(p)) p /= "report.csv";
        if (!fs::exists(p)) continue;
        for (const auto& row : io::read_report_csv(p)) {
            if (merged.empty() || merged.back().check_id != row.check_id) {
                merged.emplace_back();
                merged.back().check_id = row.check_id;
                merged.back().inputs.emplace_back("source", p.string());
            }
            merged.back().records.push_back(row.record);
        }
    }
    if (merged.empty()) throw Error(ErrorKind::no_input, "no report.csv found in the inputs");
    for (auto& r : merged) r.finalize();
    const auto summary = write_artifacts(merged, out.empty() ? fs::path(".") : fs::path(out));
    RunOutcome o;
    o.reports = merged;
    o.summary = summary;
    o.exit_code = summary.at("hard_pass").get<bool>() ? 0 : 1;
    return report_outcome(o);
}

}  // namespace

int main(int argc, char** argv) {
    kernels::configure_threads_from_env();
    CLI::App app{"Homogeneous accretive evolution experiments"};
    app.require_subcommand(1);

    Common run_o, sim_o, ver_o, dtn_o;
    add_common(app.add_subcommand("run", "simulate, verify and write all artifacts"), run_o);
    add_common(app.add_subcommand("simulate", "evolve and dump trajectories"), sim_o);
    add_common(app.add_subcommand("verify", "run checks on a trajectory directory"), ver_o, true);
    add_common(app.add_subcommand("dtn", "single Dirichlet-to-Neumann evaluation"), dtn_o);

    std::vector<int> Ns{3};
    std::vector<double> ps{2.5}, qs{2.0};
    std::string exp_out;
    auto* exps = app.add_subcommand("exponents", "smoothing exponent table over an (N, p, q) grid");
    exps->add_option("--N", Ns, "dimensions");
    exps->add_option("--p", ps, "p values");
    exps->add_option("--q", qs, "q values");
    exps->add_option("--out", exp_out, "directory for exponents.csv");

    std::vector<std::string> rep_in;
    std::string rep_out;
    auto* rep = app.add_subcommand("report", "merge report CSVs into one summary");
    rep->add_option("--inputs", rep_in, "experiment directories or report CSVs")->required();
    rep->add_option("--out", rep_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "run") return cmd_run(run_o);
        if (name == "simulate") return cmd_simulate(sim_o);
        if (name == "verify") return cmd_verify(ver_o);
        if (name == "dtn") return cmd_dtn(dtn_o);
        if (name == "exponents") return cmd_exponents(Ns, ps, qs, exp_out);
        if (name == "report") return cmd_report(rep_in, rep_out);
    } catch (const Error& e) {
        return error_exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
