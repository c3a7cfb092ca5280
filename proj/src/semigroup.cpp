#include "accretive/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accretive/error.hpp"

namespace accretive {

std::optional<std::size_t> Trajectory::find_time(double t, double tol) const {
    auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it != times.end() && std::abs(*it - t) <= tol) return static_cast<std::size_t>(it - times.begin());
    return std::nullopt;
}

State Trajectory::at(double t) const {
    if (t < times.front() || t > times.back()) {
        std::ostringstream os;
        os << "t = " << t << " outside the recorded horizon [0, " << times.back() << "]";
        throw Error(ErrorKind::out_of_range, os.str());
    }
    if (auto i = find_time(t, 1e-12 * std::max(1.0, std::abs(t)))) return states[*i];
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double a = times[j - 1], b = times[j];
    const double s = (t - a) / (b - a);
    return (1.0 - s) * states[j - 1] + s * states[j];
}

StepForcing Trajectory::effective_forcing() const {
    if (perturbation.kind == PerturbationKind::zero) return forcing;
    std::vector<double> b{0.0};
    std::vector<State> p;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        b.push_back(times[k + 1]);
        p.push_back(forcing.at(0.5 * (times[k] + times[k + 1])) - nemytskii(perturbation, states[k + 1]));
    }
    return StepForcing(std::move(b), std::move(p));
}

double Trajectory::accumulated_solver_error(double up_to) const {
    double e = 0.0;
    for (std::size_t k = 0; k < steps.size() && times[k] < up_to; ++k) e += steps[k].dt * steps[k].residual;
    return e;
}

State exponential_formula(const OperatorInstance& A, const State& u0, double t, int n, const SolverConfig& cfg) {
    if (n < 1) throw Error(ErrorKind::invalid_argument, "exponential formula needs n >= 1");
    if (!(t >= 0.0)) throw Error(ErrorKind::out_of_range, "exponential formula needs t >= 0");
    require_same_space(A.space(), u0.space, "exponential formula");
    if (t == 0.0) return u0;
    const double dt = t / n;
    State u = u0;
    for (int k = 0; k < n; ++k) {
        State prev = u;
        u = resolve(A, dt, prev, cfg, &prev).u;
    }
    return u;
}

Trajectory evolve(OperatorPtr A, const Perturbation& F, const State& u0, const StepForcing& f, double T,
                  int n_per_interval, const SolverConfig& cfg) {
    if (n_per_interval < 1) throw Error(ErrorKind::invalid_argument, "need at least one step per interval");
    if (!(T > 0.0) || T > f.horizon() * (1.0 + 1e-14))
        throw Error(ErrorKind::out_of_range, "horizon must lie in (0, forcing horizon]");
    require_same_space(A->space(), u0.space, "initial datum");
    require_same_space(A->space(), f.space(), "forcing");
    F.validate(u0.size());

    Trajectory tr;
    tr.op = A;
    tr.perturbation = F;
    tr.forcing = f;
    tr.cfg = cfg;
    tr.steps_per_interval = n_per_interval;
    tr.times.push_back(0.0);
    tr.states.push_back(u0);

    const auto& b = f.breakpoints();
    State u = u0;
    for (std::size_t i = 0; i < f.interval_count() && b[i] < T; ++i) {
        const double a = b[i];
        const double end = std::min(b[i + 1], T);
        const double dt = (end - a) / n_per_interval;
        const State& fi = f.plateaus()[i];
        for (int j = 0; j < n_per_interval; ++j) {
            try {
                auto r = resolve_perturbed(*A, F, dt, u + dt * fi, cfg, &u);
                u = std::move(r.u);
                tr.steps.push_back({i, static_cast<std::size_t>(j), dt, r.residual, r.iterations});
            } catch (const SolverFailure& e) {
                SolverFailure located = e;
                located.interval = static_cast<int>(i);
                located.substep = j;
                throw located;
            } catch (const Error& e) {
                SolverFailure located(e.kind(), e.what(), {});
                located.interval = static_cast<int>(i);
                located.substep = j;
                throw located;
            }
            tr.times.push_back(j + 1 == n_per_interval ? end : a + (j + 1) * dt);
            tr.states.push_back(u);
        }
    }
    return tr;
}

Trajectory rescale_trajectory(const Trajectory& traj, double lambda) {
    const double alpha = traj.alpha();
    if (alpha == 1.0) throw Error(ErrorKind::unsupported_order, "rescaling needs alpha != 1");
    if (!(lambda > 0.0)) throw Error(ErrorKind::invalid_argument, "rescaling factor must be positive");
    const double c = std::pow(lambda, 1.0 / (alpha - 1.0));
    Trajectory out = traj;
    out.forcing = traj.forcing.rescaled(std::pow(lambda, alpha / (alpha - 1.0)), lambda);
    for (double& t : out.times) t /= lambda;
    for (auto& s : out.states) s = c * s;
    for (auto& d : out.steps) {
        d.dt /= lambda;
        // the residual of the rescaled equation picks up the factor λ^{α/(α-1)}
        d.residual *= std::pow(lambda, alpha / (alpha - 1.0));
    }
    out.label = traj.label.empty() ? "rescaled" : traj.label + "-rescaled";
    return out;
}

State difference_quotient(const Trajectory& traj, double t, double h) {
    if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "difference quotient needs h > 0");
    if (t < 0.0 || t + h > traj.horizon() * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "[" << t << ", " << t + h << "] leaves the recorded horizon " << traj.horizon();
        throw Error(ErrorKind::out_of_range, os.str());
    }
    return (1.0 / h) * (traj.at(std::min(t + h, traj.horizon())) - traj.at(t));
}

}  // namespace accretive
