#include "accretive/estimates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "accretive/error.hpp"

namespace accretive {

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::hard: return "hard";
        case Severity::soft: return "soft";
        case Severity::info: return "info";
    }
    return "info";
}

Severity parse_severity(std::string_view s) {
    if (s == "hard") return Severity::hard;
    if (s == "soft") return Severity::soft;
    if (s == "info") return Severity::info;
    throw Error(ErrorKind::config_parse, "unknown severity '" + std::string(s) + "'");
}

double relative_margin(double lhs, double rhs) {
    const double d = rhs - lhs;
    if (d == 0.0) return 0.0;
    return d / std::max(std::abs(rhs), 1e-300);
}

void EstimateReport::add_hard(double t, double h, double q, double lhs, double rhs) {
    records.push_back({t, h, q, lhs, rhs, relative_margin(lhs, rhs), lhs <= rhs, Severity::hard});
}

void EstimateReport::add_soft(double t, double h, double q, double lhs, double rhs, double eps) {
    const double m = relative_margin(lhs, rhs);
    records.push_back({t, h, q, lhs, rhs, m, m >= -eps, Severity::soft});
}

void EstimateReport::add_info(double t, double h, double q, double lhs, double rhs) {
    const double m = relative_margin(lhs, rhs);
    records.push_back({t, h, q, lhs, rhs, m, m >= 0.0, Severity::info});
}

namespace {

std::string num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

void EstimateReport::add_input(std::string key, double value) { inputs.emplace_back(std::move(key), num(value)); }
void EstimateReport::add_input(std::string key, std::string value) {
    inputs.emplace_back(std::move(key), std::move(value));
}

void EstimateReport::finalize() {
    if (skipped) {
        pass = true;
        return;
    }
    bool any = false;
    pass = true;
    for (const auto& r : records) {
        if (r.severity == Severity::info) continue;
        any = true;
        pass = pass && r.pass;
    }
    if (!any) {
        pass = false;
        notes.push_back("no checkable records");
    }
}

double EstimateReport::min_margin(Severity s) const {
    double m = kInfinity;
    for (const auto& r : records)
        if (r.severity == s) m = std::min(m, r.margin);
    return m;
}

namespace {

/// Converts an L²(μ) bound into an L^q(μ) bound on the same space.
double l2_to_lq(const WeightedSpace& s, double q) {
    const double wmin = *std::min_element(s.weights.begin(), s.weights.end());
    const double W = s.total_weight();
    if (std::isinf(q)) return 1.0 / std::sqrt(wmin);
    if (q <= 2.0) return std::pow(W, 1.0 / q - 0.5);
    return std::pow(W, 1.0 / q) / std::sqrt(wmin);
}

constexpr std::array<double, 8> kGaussX = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                           0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussW = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};

template <class Fn>
double gauss(double a, double b, int pieces, Fn&& fn) {
    double total = 0.0;
    const double w = (b - a) / pieces;
    for (int k = 0; k < pieces; ++k) {
        const double lo = a + k * w, mid = lo + 0.5 * w;
        for (std::size_t i = 0; i < kGaussX.size(); ++i) total += 0.5 * w * kGaussW[i] * fn(mid + 0.5 * w * kGaussX[i]);
    }
    return total;
}

/// ∫_a^b e^{ω(t-s)} ds
double exp_weight(double a, double b, double omega, double t) {
    if (omega == 0.0) return b - a;
    return (std::exp(omega * (t - a)) - std::exp(omega * (t - b))) / omega;
}

/// Splits (0, t) where s ↦ (f(s), f(λs)) is constant and calls fn(a, b, i0, i1).
template <class Fn>
void for_each_piece(const StepForcing& f, double t, double lambda, Fn&& fn) {
    std::vector<double> cuts{0.0, t};
    for (double b : f.breakpoints()) {
        if (b > 0.0 && b < t) cuts.push_back(b);
        const double c = b / lambda;
        if (c > 0.0 && c < t) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double a = cuts[j], b = cuts[j + 1];
        const double mid = 0.5 * (a + b);
        fn(a, b, f.interval_at(mid), f.interval_at(lambda * mid));
    }
}

}  // namespace

double gronwall_bound(std::span<const double> s, std::span<const double> a, double b, double t) {
    if (s.size() != a.size()) throw Error(ErrorKind::invalid_argument, "gronwall: sample length mismatch");
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] <= t) {
            xs.push_back(s[k]);
            ys.push_back(a[k]);
        }
    }
    if (xs.size() < 8) throw Error(ErrorKind::grid_too_coarse, "gronwall bound needs at least 8 samples in [0, t]");
    if (xs.back() < t) {
        const std::size_t k = xs.size();
        if (k == s.size()) throw Error(ErrorKind::out_of_range, "gronwall: t beyond the last sample");
        const double w = (t - s[k - 1]) / (s[k] - s[k - 1]);
        xs.push_back(t);
        ys.push_back((1.0 - w) * a[k - 1] + w * a[k]);
    }
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double g0 = ys[k] * b * std::exp(b * (t - xs[k]));
        const double g1 = ys[k + 1] * b * std::exp(b * (t - xs[k + 1]));
        integral += 0.5 * (xs[k + 1] - xs[k]) * (g0 + g1);
    }
    return ys.back() + integral;
}

double ab_l1_rhs(double t, double alpha, double omega, double u0_norm, const StepForcing& f, double q) {
    if (alpha == 1.0) throw Error(ErrorKind::unsupported_order, "the Aronson-Benilan bound needs alpha != 1");
    if (!(t > 0.0) || t > f.horizon()) throw Error(ErrorKind::out_of_range, "ab_l1_rhs: t outside (0, T]");
    const auto& b = f.breakpoints();
    const std::size_t N = f.interval_count();
    std::vector<double> c(N), jump(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) c[i] = lq_norm(f.plateaus()[i], q);
    for (std::size_t i = 1; i < N; ++i) jump[i] = f.jump_norm(i, q);
    const double inv = 1.0 / std::abs(1.0 - alpha);

    auto a_omega = [&](double s) {
        double v0 = 0.0, i1 = 0.0, i2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            if (i > 0 && b[i] <= s) v0 += b[i] * jump[i];
            const double lo = b[i], hi = std::min(b[i + 1], s);
            if (hi <= lo) continue;
            i1 += c[i] * (hi - lo);
            if (omega > 0.0) {
                // ∫_lo^hi (s - r) e^{-ωr} dr
                const double e0 = std::exp(-omega * lo), e1 = std::exp(-omega * hi);
                const double ie = (e0 - e1) / omega;
                const double ire = (lo / omega + 1.0 / (omega * omega)) * e0 - (hi / omega + 1.0 / (omega * omega)) * e1;
                i2 += c[i] * (s * ie - ire);
            }
        }
        return v0 + inv * ((1.0 + std::exp(omega * s)) * u0_norm + i1 + omega * i2);
    };

    double integral = 0.0;
    if (omega > 0.0) {
        std::vector<double> cuts{0.0};
        for (std::size_t i = 1; i < N; ++i)
            if (b[i] < t) cuts.push_back(b[i]);
        cuts.push_back(t);
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
            integral += gauss(cuts[j], cuts[j + 1], 16,
                              [&](double s) { return a_omega(s) * std::exp(omega * (t - s)); });
    }
    return (a_omega(t) + omega * integral) / t;
}

double ab_finite_h_rhs(double t, double h, double alpha, double omega, double L, double u0_norm,
                       const StepForcing& f, double q) {
    if (alpha == 1.0) throw Error(ErrorKind::unsupported_order, "the finite-h bound needs alpha != 1");
    if (!(t > 0.0) || !(h > 0.0)) throw Error(ErrorKind::out_of_range, "ab_finite_h_rhs needs t, h > 0");
    const double lambda = 1.0 + h / t;
    const double kappa = std::pow(lambda, 1.0 / (1.0 - alpha));
    double i1 = 0.0, i2 = 0.0, i3 = 0.0;
    if (!f.is_identically_zero()) {
        for_each_piece(f, t, lambda, [&](double a, double b, std::size_t i0, std::size_t i1_) {
            const double w = exp_weight(a, b, omega, t);
            const auto& fa = f.plateaus()[i0];
            const auto& fb = f.plateaus()[i1_];
            i1 += w * lq_norm(fb, q);
            if (i0 != i1_) i2 += w * lq_norm(fb - fa, q);
        });
        for_each_piece(f, t, 1.0, [&](double a, double b, std::size_t i0, std::size_t) {
            const double w = omega == 0.0 ? b - a : (std::exp(-omega * a) - std::exp(-omega * b)) / omega;
            i3 += w * lq_norm(f.plateaus()[i0], q);
        });
    }
    return std::abs(lambda - kappa) * L * i1 + kappa * L * i2 +
           L * std::exp(omega * t) * std::abs(kappa - 1.0) * (2.0 * u0_norm + i3);
}

std::vector<double> sample_times(const Trajectory& traj, double h, std::size_t max_samples) {
    std::vector<double> ts;
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        if (t + h > traj.horizon() * (1.0 + 1e-12)) break;
        if (traj.find_time(t + h, 1e-9 * (1.0 + t))) ts.push_back(t);
    }
    if (max_samples > 0 && ts.size() > max_samples) {
        std::vector<double> thin;
        for (std::size_t j = 0; j < max_samples; ++j)
            thin.push_back(ts[(j * (ts.size() - 1)) / (max_samples - 1)]);
        thin.erase(std::unique(thin.begin(), thin.end()), thin.end());
        return thin;
    }
    return ts;
}

namespace {

const State& state_at(const Trajectory& tr, double t) {
    auto k = tr.find_time(t, 1e-9 * (1.0 + t));
    if (!k) throw Error(ErrorKind::out_of_range, "time " + num(t) + " is not on the recorded grid");
    return tr.states[*k];
}

void require_order(double alpha) {
    if (alpha == 1.0) throw Error(ErrorKind::unsupported_order, "estimate needs alpha != 1");
}

}  // namespace

EstimateReport check_ab_l1(const Trajectory& traj, std::span<const double> qs, std::span<const double> h_sweep,
                           const SolverConfig& cfg) {
    const double alpha = traj.alpha();
    require_order(alpha);
    EstimateReport rep;
    rep.check_id = "ab_l1";
    rep.add_input("operator", traj.op->describe());
    rep.add_input("alpha", alpha);
    rep.add_input("omega", traj.perturbation.omega());
    rep.add_input("margin_eps", cfg.margin_eps);
    if (h_sweep.empty()) throw Error(ErrorKind::invalid_argument, "empty h sweep");

    const bool perturbed = traj.perturbation.kind != PerturbationKind::zero;
    const StepForcing f_eff = traj.effective_forcing();
    const double omega_f = traj.perturbation.omega();
    const double h_min = *std::min_element(h_sweep.begin(), h_sweep.end());
    // the perturbed bound integrates a forcing with one plateau per step
    const std::size_t max_samples = perturbed ? 120 : 0;

    for (double q : qs) {
        const double u0n = lq_norm(traj.initial(), q);
        const double conv = l2_to_lq(*traj.op->space(), q);
        std::map<double, double> limit_cache;
        for (double h : h_sweep) {
            const auto ts = sample_times(traj, h, max_samples);
            if (ts.empty()) {
                rep.notes.push_back("h = " + num(h) + " has no recorded (t, t+h) pairs");
                continue;
            }
            for (double t : ts) {
                const double diff = lq_norm(state_at(traj, t + h) - state_at(traj, t), q) / h;
                const double fin = ab_finite_h_rhs(t, h, alpha, 0.0, 1.0, u0n, f_eff, q);
                const double slack = 1e-8 + 2.0 * conv * traj.accumulated_solver_error(t + h) / h;
                rep.add_hard(t, h, q, diff, fin / h + slack);
                auto it = limit_cache.find(t);
                if (it == limit_cache.end())
                    it = limit_cache.emplace(t, ab_l1_rhs(t, alpha, omega_f, u0n, traj.forcing, q)).first;
                if (h == h_min)
                    rep.add_soft(t, h, q, diff, it->second, cfg.margin_eps);
                else
                    rep.add_info(t, h, q, diff, it->second);
            }
        }
    }
    rep.finalize();
    return rep;
}

Trajectory order_probe(const Trajectory& traj) {
    double top = 0.0;
    for (double x : traj.initial().values) top = std::max(top, std::abs(x));
    const double shift = 0.05 * std::max(top, 1e-3);
    State u0 = traj.initial();
    for (double& x : u0.values) x += shift;
    auto p = evolve(traj.op, traj.perturbation, u0, traj.forcing, traj.horizon(), traj.steps_per_interval, traj.cfg);
    p.label = traj.label.empty() ? "probe" : traj.label + "-probe";
    return p;
}

EstimateReport check_pointwise_ab(const Trajectory& traj, std::span<const double> ts_in,
                                  std::span<const double> hs, const SolverConfig& cfg, const Trajectory* probe) {
    (void)cfg;
    const double alpha = traj.alpha();
    require_order(alpha);
    for (double x : traj.initial().values)
        if (x < 0.0) throw Error(ErrorKind::negative_initial_data, "pointwise bound needs u0 >= 0");

    EstimateReport rep;
    rep.check_id = "pointwise_ab";
    rep.add_input("operator", traj.op->describe());
    rep.add_input("alpha", alpha);
    const auto& space = *traj.op->space();
    const double conv_inf = l2_to_lq(space, kInfinity);

    Trajectory own;
    if (probe == nullptr) {
        own = order_probe(traj);
        probe = &own;
    }
    {
        double worst = -kInfinity, worst_t = 0.0;
        const std::size_t n = std::min(traj.states.size(), probe->states.size());
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < traj.states[k].size(); ++i) {
                const double v = traj.states[k][i] - probe->states[k][i];
                if (v > worst) {
                    worst = v;
                    worst_t = traj.times[k];
                }
            }
        }
        const double tol = 1e-8 + conv_inf * (traj.accumulated_solver_error() + probe->accumulated_solver_error());
        rep.add_hard(worst_t, 0.0, kInfinity, worst, tol);
        rep.notes.push_back("order probe: max(u - u_hat) = " + num(worst));
    }

    const bool nodewise = traj.perturbation.kind == PerturbationKind::zero && traj.forcing.is_identically_zero();
    rep.add_input("mode", nodewise ? "nodewise" : "norm");
    const StepForcing f_eff = traj.effective_forcing();
    const double ascale = alpha / (alpha - 1.0);
    const std::array<double, 3> qs{1.0, 2.0, kInfinity};

    for (double h : hs) {
        std::vector<double> ts;
        if (ts_in.empty())
            ts = sample_times(traj, h, nodewise ? 0 : 120);
        else
            for (double t : ts_in)
                if (traj.find_time(t, 1e-9 * (1.0 + t)) && traj.find_time(t + h, 1e-9 * (1.0 + t))) ts.push_back(t);
        for (double t : ts) {
            const double lambda = 1.0 + h / t;
            const double kappa = std::pow(lambda, 1.0 / (1.0 - alpha));
            const double coef = (kappa - 1.0) / h;
            const State& u = state_at(traj, t);
            const State& uh = state_at(traj, t + h);
            State viol = u;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double lhs = (uh[i] - u[i]) / h;
                const double rhs = coef * u[i];
                viol[i] = alpha > 1.0 ? rhs - lhs : lhs - rhs;
            }
            const double acc = traj.accumulated_solver_error(t + h);
            if (nodewise) {
                double worst = -kInfinity;
                for (double v : viol.values) worst = std::max(worst, v);
                rep.add_hard(t, h, kInfinity, worst, 1e-8 + 2.0 * conv_inf * acc / h);
            } else {
                const State pos = positive_part(viol);
                for (double q : qs) {
                    double defect = 0.0;
                    for_each_piece(f_eff, t, lambda, [&](double a, double b, std::size_t i0, std::size_t i1) {
                        const State d = std::pow(lambda, ascale) * f_eff.plateaus()[i1] - f_eff.plateaus()[i0];
                        defect += (b - a) * lq_norm(d, q);
                    });
                    const double bound = kappa * defect / h;
                    const double slack = 1e-8 + 2.0 * l2_to_lq(space, q) * acc / h;
                    rep.add_hard(t, h, q, lq_norm(pos, q), bound + slack);
                }
            }
        }
    }
    rep.finalize();
    return rep;
}

namespace {

/// ∫_s^t e^{-ωr} ||f(r) - g(r)||_q dr for two step forcings.
double forcing_gap(const StepForcing& f, const StepForcing& g, double s, double t, double omega, double q) {
    std::vector<double> cuts{s, t};
    for (double b : f.breakpoints())
        if (b > s && b < t) cuts.push_back(b);
    for (double b : g.breakpoints())
        if (b > s && b < t) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double a = cuts[j], b = cuts[j + 1], mid = 0.5 * (a + b);
        const double gap = lq_norm(f.at(mid) - g.at(mid), q);
        if (gap == 0.0) continue;
        total += gap * (omega == 0.0 ? b - a : (std::exp(-omega * a) - std::exp(-omega * b)) / omega);
    }
    return total;
}

bool forcing_leq(const StepForcing& f, const StepForcing& g, double T) {
    std::vector<double> cuts{0.0, T};
    for (double b : f.breakpoints())
        if (b < T) cuts.push_back(b);
    for (double b : g.breakpoints())
        if (b < T) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double mid = 0.5 * (cuts[j] + cuts[j + 1]);
        const State& a = f.at(mid);
        const State& b = g.at(mid);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] > b[i]) return false;
    }
    return true;
}

}  // namespace

EstimateReport check_contraction(const Trajectory& a, const Trajectory& b, std::span<const double> qs,
                                 const SolverConfig& cfg) {
    require_same_space(a.op->space(), b.op->space(), "contraction pair");
    if (a.times.size() != b.times.size())
        throw Error(ErrorKind::invalid_argument, "contraction pair must share the time grid");
    for (std::size_t k = 0; k < a.times.size(); ++k)
        if (std::abs(a.times[k] - b.times[k]) > 1e-12 * (1.0 + a.times[k]))
            throw Error(ErrorKind::invalid_argument, "contraction pair must share the time grid");

    EstimateReport rep;
    rep.check_id = "contraction";
    rep.add_input("operator", a.op->describe());
    const double omega = std::max(a.perturbation.omega(), b.perturbation.omega());
    rep.add_input("omega", omega);
    const auto& space = *a.op->space();
    const double err = a.accumulated_solver_error() + b.accumulated_solver_error();

    for (double q : qs) {
        const double d0 = lq_norm(a.states[0] - b.states[0], q);
        const double slack = 1e-12 + l2_to_lq(space, q) * err;
        double prev = d0;
        for (std::size_t k = 1; k < a.times.size(); ++k) {
            const double t = a.times[k], s = a.times[k - 1];
            const double dk = std::exp(-omega * t) * lq_norm(a.states[k] - b.states[k], q);
            rep.add_soft(t, 0.0, q, dk, d0 + forcing_gap(a.forcing, b.forcing, 0.0, t, omega, q) + slack,
                         cfg.margin_eps);
            rep.add_soft(t, t - s, q, dk, prev + forcing_gap(a.forcing, b.forcing, s, t, omega, q) + slack,
                         cfg.margin_eps);
            prev = dk;
        }
    }

    const bool same_forcing = forcing_gap(a.forcing, b.forcing, 0.0, a.horizon(), 0.0, 1.0) == 0.0;
    if (same_forcing) {
        const State d0 = a.states[0] - b.states[0];
        for (std::size_t k = 1; k < a.times.size(); ++k) {
            const double t = a.times[k];
            const State dk = std::exp(-omega * t) * (a.states[k] - b.states[k]);
            const auto r = completely_dominated(dk, d0, cfg.margin_eps, cfg.k_samples);
            EstimateRecord rec{t, 0.0, 0.0, r.worst_lhs, r.worst_rhs, relative_margin(r.worst_lhs, r.worst_rhs),
                               r.dominated, Severity::soft};
            rep.records.push_back(rec);
        }
        rep.notes.push_back("complete-contraction (<<) records carry q = 0");
    }

    bool ordered = true;
    for (std::size_t i = 0; i < a.states[0].size(); ++i) ordered = ordered && a.states[0][i] <= b.states[0][i];
    ordered = ordered && forcing_leq(a.forcing, b.forcing, a.horizon());
    if (ordered) {
        double worst = -kInfinity, worst_t = 0.0;
        for (std::size_t k = 0; k < a.times.size(); ++k)
            for (std::size_t i = 0; i < a.states[k].size(); ++i) {
                const double v = a.states[k][i] - b.states[k][i];
                if (v > worst) {
                    worst = v;
                    worst_t = a.times[k];
                }
            }
        rep.add_hard(worst_t, 0.0, kInfinity, worst, 1e-8 + l2_to_lq(space, kInfinity) * err);
        rep.notes.push_back("order preservation: max(u - u_hat) = " + num(worst));
    }
    rep.finalize();
    return rep;
}

EstimateReport check_complete_regularity(const Trajectory& traj, std::span<const double> qs,
                                         const SolverConfig& cfg) {
    const double alpha = traj.alpha();
    require_order(alpha);
    if (traj.perturbation.kind != PerturbationKind::zero || !traj.forcing.is_identically_zero())
        throw Error(ErrorKind::invalid_argument, "complete regularity applies to unforced, unperturbed flows");
    EstimateReport rep;
    rep.check_id = "complete_regularity";
    rep.add_input("operator", traj.op->describe());
    rep.add_input("alpha", alpha);
    const State u0abs = abs(traj.initial());
    const double inv = 1.0 / std::abs(alpha - 1.0);

    const std::size_t nsteps = traj.times.size() - 1;
    const std::size_t stride = std::max<std::size_t>(1, nsteps / 400);
    for (std::size_t k = 1; k < nsteps; k += stride) {
        const double t = traj.times[k];
        const double h = traj.times[k + 1] - t;
        const State dq = (1.0 / h) * (traj.states[k + 1] - traj.states[k]);
        const State dq_abs = abs(dq);
        const double c_lim = 2.0 * inv / t;
        const auto r = completely_dominated(dq_abs, c_lim * u0abs, cfg.margin_eps, cfg.k_samples);
        rep.records.push_back({t, h, 0.0, r.worst_lhs, r.worst_rhs, relative_margin(r.worst_lhs, r.worst_rhs),
                               r.dominated, Severity::soft});
        const double kappa = std::pow(1.0 + h / t, 1.0 / (1.0 - alpha));
        const double c_h = 2.0 * std::abs(kappa - 1.0) / h;
        const auto rh = completely_dominated(dq_abs, c_h * u0abs, 0.0, cfg.k_samples);
        rep.records.push_back({t, h, 0.0, rh.worst_lhs, rh.worst_rhs, relative_margin(rh.worst_lhs, rh.worst_rhs),
                               rh.dominated, Severity::info});
        for (double q : qs) rep.add_soft(t, h, q, lq_norm(dq, q), c_lim * lq_norm(traj.initial(), q), cfg.margin_eps);
        double worst_ratio = 0.0, wl = 0.0, wr = 0.0;
        for (std::size_t i = 0; i < dq.size(); ++i) {
            const double bound = c_lim * u0abs[i];
            const double ratio = bound > 0.0 ? std::abs(dq[i]) / bound : (dq[i] != 0.0 ? kInfinity : 0.0);
            if (ratio >= worst_ratio) {
                worst_ratio = ratio;
                wl = std::abs(dq[i]);
                wr = bound;
            }
        }
        rep.add_info(t, h, -1.0, wl, wr);
    }
    rep.notes.push_back("q = 0 rows: |du/dt| << domination; q = -1 rows: nodewise |du/dt| <= 2|u0|/(|alpha-1| t), report only");
    rep.finalize();
    return rep;
}

Trajectory scaled_run(const Trajectory& traj, double lambda) {
    const double alpha = traj.alpha();
    require_order(alpha);
    if (traj.perturbation.kind != PerturbationKind::zero)
        throw Error(ErrorKind::invalid_argument, "scaling identity needs F = 0");
    const double c = std::pow(lambda, 1.0 / (alpha - 1.0));
    const StepForcing f = traj.forcing.rescaled(std::pow(lambda, alpha / (alpha - 1.0)), lambda);
    double T = traj.horizon() / lambda;
    T = std::min(T, f.horizon());
    auto out = evolve(traj.op, traj.perturbation, c * traj.initial(), f, T, traj.steps_per_interval, traj.cfg);
    out.label = traj.label.empty() ? "scaled" : traj.label + "-scaled";
    return out;
}

EstimateReport check_trajectory_scaling(const Trajectory& traj, double lambda, const SolverConfig& cfg,
                                        const Trajectory* direct) {
    (void)cfg;
    EstimateReport rep;
    rep.check_id = "scaling";
    rep.add_input("operator", traj.op->describe());
    rep.add_input("lambda", lambda);
    Trajectory own;
    if (direct == nullptr) {
        own = scaled_run(traj, lambda);
        direct = &own;
    }
    const Trajectory mapped = rescale_trajectory(traj, lambda);
    if (mapped.times.size() != direct->times.size())
        throw Error(ErrorKind::invalid_argument, "scaled run does not share the step structure");
    const double c = std::pow(lambda, 1.0 / (traj.alpha() - 1.0));
    const double tol_step = traj.cfg.tol_resolvent;
    double acc = 0.0;
    for (std::size_t k = 1; k < mapped.times.size(); ++k) {
        // each implicit step can be off by dt times the residual tolerance
        acc += (c * traj.steps[k - 1].dt + direct->steps[k - 1].dt) * tol_step;
        const double scale = std::max(lq_norm(mapped.states[k], 2.0), lq_norm(direct->states[k], 2.0));
        const double diff = lq_norm(mapped.states[k] - direct->states[k], 2.0);
        rep.add_hard(mapped.times[k], 0.0, 2.0, diff, 10.0 * acc + 1e-12 * scale);
    }
    rep.finalize();
    return rep;
}

SmoothingExponents smoothing_exponents(int N, double p, double q) {
    if (N < 2 || !(p > 1.0) || !(p < N) || p == 2.0)
        throw Error(ErrorKind::invalid_argument, "smoothing exponents need N >= 2, 1 < p < N and p != 2");
    SmoothingExponents e;
    const double Nd = N;
    const double critical = (2.0 - p) * (Nd - p) / (p - 1.0);
    if (critical >= p) {
        e.q0 = critical * (1.0 + 1e-6);
        e.q0_from_critical = true;
    } else {
        e.q0 = p;
    }
    e.q_upper = (Nd - 1.0) * e.q0 / (Nd - p);
    e.q_lower = (2.0 - p) * (Nd - 1.0) / (p - 1.0);
    if (!(q >= 1.0) || q > e.q_upper * (1.0 + 1e-15) || !(q > e.q_lower)) {
        std::ostringstream os;
        os << "q = " << q << " outside the window (" << std::max(1.0, e.q_lower) << ", " << e.q_upper << "]";
        throw Error(ErrorKind::q_out_of_window, os.str());
    }
    const double D = (p - 1.0) * e.q0 + (Nd - p) * (p - 2.0);
    e.alpha_star = (Nd - p) / D;
    e.beta_star = ((2.0 / p - 1.0) * Nd + p - 2.0 / p) / D + 1.0;
    e.gamma_star = (p - 1.0) * e.q0 / D;
    const double r = q * (Nd - p) / ((Nd - 1.0) * e.q0);
    const double den = 1.0 - e.gamma_star * (1.0 - r);
    e.alpha_q = e.alpha_star / den;
    e.beta_q = (0.5 * e.beta_star + e.gamma_star * r) / den;
    e.gamma_q = e.gamma_star * r / den;
    return e;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::invalid_argument, "slope fit needs >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::invalid_argument, "slope fit needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

std::vector<std::size_t> window_indices(const Trajectory& tr, const SmoothingWindow& w) {
    std::vector<std::size_t> idx;
    const double l0 = std::log(w.t_lo), l1 = std::log(w.t_hi);
    for (std::size_t j = 0; j < w.samples; ++j) {
        const double t = std::exp(l0 + (l1 - l0) * static_cast<double>(j) / (w.samples - 1));
        auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t);
        if (it == tr.times.end()) break;
        std::size_t k = static_cast<std::size_t>(it - tr.times.begin());
        if (k > 0 && std::abs(tr.times[k - 1] - t) < std::abs(tr.times[k] - t)) --k;
        if (k == 0 || k + 1 >= tr.times.size()) continue;
        if (idx.empty() || idx.back() != k) idx.push_back(k);
    }
    return idx;
}

}  // namespace

EstimateReport check_lq_linfty_smoothing(std::span<const Trajectory> family, double q, const SolverConfig& cfg,
                                         const SmoothingWindow& window) {
    EstimateReport rep;
    rep.check_id = "smoothing";
    rep.add_input("q", q);
    rep.add_input("t_lo", window.t_lo);
    rep.add_input("t_hi", window.t_hi);
    bool all_skipped = !family.empty();
    for (const auto& tr : family) {
        const auto kind = tr.op->kind();
        if (kind == OperatorKind::scalar_power)
            throw Error(ErrorKind::kind_unsupported, "smoothing rates do not apply to ScalarPower");
        const auto idx = window_indices(tr, window);
        if (idx.size() < 3) throw Error(ErrorKind::grid_too_coarse, "too few recorded times inside the slope window");
        if (kind == OperatorKind::porous_medium_1d) {
            all_skipped = false;
            const double m = tr.op->spec().m;
            if (m == 1.0) throw Error(ErrorKind::unsupported_order, "smoothing rate needs m != 1");
            const double u0n = lq_norm(tr.initial(), 1.0);
            std::vector<double> ts, ys;
            for (std::size_t k : idx) {
                const double t = tr.times[k], h = tr.times[k + 1] - t;
                const double y = lq_norm(tr.states[k + 1] - tr.states[k], 1.0) / h;
                rep.add_soft(t, h, 1.0, y, 2.0 * u0n / (std::abs(m - 1.0) * t), cfg.margin_eps);
                ts.push_back(t);
                ys.push_back(y);
            }
            const double slope = loglog_slope(ts, ys);
            const double allowed = std::max(0.15, 0.1);
            rep.add_hard(window.t_hi, 0.0, 1.0, std::abs(slope + 1.0), allowed);
            rep.notes.push_back(tr.label + ": L1 rate slope " + num(slope) + " (expected -1)");
        } else if (kind == OperatorKind::dirichlet_to_neumann) {
            const double p = tr.op->spec().p;
            if (!(p > 1.0 && p < 2.0)) {
                rep.notes.push_back(tr.label + ": p = " + num(p) + " outside 1 < p < N = 2, skipped");
                continue;
            }
            SmoothingExponents e;
            try {
                e = smoothing_exponents(2, p, q);
            } catch (const Error& err) {
                rep.notes.push_back(tr.label + ": " + err.what() + ", skipped");
                continue;
            }
            all_skipped = false;
            if (e.q0_from_critical) rep.notes.push_back(tr.label + ": q0 taken just above the critical value");
            std::vector<double> ts, un, dn;
            for (std::size_t k : idx) {
                const double t = tr.times[k], h = tr.times[k + 1] - t;
                ts.push_back(t);
                un.push_back(std::max(lq_norm(tr.states[k], kInfinity), 1e-300));
                dn.push_back(std::max(lq_norm(tr.states[k + 1] - tr.states[k], kInfinity) / h, 1e-300));
            }
            const double su = loglog_slope(ts, un), sd = loglog_slope(ts, dn);
            const double au = e.alpha_q, ad = e.alpha_q + 1.0;
            rep.add_hard(window.t_hi, 0.0, kInfinity, -su, au + std::max(0.15 * au, 0.1));
            rep.add_hard(window.t_hi, 0.0, kInfinity, -sd, ad + std::max(0.15 * ad, 0.1));
            rep.notes.push_back(tr.label + ": slopes " + num(su) + " (sup norm) and " + num(sd) +
                                " (time derivative); rates " + num(-au) + ", " + num(-ad));
        } else {
            throw Error(ErrorKind::kind_unsupported,
                        "smoothing rates are implemented for PorousMedium1D and DirichletToNeumann");
        }
    }
    if (all_skipped) rep.skipped = true;
    rep.finalize();
    return rep;
}

}  // namespace accretive
