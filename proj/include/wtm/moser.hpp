// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wtm/errors.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/reduction.hpp"

namespace wtm {

struct IterationRecord {
    std::size_t iteration = 0;
    double value = 0.0;
    double constraint = 0.0;
    double phi0 = 0.0;
    double min_slope = 0.0;
    bool nondecreasing = true;
};

struct OptimizerSettings {
    double initial_step = 1.0;
    std::size_t max_iterations = 100'000;
    double constraint_tolerance = 1e-6;
    double stall_tolerance = 1e-9;
    std::size_t stall_window = 50;
    double critical_tolerance = 1e-4;  ///< |F(2T) - F(T)| / F(T) required at beta = 1
    bool refine = true;                ///< also solve on 2N cells and record it in the history
    std::function<void(const IterationRecord&)> observer;
};

/// sup F(phi) = int_0^inf exp(beta phi^{q'} - t) dt over nondecreasing phi with
/// phi(0) = 0 and int (phi')^q dt <= 1, discretised by N graded cells on [0, T].
struct MoserProblem {
    double q = 2.0;
    double beta = 1.0;
    double T = 40.0;
    std::size_t N = 512;
    double grading = 3.0;
    OptimizerSettings settings;

    double conjugate() const { return q / (q - 1.0); }

    void validate() const {
        if (!(q > 1.0) || !std::isfinite(q)) throw Error(Errc::exponent_out_of_range, "q must exceed 1");
        if (!(beta > 0.0) || beta > 1.0) throw Error(Errc::invalid_problem, "beta must lie in (0, 1]");
        if (!(T > 0.0) || !std::isfinite(T)) throw Error(Errc::invalid_problem, "T must be positive");
        if (N < 16) throw Error(Errc::invalid_problem, "N must be at least 16");
        if (!(grading >= 1.0)) throw Error(Errc::invalid_problem, "grading ratio must be >= 1");
        if (!(settings.initial_step > 0.0)) throw Error(Errc::invalid_problem, "step size must be positive");
        if (!(settings.constraint_tolerance > 0.0))
            throw Error(Errc::invalid_problem, "constraint tolerance must be positive");
        if (settings.stall_window == 0) throw Error(Errc::invalid_problem, "stall window must be positive");
    }

    std::vector<double> grid() const { return graded_grid(T, N, grading); }
};

inline double functional_F(const OneDProfile& phi, const MoserProblem& problem) {
    return exponential_functional(phi, problem.beta, problem.conjugate()).value();
}

inline double constraint_G(const OneDProfile& phi, const MoserProblem& problem) {
    return dirichlet_energy(phi, problem.q);
}

/// phi_tau(t) = t tau^{-1/q} on [0, tau], tau^{1/q'} afterwards, on the problem
/// grid with tau inserted as a node.
inline OneDProfile moser_family(double tau, const MoserProblem& problem) {
    if (!(tau > 0.0) || !(tau < problem.T))
        throw Error(Errc::breakpoint_out_of_range, "breakpoint tau must lie in (0, T)");
    std::vector<double> t = problem.grid();
    const auto it = std::lower_bound(t.begin(), t.end(), tau);
    if (*it != tau) t.insert(it, tau);
    const double slope = std::pow(tau, -1.0 / problem.q);
    const double cap = std::pow(tau, 1.0 / problem.conjugate());
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = t[i] < tau ? t[i] * slope : cap;
    return OneDProfile(std::move(t), std::move(v));
}

struct TauScan {
    std::vector<double> taus;
    std::vector<double> values;
    double best_tau = 0.0;
    double best_value = 0.0;
};

/// 32 logarithmically spaced tau in [0.01 T, 0.9 T].
inline TauScan tau_scan(const MoserProblem& problem, std::size_t count = 32) {
    TauScan scan;
    const double lo = 0.01 * problem.T;
    const double hi = 0.9 * problem.T;
    for (std::size_t k = 0; k < count; ++k) {
        const double tau = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1));
        const double v = functional_F(moser_family(tau, problem), problem);
        scan.taus.push_back(tau);
        scan.values.push_back(v);
        if (v > scan.best_value) {
            scan.best_value = v;
            scan.best_tau = tau;
        }
    }
    return scan;
}

/// phi(t_i) <= t_i^{1/q'} G^{1/q} at every node.
inline bool satisfies_holder_bound(const OneDProfile& phi, double q, double rel_slack = 1e-12) {
    const double qp = q / (q - 1.0);
    const double g = std::pow(dirichlet_energy(phi, q), 1.0 / q);
    const auto t = phi.grid();
    const auto v = phi.values();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double bound = std::pow(t[i], 1.0 / qp) * g;
        if (v[i] > bound + rel_slack * (1.0 + bound)) return false;
    }
    return true;
}

struct RefinementEntry {
    std::size_t N = 0;
    double value = 0.0;
};

struct MoserReport {
    double q = 0.0;
    double beta = 0.0;
    double T = 0.0;
    std::size_t N = 0;
    double value = 0.0;
    OneDProfile profile = OneDProfile::zero({0.0, 1.0});
    double constraint = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    std::vector<double> trace;
    std::vector<RefinementEntry> history;
    double initial_value = 0.0;
    double baseline_value = 0.0;
    double baseline_tau = 0.0;
    double tail = 0.0;
    double tail_bound = 0.0;
    std::optional<double> value_doubled_T;
    bool converged = false;
    std::string status;
};

class NonConvergence : public Error {
public:
    NonConvergence(std::string what, MoserReport report)
        : Error(Errc::non_convergence, std::move(what)), report_(std::move(report)) {}
    const MoserReport& report() const noexcept { return report_; }

private:
    MoserReport report_;
};

namespace detail {

/// F and its gradient in the slope variables for a fixed grid, with Gauss-Legendre
/// nodes per cell and the exact constant-extension tail.
class MoserObjective {
public:
    MoserObjective(std::vector<double> t, double q, double beta)
        : t_(std::move(t)), q_(q), qp_(q / (q - 1.0)), beta_(beta) {
        const GaussRule rule = gauss_legendre(4);
        const std::size_t n = t_.size() - 1;
        dt_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            dt_[i] = t_[i + 1] - t_[i];
            const double half = 0.5 * dt_[i];
            for (std::size_t p = 0; p < rule.size(); ++p) {
                const double off = half * (1.0 + rule.nodes[p]);
                offset_.push_back(off);
                weight_.push_back(half * rule.weights[p]);
                abscissa_.push_back(t_[i] + off);
            }
        }
        per_cell_ = rule.size();
    }

    std::size_t size() const { return dt_.size(); }
    std::span<const double> widths() const { return dt_; }
    const std::vector<double>& grid() const { return t_; }
    double q() const { return q_; }

    double constraint(std::span<const double> s) const {
        double g = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) g += std::pow(s[i], q_) * dt_[i];
        return g;
    }

    double value(std::span<const double> s) const { return evaluate(s, nullptr); }

    double value_and_gradient(std::span<const double> s, std::vector<double>& grad) const {
        grad.assign(s.size(), 0.0);
        return evaluate(s, &grad);
    }

private:
    double evaluate(std::span<const double> s, std::vector<double>* grad) const {
        const std::size_t n = dt_.size();
        double total = 0.0;
        double phi = 0.0;
        std::vector<double> cell_deriv;
        if (grad) cell_deriv.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double cell = 0.0;
            double sum_d = 0.0;
            double sum_dl = 0.0;
            for (std::size_t p = 0; p < per_cell_; ++p) {
                const std::size_t k = i * per_cell_ + p;
                const double x = phi + s[i] * offset_[k];
                const double xp = std::pow(x, qp_);
                const double e = weight_[k] * std::exp(beta_ * xp - abscissa_[k]);
                cell += e;
                if (grad && x > 0.0) {
                    const double d = e * beta_ * qp_ * xp / x;
                    sum_d += d;
                    sum_dl += d * offset_[k];
                }
            }
            total += cell;
            if (grad) {
                cell_deriv[i] = sum_d;
                (*grad)[i] = sum_dl;
            }
            phi += s[i] * dt_[i];
        }
        const double phip = std::pow(phi, qp_);
        const double tail = std::exp(beta_ * phip - t_.back());
        total += tail;
        if (grad) {
            double suffix = phi > 0.0 ? tail * beta_ * qp_ * phip / phi : 0.0;
            for (std::size_t j = n; j-- > 0;) {
                (*grad)[j] += dt_[j] * suffix;
                suffix += cell_deriv[j];
            }
        }
        return total;
    }

    std::vector<double> t_;
    std::vector<double> dt_;
    std::vector<double> offset_;
    std::vector<double> weight_;
    std::vector<double> abscissa_;
    std::size_t per_cell_ = 0;
    double q_;
    double qp_;
    double beta_;
};

/// Clip at zero and rescale onto G = 1. Returns false if nothing is left.
inline bool project(const MoserObjective& obj, std::vector<double>& s) {
    for (double& x : s) x = std::max(0.0, x);
    const double g = obj.constraint(s);
    if (!(g > 0.0)) return false;
    const double scale = std::pow(g, -1.0 / obj.q());
    for (double& x : s) x *= scale;
    return true;
}

inline void uniform_slopes(const MoserObjective& obj, std::vector<double>& s) {
    s.assign(obj.size(), 1.0);
    project(obj, s);
}

/// Slopes of a profile resampled onto the objective grid.
inline std::vector<double> slopes_on_grid(const OneDProfile& phi, const std::vector<double>& t) {
    std::vector<double> s(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) s[i] = (phi(t[i + 1]) - phi(t[i])) / (t[i + 1] - t[i]);
    return s;
}

struct AscentResult {
    std::vector<double> slopes;
    double value = 0.0;
    std::vector<double> trace;
    std::size_t iterations = 0;
    bool stalled = false;
};

/**
 * Projected gradient ascent on the slopes. Two directions are tried in turn:
 * the gradient scaled by the inverse of the constraint's Hessian diagonal
 * (q-1) s^{q-2} dt, then the plain gradient over dt; both are projected on the
 * tangent space of G = 1 before the step. Steps start from the last accepted
 * size, are halved until F increases and doubled after acceptance.
 */
inline AscentResult ascend(const MoserObjective& obj, std::vector<double> s, const OptimizerSettings& st,
                           std::size_t iteration_offset = 0) {
    AscentResult out;
    const std::size_t n = obj.size();
    const auto dt = obj.widths();
    const double q = obj.q();

    auto notify = [&](std::size_t it, double value) {
        if (!st.observer) return;
        IterationRecord rec;
        rec.iteration = it;
        rec.value = value;
        rec.constraint = obj.constraint(s);
        rec.phi0 = 0.0;
        rec.min_slope = *std::min_element(s.begin(), s.end());
        rec.nondecreasing = rec.min_slope >= 0.0;
        st.observer(rec);
    };

    std::vector<double> grad;
    double F = obj.value_and_gradient(s, grad);
    out.trace.push_back(F);
    notify(iteration_offset, F);

    double eta[2] = {st.initial_step, st.initial_step};
    std::vector<double> dir(n), trial(n);
    std::size_t it = 0;
    while (it < st.max_iterations) {
        bool accepted = false;
        for (int kind = 0; kind < 2 && !accepted; ++kind) {
            const double smax = *std::max_element(s.begin(), s.end());
            for (std::size_t i = 0; i < n; ++i) {
                double m = 1.0;
                if (kind == 0) m = std::pow(std::max(s[i], 1e-3 * smax), q - 2.0);
                dir[i] = grad[i] / (dt[i] * m);
            }
            double num = 0.0;
            double den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = std::pow(s[i], q - 1.0) * dt[i];
                num += w * dir[i];
                den += w * s[i];
            }
            const double c = den > 0.0 ? num / den : 0.0;
            double dmax = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dir[i] -= c * s[i];
                dmax = std::max(dmax, std::abs(dir[i]));
            }
            if (!(dmax > 0.0)) continue;
            double step = eta[kind];
            for (int halvings = 0; halvings < 80; ++halvings) {
                if (step * dmax < 1e-16 * smax) break;
                for (std::size_t i = 0; i < n; ++i) trial[i] = s[i] + step * dir[i];
                if (project(obj, trial)) {
                    const double Ft = obj.value(trial);
                    if (Ft > F) {
                        s.swap(trial);
                        F = obj.value_and_gradient(s, grad);
                        eta[kind] = 2.0 * step;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!accepted) eta[kind] = st.initial_step;
        }
        if (!accepted) {
            out.stalled = true;
            break;
        }
        ++it;
        out.trace.push_back(F);
        notify(iteration_offset + it, F);
        const std::size_t len = out.trace.size();
        if (len > st.stall_window &&
            out.trace[len - 1] - out.trace[len - 1 - st.stall_window] <= st.stall_tolerance * std::abs(F)) {
            out.stalled = true;
            break;
        }
    }
    out.slopes = std::move(s);
    out.value = F;
    out.iterations = it;
    return out;
}

}  // namespace detail

using MoserInit = std::variant<std::monostate, OneDProfile>;  ///< monostate: "auto"

/// Maximises F under G <= 1. The initial profile is resampled on the problem
/// grid and scaled up to G = 1; "auto" starts from the best member of a tau-scan.
inline MoserReport optimize(const MoserProblem& problem, const MoserInit& init = {}) {
    problem.validate();
    MoserReport rep;
    rep.q = problem.q;
    rep.beta = problem.beta;
    rep.T = problem.T;
    rep.N = problem.N;

    const TauScan scan = tau_scan(problem);
    rep.baseline_value = scan.best_value;
    rep.baseline_tau = scan.best_tau;

    const detail::MoserObjective obj(problem.grid(), problem.q, problem.beta);
    std::vector<double> s;
    if (const auto* phi = std::get_if<OneDProfile>(&init)) {
        const double g = dirichlet_energy(*phi, problem.q);
        if (g > 1.0 + problem.settings.constraint_tolerance)
            throw Error(Errc::invalid_problem, "initial profile violates the constraint");
        s = detail::slopes_on_grid(*phi, obj.grid());
    } else {
        s = detail::slopes_on_grid(moser_family(scan.best_tau, problem), obj.grid());
    }
    rep.initial_value = obj.value(s);
    if (!detail::project(obj, s)) {
        // phi = 0 is a critical point of F (the gradient vanishes), so the
        // first step moves to the uniform-slope profile
        if (problem.settings.observer) {
            IterationRecord rec;
            rec.value = rep.initial_value;
            problem.settings.observer(rec);
        }
        detail::uniform_slopes(obj, s);
    }

    detail::AscentResult run = detail::ascend(obj, std::move(s), problem.settings);
    rep.trace = run.trace;
    rep.trace.insert(rep.trace.begin(), rep.initial_value);
    rep.iterations = run.iterations;
    rep.value = run.value;
    rep.profile = OneDProfile::from_slopes(obj.grid(), run.slopes);
    rep.constraint = constraint_G(rep.profile, problem);
    rep.residual = std::abs(rep.constraint - 1.0);
    const ExponentialFunctional ef = exponential_functional(rep.profile, problem.beta, problem.conjugate());
    rep.tail = ef.tail;
    rep.tail_bound = ef.tail_bound;
    rep.history.push_back({problem.N, rep.value});

    if (!run.stalled) {
        rep.status = "iteration cap reached before the value settled";
        throw NonConvergence(rep.status, rep);
    }
    if (rep.residual > problem.settings.constraint_tolerance) {
        rep.status = "constraint residual above tolerance";
        throw NonConvergence(rep.status, rep);
    }

    if (problem.beta == 1.0) {
        std::vector<double> t2 = obj.grid();
        const std::size_t n = t2.size();
        for (std::size_t i = 1; i < n; ++i) t2.push_back(problem.T + t2[i]);
        const detail::MoserObjective ext(t2, problem.q, problem.beta);
        std::vector<double> s2 = run.slopes;
        s2.resize(ext.size(), 0.0);
        OptimizerSettings quiet = problem.settings;
        quiet.observer = nullptr;
        const detail::AscentResult r2 = detail::ascend(ext, std::move(s2), quiet);
        rep.value_doubled_T = r2.value;
        if (std::abs(r2.value - rep.value) >= problem.settings.critical_tolerance * rep.value) {
            rep.status = "critical case: values at T and 2T differ by more than the tolerance";
            throw NonConvergence(rep.status, rep);
        }
    }

    if (problem.settings.refine) {
        MoserProblem fine = problem;
        fine.N = 2 * problem.N;
        fine.settings.observer = nullptr;
        const detail::MoserObjective fobj(fine.grid(), fine.q, fine.beta);
        std::vector<double> sf = detail::slopes_on_grid(rep.profile, fobj.grid());
        detail::project(fobj, sf);
        const detail::AscentResult rf = detail::ascend(fobj, std::move(sf), fine.settings);
        rep.history.push_back({fine.N, rf.value});
    }

    rep.converged = true;
    rep.status = "converged";
    return rep;
}

struct SupremumEstimate {
    double A_estimate = 0.0;
    std::vector<RefinementEntry> values;
    std::vector<MoserReport> reports;
    bool monotone = true;
};

/// One optimisation per N (no inner refinement) and a Richardson step on the
/// last two values assuming second-order convergence in 1/N.
inline SupremumEstimate supremum_estimate(const MoserProblem& base, const std::vector<std::size_t>& schedule) {
    if (schedule.empty()) throw Error(Errc::invalid_problem, "schedule must not be empty");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1]) throw Error(Errc::invalid_problem, "schedule must be increasing");
    SupremumEstimate est;
    for (std::size_t n : schedule) {
        MoserProblem p = base;
        p.N = n;
        p.settings.refine = false;
        MoserReport r = optimize(p);
        est.values.push_back({n, r.value});
        est.reports.push_back(std::move(r));
    }
    const auto& v = est.values;
    est.A_estimate = v.back().value;
    if (v.size() >= 2) {
        const double ratio = static_cast<double>(v.back().N) / static_cast<double>(v[v.size() - 2].N);
        est.A_estimate += (v.back().value - v[v.size() - 2].value) / (ratio * ratio - 1.0);
    }
    int sign = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double d = v[i].value - v[i - 1].value;
        const int sg = (d > 0.0) - (d < 0.0);
        if (sg == 0) continue;
        if (sign != 0 && sg != sign) est.monotone = false;
        sign = sg;
    }
    return est;
}

}  // namespace wtm
