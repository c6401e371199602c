// SPDX-License-Identifier: MIT
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "wtm/wtm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

struct WeightArgs {
    std::string file;
    int d = 0;
    std::vector<int> active;
    std::vector<double> A;

    void add(CLI::App* app) {
        app->add_option("--weight", file, "weight spec JSON {\"d\", \"active\" (1-based), \"exponents\"}");
        app->add_option("--d", d, "ambient dimension d");
        app->add_option("--active", active, "active cone axes J (1-based, comma separated)")->delimiter(',');
        app->add_option("--A", A, "monomial exponents A_j > 0, one per active axis")->delimiter(',');
    }

    wtm::WeightSpec resolve() const {
        if (!file.empty()) return wtm::io::read_weight_spec(file);
        if (d == 0) throw wtm::Error(wtm::Errc::invalid_spec, "give --weight FILE or --d/--active/--A");
        std::vector<int> zero_based;
        for (int j : active) zero_based.push_back(j - 1);
        return wtm::WeightSpec(wtm::ConeSpec(d, zero_based), A);
    }
};

struct Common {
    std::string out = ".";
    std::string label = "run";
    std::uint64_t seed = kDefaultSeed;

    void add(CLI::App* app) {
        app->add_option("--out", out, "output directory")->capture_default_str();
        app->add_option("--label", label, "label used in output file names")->capture_default_str();
        app->add_option("--seed", seed, "seed for randomized quadrature")->capture_default_str();
    }

    fs::path file(const std::string& cmd, const std::string& suffix) const {
        return fs::path(out) / (cmd + "_" + label + suffix);
    }
};

/// Everything a subcommand produces; written only after it has succeeded.
struct Result {
    json report;
    std::vector<std::pair<fs::path, std::string>> csv;
    std::optional<std::pair<fs::path, wtm::GridFunction>> grid;
    wtm::io::Encoding encoding = wtm::io::Encoding::csv;
};

wtm::ScalingConvention parse_scaling(const std::string& s) {
    if (s == "energy") return wtm::ScalingConvention::energy_preserving;
    if (s == "unit") return wtm::ScalingConvention::unit_measure;
    throw wtm::Error(wtm::Errc::invalid_problem, "scaling must be 'energy' or 'unit'");
}

json polya_szego_rows(const wtm::GridFunction& f, const wtm::WeightSpec& spec, const wtm::GeometricConstants& c,
                      std::size_t radial_n) {
    json rows = json::array();
    for (double p : {1.0, 2.0, c.D}) {
        const auto ps = wtm::polya_szego_check(f, spec, c, p, 1e-2, radial_n);
        json row = wtm::io::to_json(ps);
        row["p"] = p;
        rows.push_back(row);
    }
    return rows;
}

// ---- constants -------------------------------------------------------------

struct ConstantsCmd {
    WeightArgs w;
    Common common;
    std::size_t budget = 200'000;

    Result run() const {
        const wtm::WeightSpec spec = w.resolve();
        if (budget < wtm::kMinimumQuadratureBudget)
            throw wtm::Error(wtm::Errc::budget_too_small, "budget must be at least 10000");
        const auto c = wtm::geometric_constants(spec);
        const auto quad = wtm::unit_ball_measure_quadrature(spec, budget, common.seed);
        wtm::HomogeneousWeight hw{spec.dimension(), spec.alpha(),
                                  [spec](std::span<const double> x) { return spec.unchecked(x); },
                                  [spec](std::span<const double> x) { return spec.cone().contains(x); }};
        const auto mc = wtm::monte_carlo_unit_ball_measure(hw, budget, common.seed);
        Result r;
        r.report = wtm::io::to_json(c);
        r.report["weight"] = wtm::io::to_json(spec);
        r.report["checks"] = {{"C_D_quadrature", quad.value},
                              {"C_D_quadrature_error", quad.error},
                              {"C_D_monte_carlo", mc.value},
                              {"C_D_monte_carlo_error", mc.error}};
        return r;
    }
};

// ---- fixture ---------------------------------------------------------------

struct FixtureCmd {
    WeightArgs w;
    Common common;
    std::string kind = "radial_bump";
    std::size_t n = 128;
    std::string encoding = "csv";

    Result run() const {
        const wtm::WeightSpec spec = w.resolve();
        const auto k = wtm::fixtures::parse_kind(kind);
        if (!k) throw wtm::Error(wtm::Errc::invalid_problem, "unknown fixture '" + kind + "'");
        if (encoding != "csv" && encoding != "f64le")
            throw wtm::Error(wtm::Errc::invalid_problem, "encoding must be csv or f64le");
        Result r;
        r.encoding = encoding == "csv" ? wtm::io::Encoding::csv : wtm::io::Encoding::f64le;
        r.grid.emplace(common.file("fixture", ".json"), wtm::fixtures::make(*k, spec, n));
        r.report = {{"kind", kind}, {"n", n}, {"weight", wtm::io::to_json(spec)}};
        return r;
    }
};

// ---- rearrange -------------------------------------------------------------

struct RearrangeCmd {
    WeightArgs w;
    Common common;
    std::string input;
    std::size_t radial_n = 512;

    Result run() const {
        const wtm::WeightSpec spec = w.resolve();
        const wtm::GridFunction f = wtm::io::read_grid_function(input);
        wtm::require_compact_support(f, spec);
        if (f.max_abs() == 0.0) throw wtm::Error(wtm::Errc::zero_function, "zero function");
        const auto c = wtm::geometric_constants(spec);
        const auto U = wtm::radial_rearrangement(f, spec, c, radial_n);
        Result r;
        r.report = {{"equimeasurability", wtm::io::to_json(wtm::equimeasurability(f, spec, c, radial_n))},
                    {"polya_szego", polya_szego_rows(f, spec, c, radial_n)},
                    {"support_radius", U.support_radius()}};
        r.report["equimeasurability"].erase("thresholds");
        r.report["equimeasurability"].erase("measure_original");
        r.report["equimeasurability"].erase("measure_rearranged");
        r.csv.emplace_back(common.file("rearrange", ".csv"), wtm::io::profile_csv(U));
        return r;
    }
};

// ---- reduce ----------------------------------------------------------------

struct ReduceCmd {
    WeightArgs w;
    Common common;
    std::string input;
    std::string profile;
    double beta = 1.0;
    double T = 0.0;
    std::size_t N = 2048;
    std::string scaling = "energy";

    Result run() const {
        const wtm::WeightSpec spec = w.resolve();
        const auto conv = parse_scaling(scaling);
        if (!(beta > 0.0) || beta > 1.0) throw wtm::Error(wtm::Errc::coefficient_out_of_range, "beta must lie in (0, 1]");
        if (N < 16) throw wtm::Error(wtm::Errc::invalid_problem, "N must be at least 16");
        if (input.empty() == profile.empty())
            throw wtm::Error(wtm::Errc::invalid_problem, "give exactly one of --input or --profile");
        const auto c = wtm::geometric_constants(spec);
        const wtm::RadialProfile U = profile.empty()
                                         ? wtm::radial_rearrangement(wtm::io::read_grid_function(input), spec, c)
                                         : wtm::io::read_radial_profile(profile);
        const double t_max = T > 0.0 ? T : 40.0 * c.D;
        const double a = beta * wtm::critical_coefficient(c, conv);
        const wtm::OneDProfile phi = wtm::profile_to_phi(U, c, t_max, N, conv);
        Result r;
        r.report = wtm::io::to_json(wtm::reduce(U, c, a, t_max, N, conv));
        r.report["T"] = t_max;
        r.report["N"] = N;
        r.report["scaling"] = scaling;
        r.csv.emplace_back(common.file("reduce", "_phi.csv"), wtm::io::profile_csv(phi));
        return r;
    }
};

// ---- optimize --------------------------------------------------------------

struct ProblemArgs {
    double q = 2.0;
    double beta = 1.0;
    double T = 40.0;
    std::size_t N = 512;
    double grading = 3.0;
    double step = 1.0;
    std::size_t max_iter = 100'000;
    double tol = 1e-6;

    void add(CLI::App* app, bool with_q = true) {
        if (with_q) app->add_option("--q", q, "constraint exponent q > 1 (q' = q/(q-1))")->capture_default_str();
        app->add_option("--beta", beta, "exponential coefficient beta in (0, 1]")->capture_default_str();
        app->add_option("--T", T, "truncation T of the t-axis")->capture_default_str();
        app->add_option("--N", N, "number of profile cells N")->capture_default_str();
        app->add_option("--grading", grading, "end/middle cell-width ratio of the graded grid")->capture_default_str();
        app->add_option("--step", step, "initial step size of the line search")->capture_default_str();
        app->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
        app->add_option("--tol", tol, "constraint tolerance |G - 1|")->capture_default_str();
    }

    wtm::MoserProblem problem() const {
        wtm::MoserProblem p;
        p.q = q;
        p.beta = beta;
        p.T = T;
        p.N = N;
        p.grading = grading;
        p.settings.initial_step = step;
        p.settings.max_iterations = max_iter;
        p.settings.constraint_tolerance = tol;
        p.validate();
        return p;
    }
};

struct OptimizeCmd {
    ProblemArgs args;
    Common common;
    std::vector<std::size_t> schedule;
    std::string init = "auto";

    Result run() const {
        const wtm::MoserProblem p = args.problem();
        wtm::MoserInit start;
        if (init == "zero") {
            start = wtm::OneDProfile::zero(p.grid());
        } else if (init != "auto") {
            start = wtm::io::read_phi_profile(init);
        }
        if (!schedule.empty() && init != "auto")
            throw wtm::Error(wtm::Errc::invalid_problem, "--init cannot be combined with --schedule");
        Result r;
        if (!schedule.empty()) {
            const wtm::SupremumEstimate est = wtm::supremum_estimate(p, schedule);
            wtm::MoserReport top = est.reports.back();
            top.history = est.values;
            r.report = wtm::io::to_json(top);
            r.report["A_estimate"] = est.A_estimate;
            r.report["monotone"] = est.monotone;
            r.csv.emplace_back(common.file("optimize", "_phi.csv"), wtm::io::profile_csv(top.profile));
        } else {
            const wtm::MoserReport rep = wtm::optimize(p, start);
            r.report = wtm::io::to_json(rep);
            r.csv.emplace_back(common.file("optimize", "_phi.csv"), wtm::io::profile_csv(rep.profile));
        }
        return r;
    }
};

// ---- verify ----------------------------------------------------------------

/// rearrange -> reduce -> identities -> comparison of the exponential
/// functional of u = f / ||grad f||_D with the one-dimensional supremum, and
/// the extremal built from the maximiser.
struct VerifyCmd {
    WeightArgs w;
    Common common;
    ProblemArgs args;
    std::string input;
    std::size_t reduce_N = 2048;

    Result run() const {
        const wtm::WeightSpec spec = w.resolve();
        const auto c = wtm::geometric_constants(spec);
        wtm::MoserProblem p = args.problem();
        p.q = c.D;
        const wtm::GridFunction f = wtm::io::read_grid_function(input);
        wtm::require_compact_support(f, spec);
        if (f.max_abs() == 0.0) throw wtm::Error(wtm::Errc::zero_function, "zero function");

        const auto U0 = wtm::radial_rearrangement(f, spec, c);
        const auto eq = wtm::equimeasurability(f, spec, c);
        const double grad_f = wtm::gradient_seminorm(f, spec, c.D);
        const double grad_U = wtm::radial_gradient_norm(U0, c, c.D);
        // u = f / ||grad f||_D is admissible; its rearrangement is U0 scaled alike
        std::vector<double> v(U0.values().begin(), U0.values().end());
        for (double& x : v) x /= grad_f;
        const wtm::RadialProfile U(std::vector<double>(U0.radii().begin(), U0.radii().end()), std::move(v));
        const double a = p.beta * wtm::critical_coefficient(c, wtm::ScalingConvention::energy_preserving);
        const auto red = wtm::reduce(U, c, a, 40.0 * c.D, reduce_N);

        const wtm::MoserReport rep = wtm::optimize(p);
        const wtm::Extremal ex = wtm::build_extremal(rep, spec, c);
        const double ext_grad = wtm::polar_gradient_norm(ex, spec, c.D);
        const double ext_exp = wtm::polar_exponential_mean(ex, spec, c);

        Result r;
        r.report = {
            {"rearrange",
             {{"sup_relative", eq.sup_relative},
              {"polya_szego", {{"p", c.D}, {"lhs", grad_U}, {"rhs", grad_f}, {"holds", grad_U <= grad_f * 1.01}}}}},
            {"reduce", wtm::io::to_json(red)},
            {"functional",
             {{"candidate", red.exp_1d}, {"F_star", rep.value}, {"candidate_below_F_star", red.exp_1d <= rep.value}}},
            {"extremal",
             {{"gradient_norm", ext_grad},
              {"exponential_mean", ext_exp},
              {"relative_gap", std::abs(ext_exp - rep.value) / rep.value}}},
            {"moser", wtm::io::to_json(rep)}};
        r.csv.emplace_back(common.file("verify", "_extremal.csv"), wtm::io::profile_csv(ex.profile));
        return r;
    }
};

int exit_code(wtm::Errc code) {
    switch (code) {
        case wtm::Errc::non_convergence: return 3;
        default: return 2;
    }
}

void write_outputs(const Common& common, const std::string& cmd, const Result& r) {
    fs::create_directories(common.out);
    for (const auto& [path, text] : r.csv) wtm::io::write_text(path, text);
    if (r.grid) wtm::io::write_grid_function(r.grid->first, r.grid->second, r.encoding);
    if (cmd != "fixture") wtm::io::write_text(common.file(cmd, ".json"), r.report.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted Trudinger-Moser toolkit: constants, rearrangements, reduction, Moser optimizer"};
    app.require_subcommand(1);

    ConstantsCmd constants;
    auto* c_app = app.add_subcommand("constants", "C_D, P_w, D of a monomial weight, with quadrature checks");
    constants.w.add(c_app);
    constants.common.add(c_app);
    c_app->add_option("--budget", constants.budget, "quadrature/Monte Carlo sample budget")->capture_default_str();

    FixtureCmd fixture;
    auto* f_app = app.add_subcommand("fixture", "write a canonical test function as a grid file");
    fixture.w.add(f_app);
    fixture.common.add(f_app);
    f_app->add_option("--kind", fixture.kind, "radial_bump | shifted_bump | two_bumps")->capture_default_str();
    f_app->add_option("--n", fixture.n, "nodes per axis")->capture_default_str();
    f_app->add_option("--encoding", fixture.encoding, "csv | f64le")->capture_default_str();

    RearrangeCmd rearrange;
    auto* r_app = app.add_subcommand("rearrange", "radial rearrangement of a grid function");
    rearrange.w.add(r_app);
    rearrange.common.add(r_app);
    r_app->add_option("--input", rearrange.input, "grid function header JSON")->required()->check(CLI::ExistingFile);
    r_app->add_option("--radial-n", rearrange.radial_n, "radial profile cells")->capture_default_str();

    ReduceCmd reduce;
    auto* d_app = app.add_subcommand("reduce", "one-dimensional reduction and both integral identities");
    reduce.w.add(d_app);
    reduce.common.add(d_app);
    d_app->add_option("--input", reduce.input, "grid function header JSON (rearranged first)")->check(CLI::ExistingFile);
    d_app->add_option("--profile", reduce.profile, "radial profile CSV (r,U)")->check(CLI::ExistingFile);
    d_app->add_option("--beta", reduce.beta, "beta in (0, 1]; a = beta times the critical coefficient")->capture_default_str();
    d_app->add_option("--T", reduce.T, "truncation T (default 40 D)");
    d_app->add_option("--N", reduce.N, "profile cells N")->capture_default_str();
    d_app->add_option("--scaling", reduce.scaling, "energy | unit")->capture_default_str();

    OptimizeCmd optimize;
    auto* o_app = app.add_subcommand("optimize", "maximize the Moser functional F under G <= 1");
    optimize.args.add(o_app);
    optimize.common.add(o_app);
    o_app->add_option("--schedule", optimize.schedule, "increasing list of N for the supremum estimate")->delimiter(',');
    o_app->add_option("--init", optimize.init, "auto | zero | profile CSV (t,phi)")->capture_default_str();

    VerifyCmd verify;
    auto* v_app = app.add_subcommand("verify", "end-to-end pipeline on a grid function (q = D)");
    verify.w.add(v_app);
    verify.common.add(v_app);
    verify.args.add(v_app, false);
    v_app->add_option("--input", verify.input, "grid function header JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        Result r;
        const Common* common = nullptr;
        std::string cmd;
        if (*c_app) {
            r = constants.run();
            common = &constants.common;
            cmd = "constants";
        } else if (*f_app) {
            r = fixture.run();
            common = &fixture.common;
            cmd = "fixture";
        } else if (*r_app) {
            r = rearrange.run();
            common = &rearrange.common;
            cmd = "rearrange";
        } else if (*d_app) {
            r = reduce.run();
            common = &reduce.common;
            cmd = "reduce";
        } else if (*o_app) {
            r = optimize.run();
            common = &optimize.common;
            cmd = "optimize";
        } else {
            r = verify.run();
            common = &verify.common;
            cmd = "verify";
        }
        write_outputs(*common, cmd, r);
        std::cout << r.report.dump(2) << "\n";
        return 0;
    } catch (const wtm::NonConvergence& e) {
        std::cerr << "error: " << e.what() << "\n" << wtm::io::to_json(e.report()).dump(2) << "\n";
        return 3;
    } catch (const wtm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
