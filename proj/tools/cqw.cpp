// cqw: command-line driver for simulation, analytic moments, sweeps,
// optimization and the verification suite.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cqw/coined.hpp"
#include "cqw/moments.hpp"
#include "cqw/optimize.hpp"
#include "cqw/verify.hpp"
#include "cqw/walk.hpp"
#include "parse.hpp"

using json = nlohmann::ordered_json;
using namespace cqw;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_check_failed = 2;

const std::vector<std::string> models{"coinless1d", "coinless2d", "hadamard", "grover2d"};

struct ModelArgs {
    std::string model;
    std::string alpha = "0", beta = "0", phi1 = "0", phi2 = "0", phi = "0";
    std::string coin;
    bool normalize = false;

    TessellationSpec1D spec() const {
        return {cli::parse_scalar(alpha), cli::parse_scalar(phi1), cli::parse_scalar(beta), cli::parse_scalar(phi2)};
    }

    CellState cell() const {
        if (coin.empty()) throw ConfigError("model " + model + " needs --coin a,b,c,d");
        if (!normalize) return cli::parse_cell(coin);
        const auto parts = cli::split_commas(coin);
        if (parts.size() != 4) throw ConfigError("coin state needs 4 comma-separated amplitudes, got '" + coin + "'");
        CellState c{cli::parse_complex(parts[0]), cli::parse_complex(parts[1]), cli::parse_complex(parts[2]),
                    cli::parse_complex(parts[3])};
        const double n = std::sqrt(c.norm_squared());
        if (n == 0.0) throw NormError("coin state is zero");
        return {c.a / n, c.b / n, c.c / n, c.d / n};
    }

    json echo() const {
        json j{{"model", model}};
        if (model == "coinless1d") {
            const auto s = spec();
            j["alpha"] = s.alpha, j["phi1"] = s.phi1, j["beta"] = s.beta, j["phi2"] = s.phi2;
        } else if (model == "hadamard") {
            j["alpha"] = cli::parse_scalar(alpha), j["phi"] = cli::parse_scalar(phi);
        } else {
            const auto c = cell();
            j["coin"] = json::array();
            for (Complex z : {c.a, c.b, c.c, c.d}) j["coin"].push_back({z.real(), z.imag()});
        }
        return j;
    }
};

void add_model_options(CLI::App* app, ModelArgs& m) {
    app->add_option("--model", m.model, "coinless1d | coinless2d | hadamard | grover2d")
        ->required()
        ->check(CLI::IsMember(models));
    app->add_option("--alpha", m.alpha, "coinless1d / hadamard angle (radians, or e.g. pi/3)");
    app->add_option("--beta", m.beta, "coinless1d second angle");
    app->add_option("--phi1", m.phi1, "coinless1d first phase");
    app->add_option("--phi2", m.phi2, "coinless1d second phase");
    app->add_option("--phi", m.phi, "hadamard initial coin phase");
    app->add_option("--coin", m.coin, "a,b,c,d cell or coin amplitudes, entries like 0.5 or 0.5-0.5i");
    app->add_flag("--normalize", m.normalize, "rescale --coin to unit norm");
}

struct QuadArgs {
    QuadratureSettings q;
    void add(CLI::App* app) {
        app->add_option("--quad-nodes", q.nodes, "initial quadrature node count");
        app->add_option("--quad-max-nodes", q.max_nodes, "node budget before reporting non-convergence");
        app->add_option("--quad-rel-tol", q.rel_tol, "relative convergence tolerance");
        app->add_option("--quad-abs-tol", q.abs_tol, "absolute convergence tolerance");
    }
};

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes to `path`, or to stdout for "-".
void emit(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f << text;
}

json tagged(double v, Method m) { return {{"value", v}, {"method", to_string(m)}}; }

json analytic_coefficients(const ModelArgs& m, const QuadratureSettings& q) {
    json j;
    if (m.model == "coinless1d") {
        const auto s = m.spec();
        const auto r = analytic_report_1d(s, q);
        const double var = r.mean_sq[0] - r.mean[0] * r.mean[0];
        const auto br = match_variance_branch(s.alpha, s.beta, var);
        j["mean_x"] = tagged(r.mean[0], Method::quadrature);
        j["mean_x2"] = tagged(r.mean_sq[0], Method::quadrature);
        j["var"] = tagged(var, Method::quadrature);
        j["var_branch"] = tagged(br.value, Method::closed_form);
        j["var_branch"]["region"] = region_name(br.region);
        j["var_branch"]["mismatch"] = br.mismatch;
    } else if (m.model == "coinless2d") {
        const auto c = m.cell();
        const auto r = analytic_report_2d(c);
        j["mean_x"] = tagged(r.mean[0], Method::closed_form);
        j["mean_y"] = tagged(r.mean[1], Method::closed_form);
        j["mean_x2"] = tagged(r.mean_sq[0], Method::closed_form);
        j["mean_y2"] = tagged(r.mean_sq[1], Method::closed_form);
        j["msd"] = tagged(msd_coefficient_2d(c), Method::closed_form);
    } else if (m.model == "hadamard") {
        const auto h = hadamard_moment_coefficients(cli::parse_scalar(m.alpha), cli::parse_scalar(m.phi));
        j["mean_x"] = tagged(h.first, Method::closed_form);
        j["mean_x2"] = tagged(h.second, Method::closed_form);
        j["sigma"] = tagged(h.sigma(), Method::closed_form);
    } else {
        const auto g = grover_moment_coefficients(m.cell());
        j["mean_x"] = tagged(g.x1, Method::closed_form);
        j["mean_y"] = tagged(g.y1, Method::closed_form);
        j["mean_x2"] = tagged(g.x2, Method::closed_form);
        j["mean_y2"] = tagged(g.y2, Method::closed_form);
        j["sigma2_total"] = tagged(g.sigma2_total(), Method::closed_form);
        j["sigma"] = tagged(g.sigma(), Method::closed_form);
    }
    return j;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    ModelArgs m;
    QuadArgs quad;
    std::vector<int> times;
    int periodic = 0;
    std::string distribution_path, moments_path = "-", format = "csv";
    bool analytic = false;
};

template <int Dim>
struct Trajectory {
    std::vector<MomentReport<Dim>> rows;
    Distribution<Dim> final;
};

template <int Dim, class State, class Advance>
Trajectory<Dim> record(State s, const std::vector<int>& times, Advance&& advance) {
    Trajectory<Dim> out;
    int now = 0;
    for (int t : times) {
        s = advance(std::move(s), t - now);
        now = t;
        out.rows.push_back(empirical_report(probability_distribution(s), t));
    }
    out.final = probability_distribution(s);
    return out;
}

template <class Spec>
Trajectory<Spec::dim> simulate_coinless(const InitialCondition<Spec::dim>& init, const Spec& spec, const SimulateArgs& a) {
    constexpr int D = Spec::dim;
    const int tmax = a.times.back();
    const auto geom = a.periodic ? Geometry<D>::periodic(a.periodic) : padded_geometry_for(init, tmax);
    require_capacity(geom, init, tmax);
    const CoinlessWalk<D> walk(spec, geom);
    return record<D>(LatticeState<D>(geom, init), a.times,
                     [&](LatticeState<D> s, int n) { return walk.evolve(std::move(s), n); });
}

template <int Dim>
std::string moments_csv(const std::vector<MomentReport<Dim>>& rows) {
    std::ostringstream o;
    o << (Dim == 1 ? "t,mean_x,mean_x2,var,sigma2_total\n" : "t,mean_x,mean_x2,mean_y,mean_y2,var,sigma2_total\n");
    for (const auto& r : rows) {
        o << r.t;
        for (int ax = 0; ax < Dim; ++ax) o << ',' << number(r.mean[ax]) << ',' << number(r.mean_sq[ax]);
        o << ',' << number(r.mean_sq[0] - r.mean[0] * r.mean[0]) << ',' << number(r.sigma2_total()) << '\n';
    }
    return o.str();
}

template <int Dim>
std::string distribution_csv(const Distribution<Dim>& d) {
    std::ostringstream o;
    o << (Dim == 1 ? "x,probability\n" : "x,y,probability\n");
    for (const auto& [x, p] : d) {
        for (int ax = 0; ax < Dim; ++ax) o << x[ax] << ',';
        o << number(p) << '\n';
    }
    return o.str();
}

template <int Dim>
json moments_json(const std::vector<MomentReport<Dim>>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json row{{"t", r.t}, {"method", "empirical"}, {"mean_x", r.mean[0]}, {"mean_x2", r.mean_sq[0]}};
        if constexpr (Dim == 2) row["mean_y"] = r.mean[1], row["mean_y2"] = r.mean_sq[1];
        row["var"] = r.mean_sq[0] - r.mean[0] * r.mean[0];
        row["sigma2_total"] = r.sigma2_total();
        arr.push_back(row);
    }
    return arr;
}

template <int Dim>
json distribution_json(const Distribution<Dim>& d) {
    json arr = json::array();
    for (const auto& [x, p] : d) {
        json e = json::array();
        for (int ax = 0; ax < Dim; ++ax) e.push_back(x[ax]);
        e.push_back(p);
        arr.push_back(e);
    }
    return arr;
}

template <int Dim>
void write_simulation(const Trajectory<Dim>& tr, const SimulateArgs& a) {
    if (a.format == "json") {
        json j{{"config", a.m.echo()}};
        j["config"]["t"] = a.times;
        j["config"]["lattice"] = a.periodic ? json{{"periodic", a.periodic}} : json("zero_padded");
        j["moments"] = moments_json(tr.rows);
        if (a.analytic) j["analytic"] = analytic_coefficients(a.m, a.quad.q);
        if (!a.distribution_path.empty()) j["distribution"] = distribution_json<Dim>(tr.final);
        emit(a.moments_path, j.dump(2) + "\n");
        return;
    }
    if (!a.distribution_path.empty()) emit(a.distribution_path, distribution_csv<Dim>(tr.final));
    if (!a.moments_path.empty()) emit(a.moments_path, moments_csv(tr.rows));
}

int run_simulate(SimulateArgs a) {
    if (a.times.empty()) throw ConfigError("--t needs at least one value");
    std::sort(a.times.begin(), a.times.end());
    if (a.times.front() < 0) throw ConfigError("t must be non-negative");
    if (a.periodic && (a.m.model == "hadamard" || a.m.model == "grover2d"))
        throw ConfigError("--periodic is only available for the coinless models");
    const int tmax = a.times.back();
    if (a.m.model == "coinless1d") {
        write_simulation(simulate_coinless(InitialCondition<1>::localized(), a.m.spec(), a), a);
    } else if (a.m.model == "coinless2d") {
        const auto c = a.m.cell();
        write_simulation(simulate_coinless(InitialCondition<2>::cell(c.a, c.b, c.c, c.d), TessellationSpec2D{}, a), a);
    } else if (a.m.model == "hadamard") {
        const auto walk = hadamard_walk();
        const auto s0 = hadamard_initial(cli::parse_scalar(a.m.alpha), cli::parse_scalar(a.m.phi), coined_geometry_for<1>(tmax));
        write_simulation(record<1>(s0, a.times, [&](CoinedState<1> s, int n) { return walk.evolve(std::move(s), n); }), a);
    } else {
        const auto walk = grover_walk();
        const auto s0 = grover_initial(a.m.cell(), coined_geometry_for<2>(tmax));
        write_simulation(record<2>(s0, a.times, [&](CoinedState<2> s, int n) { return walk.evolve(std::move(s), n); }), a);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// moments

int run_moments(const ModelArgs& m, const QuadArgs& quad, const std::string& format, const std::string& out) {
    const auto coeffs = analytic_coefficients(m, quad.q);
    if (format == "csv") {
        std::ostringstream o;
        o << "name,value,method\n";
        for (const auto& [k, v] : coeffs.items()) o << k << ',' << number(v["value"].get<double>()) << ',' << v["method"].get<std::string>() << '\n';
        emit(out, o.str());
    } else {
        emit(out, json{{"config", m.echo()}, {"coefficients", coeffs}}.dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep / optimize

struct SearchArgs {
    std::string model;
    bool complex_chart = false;
    int resolution = 0;
    std::optional<int> empirical_t;
    std::string format, out = "-";
    int restarts = 8;
    std::uint64_t seed = 12345;
    double plateau_tol = 1e-9;
};

std::vector<std::string> axis_names(const NamedObjective& obj) {
    if (obj.chart.name == "alpha-beta") return {"alpha", "beta"};
    if (obj.chart.name == "alpha-phi") return {"alpha", "phi"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < obj.chart.dimension(); ++i) out.push_back("p" + std::to_string(i));
    return out;
}

std::string value_name(const std::string& model) {
    if (model == "coinless1d") return "sigma2";
    if (model == "coinless2d") return "msd";
    return "sigma";
}

std::string objective_method(const std::string& model, bool empirical) {
    if (empirical) return "empirical";
    return model == "coinless1d" ? "quadrature" : "closed-form";
}

int default_resolution(const std::string& model) { return model == "coinless1d" ? 129 : 17; }

int run_sweep(const SearchArgs& a) {
    const auto obj = objective_for(a.model, a.complex_chart, a.empirical_t);
    const int res = a.resolution ? a.resolution : default_resolution(a.model);
    const auto r = sweep_objective(obj.f, obj.chart, res, a.plateau_tol, 2);
    const auto axes = axis_names(obj);
    if (a.format == "json") {
        json j{{"objective", obj.name}, {"method", objective_method(a.model, a.empirical_t.has_value())}, {"resolution", res},
               {"axes", axes},         {"max_value", r.max_value}, {"argmax_count", r.argmax.size()}};
        j["argmax"] = json::array();
        for (auto k : r.argmax) j["argmax"].push_back(r.points[k]);
        j["points"] = r.points;
        j["values"] = r.values;
        emit(a.out, j.dump(2) + "\n");
        return 0;
    }
    std::ostringstream o;
    for (const auto& n : axes) o << n << ',';
    o << value_name(a.model) << '\n';
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        for (double p : r.points[i]) o << number(p) << ',';
        o << number(r.values[i]) << '\n';
    }
    emit(a.out, o.str());
    return 0;
}

json locus_json(const LocusReport& l) {
    return {{"on_locus", l.on_locus}, {"distance", l.distance}, {"component_distance", l.component_distance}};
}

int run_optimize(const SearchArgs& a) {
    const auto obj = objective_for(a.model, a.complex_chart, a.empirical_t);
    const int res = a.resolution ? a.resolution : (a.model == "coinless1d" ? 33 : 17);
    const auto sweep = sweep_objective(obj.f, obj.chart, res, a.plateau_tol, 2);
    const auto best = static_cast<std::size_t>(std::max_element(sweep.values.begin(), sweep.values.end()) - sweep.values.begin());
    RefineOptions opt;
    opt.restarts = a.restarts;
    opt.seed = a.seed;
    const auto r = refine_local(obj.f, sweep.points[best], obj.chart, opt);

    json j{{"objective", obj.name}, {"method", objective_method(a.model, a.empirical_t.has_value())}};
    if (a.empirical_t) j["t"] = *a.empirical_t;
    j["sweep"] = {{"resolution", res}, {"max_value", sweep.max_value}, {"argmax_count", sweep.argmax.size()}};
    j["optimum"] = {{"axes", axis_names(obj)},
                    {"point", r.point},
                    {"value", r.value},
                    {"start_value", r.start_value},
                    {"evaluations", r.evaluations},
                    {"simplex_diameter", r.simplex_diameter},
                    {"converged", r.converged}};
    j["bound"] = obj.bound;
    j["exceeds_bound"] = r.value > obj.bound + 1e-6;
    if (a.model == "coinless1d") {
        j["locus"] = locus_json(verify_variance_locus_1d(r.point[0], r.point[1]));
    } else if (a.model == "coinless2d" || a.model == "grover2d") {
        const auto c = a.complex_chart ? complex_sphere_point(r.point) : real_sphere_point(r.point);
        j["cell"] = json::array();
        for (Complex z : {c.a, c.b, c.c, c.d}) j["cell"].push_back({z.real(), z.imag()});
        j["locus"] = locus_json(verify_point_locus(c, {a.model == "coinless2d" ? uniform_cell : grover_max_cell}));
    } else {
        j["locus"] = nullptr;
    }
    emit(a.out, j.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// verify

int run_verify(const std::vector<std::string>& ids, const VerifyOptions& opt, bool timing, const std::string& out) {
    const auto results = run_checks(ids, opt);
    bool all = true;
    json checks = json::array();
    for (const auto& r : results) {
        json c{{"id", r.id}, {"description", r.description}, {"passed", r.passed()}, {"t", r.t}};
        c["within_time"] = r.within_time();
        c["time_limit_s"] = r.time_limit;
        if (timing) c["seconds"] = r.seconds;
        c["measurements"] = json::array();
        for (const auto& m : r.measurements) {
            c["measurements"].push_back({{"name", m.name},
                                         {"method", m.method},
                                         {"value", m.value},
                                         {"target", m.target},
                                         {"error", m.error},
                                         {"tolerance", m.tolerance},
                                         {"relative", m.relative},
                                         {"passed", m.passed}});
        }
        all = all && r.passed();
        checks.push_back(c);
    }
    json j{{"scale", {{"t", opt.t ? json(*opt.t) : json(nullptr)}, {"seed", opt.seed}}}, {"passed", all}, {"checks", checks}};
    emit(out, j.dump(2) + "\n");
    return all ? 0 : exit_check_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coinless and coined quantum walks: simulation, moments, sweeps, optimization"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "evolve a walk and write distribution / moments");
    add_model_options(simulate, sim.m);
    sim.quad.add(simulate);
    simulate->add_option("--t", sim.times, "step count(s), comma separated")->required()->delimiter(',');
    simulate->add_option("--periodic", sim.periodic, "periodic lattice of side L (coinless models)");
    simulate->add_option("--distribution", sim.distribution_path, "distribution at the last t (path, - for stdout)");
    simulate->add_option("--moments", sim.moments_path, "moments per t (path, - for stdout)");
    simulate->add_option("--format", sim.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    simulate->add_flag("--analytic", sim.analytic, "include analytic coefficients (json only)");

    ModelArgs mom;
    QuadArgs mom_quad;
    std::string mom_format = "json", mom_out = "-";
    auto* moments = app.add_subcommand("moments", "analytic moment coefficients");
    add_model_options(moments, mom);
    mom_quad.add(moments);
    moments->add_option("--format", mom_format, "json | csv")->check(CLI::IsMember({"csv", "json"}));
    moments->add_option("--out", mom_out, "output path, - for stdout");

    SearchArgs sw, op;
    int sw_empirical = 0, op_empirical_t = 100;
    bool op_empirical = false;
    auto* sweep = app.add_subcommand("sweep", "evaluate the spread objective on a parameter grid");
    sweep->add_option("--model", sw.model)->required()->check(CLI::IsMember(models));
    sweep->add_option("--resolution", sw.resolution, "grid points per axis (default 129 for coinless1d, else 17)");
    sweep->add_flag("--complex", sw.complex_chart, "complex cell-state chart (2D models)");
    sweep->add_option("--empirical", sw_empirical, "use the simulated objective at this t");
    sweep->add_option("--plateau-tol", sw.plateau_tol, "argmax plateau tolerance");
    sw.format = "csv";
    sweep->add_option("--format", sw.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sweep->add_option("--out", sw.out, "output path, - for stdout");

    auto* optimize = app.add_subcommand("optimize", "sweep, then refine the best grid point");
    optimize->add_option("--model", op.model)->required()->check(CLI::IsMember(models));
    optimize->add_option("--resolution", op.resolution, "sweep resolution (default 33 for coinless1d, else 17)");
    optimize->add_flag("--complex", op.complex_chart, "complex cell-state chart (2D models)");
    optimize->add_flag("--empirical", op_empirical, "optimize the simulated objective");
    optimize->add_option("--t", op_empirical_t, "step count for --empirical");
    optimize->add_option("--restarts", op.restarts, "random simplex restarts");
    optimize->add_option("--seed", op.seed, "restart seed");
    optimize->add_option("--out", op.out, "output path, - for stdout");

    std::vector<std::string> check_ids;
    VerifyOptions vopt;
    int verify_t = 0;
    bool verify_timing = false;
    std::string verify_out = "-";
    auto* verify = app.add_subcommand("verify", "run the consistency suite");
    std::vector<std::string> known;
    for (const auto& c : verification_checks()) known.emplace_back(c.id);
    verify->add_option("--check", check_ids, "run only these checks")->check(CLI::IsMember(known));
    verify->add_option("--t", verify_t, "reduced step count (loosens convergence budgets to 5%)");
    verify->add_option("--seed", vopt.seed, "seed for randomized cases");
    verify->add_flag("--timing", verify_timing, "include wall-clock seconds in the report");
    verify->add_option("--out", verify_out, "output path, - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "error: usage: " << msg << '\n';
        return exit_usage;
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*moments) return run_moments(mom, mom_quad, mom_format, mom_out);
        if (*sweep) {
            if (sw_empirical) sw.empirical_t = sw_empirical;
            return run_sweep(sw);
        }
        if (*optimize) {
            if (op_empirical) op.empirical_t = op_empirical_t;
            return run_optimize(op);
        }
        if (verify_t) vopt.t = verify_t;
        return run_verify(check_ids, vopt, verify_timing, verify_out);
    } catch (const Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "error: " << e.kind() << ": " << msg << '\n';
        return cli::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
}
