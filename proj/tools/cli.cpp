#include "cli.hpp"

#include "fdlpv/analysis.hpp"
#include "fdlpv/error.hpp"
#include "fdlpv/etfe.hpp"
#include "fdlpv/io_util.hpp"
#include "fdlpv/realization.hpp"
#include "fdlpv/serialization.hpp"
#include "fdlpv/workflow.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fdlpv::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool paper_scale = false;
};

struct Overrides {
    std::string dataset;
    std::string records_dir;
    std::string result;
    std::string controller;
    std::string certificate;
    std::string report_dir;
    std::optional<double> gamma;
    std::vector<double> frozen;
    bool time_varying = false;
    bool lti = false;
    std::string name = "sim";
    std::vector<std::string> results;
};

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void require_dir(const std::string& dir, const std::string& what) {
    const std::string d = dir.empty() ? "." : dir;
    require(fs::is_directory(d), ErrorKind::Config, what + ": directory '" + d + "' does not exist");
}

void require_parent(const std::string& path, const std::string& what) {
    const fs::path p(path);
    require_dir(p.has_parent_path() ? p.parent_path().string() : ".", what);
}

void require_file(const std::string& path, const std::string& what) {
    require(fs::is_regular_file(path), ErrorKind::Config, what + ": file '" + path + "' does not exist");
}

std::string point_tag(double p) { return "p" + format_double(p); }

PipelineConfig effective_config(const GlobalOptions& g, const Overrides& o) {
    PipelineConfig c = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
    if (g.seed)
        c.seed = *g.seed;
    if (g.paper_scale)
        apply_paper_scale(c);
    if (!o.dataset.empty())
        c.paths.dataset = o.dataset;
    if (!o.records_dir.empty())
        c.paths.records_dir = o.records_dir;
    if (!o.result.empty())
        c.paths.result = o.result;
    if (!o.controller.empty())
        c.paths.controller = o.controller;
    if (!o.certificate.empty())
        c.paths.certificate = o.certificate;
    if (!o.report_dir.empty())
        c.paths.report_dir = o.report_dir;
    if (o.gamma)
        c.analysis_gamma = o.gamma;
    if (!o.frozen.empty())
        c.frozen = o.frozen;
    if (o.time_varying)
        c.frozen.clear();
    if (o.lti)
        c.lti = true;
    c.validate();
    return c;
}

GridPtr config_grid(const PipelineConfig& c, double sample_rate) {
    return make_grid(default_grid(c.frequencies, sample_rate));
}

std::string records_csv(const Experiment& exp) {
    std::ostringstream os;
    const double fs = exp.d.sample_rate;
    os << "t,d,u_g,y\n";
    for (size_t k = 0; k < exp.d.size(); ++k)
        os << format_double(static_cast<double>(k) / fs) << ',' << format_double(exp.d.samples[k]) << ','
           << format_double(exp.u_g.samples[k]) << ',' << format_double(exp.y.samples[k]) << '\n';
    return os.str();
}

Experiment read_records(const std::string& path, double sample_rate) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line == "t,d,u_g,y", ErrorKind::Parse,
            path + ": expected header 't,d,u_g,y'");
    std::vector<double> d, ug, y;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::array<double, 4> f{};
        std::istringstream ls(line);
        for (size_t i = 0; i < 4; ++i) {
            std::string field;
            std::getline(ls, field, ',');
            try {
                size_t used = 0;
                f[i] = std::stod(field, &used);
                require(used == field.size(), ErrorKind::Parse, "");
            } catch (const std::exception&) {
                fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": malformed record row");
            }
        }
        d.push_back(f[1]);
        ug.push_back(f[2]);
        y.push_back(f[3]);
    }
    require(!d.empty(), ErrorKind::Parse, path + ": no samples");
    return {TimeRecord(std::move(d), sample_rate, "d"), TimeRecord(std::move(ug), sample_rate, "u_g"),
            TimeRecord(std::move(y), sample_rate, "y")};
}

FrfDataset dataset_from_estimates(const PipelineConfig& c, const LpvSurrogateModel& model, const GridPtr& grid,
                                  const std::vector<Experiment>& experiments) {
    FrfDataset ds(grid, SchedulingGrid(c.points, model.p_min, model.p_max), {"N_G", "D_G", "G"});
    for (size_t i = 0; i < c.points.size(); ++i) {
        const Experiment& exp = experiments[i];
        FrfResponse sens(etfe_estimate(exp.d, exp.u_g, *grid, c.window, c.segments).values(), grid);
        FrfResponse proc(etfe_estimate(exp.d, exp.y, *grid, c.window, c.segments).values(), grid);
        FrfResponse plant = closed_loop_to_plant(sens, proc);
        ds.set(c.points[i], "N_G", std::move(proc));
        ds.set(c.points[i], "D_G", std::move(sens));
        ds.set(c.points[i], "G", std::move(plant));
    }
    return ds;
}

int cmd_generate(const PipelineConfig& c, std::ostream& out) {
    require(c.plant == PlantKind::Surrogate, ErrorKind::Config, "generate: plant.kind must be surrogate");
    const std::string rec_dir = c.records_dir();
    require_dir(rec_dir, "paths.records_dir");
    require_parent(c.dataset_path(), "paths.dataset");
    const LpvSurrogateModel model = c.model();
    const RationalTf k0 = c.controller0(model.sample_rate);
    const GridPtr grid = config_grid(c, model.sample_rate);

    std::vector<Experiment> experiments;
    for (size_t i = 0; i < c.points.size(); ++i) {
        ExperimentOptions eo = c.experiment;
        eo.seed = c.seed + i;
        experiments.push_back(generate_experiment(model, k0, c.points[i], eo));
    }
    const FrfDataset ds = dataset_from_estimates(c, model, grid, experiments);

    for (size_t i = 0; i < c.points.size(); ++i)
        write_file_atomic(join(rec_dir, "records_" + point_tag(c.points[i]) + ".csv"), records_csv(experiments[i]));
    save_dataset(ds, c.dataset_path());
    out << "generated " << c.points.size() << " records of " << c.experiment.n_samples << " samples; dataset "
        << c.dataset_path() << " (" << grid->size() << " frequencies)\n";
    return kOk;
}

int cmd_estimate(const PipelineConfig& c, std::ostream& out) {
    const LpvSurrogateModel model = c.model();
    std::vector<std::string> files;
    for (double p : c.points) {
        files.push_back(join(c.records_dir(), "records_" + point_tag(p) + ".csv"));
        require_file(files.back(), "records");
    }
    require_parent(c.dataset_path(), "paths.dataset");
    std::vector<Experiment> experiments;
    for (const std::string& f : files)
        experiments.push_back(read_records(f, model.sample_rate));
    const GridPtr grid = config_grid(c, model.sample_rate);
    const FrfDataset ds = dataset_from_estimates(c, model, grid, experiments);
    save_dataset(ds, c.dataset_path());
    out << "estimated " << files.size() << " operating points; dataset " << c.dataset_path() << '\n';
    return kOk;
}

FrfDataset load_factor_dataset(const PipelineConfig& c) {
    require_file(c.dataset_path(), "paths.dataset");
    FrfDataset ds = load_dataset(c.dataset_path());
    for (const char* ch : {"N_G", "D_G"})
        for (double p : ds.scheduling().points())
            require(ds.has(p, ch), ErrorKind::Config,
                    c.dataset_path() + ": missing channel " + ch + " at p = " + format_double(p));
    return ds;
}

int cmd_synthesize(const PipelineConfig& c, std::ostream& out) {
    const FrfDataset ds = load_factor_dataset(c);
    require_parent(c.result_path(), "paths.result");
    require_parent(c.controller_path(), "paths.controller");
    const SynthesisProblem problem = problem_from_dataset(c, ds);
    const SynthesisResult r = bisect_gamma(problem);
    write_file_atomic(c.result_path(), synthesis_result_to_json(r, problem));
    save_controller(r.theta, c.controller_path());
    out << std::setprecision(6) << (c.lti ? "LTI" : "LPV") << " gamma = " << r.gamma
        << " (achieved " << r.achieved_gamma << ", " << r.iterations << " bisection steps); result "
        << c.result_path() << ", controller " << c.controller_path() << '\n';
    return kOk;
}

int cmd_analyze(const PipelineConfig& c, std::ostream& out) {
    require_file(c.controller_path(), "paths.controller");
    const FrfDataset ds = load_factor_dataset(c);
    require_parent(c.certificate_path(), "paths.certificate");
    const ControllerParameters theta = load_controller(c.controller_path());
    const SynthesisProblem problem = problem_from_dataset(c, ds);
    const std::vector<ClosedLoopFactorData> data = closed_loop_data(problem, theta);
    const std::vector<double>& points = problem.scheduling.points();
    Certificate cert;
    if (c.analysis_gamma) {
        cert = check_performance(data, problem.weights, *problem.grid, points, *c.analysis_gamma, problem.epsilon(),
                                 c.multiplier);
    } else {
        std::vector<std::vector<Complex>> dp;
        for (const auto& d : data)
            dp.push_back(d.d_p);
        cert = check_stability(dp, *problem.grid, points, problem.epsilon(), c.multiplier);
    }
    write_file_atomic(c.certificate_path(), certificate_to_json(cert));
    out << std::setprecision(6) << to_string(cert.status);
    if (c.analysis_gamma)
        out << " at gamma = " << *c.analysis_gamma;
    out << " (min margin " << (cert.points.empty() ? 0.0 : cert.min_margin()) << "); certificate "
        << c.certificate_path() << '\n';
    if (!cert.reason.empty() && cert.status != CertificateStatus::Certified)
        out << "  " << cert.reason << '\n';
    return cert.status == CertificateStatus::Certified ? kOk : kInfeasible;
}

int cmd_simulate(const PipelineConfig& c, const std::string& name, std::ostream& out) {
    require(c.plant == PlantKind::Surrogate, ErrorKind::Config, "simulate: plant.kind must be surrogate");
    require_file(c.controller_path(), "paths.controller");
    require_dir(c.paths.output_dir, "paths.output_dir");
    const LpvSurrogateModel model = c.model();
    const ControllerParameters theta = load_controller(c.controller_path());
    require(std::abs(theta.sample_rate - model.sample_rate) < 1e-9 * model.sample_rate, ErrorKind::Config,
            "controller sample rate does not match the plant");
    const LfrController k = build_lfr(theta);
    ScenarioOptions so = c.scenario;
    so.sample_rate = model.sample_rate;
    so.p_min = model.p_min;
    so.p_max = model.p_max;
    so.seed = c.seed;

    std::vector<std::pair<std::string, Trace>> runs;
    auto run_one = [&](const std::string& tag, std::optional<double> p) {
        const Scenario s = make_scenario(so, p);
        runs.emplace_back(tag, simulate_closed_loop(model, k, s.reference, s.scheduling, s.disturbance));
    };
    if (c.frozen.empty())
        run_one("tv", std::nullopt);
    for (double p : c.frozen)
        run_one(point_tag(p), p);

    for (const auto& [tag, tr] : runs) {
        const StepMetrics m = step_metrics(tr);
        const std::string stem = join(c.paths.output_dir, name + "_" + tag);
        write_file_atomic(stem + ".csv", tr.to_csv());
        write_file_atomic(stem + "_metrics.json", metrics_to_json(m));
        out << std::setprecision(6) << stem << ".csv: l2 " << m.l2_error << ", linf " << m.linf_error
            << ", overshoot " << m.overshoot_pct << "%, settling " << m.settling_s << " s\n";
    }
    return kOk;
}

std::string csv_row(std::initializer_list<double> values) {
    std::string s;
    for (double v : values) {
        if (!s.empty())
            s += ',';
        s += format_double(v);
    }
    return s + '\n';
}

int cmd_report(const PipelineConfig& c, std::vector<std::string> results, std::ostream& out) {
    if (results.empty())
        results.push_back(c.result_path());
    for (const std::string& r : results)
        require_file(r, "report input");
    require_dir(c.report_dir(), "paths.report_dir");
    const FrfDataset ds = load_factor_dataset(c);

    std::map<std::string, std::string> files;
    {
        std::string plant = "p,omega,hz,re,im,mag_db,phase_deg\n";
        const FrequencyGrid& g = ds.grid();
        for (double p : ds.scheduling().points()) {
            const FrfResponse gp = ds.has(p, "G") ? ds.at(p, "G") : ds.at(p, "N_G") / ds.at(p, "D_G");
            for (size_t k = 0; k < g.size(); ++k)
                plant += csv_row({p, g[k], g.hz(k), gp[k].real(), gp[k].imag(), 20.0 * std::log10(std::abs(gp[k])),
                                  std::arg(gp[k]) * 180.0 / std::numbers::pi});
        }
        files["plant_frf.csv"] = std::move(plant);
    }
    for (const std::string& path : results) {
        const StoredResult stored = synthesis_result_from_json(read_file(path));
        require(stored.gamma > 0.0, ErrorKind::Config, path + ": not a synthesis result (no gamma)");
        const std::string stem = fs::path(path).stem().string();
        const SynthesisProblem problem = problem_from_dataset(c, ds);
        const std::vector<ClosedLoopFactorData> data = closed_loop_data(problem, stored.theta);
        const FrequencyGrid& g = *problem.grid;
        std::array<std::vector<Complex>, 4> w;
        for (Channel ch : kChannels)
            w[static_cast<size_t>(ch)] = problem.weights[ch].evaluate(g);

        std::string four = "p,omega,hz,S,SG,KS,T,bound_S,bound_SG,bound_KS,bound_T\n";
        std::string margins = "p,omega,S,SG,KS,T\n";
        std::string ctrl = "p,omega,hz,re,im,mag_db,phase_deg\n";
        for (size_t t = 0; t < data.size(); ++t) {
            const double p = problem.scheduling[t];
            const auto& d = data[t];
            const auto [nk, dk] = evaluate_factors(stored.theta, p, g);
            for (size_t k = 0; k < g.size(); ++k) {
                std::array<double, 4> mag{}, bound{}, margin{};
                for (size_t ci = 0; ci < 4; ++ci) {
                    mag[ci] = std::abs(d.n_p[ci][k] / d.d_p[k]);
                    const double wm = std::abs(w[ci][k]);
                    bound[ci] = wm > 0.0 ? stored.gamma / wm : INFINITY;
                    margin[ci] = d.d_p[k].real() - wm * std::abs(d.n_p[ci][k]) / stored.gamma - stored.epsilon;
                }
                four += csv_row({p, g[k], g.hz(k), mag[0], mag[1], mag[2], mag[3], bound[0], bound[1], bound[2],
                                 bound[3]});
                margins += csv_row({p, g[k], margin[0], margin[1], margin[2], margin[3]});
                const Complex kv = nk[k] / dk[k];
                ctrl += csv_row({p, g[k], g.hz(k), kv.real(), kv.imag(), 20.0 * std::log10(std::abs(kv)),
                                 std::arg(kv) * 180.0 / std::numbers::pi});
            }
        }
        files["fourblock_" + stem + ".csv"] = std::move(four);
        files["margins_" + stem + ".csv"] = std::move(margins);
        files["controller_frf_" + stem + ".csv"] = std::move(ctrl);
    }
    for (const auto& [name, text] : files) {
        write_file_atomic(join(c.report_dir(), name), text);
        out << join(c.report_dir(), name) << '\n';
    }
    return kOk;
}

} // namespace

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Parse:
    case ErrorKind::Io:
    case ErrorKind::InvalidArgument:
    case ErrorKind::GridMismatch:
    case ErrorKind::OutOfRange:
    case ErrorKind::Unstable:
        return kConfigError;
    case ErrorKind::Infeasible:
        return kInfeasible;
    case ErrorKind::Excitation:
    case ErrorKind::Bezout:
    case ErrorKind::SolverFailure:
    case ErrorKind::Numerical:
    case ErrorKind::Degenerate:
        return kNumerical;
    }
    return kNumerical;
}

SynthesisProblem problem_from_dataset(const PipelineConfig& c, const FrfDataset& ds) {
    const double fs = ds.grid().sample_rate();
    const RationalTf k0 = c.controller0(fs);
    SynthesisProblem pr;
    pr.grid = ds.grid_ptr();
    pr.scheduling = ds.scheduling();
    CoprimeOptions co;
    co.project = c.project_bezout;
    for (double p : pr.scheduling.points()) {
        const CoprimeFactorization f = coprime_from_closed_loop(ds.at(p, "D_G"), ds.at(p, "N_G"), k0, co);
        pr.data.push_back({FrfResponse(f.pair.n_g.values(), pr.grid), FrfResponse(f.pair.d_g.values(), pr.grid)});
    }
    pr.weights = c.weights(fs);
    pr.basis_n = ObfBasis::laguerre(c.obf_pole, c.order_n);
    pr.basis_d = ObfBasis::laguerre(c.obf_pole, c.order_d);
    pr.scheduling_basis =
        SchedulingBasis(c.scheduling, c.scheduling_degree, pr.scheduling.lo(), pr.scheduling.hi());
    pr.options = c.synthesis;
    if (c.lti)
        pr = pr.as_lti();
    pr.validate();
    return pr;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Frequency-domain LPV controller synthesis from frozen FRF data", "fdlpv"};
    app.require_subcommand(1);
    GlobalOptions g;
    Overrides o;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "Pipeline config (JSON, see docs/config.md)");
    auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
    app.add_flag("--paper-scale", g.paper_scale, "240000-sample records and 1000-frequency grids");

    auto* gen = app.add_subcommand("generate", "Simulate closed-loop experiments and estimate the fFRF dataset");
    gen->add_option("--dataset", o.dataset, "Dataset output path");
    gen->add_option("--records-dir", o.records_dir, "Directory for the time records");

    auto* est = app.add_subcommand("estimate", "Re-estimate the fFRF dataset from stored time records");
    est->add_option("--dataset", o.dataset, "Dataset output path");
    est->add_option("--records-dir", o.records_dir, "Directory holding records_p<p>.csv");

    auto* syn = app.add_subcommand("synthesize", "Minimize gamma by bisection over cone feasibility problems");
    syn->add_option("--dataset", o.dataset, "N_G / D_G dataset");
    syn->add_option("--result", o.result, "Synthesis result JSON");
    syn->add_option("--controller", o.controller, "Controller file");
    syn->add_flag("--lti", o.lti, "Scheduling-independent controller (m = 1)");

    auto* ana = app.add_subcommand("analyze", "Certify stability or performance of a controller on the dataset");
    ana->add_option("--dataset", o.dataset, "N_G / D_G dataset");
    ana->add_option("--controller", o.controller, "Controller file");
    ana->add_option("--certificate", o.certificate, "Certificate output path");
    ana->add_option("--gamma", o.gamma, "Performance level; omit for a stability-only check");

    auto* sim = app.add_subcommand("simulate", "Closed-loop simulation on the surrogate plant");
    sim->add_option("--controller", o.controller, "Controller file");
    sim->add_option("--frozen", o.frozen, "Constant scheduling values (one run each)");
    sim->add_flag("--time-varying", o.time_varying, "Ignore scenario.frozen and run the time-varying scenario");
    sim->add_option("--name", o.name, "Output file prefix inside paths.output_dir");

    auto* rep = app.add_subcommand("report", "Plot-ready CSV tables from synthesis results");
    rep->add_option("results", o.results, "Synthesis result files (default: paths.result)");
    rep->add_option("--dataset", o.dataset, "N_G / D_G dataset");
    rep->add_option("--out", o.report_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        app.exit(e, out, err);
        return kConfigError;
    }
    if (seed_opt->count() > 0)
        g.seed = seed;

    try {
        const PipelineConfig c = effective_config(g, o);
        if (gen->parsed())
            return cmd_generate(c, out);
        if (est->parsed())
            return cmd_estimate(c, out);
        if (syn->parsed())
            return cmd_synthesize(c, out);
        if (ana->parsed())
            return cmd_analyze(c, out);
        if (sim->parsed())
            return cmd_simulate(c, o.name, out);
        return cmd_report(c, o.results, out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

} // namespace fdlpv::cli
