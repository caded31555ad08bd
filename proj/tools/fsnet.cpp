// Command-line front end: solve, oracle, matrices, presets, eval.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fsnet/network.hpp"
#include "fsnet/oracle.hpp"
#include "fsnet/optimize.hpp"
#include "fsnet/problem.hpp"
#include "fsnet/report.hpp"
#include "fsnet/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitMaxIters = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitBracketFailure = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
}

struct SolveFlags {
    std::string preset;
    std::optional<double> alpha, beta, xmax;
    std::optional<int> points;
    std::string sampling;
    std::string model;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> adam_epochs;
    std::optional<double> adam_lr;
    std::optional<int> lbfgs_iters;
    std::optional<double> lbfgs_lr;
    std::optional<double> eps;
    std::string line_search;
    bool paper_scale = false;
    bool no_oracle = false;
    std::string out_path;
    std::string csv_path;
    std::string trace_path;
};

fsnet::RunConfig build_run_config(const SolveFlags& f) {
    fsnet::RunConfig cfg;
    // desk-scale defaults; --paper-scale restores the full-size settings
    cfg.flow.n_points = 2000;
    cfg.lbfgs.max_iters = 2000;

    if (!f.config_path.empty()) fsnet::merge_run_config_json(cfg, read_file(f.config_path));

    if (!f.preset.empty()) {
        const auto p = fsnet::find_preset(f.preset);
        if (!p) throw std::runtime_error("unknown preset: " + f.preset);
        cfg.flow.alpha = p->alpha;
        cfg.flow.beta = p->beta_lo;
    }
    if (f.paper_scale) {
        cfg.flow.n_points = 18000;
        cfg.lbfgs.max_iters = 10000;
    }
    if (f.alpha) cfg.flow.alpha = *f.alpha;
    if (f.beta) cfg.flow.beta = *f.beta;
    if (f.xmax) cfg.flow.x_max = *f.xmax;
    if (f.points) cfg.flow.n_points = *f.points;
    if (!f.sampling.empty()) {
        if (f.sampling == "equidistant") {
            cfg.flow.sampling = fsnet::Sampling::Equidistant;
        } else if (f.sampling == "random") {
            cfg.flow.sampling = fsnet::Sampling::UniformRandom;
        } else {
            throw std::runtime_error("unknown sampling: " + f.sampling);
        }
    }
    if (!f.model.empty()) {
        if (f.model == "lcdnn") {
            cfg.model = fsnet::lcdnn_preset();
            cfg.model_name = "lcdnn";
        } else if (f.model == "ldnn") {
            cfg.model = fsnet::ldnn_preset();
            cfg.model_name = "ldnn";
        } else if (f.model == "file") {
            if (f.config_path.empty()) {
                throw std::runtime_error("--model file requires --config");
            }
        } else {
            throw std::runtime_error("unknown model: " + f.model);
        }
    }
    if (f.seed) {
        cfg.seed = *f.seed;
        cfg.flow.sampling_seed = *f.seed;
    }
    if (f.adam_epochs) cfg.adam.epochs = *f.adam_epochs;
    if (f.adam_lr) cfg.adam.lr = *f.adam_lr;
    if (f.lbfgs_iters) cfg.lbfgs.max_iters = *f.lbfgs_iters;
    if (f.lbfgs_lr) cfg.lbfgs.lr = *f.lbfgs_lr;
    if (f.eps) cfg.lbfgs.eps = *f.eps;
    if (!f.line_search.empty()) {
        if (f.line_search == "wolfe") {
            cfg.lbfgs.line_search = fsnet::LineSearchKind::StrongWolfe;
        } else if (f.line_search == "fixed") {
            cfg.lbfgs.line_search = fsnet::LineSearchKind::FixedStep;
        } else {
            throw std::runtime_error("unknown line search: " + f.line_search);
        }
    }
    if (f.no_oracle) cfg.no_oracle = true;
    if (!f.out_path.empty()) cfg.paths.report = f.out_path;
    if (!f.csv_path.empty()) cfg.paths.profile_csv = f.csv_path;
    if (!f.trace_path.empty()) cfg.paths.trace_csv = f.trace_path;
    cfg.flow.validate();
    cfg.model.validate();
    return cfg;
}

int cmd_solve(const SolveFlags& flags) {
    fsnet::RunConfig cfg;
    try {
        cfg = build_run_config(flags);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    std::vector<fsnet::TraceEntry> trace;
    const fsnet::TrainingReport report = fsnet::run_solve(cfg, &trace);

    write_file(cfg.paths.report, fsnet::report_to_json(report));
    const std::vector<double> points = fsnet::collocation_points(cfg.flow);
    fsnet::write_profile_csv(cfg.paths.profile_csv, cfg.model, report.theta, points,
                             cfg.flow.alpha, cfg.flow.beta);
    fsnet::write_trace_csv(cfg.paths.trace_csv, trace);

    std::printf("model %s\n", cfg.model_name.c_str());
    std::printf("g_dd_0 %.17g\n", report.g_dd_0);
    std::printf("final_loss %.17g\n", report.final_loss);
    std::printf("converged %s\n", fsnet::stop_reason_name(report.converged));
    if (report.oracle_g_dd_0) std::printf("oracle_g_dd_0 %.17g\n", *report.oracle_g_dd_0);
    if (report.metrics) {
        std::printf("mse %.6e mae %.6e linf %.6e\n", report.metrics->mse, report.metrics->mae,
                    report.metrics->linf);
    }
    std::printf("report %s\n", cfg.paths.report.c_str());

    switch (report.converged) {
        case fsnet::StopReason::Converged: return kExitOk;
        case fsnet::StopReason::MaxIterations: return kExitMaxIters;
        case fsnet::StopReason::Diverged: return kExitDiverged;
    }
    return kExitOk;
}

int cmd_oracle(const std::string& preset, std::optional<double> alpha, std::optional<double> beta,
               double xmax, double h, double tol, const std::string& csv_path) {
    double a = 0.5, b = 0.0;
    if (!preset.empty()) {
        const auto p = fsnet::find_preset(preset);
        if (!p) {
            std::cerr << "config error: unknown preset: " << preset << "\n";
            return kExitConfigError;
        }
        a = p->alpha;
        b = p->beta_lo;
    }
    if (alpha) a = *alpha;
    if (beta) b = *beta;

    fsnet::ShootOptions opts;
    opts.x_max = xmax;
    opts.h = h;
    opts.tol = tol;
    if (!csv_path.empty()) {
        const int n = 601;
        opts.profile_nodes.resize(n);
        for (int i = 0; i < n; ++i) opts.profile_nodes[i] = xmax * i / (n - 1);
    }
    const fsnet::ShootingResult res = fsnet::shoot(a, b, opts);
    std::printf("s_star %.17g\n", res.s_star);
    std::printf("residual_at_x_max %.3e iterations %d bracket [%g, %g]\n", res.residual_at_x_max,
                res.iterations, res.bracket_lo, res.bracket_hi);
    if (!csv_path.empty()) {
        fsnet::write_oracle_csv(csv_path, res.profile);
        std::printf("csv %s\n", csv_path.c_str());
    }
    return kExitOk;
}

int cmd_matrices(const std::string& basis_str, int order, int power, bool as_json) {
    fsnet::BasisKind basis;
    if (basis_str == "legendre") {
        basis = fsnet::BasisKind::Legendre;
    } else if (basis_str == "chebyshev") {
        basis = fsnet::BasisKind::Chebyshev;
    } else {
        std::cerr << "config error: unknown basis: " << basis_str << "\n";
        return kExitConfigError;
    }
    if (order < 0 || power < 1) {
        std::cerr << "config error: order must be >= 0 and power >= 1\n";
        return kExitConfigError;
    }
    const fsnet::OperationalMatrix m = fsnet::operational_matrix(basis, order, power);
    if (as_json) {
        std::printf("{\"basis\":\"%s\",\"order\":%d,\"power\":%d,\"entries\":[", basis_str.c_str(),
                    order, power);
        for (int i = 0; i < m.dim(); ++i) {
            std::printf("%s[", i == 0 ? "" : ",");
            for (int j = 0; j < m.dim(); ++j) std::printf("%s%.17g", j == 0 ? "" : ",", m(i, j));
            std::printf("]");
        }
        std::printf("]}\n");
    } else {
        for (int i = 0; i < m.dim(); ++i) {
            for (int j = 0; j < m.dim(); ++j) std::printf("%s%.17g", j == 0 ? "" : ",", m(i, j));
            std::printf("\n");
        }
    }
    return kExitOk;
}

int cmd_presets() {
    for (const auto& p : fsnet::flow_presets()) {
        if (p.is_range()) {
            std::printf("%s %g [%g,%g]\n", p.name.c_str(), p.alpha, p.beta_lo, p.beta_hi);
        } else {
            std::printf("%s %g %g\n", p.name.c_str(), p.alpha, p.beta_lo);
        }
    }
    return kExitOk;
}

int cmd_eval(const std::string& report_path, const std::string& out_path,
             const std::string& csv_path, bool no_oracle) {
    fsnet::TrainingReport saved;
    try {
        saved = fsnet::report_from_json(read_file(report_path));
        saved.config.flow.validate();
        saved.config.model.validate();
        if (static_cast<int>(saved.theta.size()) != saved.config.model.param_count()) {
            throw std::runtime_error("theta length does not match the model");
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    if (no_oracle) saved.config.no_oracle = true;
    const fsnet::TrainingReport report = fsnet::evaluate_report(saved);
    const std::string text = fsnet::report_to_json(report);
    if (out_path.empty()) {
        std::printf("%s\n", text.c_str());
    } else {
        write_file(out_path, text);
        std::printf("report %s\n", out_path.c_str());
    }
    if (!csv_path.empty()) {
        const std::vector<double> points = fsnet::collocation_points(report.config.flow);
        fsnet::write_profile_csv(csv_path, report.config.model, report.theta, points,
                                 report.config.flow.alpha, report.config.flow.beta);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Falkner-Skan solver with Legendre/Chebyshev polynomial blocks"};
    app.set_version_flag("--version", std::string(fsnet::kArtifactVersion));
    app.require_subcommand(1);

    // solve
    SolveFlags sf;
    CLI::App* solve = app.add_subcommand("solve", "train a model and report g''(0)");
    solve->add_option("--preset", sf.preset, "flow preset name");
    solve->add_option("--alpha", sf.alpha, "alpha coefficient");
    solve->add_option("--beta", sf.beta, "beta coefficient");
    solve->add_option("--xmax", sf.xmax, "domain truncation");
    solve->add_option("--points", sf.points, "collocation point count");
    solve->add_option("--sampling", sf.sampling, "equidistant|random");
    solve->add_option("--model", sf.model, "ldnn|lcdnn|file");
    solve->add_option("--config", sf.config_path, "JSON config file");
    solve->add_option("--seed", sf.seed, "init / sampling seed");
    solve->add_option("--adam-epochs", sf.adam_epochs, "Adam epochs");
    solve->add_option("--adam-lr", sf.adam_lr, "Adam learning rate");
    solve->add_option("--lbfgs-iters", sf.lbfgs_iters, "LBFGS iteration cap");
    solve->add_option("--lbfgs-lr", sf.lbfgs_lr, "LBFGS learning rate");
    solve->add_option("--eps", sf.eps, "LBFGS convergence threshold");
    solve->add_option("--line-search", sf.line_search, "wolfe|fixed");
    solve->add_flag("--paper-scale", sf.paper_scale, "18000 points, 10000 LBFGS iterations");
    solve->add_flag("--no-oracle", sf.no_oracle, "skip oracle metrics");
    solve->add_option("--out", sf.out_path, "report JSON path");
    solve->add_option("--csv", sf.csv_path, "profile CSV path");
    solve->add_option("--trace", sf.trace_path, "loss trace CSV path");

    // oracle
    std::string o_preset, o_csv;
    std::optional<double> o_alpha, o_beta;
    double o_xmax = 6.0, o_h = 1e-3, o_tol = 1e-8;
    CLI::App* oracle = app.add_subcommand("oracle", "classical shooting solution");
    oracle->set_help_flag("--help", "print help");  // frees -h/--h for the step size
    oracle->add_option("--preset", o_preset, "flow preset name");
    oracle->add_option("--alpha", o_alpha, "alpha coefficient");
    oracle->add_option("--beta", o_beta, "beta coefficient");
    oracle->add_option("--xmax", o_xmax, "matching point for g'(x_max) = 1");
    oracle->add_option("--h", o_h, "RK4 step");
    oracle->add_option("--tol", o_tol, "|g'(x_max) - 1| tolerance");
    oracle->add_option("--csv", o_csv, "profile CSV path");

    // matrices
    std::string m_basis = "legendre";
    int m_order = 5, m_power = 1;
    bool m_json = false;
    CLI::App* matrices = app.add_subcommand("matrices", "print an operational derivative matrix");
    matrices->add_option("--basis", m_basis, "legendre|chebyshev");
    matrices->add_option("--order", m_order, "polynomial order N");
    matrices->add_option("--power", m_power, "matrix power k");
    matrices->add_flag("--json", m_json, "JSON instead of CSV");

    CLI::App* presets = app.add_subcommand("presets", "list the named flows");

    // eval
    std::string e_report, e_out, e_csv;
    bool e_no_oracle = false;
    CLI::App* eval = app.add_subcommand("eval", "recompute metrics from a saved report");
    eval->add_option("report", e_report, "saved report JSON")->required();
    eval->add_option("--out", e_out, "output report path (stdout when omitted)");
    eval->add_option("--csv", e_csv, "profile CSV path");
    eval->add_flag("--no-oracle", e_no_oracle, "skip oracle metrics");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(sf);
        if (oracle->parsed()) return cmd_oracle(o_preset, o_alpha, o_beta, o_xmax, o_h, o_tol, o_csv);
        if (matrices->parsed()) return cmd_matrices(m_basis, m_order, m_power, m_json);
        if (presets->parsed()) return cmd_presets();
        if (eval->parsed()) return cmd_eval(e_report, e_out, e_csv, e_no_oracle);
    } catch (const fsnet::BracketFailure& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return kExitBracketFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
