#include <goalest/goalest.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct Flags
{
    std::string config_file;
    std::string problem;
    std::string qoi;
    std::string mode;
    std::string estimator;
    std::string out;
    double alpha = -1.0;
    int cycles = -1;
    int refine = -1;
    double target_factor = -1.0;
    bool no_vtk = false;
};

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config_file, "key=value config file; flags override it");
    cmd->add_option("--problem", f.problem, "manufactured | singular");
    cmd->add_option("--qoi", f.qoi, "j1 | j2 | j3 | j4");
    cmd->add_option("--alpha", f.alpha, "nonlinearity parameter");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--refine", f.refine, "uniform refinements of the initial mesh (verification runs)");
}

goalest::StudyConfig build_config(const Flags& f)
{
    goalest::StudyConfig c;
    if (!f.config_file.empty()) {
        std::ifstream is(f.config_file);
        if (!is) throw goalest::Error("cannot open config file " + f.config_file);
        for (const auto& [k, v] : goalest::read_config_file(is)) goalest::apply_setting(c, k, v);
    }
    if (!f.problem.empty()) c.problem = f.problem;
    if (!f.qoi.empty()) c.qoi = goalest::parse_qoi(f.qoi);
    if (f.alpha >= 0.0) c.alpha = f.alpha;
    if (f.cycles >= 0) c.cycles = f.cycles;
    if (!f.mode.empty()) c.mode = goalest::parse_mode(f.mode);
    if (!f.estimator.empty()) c.estimator = goalest::parse_estimator(f.estimator);
    if (f.target_factor > 0.0) c.target_factor = f.target_factor;
    if (!f.out.empty()) c.out = f.out;
    if (f.refine >= 0) c.initial_refinements = f.refine;
    if (f.no_vtk) c.write_vtk = false;
    goalest::validate(c);
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-level goal-oriented error estimation for a nonlinear Poisson problem"};
    app.require_subcommand(1);

    Flags flags;
    auto* verify_adjoint = app.add_subcommand("verify-adjoint", "adjoint verification over the alpha sweep (linear QoI)");
    add_common(verify_adjoint, flags);

    auto* verify_eta2 = app.add_subcommand("verify-eta2", "exactness of eta2 for the nonlinear QoIs");
    add_common(verify_eta2, flags);

    auto* study = app.add_subcommand("study", "uniform or adaptive refinement study");
    add_common(study, flags);
    study->add_option("--cycles", flags.cycles, "number of meshes solved (initial mesh included)");
    study->add_option("--mode", flags.mode, "uniform | adapt");
    study->add_option("--estimator", flags.estimator, "eta1 | eta2 (adaptation driver)");
    study->add_option("--target-factor", flags.target_factor, "target element count factor per cycle");
    study->add_flag("--no-vtk", flags.no_vtk, "skip VTK snapshots");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = build_config(flags);
        if (verify_adjoint->parsed()) return goalest::cmd_verify_adjoint(config, std::cout);
        if (verify_eta2->parsed()) return goalest::cmd_verify_eta2(config, std::cout);
        return goalest::cmd_study(config, std::cout);
    } catch (const goalest::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return goalest::exit_solver_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
