#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmfg/config_io.hpp"
#include "mmfg/errors.hpp"
#include "mmfg/harness.hpp"
#include "mmfg/master_solver.hpp"
#include "mmfg/nash_solver.hpp"
#include "mmfg/rng.hpp"
#include "mmfg/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;

int pick_stride(int nt) {
  int stride = std::max(1, nt / 50);
  while (nt % stride != 0) --stride;
  return stride;
}

int run(int argc, char** argv) {
  CLI::App app{"Linear-quadratic major/minor mean field game laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_path, report_path, mode = "nash";
  int nt = 4000, N = 8, samples = 200;
  double t0 = 0.0;
  uint64_t seed = 42;
  std::vector<int> Ns = {2, 4, 8, 16, 32, 64};

  auto* sm = app.add_subcommand("solve-master",
                                "Integrate the limiting coefficient ODEs");
  sm->add_option("--config", config_path)->required();
  sm->add_option("--nt", nt);
  sm->add_option("--out", out_path)->required();

  auto* sn = app.add_subcommand("solve-nash",
                                "Integrate the N-player coefficient ODEs");
  sn->add_option("--config", config_path)->required();
  sn->add_option("-N", N);
  sn->add_option("--nt", nt);
  sn->add_option("--out", out_path)->required();

  auto* cv = app.add_subcommand(
      "converge", "Finite-N vs limit error sweep over a list of N");
  cv->add_option("--config", config_path)->required();
  cv->add_option("--Ns", Ns)->delimiter(',');
  cv->add_option("--samples", samples);
  cv->add_option("--t0", t0);
  cv->add_option("--seed", seed);
  cv->add_option("--nt", nt);
  cv->add_option("--out", out_path)->required();

  auto* vf = app.add_subcommand("verify", "Run the verification battery");
  vf->add_option("--config", config_path)->required();
  vf->add_option("--nt", nt);
  vf->add_option("-N", N);
  vf->add_option("--seed", seed);
  vf->add_option("--report", report_path)->required();

  auto* si = app.add_subcommand("simulate", "Euler-Maruyama trajectories");
  si->add_option("--config", config_path)->required();
  si->add_option("--mode", mode)
      ->check(CLI::IsMember({"nash", "equilibrium"}));
  si->add_option("-N", N);
  si->add_option("--nt", nt);
  si->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  const mmfg::LoadedConfig cfg = mmfg::load_config(config_path);

  if (sm->parsed()) {
    const mmfg::MasterSolution sol = mmfg::solve_master(cfg.spec, nt);
    mmfg::write_text_file(out_path, mmfg::master_to_json(sol));
    return kExitOk;
  }
  if (sn->parsed()) {
    const mmfg::NashSolution sol =
        mmfg::solve_nash(cfg.spec, N, nt, pick_stride(nt));
    mmfg::write_text_file(out_path, mmfg::nash_to_json(sol));
    return kExitOk;
  }
  if (cv->parsed()) {
    const mmfg::ConvergenceTable table = mmfg::run_convergence(
        cfg.spec, cfg.sim.mu0, Ns, samples, t0, seed, nt);
    mmfg::write_text_file(out_path, mmfg::table_to_csv(table));
    return kExitOk;
  }
  if (vf->parsed()) {
    const mmfg::VerifyReport rep =
        mmfg::verify_all(cfg.spec, cfg.sim, nt, N, seed);
    mmfg::write_text_file(report_path, mmfg::report_to_json(rep));
    for (const auto& c : rep.checks)
      std::printf("%-24s %s%s\n", c.name.c_str(),
                  c.skipped ? "SKIP" : (c.pass ? "PASS" : "FAIL"),
                  c.note.empty() ? "" : ("  (" + c.note + ")").c_str());
    return rep.all_pass() ? kExitOk : kExitCheckFailure;
  }
  if (si->parsed()) {
    if (mode == "equilibrium") {
      const mmfg::MasterSolution sol = mmfg::solve_master(cfg.spec, nt);
      mmfg::write_text_file(
          out_path, mmfg::bundle_to_csv(mmfg::simulate_equilibrium_flow(
                        sol, cfg.sim)));
    } else {
      const mmfg::NashSolution sol =
          mmfg::solve_nash(cfg.spec, N, nt, pick_stride(nt));
      Eigen::VectorXd X(sol.D());
      X.segment(0, cfg.spec.d0) = cfg.sim.x0_init;
      for (int j = 1; j <= N; ++j)
        X.segment(sol.block_offset(j), cfg.spec.d) =
            cfg.sim.mu0.sample(mmfg::NoiseStream(cfg.sim.seed, 0, j));
      mmfg::write_text_file(
          out_path, mmfg::bundle_to_csv(
                        mmfg::simulate_coupled_particles(sol, X, cfg.sim)));
    }
    return kExitOk;
  }
  return kExitConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mmfg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckFailure;
  }
}
