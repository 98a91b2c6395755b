"""Linear-quadratic major/minor mean field games.

Thin Python layer over the C++ core: master-equation and finite-N Nash
solvers, Euler-Maruyama particle simulation, exact Wasserstein distances,
and the convergence/verification harness.
"""

from ._mmfg import (
    BlowUpError,
    ConfigError,
    ConvergenceRow,
    ConvergenceTable,
    CostEstimate,
    EmpiricalMeasure,
    LoadedConfig,
    LqSpec,
    MasterEval,
    MasterSolution,
    Mu0,
    NashEval,
    NashSolution,
    PathBundle,
    RateFit,
    SimConfig,
    VerifyCheck,
    VerifyReport,
    config_to_json,
    estimate_major_cost,
    estimate_minor_cost,
    eval_master,
    eval_nash,
    expected_minor_value,
    fit_rate,
    load_config,
    major_value,
    master_residual,
    nash_residual,
    parse_config,
    run_convergence,
    simulate_coupled_particles,
    simulate_equilibrium_flow,
    solve_master,
    solve_nash,
    verify_all,
    wasserstein,
)

__all__ = [name for name in dir() if not name.startswith("_")]
