from ._core import (
    DgsError,
    combine_classical_sis_cost,
    combine_dual_costs,
    combine_sis_cost,
    log_gaussian_sum,
    lwe_attack,
    mass_summary,
    mean_estimate,
    quantum_pipeline,
    rho_integers,
    sample,
    sim_good_amplitude,
    solve_sis,
    target_pmf,
    verify,
)

__all__ = [
    "DgsError",
    "combine_classical_sis_cost",
    "combine_dual_costs",
    "combine_sis_cost",
    "log_gaussian_sum",
    "lwe_attack",
    "mass_summary",
    "mean_estimate",
    "quantum_pipeline",
    "rho_integers",
    "sample",
    "sim_good_amplitude",
    "solve_sis",
    "target_pmf",
    "verify",
]
