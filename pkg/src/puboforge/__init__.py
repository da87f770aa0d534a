"""puboforge: exact reduction of k-local pseudo-Boolean optimization to QUBO."""

from puboforge.bench import (
    BenchConfig,
    BenchRecord,
    fit_sqrt_scaling,
    lambda_grid,
    random_pubo,
    run_ancilla_experiment,
    run_config,
    run_precision_experiment,
)
from puboforge.gadgets import (
    GadgetMode,
    PlanError,
    ReducedInstance,
    ReductionPlan,
    apply_plan,
    beta_split,
    delta_for_group,
    emit_qubo,
    max_introduced_coefficient,
    parse_qubo,
    penalty_s,
    reduce_single_term,
    verify_penalty_minimality,
)
from puboforge.poly import (
    CapExceededError,
    DegreeError,
    ParseError,
    Polynomial,
    PuboError,
    avar,
    brute_force_minima,
    control_precision,
    emit_polynomial,
    monomial,
    parse_polynomial,
    to_ising,
    xvar,
)
from puboforge.precision import arbitrary_plan, greedy_precision_plan
from puboforge.setcover import (
    build_set_cover,
    emit_lp,
    mantel_construction,
    plan_from_cover,
    quarter_squares,
    reduce_min_greedy,
    set_cover_to_ilp,
    solve_ilp_exact,
)
from puboforge.verify import (
    BudgetExhaustedError,
    VerificationReport,
    verify_reduction,
    verify_saturation,
)
from puboforge.wmaxsat import (
    apply_quartic_plan,
    build_wmaxsat,
    decode_ancilla_set,
    emit_wcnf,
    parse_model,
    parse_wcnf,
    selection_from_model,
    solve_wmaxsat_exact,
)

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BenchRecord",
    "BudgetExhaustedError",
    "CapExceededError",
    "DegreeError",
    "GadgetMode",
    "ParseError",
    "PlanError",
    "Polynomial",
    "PuboError",
    "ReducedInstance",
    "ReductionPlan",
    "VerificationReport",
    "apply_plan",
    "apply_quartic_plan",
    "arbitrary_plan",
    "avar",
    "beta_split",
    "brute_force_minima",
    "build_set_cover",
    "build_wmaxsat",
    "control_precision",
    "decode_ancilla_set",
    "delta_for_group",
    "emit_lp",
    "emit_polynomial",
    "emit_qubo",
    "emit_wcnf",
    "fit_sqrt_scaling",
    "greedy_precision_plan",
    "lambda_grid",
    "mantel_construction",
    "max_introduced_coefficient",
    "monomial",
    "parse_model",
    "parse_polynomial",
    "parse_qubo",
    "parse_wcnf",
    "penalty_s",
    "plan_from_cover",
    "quarter_squares",
    "random_pubo",
    "reduce_min_greedy",
    "reduce_single_term",
    "run_ancilla_experiment",
    "run_config",
    "run_precision_experiment",
    "selection_from_model",
    "set_cover_to_ilp",
    "solve_ilp_exact",
    "solve_wmaxsat_exact",
    "to_ising",
    "verify_penalty_minimality",
    "verify_reduction",
    "verify_saturation",
    "xvar",
    "__version__",
]
