"""Numerical laboratory for energy-minimizing kinks of the forced bistable
equation and their Painlevé-II corner profiles."""

from .blowdown import (
    BlowupReport,
    DivisionReport,
    OuterReport,
    ScalingReport,
    compare_blowup,
    division_diagnostic,
    fit_zero_scaling,
    outer_deviation,
    outer_order_report,
    predict_zero,
    rescale_blowup,
    tanh_layer_check,
)
from .grids import Grid1D, graded, layer_grid
from .kink import (
    EtaSolution,
    KinkSolution,
    SolverConfig,
    energy,
    locate_zero,
    second_variation_min,
    solve_eta,
    solve_minimizer,
)
from .model import (
    AlphaValue,
    AssumptionReport,
    PotentialSpec,
    ThresholdReport,
    alpha_of,
    compute_thresholds,
    find_xi,
    validate_assumptions,
)
from .outer import corner_expansion_eta, outer_root
from .painleve import (
    PainleveSolution,
    PiiConfig,
    SpectrumReport,
    airy_log_deriv,
    backlund_step,
    count_sign_changes,
    dirichlet_spectrum,
    linearization_spectrum,
    solve_pii,
)

__version__ = "0.1.0"
