"""Saddlepoint approximation toolkit for interval-truncated random variables.

The package approximates the cumulant generating function (and first two
derivatives) of a truncated random variable from the CGF of the underlying
variable, by two complementary routes (exponential tilting with a
Lugannani-Rice tail formula, and exponential-convolution saddlepoints whose
domain extends beyond the original convergence strip), plus a rule-of-thumb
hybrid.  On top of those sit saddlepoint inversions for rectangular
Dirichlet probabilities and for observed sojourns of two-state semi-Markov
ion channels under time-interval omission.
"""

__version__ = "0.1.0"

from .cgf import (
    CgfEval,
    CgfModel,
    ConvergenceStrip,
    eval_cgf,
    make_model,
    model_from_text,
)
from .conv import (
    ConvOneSidedCgf,
    ConvTwoSidedCgf,
    XiEval,
    conv_evaluator_for_window,
    conv_truncated_cgf_onesided,
    conv_truncated_cgf_twosided,
    xi_hat,
)
from .dirichlet import (
    DirichletResult,
    DirichletSpec,
    dirichlet_rectangle_probability,
    exact_rectangle_probability,
)
from .errors import TruncSaddleError
from .hybrid import (
    HybridTruncatedCgf,
    MethodChoice,
    hybrid_truncated_cgf,
    select_method,
    tail_diagnostics,
)
from .invert import (
    ModelCgf,
    SumCgf,
    lr_tail_probability,
    saddlepoint_density,
    solve_cgf_saddle,
    sum_cgf,
)
from .ionchannel import (
    ChannelSpec,
    ObservedCgf,
    observed_sojourn_density,
    observed_sojourn_mgf,
    simulate_observed_sojourns,
    truncated_sojourn_mgfs,
)
from .lr import (
    LrIngredients,
    LrTruncatedCgf,
    lr_cdf,
    lr_cdf_dtheta,
    lr_truncated_cgf,
)
from .oracle import (
    ExactTruncatedCgf,
    exact_truncated_cgf,
    exact_truncated_logmgf,
    exact_truncated_mgf,
    exact_xi,
    mc_sample_truncated,
)
from .solve import (
    SaddleRoot,
    central_first_derivative,
    central_second_derivative,
    solve_convolution_saddlepoint,
    solve_saddlepoint,
)
from .windows import TruncCgfEval, Window
