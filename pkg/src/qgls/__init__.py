"""Numerical toolkit for quasi-Grand Lebesgue spaces (exponents 0 < p <= 1)."""

from .errors import *  # noqa: F401,F403
from .measure import (FunctionRep, Indicator, MeasureSpace, PowerLog, Sampled, SlowlyVarying, TailDefined,
                      evaluate, finite_discrete, half_line, unit_interval)
from .psi import (BandaliyevPsi, ConstantPsi, IwaniecSbordonePsi, ProductPsi, PsiFunction, TabulatedPsi,
                  TailModelPsi, psi_eval, tail_model_psi)
from .quasinorm import (NormResult, QuasiTriangleCertificate, aoki_rolewicz_power, geometric_mean_limit,
                        lp_quasinorm, quasi_triangle_check, quasi_triangle_constant)
from .gls import (boyd_indices, collapse_demo, fundamental_bounds_check, fundamental_function, gls_norm,
                  gls_quasi_triangle_check, natural_function)
from .tails import (AnalyticTail, InvertedTail, StepTail, TailFunction, norm_from_tail,
                    optimal_p_tail_estimate, tail_of, tcheby_tail_bound)
from .fixedpoint import (ContractionCertificate, ContractionProblem, QuasiMetricSpace, estimate_alpha,
                         solve)
from .transfer import OperatorBoundProfile, transfer_psi, verify_transfer_norm

__version__ = "0.1.0"
