"""Information complexity and tractability conditions for linear problems
described by their singular values."""

from .complexity import (
    DEFAULT_CAP,
    INFINITE,
    ComplexityResult,
    DomainRestriction,
    complexity_curve,
    info_complexity,
    ub_restricted,
)
from .conditions import (
    CONVERGED,
    DIVERGED,
    INCONCLUSIVE,
    AgreementReport,
    BoundReport,
    ConditionSpec,
    SumVerdict,
    check_equivalence_prop1,
    direct_bound_check,
    evaluate,
    sum_kw_pt,
    sum_kw_spt,
    sum_strong,
    sum_strong_restricted,
    sum_subh,
    sum_tract,
    sum_tract_restricted,
)
from .errors import (
    BracketInvalid,
    BudgetExceeded,
    ConfigError,
    IndexBeyondTail,
    InvalidSpec,
    SpectrumError,
    TractabilityError,
)
from .families import FamilySpec, curated_families, make_family, spectrum_family
from .search import ParamSearchResult, bisect_scalar_p, pareto_pq
from .spectrum import (
    EnumeratedValue,
    ExplicitSpectrum,
    GeometricSpectrum,
    KorobovSpectrum,
    SpectrumHandle,
    enumerate_spectrum,
    upper_envelope,
    value_at,
)
from .tfun import HFun, TractFun, eval_h, eval_T, eval_T0, h_inverse, make_tfun, validate_h, validate_tfun

__version__ = "0.1.0"
