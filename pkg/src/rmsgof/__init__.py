"""Confidence levels for the root-mean-square goodness-of-fit statistic.

The pipeline: build a model distribution (``model``), extract the limiting
variance spectrum (``eigen``), evaluate the asymptotic CDF of the squared
statistic (``wsumchi2``), and compare statistics by Monte Carlo power
(``stats``, ``montecarlo``).  The ``rmsgof`` console script exposes the same
pipeline from the shell.
"""

__version__ = "0.1.0"

from .eigen import (
    ProjectedInverseMatrix,
    VarianceSpectrum,
    build_b,
    jacobi_eigenvalues,
    variance_spectrum,
)
from .errors import (
    DegenerateSpectrum,
    LengthMismatch,
    NonPositiveProbability,
    NotBracketed,
    NotFinite,
    OracleDidNotConverge,
    ParseError,
    QuadratureBudgetExceeded,
    RmsgofError,
    TooFewBins,
    UnsupportedBinCount,
)
from .model import (
    BuiltinFamily,
    ModelDistribution,
    dump_distribution,
    generate_builtin,
    load_distribution,
    make_distribution,
    parse_family,
)
from .montecarlo import (
    DistinguishResult,
    PowerResult,
    SimulationConfig,
    asymptotic_pvalue_validation,
    critical_value,
    distinguish_m,
    power_experiment,
    sample_counts,
)
from .stats import (
    DrawCounts,
    chi2_statistic,
    freeman_tukey_statistic,
    g2_statistic,
    rms_statistic,
)
from .wsumchi2 import (
    CdfEvaluation,
    QuadratureConfig,
    cdf,
    cdf_pv_oracle,
    integrand,
)
