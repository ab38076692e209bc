"""Random-wave polyspectrum variances, random-walk densities and the constants I^d_q."""

from ._core import (
    FactorizationError,
    NumericalError,
    __version__,
    build_domain,
    classify_idq,
    density,
    gegenbauer,
    hermite,
    hermite_covariance_identity_check,
    hilb_main_term,
    idq,
    idq_value,
    jd,
    mc_variance,
    run_cli,
    sample_walk,
    variance_asymptotic,
    variance_exact,
    walk_cdf,
    weight,
)

__all__ = [
    "FactorizationError",
    "NumericalError",
    "__version__",
    "build_domain",
    "classify_idq",
    "density",
    "gegenbauer",
    "hermite",
    "hermite_covariance_identity_check",
    "hilb_main_term",
    "idq",
    "idq_value",
    "jd",
    "mc_variance",
    "run_cli",
    "sample_walk",
    "variance_asymptotic",
    "variance_exact",
    "walk_cdf",
    "weight",
]
