"""Strong stationary duals of birth-and-death chains."""

from ._bdssd import (
    BdssdError,
    ContinuousGenerator,
    DiscreteKernel,
    ExactKernel,
    absorption_cdf,
    absorption_pmf,
    anti_dual,
    classical_dual,
    discretize,
    eigenvalues,
    gaussian_split_residual,
    geometric_convolution,
    hypoexponential_cdf,
    lazy,
    load_chain,
    load_exact_kernel,
    monte_carlo_sst,
    occupation_laplace,
    pgf_product,
    run_coordinate_dual,
    run_coupled,
    spectral_dual,
    stationary_pmf,
    validate,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
