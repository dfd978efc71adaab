"""Growing attachment trees: models, growth-rate solver, centrality, limits.

Thin re-export of the compiled core. The heavy lifting (tree growth,
Jordan-centrality scans, branching-process sampling) happens in C++; this
package keeps the Python surface small and stable.
"""

from ._core import (
    AttachmentFunction,
    ModelConfigError,
    ResourceCapError,
    degree_pmf,
    grow,
    psi,
    rho_hat,
    sample_w,
    sample_y,
    simulate_embedding,
    solve_malthusian,
    top_k,
    validate_model,
)

__all__ = [
    "AttachmentFunction",
    "ModelConfigError",
    "ResourceCapError",
    "degree_pmf",
    "grow",
    "psi",
    "rho_hat",
    "sample_w",
    "sample_y",
    "simulate_embedding",
    "solve_malthusian",
    "top_k",
    "validate_model",
]
