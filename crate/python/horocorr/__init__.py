"""Conformal metrics on spherical domains and their hypersurfaces in
hyperbolic space.

The heavy lifting happens in the compiled extension ``horocorr._native``;
this package re-exports its public surface:

- :func:`build` — immerse a catalog metric at a flow time, returning a
  :class:`Hypersurface` with measured principal curvatures;
- :func:`min_flow_time` — smallest admissible flow time on a grid;
- :func:`riccati` — the Möbius evolution law for principal curvatures;
- :func:`lambda_from_kappa` / :func:`kappa_from_lambda` — the eigenvalue ↔
  curvature dictionary;
- :func:`catalog_cards` — the built-in example metrics;
- :func:`verify` — the numbered verification suite.
"""

from horocorr._native import (
    Hypersurface,
    __version__,
    build,
    catalog_cards,
    kappa_from_lambda,
    lambda_from_kappa,
    min_flow_time,
    riccati,
    verify,
)

__all__ = [
    "Hypersurface",
    "__version__",
    "build",
    "catalog_cards",
    "kappa_from_lambda",
    "lambda_from_kappa",
    "min_flow_time",
    "riccati",
    "verify",
]
