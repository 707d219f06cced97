"""CSL model checking and Monte Carlo estimation for CTMC models written in a
guarded-command language.

The functions take model source text (see `satellite_source()` for a complete
example) plus query strings such as ``P=?[F<=129600 s=5]`` or
``R{"availability"}=?[C<=T]`` and return plain dicts.
"""

from ._ctmck import (
    ModelError,
    NumericsError,
    ParseError,
    constellation_source,
    export_csv,
    export_dot,
    run_manifest,
    satellite_source,
)
from . import _ctmck as _core

__all__ = [
    "ParseError",
    "ModelError",
    "NumericsError",
    "check",
    "simulate",
    "sweep",
    "run_manifest",
    "export_dot",
    "export_csv",
    "satellite_source",
    "constellation_source",
]


def _as_list(queries):
    return [queries] if isinstance(queries, str) else list(queries)


def check(model, queries, overrides=None, eps=1e-10):
    """Evaluate one query or a list of queries; returns a list of result dicts."""
    return _core.check(model, _as_list(queries), overrides or {}, eps)


def simulate(model, queries, overrides=None, replications=100_000, seed=1,
             confidence=0.99):
    """Monte Carlo estimates with confidence intervals, one dict per query."""
    return _core.simulate(model, _as_list(queries), overrides or {},
                          replications, seed, confidence)


def sweep(model, queries, sweeps, overrides=None, eps=1e-10, jobs=1):
    """Evaluate queries over a parameter grid ("name=lo:hi:step", at most two)."""
    return _core.sweep(model, _as_list(queries), _as_list(sweeps),
                       overrides or {}, eps, jobs)
