"""Standard and delocalized spectral density functions of matrices over
group rings, computed through converging families of finite stages.

Groups and matrices are described by the same JSON documents the CLI
configs use; every function below accepts either a dict or a JSON string.
"""

import json as _json

import _specdens as _core

__all__ = [
    "run",
    "kappa",
    "hermitian",
    "det_bounds",
    "oracle_coefficient",
    "oracle_lndet",
    "stage_coefficient",
    "stage_lndet",
]


def _text(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def run(config, mode="converge"):
    """Run a full experiment and return the result as a dict.

    config: a configuration dict (or JSON string) with the same schema as
    the CLI config files: group, matrix, scheme, and the optional keys
    track, grid, path, tolerances, checks, ...
    mode: one of "density", "converge", "detbound", "sofic", "oracle".

    The result carries ok/failures, the tracked class table, per stage
    coefficient and determinant data, the torus oracle values, the CSV
    table texts, and the plain text report.
    """
    return _json.loads(_core.run_json(_text(config), mode))


def kappa(group, matrix):
    """sqrt(S(A) S(A*)) * |A|_inf, a bound on every stage spectrum."""
    return _core.kappa(_text(group), _text(matrix))


def hermitian(group, matrix):
    """True when the matrix equals its star transpose."""
    return _core.hermitian(_text(group), _text(matrix))


def det_bounds(group, matrix):
    """(b0, b1, conductor, embeddings): log determinant lower bounds."""
    return _core.det_bounds(_text(group), _text(matrix))


def oracle_coefficient(group, matrix, word, grid=256):
    """(value, error): kernel Fourier coefficient from the torus symbol."""
    return _core.oracle_coefficient(_text(group), _text(matrix), word, grid)


def oracle_lndet(group, matrix, grid=256):
    """(value, error): log determinant from the torus symbol."""
    return _core.oracle_lndet(_text(group), _text(matrix), grid)


def stage_coefficient(group, matrix, word, modulus):
    """(value, exact): exact kernel coefficient on the mod-n quotient."""
    return _core.stage_coefficient(_text(group), _text(matrix), word, modulus)


def stage_lndet(group, matrix, modulus, tau=-1.0):
    """Normalized log determinant of the mod-n quotient stage."""
    return _core.stage_lndet(_text(group), _text(matrix), modulus, tau)
