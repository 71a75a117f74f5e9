"""Plain-text serialization for matrices and vectors.

One row per line, space-separated decimals with 17 significant digits, so
round-trips are bit-exact for doubles. Used for test fixtures and exports.
"""

import numpy as np

FLOAT_FMT = "%.17g"


def format_float(x: float) -> str:
    return FLOAT_FMT % x


def save_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as fh:
        fh.write(matrix_to_text(M))


def matrix_to_text(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = [" ".join(FLOAT_FMT % v for v in row) for row in M]
    return "\n".join(lines) + "\n"


def load_matrix(path):
    with open(path) as fh:
        return matrix_from_lines(fh.read().splitlines())


def matrix_from_lines(lines):
    rows = [[float(v) for v in ln.split()] for ln in lines if ln.strip()]
    return np.asarray(rows, dtype=float)


def save_vector(path, v) -> None:
    save_matrix(path, np.asarray(v, dtype=float).reshape(1, -1))


def load_vector(path):
    return load_matrix(path).ravel()
