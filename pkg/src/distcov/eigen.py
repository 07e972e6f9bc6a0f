"""Eigen-decomposition of the symmetric global covariance matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import GlobalCovariance
from .errors import NonConvergence
from .matrix import DenseMatrix

__all__ = ["EigenDecomposition", "symmetric_eigen"]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; column i of `eigenvectors` pairs with
    eigenvalue i and has unit 2-norm."""

    eigenvalues: tuple[float, ...]
    eigenvectors: DenseMatrix


def symmetric_eigen(a: GlobalCovariance) -> EigenDecomposition:
    """Full eigen-decomposition of a symmetric covariance matrix.

    Eigenvalues come back sorted descending. Eigenvectors are only unique up
    to sign, so each column is normalized to a canonical form: its entry of
    largest absolute value is made positive (ties broken by lowest index).

    Raises:
        NonConvergence: the underlying iteration failed to converge.
    """
    sym = a.matrix.values
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"eigen-decomposition did not converge: {exc}") from None
    # eigh sorts ascending; flip to descending and re-pair the columns.
    vals = vals[::-1]
    vecs = np.ascontiguousarray(vecs[:, ::-1])
    for i in range(vecs.shape[1]):
        col = vecs[:, i]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0.0:
            np.negative(col, out=col)
    return EigenDecomposition(
        eigenvalues=tuple(float(v) for v in vals),
        eigenvectors=DenseMatrix._wrap(vecs),
    )
