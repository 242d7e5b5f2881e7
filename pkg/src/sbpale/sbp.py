"""Diagonal-norm summation-by-parts (SBP) first-derivative operators in 1D.

An SBP operator consists of a positive diagonal quadrature ``P`` and an
almost skew-symmetric matrix ``Q`` with

    Q + Q^T = diag(-1, 0, ..., 0, 1),

from which the derivative is ``D = P^{-1} Q``.  The pair mimics integration
by parts discretely: for any vectors ``u``, ``v``,

    (u, D v)_P + (D u, v)_P = u_e v_e - u_s v_s.

Two classical operators are provided (second-order, and fourth-order
interior with second-order boundary closures), plus a penalty coupling of
two blocks into one operator on the concatenated node set.  The coupling
keeps the interface nodes duplicated (one per block), leaves ``P`` block
diagonal, and cancels the interface contribution to ``Q + Q^T`` so the
global operator satisfies the same SBP structure as a single block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_ORDERS = ((2, 1), (4, 2))

_CLOSURE_WIDTH = {(2, 1): 1, (4, 2): 4}

# Fourth-order interior / second-order closure coefficients.  Every entry of
# Q is an integer multiple of 1/96, stored exactly below; P closure weights
# are multiples of 1/48.
_Q42_CLOSURE = np.array(
    [
        [-48, 59, -8, -3, 0, 0],
        [-59, 0, 59, 0, 0, 0],
        [8, -59, 0, 59, -8, 0],
        [3, 0, -59, 0, 64, -8],
    ],
    dtype=float,
) / 96.0
_Q42_INTERIOR = np.array([8, -64, 0, 64, -8], dtype=float) / 96.0
_P42_CLOSURE = np.array([17.0, 59.0, 43.0, 49.0]) / 48.0


class _SurfaceMixin:
    """Endpoint restriction data shared by single- and multi-block operators."""

    @property
    def surface_indices(self) -> tuple[int, int]:
        return (0, self.n - 1)

    @property
    def surface_normals(self) -> np.ndarray:
        return np.array([-1.0, 1.0])

    @property
    def surface_weights(self) -> np.ndarray:
        return np.array([1.0, 1.0])

    def restriction(self) -> np.ndarray:
        """Selection matrix E mapping volume vectors to the two surface nodes."""
        return restriction_matrix(self.surface_indices, self.n)


@dataclass(frozen=True, eq=False)
class SbpOperator1D(_SurfaceMixin):
    """Single-block diagonal-norm SBP operator on ``n`` uniformly spaced nodes."""

    n: int
    h: float
    P: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    order_interior: int
    order_boundary: int


@dataclass(frozen=True, eq=False)
class MultiblockOperator(_SurfaceMixin):
    """Two blocks coupled through interface penalties into one global operator.

    The interface node is duplicated (one copy per block); ``interface``
    holds the global indices of the two copies.
    """

    blocks: tuple[SbpOperator1D, ...]
    penalties: tuple[float, float]
    P: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    n: int
    interface: tuple[int, int]
    order_interior: int
    order_boundary: int


def restriction_matrix(indices, n: int) -> np.ndarray:
    """Unit-row selection matrix picking out ``indices`` from a length-n vector."""
    e = np.zeros((len(indices), n))
    for row, idx in enumerate(indices):
        e[row, idx] = 1.0
    return e


def _balance_row_sums(q: np.ndarray) -> None:
    # Push each row sum to (near) zero so that D @ 1 vanishes to roundoff;
    # the corrections are O(1e-17) and leave the SBP residual intact.
    for _ in range(2):
        for i in range(q.shape[0]):
            s = math.fsum(q[i])
            if s != 0.0:
                q[i, np.argmax(np.abs(q[i]))] -= s


def _build_21(n: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.ones(n)
    p[0] = p[-1] = 0.5
    q = np.zeros((n, n))
    q[0, 0], q[0, 1] = -0.5, 0.5
    for i in range(1, n - 1):
        q[i, i - 1], q[i, i + 1] = -0.5, 0.5
    q[-1, -2], q[-1, -1] = -0.5, 0.5
    return p, q


def _build_42(n: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.ones(n)
    p[:4] = _P42_CLOSURE
    p[-4:] = _P42_CLOSURE[::-1]
    q = np.zeros((n, n))
    q[:4, :6] = _Q42_CLOSURE
    q[-4:, -6:] = -_Q42_CLOSURE[::-1, ::-1]
    for i in range(4, n - 4):
        q[i, i - 2 : i + 3] = _Q42_INTERIOR
    return p, q


def build_operator(order, n: int, h: float) -> SbpOperator1D:
    """Construct a diagonal-norm SBP operator.

    Args:
        order: accuracy pair, ``(2, 1)`` or ``(4, 2)`` (interior, boundary).
        n: node count.
        h: grid spacing, must be positive.

    Raises:
        ValueError: unsupported order, non-positive spacing, or ``n`` smaller
            than twice the boundary closure width.
    """
    order = tuple(order)
    if order not in _CLOSURE_WIDTH:
        raise ValueError(f"unsupported order {order}; choose from {SUPPORTED_ORDERS}")
    n_min = 2 * _CLOSURE_WIDTH[order]
    if n < n_min:
        raise ValueError(f"order {order} closure needs at least {n_min} nodes, got {n}")
    if h <= 0:
        raise ValueError(f"grid spacing must be positive, got {h}")

    p, q = _build_21(n) if order == (2, 1) else _build_42(n)
    _balance_row_sums(q)
    p = h * p
    d = q / p[:, None]
    return SbpOperator1D(
        n=n,
        h=float(h),
        P=p,
        Q=q,
        D=d,
        order_interior=order[0],
        order_boundary=order[1],
    )


def sbp_residual(op) -> float:
    """Max-norm deviation of ``Q + Q^T`` from the two-endpoint boundary term."""
    r = op.Q + op.Q.T
    r[0, 0] += 1.0
    r[-1, -1] -= 1.0
    return float(np.abs(r).max())


def couple_blocks(
    left: SbpOperator1D,
    right: SbpOperator1D,
    penalties: tuple[float, float] = (-0.5, 0.5),
    left_end: float | None = None,
    right_start: float | None = None,
) -> MultiblockOperator:
    """Couple two blocks with interface penalties into a global SBP operator.

    The penalty on each interface row acts on the jump (own value minus the
    neighbouring block's value), scaled through that block's quadrature
    weight.  The default pair ``(-1/2, +1/2)`` is the unique choice for which
    the interface contribution to ``Q + Q^T`` cancels identically, leaving
    only the two outer boundary terms.

    ``left_end`` / ``right_start`` optionally carry the physical coordinates
    of the duplicated interface node; a mismatch raises ``ValueError``.
    """
    if left_end is not None and right_start is not None:
        scale = max(1.0, abs(left_end), abs(right_start))
        if abs(left_end - right_start) > 1e-12 * scale:
            raise ValueError(
                f"blocks do not share the interface point: {left_end} vs {right_start}"
            )

    n = left.n + right.n
    i, j = left.n - 1, left.n
    p = np.concatenate([left.P, right.P])
    q = np.zeros((n, n))
    q[: left.n, : left.n] = left.Q
    q[left.n :, left.n :] = right.Q
    sigma_l, sigma_r = penalties
    q[i, i] += sigma_l
    q[i, j] -= sigma_l
    q[j, j] += sigma_r
    q[j, i] -= sigma_r
    d = q / p[:, None]
    return MultiblockOperator(
        blocks=(left, right),
        penalties=(float(sigma_l), float(sigma_r)),
        P=p,
        Q=q,
        D=d,
        n=n,
        interface=(i, j),
        order_interior=min(left.order_interior, right.order_interior),
        order_boundary=min(left.order_boundary, right.order_boundary),
    )


def dump_csv(op, outdir) -> list[Path]:
    """Debug dump of P, Q and D as CSV files; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, arr in (("P", op.P), ("Q", op.Q), ("D", op.D)):
        path = outdir / f"{name}.csv"
        np.savetxt(path, np.atleast_2d(arr), delimiter=",")
        written.append(path)
    return written
