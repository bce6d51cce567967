"""The four-point phase, its pullback to the affine contour, and Hessian data.

Variable layouts
----------------
Phase jets live in ``4n`` variables ``(y, x_tilde, x, y_tilde)``.
Contour jets live in ``4n`` variables ``(Y, Ybar, Z, Zbar)``: ``Y`` is the
displacement of the critical point from ``x0``, ``Ybar`` its formal
conjugate, and ``(Z, Zbar)`` parametrize the contour
``x = y + z, y_tilde = conj(y) - conj(z)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .errors import ContourNotGood, OrderTooLow
from .fields import Field, to_complex
from .jets import Jet
from .polarize import Polarization, Weight, levi_form

__all__ = [
    "Phase",
    "ContourPullback",
    "DualOperator",
    "build_phase",
    "pullback_good_contour",
    "dual_quadratic_operator",
    "levi_block",
    "block_factorization_defect",
    "jet_det",
    "jet_inverse",
    "contour_phase",
]


@dataclass(frozen=True)
class Phase:
    phi: Jet
    order: int
    polarization: Polarization = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.polarization.dimension


@dataclass(frozen=True)
class ContourPullback:
    """Phase and remainder on the good contour, plus the Levi data they need.

    Attributes
    ----------
    f : Jet
        ``-2i * phi(Y, Ybar; Y + Z, Ybar - Zbar)`` in ``(Y, Ybar, Z, Zbar)``.
    g : Jet
        ``f - 2i * sum_jk L_jk(Y, Ybar) Z_j Zbar_k``; vanishes to third order in ``(Z, Zbar)``.
    levi : list of list of Jet
        ``L_jk = d^2 Psi / dx_j dy_tilde_k`` as jets in ``(Y, Ybar)``.
    hessian : ndarray
        Real ``2n x 2n`` matrix ``grad_z^2 f(x0, 0) / i`` in coordinates ``z = t + i s``.
    hessian_exact : list of list or None
        Same matrix over the Gaussian rationals when computed in exact mode.
    """

    f: Jet
    g: Jet
    levi: list
    hessian: np.ndarray
    hessian_exact: list | None
    phase: Phase = field(repr=False)
    min_im_ratio: float = float("nan")

    @property
    def dimension(self) -> int:
        return self.phase.dimension

    @property
    def order(self) -> int:
        return self.f.order

    @property
    def field(self) -> Field:
        return self.f.field

    @property
    def weight(self) -> Weight:
        return self.phase.polarization.weight

    def levi_det(self) -> Jet:
        return jet_det(self.levi)

    def hessian_det(self):
        """Determinant of ``hessian``; exact when the pullback was built in exact mode."""
        if self.hessian_exact is not None:
            return DomainMatrix(self.hessian_exact, (len(self.hessian_exact),) * 2, QQ_I).det()
        return float(np.linalg.det(self.hessian))


@dataclass(frozen=True)
class DualOperator:
    """Constant-coefficient operator ``sum_ab M_ab d_{zbar_a} d_{z_b}`` with ``M`` the inverse Levi form."""

    matrix: np.ndarray
    pairing: str = "d_zbar . d_z"


def _slots(n: int, name: str) -> list[int]:
    start = {"y": 0, "xt": n, "x": 2 * n, "yt": 3 * n}[name]
    return list(range(start, start + n))


def build_phase(p: Polarization) -> Phase:
    """``phi(y, xt; x, yt) = Psi(x, yt) - Psi(x, xt) - Psi(y, yt) + Psi(y, xt)``.

    Raises
    ------
    OrderTooLow
        When the polarization is truncated below order 2.
    """
    if p.order < 2:
        raise OrderTooLow("phase needs a polarization of order >= 2", required=2)
    n = p.dimension
    psi = p.psi
    nv = 4 * n
    bp = psi.base_point + psi.base_point

    def place(first: str, second: str) -> Jet:
        return psi.relabel(_slots(n, first) + _slots(n, second), nv, bp)

    phi = place("x", "yt") - place("x", "xt") - place("y", "yt") + place("y", "xt")
    _check_phase(phi, n)
    return Phase(phi, p.order, p)


def _check_phase(phi: Jet, n: int) -> None:
    # restrict x -> y, yt -> xt: a jet in (y, xt)
    positions = list(range(n)) + list(range(n, 2 * n)) + list(range(n)) + list(range(n, 2 * n))
    tol = 0.0 if phi.field.exact else 1e-12 * max(1.0, phi.max_abs())
    on_diag = phi.relabel(positions, 2 * n)
    if on_diag.max_abs() > tol:
        raise AssertionError("phase does not vanish on the critical set")
    for k in list(range(2 * n, 4 * n)):
        grad = phi.partial(k).relabel(positions, 2 * n)
        if grad.max_abs() > tol:
            raise AssertionError("phase gradient does not vanish on the critical set")


def jet_det(m: Sequence[Sequence[Jet]]) -> Jet:
    """Determinant of a square matrix of jets (Leibniz expansion, fine for small n)."""
    n = len(m)
    total = None
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = m[0][perm[0]]
        for i in range(1, n):
            term = term * m[i][perm[i]]
        term = term if sign > 0 else -term
        total = term if total is None else total + term
    return total


def jet_inverse(m: Sequence[Sequence[Jet]]) -> list[list[Jet]]:
    """Inverse of a jet matrix via the adjugate and the reciprocal determinant."""
    n = len(m)
    inv_det = jet_det(m).reciprocal()
    if n == 1:
        return [[inv_det]]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[m[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            cof = jet_det(minor)
            out[i][j] = cof * inv_det if (i + j) % 2 == 0 else -(cof * inv_det)
    return out


def levi_jets(p: Polarization) -> list[list[Jet]]:
    """``d^2 Psi / dx_j dy_tilde_k`` as jets in ``(x, y_tilde)``."""
    n = p.dimension
    return [[p.psi.partial(j).partial(n + k) for k in range(n)] for j in range(n)]


def pullback_good_contour(
    ph: Phase,
    w: Weight | None = None,
    check_radius: float | None = None,
    samples: int = 2000,
    seed: int = 0,
) -> ContourPullback:
    """Pull the phase back along ``x = y + z, y_tilde = conj(y) - conj(z)``.

    ``Im f`` is sampled on ``|z| <= check_radius`` (default half the weight's
    validity radius) at ``y = x0`` using the full polynomial weight.

    Raises
    ------
    ContourNotGood
        If some sample has ``Im f <= 0``.
    """
    p = ph.polarization
    w = p.weight if w is None else w
    n = p.dimension
    fld = ph.phi.field
    nv = 4 * n
    T = ph.order
    bp = ph.phi.base_point[: 2 * n] + (0j,) * (2 * n)

    def var(i, coeff=1):
        idx = [0] * nv
        idx[i] = 1
        return Jet({tuple(idx): coeff}, nv, T, bp, fld)

    Y = [var(i) for i in range(n)]
    Yb = [var(n + i) for i in range(n)]
    Z = [var(2 * n + i) for i in range(n)]
    Zb = [var(3 * n + i) for i in range(n)]
    images = Y + Yb + [Y[i] + Z[i] for i in range(n)] + [Yb[i] - Zb[i] for i in range(n)]
    minus_2i = fld.convert(-2j)
    f = ph.phi.substitute(images, bp).scale(minus_2i)

    levi = levi_jets(p)
    levi4 = [[L.relabel(list(range(2 * n)), nv, bp) for L in row] for row in levi]
    quad = Jet.zero(nv, T, bp, fld)
    for j in range(n):
        for k in range(n):
            quad = quad + levi4[j][k] * Z[j] * Zb[k]
    g = f - quad.scale(fld.convert(2j))
    low = {k: v for k, v in g.coeffs.items() if sum(k[2 * n :]) <= 2}
    if low:
        tol = 0.0 if fld.exact else 1e-12 * max(1.0, f.max_abs())
        worst = max(abs(to_complex(v)) for v in low.values())
        if worst > tol:
            raise AssertionError(f"contour remainder has (z, zbar)-degree <= 2 terms of size {worst:.2e}")
        # float rounding residue
        g = Jet({k: v for k, v in g.coeffs.items() if k not in low}, nv, g.order, bp, fld, _trusted=True)

    hess, hess_exact = _real_hessian(f, n)
    ratio = _check_im_positive(w, check_radius, samples, seed)
    return ContourPullback(f, g, levi, hess, hess_exact, ph, ratio)


def _real_hessian(f: Jet, n: int):
    """``grad^2_{(t,s)} f / i`` at ``Y = 0, z = 0`` from the quadratic coefficients of ``f``."""
    fld = f.field
    nv = 4 * n

    def second(a: int, b: int):
        idx = [0] * nv
        idx[a] += 1
        idx[b] += 1
        c = f.coeff(tuple(idx))
        return c * 2 if a == b else c

    zs = [2 * n + i for i in range(n)]
    zbs = [3 * n + i for i in range(n)]
    P = [[second(zs[a], zs[b]) for b in range(n)] for a in range(n)]
    R = [[second(zs[a], zbs[b]) for b in range(n)] for a in range(n)]
    Q = [[second(zbs[a], zbs[b]) for b in range(n)] for a in range(n)]
    i_ = fld.convert(1j)
    minus_i = fld.convert(-1j)
    H = [[None] * (2 * n) for _ in range(2 * n)]
    for a in range(n):
        for b in range(n):
            tt = P[a][b] + R[a][b] + R[b][a] + Q[a][b]
            ts = i_ * (P[a][b] - R[a][b] + R[b][a] - Q[a][b])
            st = i_ * (P[a][b] + R[a][b] - R[b][a] - Q[a][b])
            ss = -P[a][b] + R[a][b] + R[b][a] - Q[a][b]
            H[a][b] = tt * minus_i
            H[a][n + b] = ts * minus_i
            H[n + a][b] = st * minus_i
            H[n + a][n + b] = ss * minus_i
    Hc = np.array([[to_complex(v) for v in row] for row in H])
    scale = max(1.0, float(np.max(np.abs(Hc))))
    if np.max(np.abs(Hc.imag)) > 1e-12 * scale:
        raise AssertionError("Hessian of f / i is not real")
    return Hc.real.copy(), (H if fld.exact else None)


def contour_phase(w: Weight, y: Sequence[complex], z: Sequence) -> np.ndarray:
    """Numeric ``f(y, z)`` from the full polynomial polarization."""
    n = w.dimension
    z = [np.asarray(v, dtype=complex) for v in z]
    yv = [np.full_like(z[0], y[j]) for j in range(n)]
    yb = [np.conj(v) for v in yv]
    x = [yv[j] + z[j] for j in range(n)]
    yt = [yb[j] - np.conj(z[j]) for j in range(n)]
    ev = w.evaluate_polarized
    phi = ev(x, yt) - ev(x, yb) - ev(yv, yt) + ev(yv, yb)
    return -2j * phi


def _check_im_positive(w: Weight, radius: float | None, samples: int, seed: int) -> float:
    n = w.dimension
    r = 0.5 * w.validity_radius if radius is None else radius
    rng = np.random.default_rng(seed)
    rad = r * np.sqrt(rng.random((n, samples)))
    ang = 2 * np.pi * rng.random((n, samples))
    z = [rad[j] * np.exp(1j * ang[j]) for j in range(n)]
    im = contour_phase(w, w.base_point, z).imag
    norm2 = sum(np.abs(v) ** 2 for v in z)
    ok = norm2 > 1e-20
    ratio = im[ok] / norm2[ok]
    if ratio.size and ratio.min() <= 0:
        i = int(np.argmin(ratio))
        witness = tuple(complex(v[ok][i]) for v in z)
        raise ContourNotGood(
            f"Im f <= 0 at z = {witness}; shrink the validity radius", witness
        )
    return float(ratio.min()) if ratio.size else float("nan")


def dual_quadratic_operator(w: Weight, y: Sequence[complex] | None = None) -> DualOperator:
    """Inverse Levi form at ``y``, to be paired as ``d_zbar . d_z``.

    Examples
    --------
    >>> dual_quadratic_operator(Weight.fock(1)).matrix
    array([[2.+0.j]])
    """
    return DualOperator(np.linalg.inv(levi_form(w, y)))


def levi_block(levi: np.ndarray) -> np.ndarray:
    """Real block matrix ``[[A1, A2], [-A2, A1]]`` for ``levi = A1 + i A2``."""
    a1, a2 = levi.real, levi.imag
    return np.block([[a1, a2], [-a2, a1]])


def block_factorization_defect(levi: np.ndarray) -> float:
    """Max entry of ``(1/2) U* diag(L, conj L) V - [[A1, A2], [-A2, A1]]``."""
    n = levi.shape[0]
    eye = np.eye(n)
    left = np.block([[eye, eye], [1j * eye, -1j * eye]])
    right = np.block([[eye, -1j * eye], [eye, 1j * eye]])
    mid = np.block([[levi, np.zeros((n, n))], [np.zeros((n, n)), levi.T]])
    return float(np.max(np.abs(0.5 * left @ mid @ right - levi_block(levi))))
