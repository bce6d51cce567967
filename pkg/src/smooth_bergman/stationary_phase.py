"""Stationary-phase coefficient operators on the good contour.

For an amplitude ``b(Y, Ybar, Z, Zbar)`` the ``j``-th coefficient of

    (kappa / h^n) * int exp(i f / h) b dL(z)  ~  sum_j h^j (L_j b)(Y, Ybar)

is

    L_j b = kappa pi^n / (2^n det L) * sum_{nu - mu = j, 2 nu >= 3 mu}
            i^mu / (2^nu mu! nu!) * [D^nu (g^mu b)](Z = 0),

with ``L`` the Levi jet and ``D = sum_ab (L^{-1})_ab d_{Zbar_a} d_{Z_b}``.
The sum without the prefactor is called the reduced coefficient ``S_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ContourNotGood, JetStructureError, OrderTooLow
from .fields import FLOAT
from .jets import Jet, mul_box, multi_indices, prune_box
from .phase_engine import ContourPullback, contour_phase, jet_det, jet_inverse
from .quadrature import QuadratureDomain, integrate

__all__ = [
    "AmplitudeJet",
    "ExpansionTerm",
    "StationaryPhase",
    "index_set",
    "required_b_order",
    "required_jet_order",
    "pullback_amplitude",
    "apply_L",
    "expand",
    "brute_force_expand",
    "fit_coefficients",
]


@dataclass(frozen=True)
class AmplitudeJet:
    """Amplitude ``a(x, y_tilde)`` as a jet in ``2n`` variables about ``(x0, conj x0)``.

    The represented function is ``a / scale``; keeping ``scale`` apart lets
    transcendental normalizations (powers of pi) stay out of exact arithmetic.
    """

    a: Jet
    scale: float = 1.0

    def __post_init__(self):
        if self.a.num_vars % 2:
            raise JetStructureError("amplitude jets need an even number of variables")

    @property
    def order(self) -> int:
        return self.a.order

    @property
    def dimension(self) -> int:
        return self.a.num_vars // 2

    def evaluate(self, x: Sequence, y_tilde: Sequence):
        """Numeric ``a(x, y_tilde)`` at displacements from the base point."""
        return self.a.evaluate(list(x) + list(y_tilde)) / self.scale


@dataclass(frozen=True)
class ExpansionTerm:
    """One coefficient ``y -> (L_j b)(y, 0)`` as a jet in ``(Y, Ybar)``.

    The value is ``factor * value_jet``; ``factor`` is 1 when the amplitude's
    scale matches ``kappa * pi^n``, in which case exact mode stays exact.
    """

    j: int
    value_jet: Jet
    factor: float = 1.0

    @property
    def value(self) -> Jet:
        if self.factor == 1.0:
            return self.value_jet
        return self.value_jet.to_field(FLOAT).scale(self.factor)

    def at_base(self) -> complex:
        return self.factor * self.value_jet.field.to_complex(self.value_jet.constant_term())


def index_set(j: int) -> list[tuple[int, int]]:
    """Pairs ``(mu, nu)`` with ``nu - mu = j`` and ``2 nu >= 3 mu``."""
    return [(mu, j + mu) for mu in range(2 * j + 1) if 2 * (j + mu) >= 3 * mu]


def required_b_order(j: int) -> int:
    """Total ``(z, zbar)`` degree ``L_j`` consumes: ``2 nu_max = 6 j``."""
    return 6 * j


def required_jet_order(N: int, y_order: int = 0) -> int:
    """Polarization order needed for ``N`` coefficients known to degree ``y_order`` in ``y``."""
    return 6 * (N - 1) + 2 + y_order


class StationaryPhase:
    """Per-contour data for repeated coefficient evaluations."""

    def __init__(self, cp: ContourPullback, kappa: float = 1.0):
        self.cp = cp
        self.kappa = kappa
        n = cp.dimension
        self.n = n
        nv = 4 * n
        self.nv = nv
        bp = cp.f.base_point
        self.groups = [list(range(2 * n)), list(range(2 * n, 3 * n)), list(range(3 * n, 4 * n))]
        self.levi_det = jet_det(cp.levi)
        inv = jet_inverse(cp.levi)
        self.levi_inv = [[m.relabel(list(range(2 * n)), nv, bp) for m in row] for row in inv]
        self.inv_prefactor = self.levi_det.scale(2**n).reciprocal()
        self.field = cp.field
        self.g = cp.g

    @property
    def pi_factor(self) -> float:
        return self.kappa * math.pi**self.n

    def reduced(self, j: int, b: Jet, y_order: int | None = None) -> Jet:
        """Reduced coefficient ``S_j(b)`` as a jet in ``(Y, Ybar)``."""
        if j < 0:
            raise ValueError("j must be non-negative")
        need = required_b_order(j)
        if b.order < need:
            raise OrderTooLow(
                f"L_{j} needs the amplitude to (z, zbar)-order {need}, got {b.order}", required=need
            )
        n, fld = self.n, self.field
        q = 10**9 if y_order is None else y_order
        total = None
        for mu, nu in index_set(j):
            F = prune_box(b, self.groups, (q, nu, nu))
            for _ in range(mu):
                F = mul_box(F, self.g, self.groups, (q, nu, nu))
            for k in range(1, nu + 1):
                acc = None
                for a_ in range(n):
                    dza = F.partial(3 * n + a_)
                    for b_ in range(n):
                        term = mul_box(
                            self.levi_inv[a_][b_], dza.partial(2 * n + b_), self.groups, (q, nu - k, nu - k)
                        )
                        acc = term if acc is None else acc + term
                F = acc
            at_zero = {
                k[: 2 * n]: v for k, v in F.coeffs.items() if not any(k[2 * n :])
            }
            piece = Jet(at_zero, 2 * n, F.order, F.base_point[: 2 * n], fld, _trusted=True)
            coef = fld.convert(1j) ** mu * fld.convert(
                Fraction(1, 2**nu * math.factorial(mu) * math.factorial(nu))
            )
            piece = piece.scale(coef)
            total = piece if total is None else total + piece
        if y_order is not None:
            total = total.truncate(y_order)
        if total.order < 0:
            required = need + 2
            raise OrderTooLow(
                f"contour jets of order {self.cp.order} cannot resolve L_{j}", required=required
            )
        return total

    def apply(self, j: int, b: Jet, b_scale: float = 1.0, y_order: int | None = None) -> ExpansionTerm:
        s = self.reduced(j, b, y_order)
        val = s * self.inv_prefactor.truncate(s.order)
        factor = self.pi_factor / b_scale
        return ExpansionTerm(j, val, factor)


def pullback_amplitude(a: AmplitudeJet | Jet, check: bool = False) -> Jet:
    """``b(Y, Ybar, Z, Zbar) = a(Y + Z, Ybar - Zbar)``.

    With ``check`` the sign rule ``d_Zbar^alpha b |_{Z=0} = (-1)^|alpha| d_yt^alpha a``
    is asserted for ``|alpha| <= 2``.
    """
    jet = a.a if isinstance(a, AmplitudeJet) else a
    n = jet.num_vars // 2
    nv = 4 * n
    bp = jet.base_point + (0j,) * (2 * n)

    def var(i):
        idx = [0] * nv
        idx[i] = 1
        return Jet({tuple(idx): 1}, nv, jet.order, bp, jet.field)

    images = [var(i) + var(2 * n + i) for i in range(n)] + [var(n + i) - var(3 * n + i) for i in range(n)]
    b = jet.substitute(images, bp)
    if check:
        _check_sign_rule(jet, b, n)
    return b


def _check_sign_rule(a: Jet, b: Jet, n: int) -> None:
    for alpha in multi_indices(n, 2):
        db, da = b, a
        for i, e in enumerate(alpha):
            for _ in range(e):
                db = db.partial(3 * n + i)
                da = da.partial(n + i)
        restricted = Jet(
            {k[: 2 * n]: v for k, v in db.coeffs.items() if not any(k[2 * n :])},
            2 * n,
            db.order,
            a.base_point,
            a.field,
            _trusted=True,
        )
        if sum(alpha) % 2:
            da = -da
        tol = 0.0 if a.field.exact else 1e-12 * max(1.0, a.max_abs())
        if restricted.max_abs_diff(da) > tol:
            raise AssertionError(f"sign rule fails for alpha = {alpha}")


def apply_L(
    j: int,
    cp: ContourPullback,
    b: Jet,
    kappa: float = 1.0,
    b_scale: float = 1.0,
    y_order: int | None = None,
) -> ExpansionTerm:
    """``(L_j b)(y, 0)`` as a jet in ``(Y, Ybar)``; ``b`` is a contour jet (see :func:`pullback_amplitude`)."""
    return StationaryPhase(cp, kappa).apply(j, b, b_scale, y_order)


def expand(
    cp: ContourPullback,
    a: AmplitudeJet | Jet | Sequence[AmplitudeJet],
    N: int,
    kappa: float = 1.0,
    y_order: int | None = None,
    sp: StationaryPhase | None = None,
) -> list[ExpansionTerm]:
    """Coefficients ``c_0 .. c_{N-1}`` of ``h^l`` in the expansion of ``A_Gamma a``.

    ``a`` may be a single amplitude or a list ``[a_0, a_1, ...]`` meaning
    ``sum_k h^k a_k``; then ``c_l = sum_{j + k = l} L_j a_k``. All members of
    a list must share one scale.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    parts = list(a) if isinstance(a, (list, tuple)) else [a]
    parts = [p if isinstance(p, AmplitudeJet) else AmplitudeJet(p) for p in parts]
    scales = {p.scale for p in parts}
    if len(scales) != 1:
        raise ValueError("amplitude terms must share a scale")
    scale = scales.pop()
    sp = StationaryPhase(cp, kappa) if sp is None else sp
    bs = [pullback_amplitude(p) for p in parts]
    out = []
    for ell in range(N):
        acc = None
        factor = 1.0
        for k in range(min(ell, len(bs) - 1) + 1):
            t = sp.apply(ell - k, bs[k], scale, y_order)
            factor = t.factor
            acc = t.value_jet if acc is None else acc + t.value_jet
        out.append(ExpansionTerm(ell, acc, factor))
    return out


def _amplitude_callable(a, h: float) -> Callable:
    if callable(a) and not isinstance(a, (Jet, AmplitudeJet)):
        return lambda x, yt: a(x, yt, h)
    parts = list(a) if isinstance(a, (list, tuple)) else [a]
    parts = [p if isinstance(p, AmplitudeJet) else AmplitudeJet(p) for p in parts]

    def ev(x, yt):
        total = 0j
        for k, p in enumerate(parts):
            total = total + h**k * p.evaluate(x, yt)
        return total

    return ev


def brute_force_expand(
    cp: ContourPullback,
    a,
    h_list: Sequence[float],
    kappa: float = 1.0,
    radius: float | None = None,
    tol: float = 1e-9,
    max_level: int = 5,
) -> list[complex]:
    """Quadrature values of ``(kappa / h^n) int_{|z| < R} exp(i f / h) b dL(z)`` at ``y = x0``.

    ``a`` is an amplitude, a list of amplitudes read as a series in ``h``,
    or a callable ``a(x_disp, yt_disp, h)``. ``f`` is taken from the full
    polynomial weight, so no truncation enters the oracle. ``R`` defaults to
    the weight's validity radius.

    Raises
    ------
    ContourNotGood
        If ``Im f`` is not positive on the integration boundary.
    QuadratureError
        If grid doubling does not converge.
    """
    w = cp.weight
    n = w.dimension
    R = w.validity_radius if radius is None else radius
    x0 = w.base_point
    th = np.linspace(0, 2 * np.pi, 257)[:-1]
    for j in range(n):
        z = [np.zeros_like(th, dtype=complex) for _ in range(n)]
        z[j] = R * np.exp(1j * th)
        if contour_phase(w, x0, z).imag.min() <= 0:
            raise ContourNotGood(f"Im f <= 0 on |z| = {R}; use a smaller radius")
    out = []
    for h in h_list:
        amp = _amplitude_callable(a, h)
        dom = QuadratureDomain.for_h((0j,) * n, R, h)

        def integrand(z, h=h, amp=amp):
            f = contour_phase(w, x0, z)
            zb = [-np.conj(v) for v in z]
            return np.exp(1j * f / h) * amp(z, zb)

        res = integrate(integrand, dom, tol=tol, max_level=max_level)
        out.append(kappa * res.value / h**n)
    return out


def fit_coefficients(h_list: Sequence[float], values: Sequence[complex], degree: int = 8) -> np.ndarray:
    """Least-squares polynomial fit ``values ~ sum_k c_k h^k``; returns ``c_0 .. c_degree``.

    Used to read expansion coefficients off ``brute_force_expand`` values on
    a dense window of small ``h``.
    """
    h = np.asarray(h_list, dtype=float)
    v = np.asarray(values, dtype=complex)
    if len(h) <= degree:
        raise ValueError(f"need more than {degree} h values for a degree-{degree} fit")
    re = np.polynomial.polynomial.polyfit(h, v.real, degree)
    im = np.polynomial.polynomial.polyfit(h, v.imag, degree)
    return re + 1j * im
