"""Solve for the symbol ``a ~ sum h^j a_j`` that inverts ``A_Gamma`` to all orders.

Coefficients are stored in reduced form ``ahat_j = kappa pi^n a_j``. The
reduced recursion is

    ahat_0 = 2^n det L,
    ahat_M = - sum_{j < M} S_{M - j}(bhat_j),   bhat_j(Y, Ybar, Z, Zbar) = ahat_j(Y + Z, Ybar - Zbar),

which involves no transcendental constants, so exact mode stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import EllipticityFailure, InversionFailure, OrderTooLow
from .fields import get_field, to_complex
from .jets import Jet
from .phase_engine import ContourPullback, build_phase, pullback_good_contour
from .polarize import Weight, polarize
from .stationary_phase import (
    AmplitudeJet,
    StationaryPhase,
    brute_force_expand,
    expand,
    pullback_amplitude,
    required_jet_order,
)
from .sweep import SLOPE_SLACK, SweepReport

__all__ = [
    "Symbol",
    "InversionReport",
    "calibrate",
    "solve_recursion",
    "verify_inversion",
    "build_pipeline",
]

_KAPPA_CACHE: dict[int, float] = {}


@dataclass(frozen=True)
class Symbol:
    """Truncated symbol ``sum_{j<N} h^j a_j(x, y_tilde)`` about ``(x0, conj x0)``.

    Attributes
    ----------
    coeffs : list of Jet
        Reduced coefficients ``ahat_j``; the actual ``a_j`` is ``ahat_j / scale``.
    kappa : float
        Calibration constant of the contour integral.
    scale : float
        ``kappa * pi**n``.
    """

    n: int
    x0: tuple
    N: int
    coeffs: list
    kappa: float
    scale: float

    def amplitude_terms(self) -> list[AmplitudeJet]:
        return [AmplitudeJet(c, self.scale) for c in self.coeffs]

    def numeric_terms(self, N: int | None = None) -> list[AmplitudeJet]:
        """Amplitudes for quadrature: ``a_j`` truncated at degree ``2 (N - j)``.

        The dropped Taylor terms contribute ``O(h^(N+1))`` after Gaussian
        localization, while keeping them would let polynomial growth far
        from the base point swamp the integral at coarse ``h``.
        """
        N = self.N if N is None else N
        return [AmplitudeJet(c.truncate(2 * (N - j)), self.scale) for j, c in enumerate(self.coeffs[:N])]

    def coefficient(self, j: int) -> Jet:
        """``a_j`` as a float jet."""
        return self.coeffs[j].to_field("float").scale(1.0 / self.scale)

    def at_base(self) -> list[complex]:
        """``a_j(x0, conj x0)`` for each ``j``."""
        return [to_complex(c.constant_term()) / self.scale for c in self.coeffs]

    def evaluate(self, x: Sequence, y_tilde: Sequence, h: float, terms: int | None = None):
        """Numeric ``sum_j h^j a_j(x, y_tilde)`` at absolute coordinates."""
        terms = self.N if terms is None else terms
        dx = [np.asarray(v, dtype=complex) - self.x0[i] for i, v in enumerate(x)]
        dy = [np.asarray(v, dtype=complex) - np.conj(self.x0[i]) for i, v in enumerate(y_tilde)]
        total = 0j
        for j in range(terms):
            total = total + h**j * self.coeffs[j].evaluate(dx + dy)
        return total / self.scale

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        fld = self.coeffs[0].field
        lines = [
            "# symbol a ~ sum_j h^j a_j(x, y_tilde); a_j = table / scale",
            f"n = {self.n}",
            "x0 = " + " ".join(f"{complex(v).real!r} {complex(v).imag!r}" for v in self.x0),
            f"N = {self.N}",
            f"kappa = {self.kappa!r}",
            f"scale = {self.scale!r}",
            f"field = {fld.name}",
        ]
        n = self.n
        for j, c in enumerate(self.coeffs):
            lines.append(f"[a_{j}] order = {c.order}")
            for idx, v in c.terms():
                re, im = _fmt_pair(v, fld.exact)
                xs = " ".join(str(e) for e in idx[:n])
                ys = " ".join(str(e) for e in idx[n:])
                lines.append(f"{xs} | {ys} | {re} | {im}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Symbol":
        head: dict = {}
        blocks: list = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[a_"):
                order = int(line.split("order =")[1])
                blocks.append((order, {}))
            elif "|" in line:
                xs, ys, re, im = (p.strip() for p in line.split("|"))
                idx = tuple(int(e) for e in xs.split()) + tuple(int(e) for e in ys.split())
                blocks[-1][1][idx] = (re, im)
            else:
                k, v = (p.strip() for p in line.split("=", 1))
                head[k] = v
        n = int(head["n"])
        fld = get_field(head.get("field", "float"))
        nums = [float(t) for t in head["x0"].split()]
        x0 = tuple(complex(nums[2 * i], nums[2 * i + 1]) for i in range(n))
        bp = x0 + tuple(v.conjugate() for v in x0)
        coeffs = []
        for order, table in blocks:
            if fld.exact:
                conv = {k: (Fraction(re), Fraction(im)) for k, (re, im) in table.items()}
            else:
                conv = {k: complex(float(re), float(im)) for k, (re, im) in table.items()}
            coeffs.append(Jet(conv, 2 * n, order, bp, fld))
        return cls(n, x0, int(head["N"]), coeffs, float(head["kappa"]), float(head["scale"]))


def _fmt_pair(v, exact: bool) -> tuple[str, str]:
    if exact:
        return str(v.x), str(v.y)
    c = complex(v)
    return repr(c.real), repr(c.imag)


def calibrate(n: int) -> float:
    """Constant ``kappa`` making the contour integral reproduce the Fock symbol.

    The Fock kernel ``(pi h)^-n exp(x.y_tilde / h)`` has the constant symbol
    ``pi^-n``; the leading coefficient of ``A_Gamma`` applied to it is read
    with trial ``kappa = 1`` and ``kappa`` is chosen to make it equal to one.
    The value is cached per dimension.
    """
    if n in _KAPPA_CACHE:
        return _KAPPA_CACHE[n]
    cp = pullback_good_contour(build_phase(polarize(Weight.fock(n), 2)))
    bp = cp.f.base_point[: 2 * n]
    fock_symbol = AmplitudeJet(Jet.constant(1.0, 2 * n, 2, bp), scale=math.pi**n)
    c0 = expand(cp, fock_symbol, 1, kappa=1.0)[0].at_base()
    if abs(c0.imag) > 1e-12 * abs(c0):
        raise EllipticityFailure(f"calibration produced a non-real leading coefficient {c0}")
    kappa = 1.0 / c0.real
    _KAPPA_CACHE[n] = kappa
    return kappa


def solve_recursion(
    cp: ContourPullback,
    N: int,
    kappa: float | None = None,
    y_order: int = 0,
) -> Symbol:
    """Determine ``a_0 .. a_{N-1}`` on the anti-diagonal and extend them by relabeling.

    Raises
    ------
    OrderTooLow
        If ``cp`` was built with order below ``6 (N - 1) + 2 + y_order``.
    EllipticityFailure
        If the leading coefficient nearly vanishes at the base point.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    n = cp.dimension
    need = required_jet_order(N, y_order)
    if cp.order < need:
        raise OrderTooLow(
            f"N = {N} with y_order = {y_order} needs jets of order {need}, got {cp.order}",
            required=need,
        )
    kappa = calibrate(n) if kappa is None else kappa
    sp = StationaryPhase(cp, kappa)
    scale = sp.pi_factor
    a0 = sp.levi_det.scale(2**n)
    if abs(to_complex(a0.constant_term())) / scale < 1e-12:
        raise EllipticityFailure("leading symbol vanishes at the base point")
    coeffs = [a0]
    bs = [pullback_amplitude(a0)]
    for M in range(1, N):
        acc = None
        for j in range(M):
            s = sp.reduced(M - j, bs[j])
            acc = s if acc is None else acc + s
        aM = -acc
        coeffs.append(aM)
        bs.append(pullback_amplitude(aM))
    x0 = tuple(cp.weight.base_point)
    return Symbol(n, x0, N, coeffs, kappa, scale)


@dataclass
class InversionReport:
    residuals: list
    tolerance: float
    symbolic_passed: bool
    sweep: SweepReport | None = None
    values: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.symbolic_passed and (self.sweep is None or self.sweep.passed)


def verify_inversion(
    s: Symbol,
    cp: ContourPullback,
    N: int | None = None,
    h_list: Sequence[float] | None = (0.1, 0.05, 0.025),
    radius: float | None = None,
    raise_on_failure: bool = True,
) -> InversionReport:
    """Check ``A_Gamma a = 1 + O(h^N)`` symbolically and by quadrature.

    Symbolic residuals are the largest coefficient of ``c_0 - 1`` and of
    ``c_l`` (``l >= 1``) as jets; the tolerance is zero in exact mode and
    ``1e-11`` otherwise. The numeric part fits ``|A_Gamma a - 1| ~ h^p`` at
    ``y = x0`` and requires ``p >= N - 0.3``. Pass ``h_list=None`` to skip it.

    Raises
    ------
    InversionFailure
        On the first failing order (or ``ell = -1`` for a failed slope) when
        ``raise_on_failure``.
    """
    N = s.N if N is None else N
    terms = s.amplitude_terms()
    cs = expand(cp, terms, N, kappa=s.kappa)
    exact = cp.field.exact and all(t.factor == 1.0 for t in cs)
    tol = 0.0 if exact else 1e-11
    residuals = []
    for t in cs:
        v = t.value
        if t.j == 0:
            v = v - 1
        residuals.append(v.max_abs())
    bad = [ell for ell, r in enumerate(residuals) if r > tol]
    ok = not bad
    if bad and raise_on_failure:
        ell = bad[0]
        raise InversionFailure(f"residual c_{ell} = {residuals[ell]:.3e} exceeds {tol:g}", ell=ell)
    report = InversionReport(residuals, tol, ok)
    if h_list:
        vals = brute_force_expand(cp, s.numeric_terms(N), list(h_list), kappa=s.kappa, radius=radius)
        errors = [abs(v - 1) for v in vals]
        report.values = vals
        report.sweep = SweepReport.from_errors(
            h_list,
            errors,
            threshold=N - SLOPE_SLACK,
            metadata={"label": f"inversion N={N}", "N": N},
            noise_floor=1e-9,
        )
        if raise_on_failure and not report.sweep.passed:
            raise InversionFailure(
                f"|A a - 1| decays with slope {report.sweep.slope:.3f} < {N - SLOPE_SLACK}", ell=-1
            )
    return report


def build_pipeline(
    w: Weight, N: int, field="float", y_order: int = 2, order: int | None = None
) -> tuple[ContourPullback, Symbol]:
    """Polarize, build the phase and contour data, and solve for the symbol."""
    order = required_jet_order(N, y_order) if order is None else order
    cp = pullback_good_contour(build_phase(polarize(w, order, field)))
    return cp, solve_recursion(cp, N, y_order=y_order)
