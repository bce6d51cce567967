"""Polynomial weights, their Levi form, and the holomorphic polarization.

A weight is a real polynomial in ``(x, x_bar)``; on jets its polarization
``Psi(x, y_tilde)`` is obtained by renaming every ``x_bar`` slot to a ``y_tilde``
slot, then averaging with the Hermitian transpose so that
``Psi(x, y) = conj(Psi(conj(y), conj(x)))`` holds coefficientwise.

Variable layout of a polarization jet with ``n`` complex dimensions: slots
``0..n-1`` are ``x`` and ``n..2n-1`` are ``y_tilde``, both measured from the
base point ``(x0, conj(x0))``.
"""

from __future__ import annotations

import warnings
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DoublingEstimateViolation, StrictPSHViolation
from .fields import FLOAT, Field, get_field, to_complex, to_exact
from .jets import Jet

__all__ = [
    "Weight",
    "Polarization",
    "DoublingReport",
    "levi_form",
    "polarize",
    "restrict",
    "hermitian_defect",
    "check_doubling_estimate",
]

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Weight:
    """Real polynomial ``Phi(x) = sum c * x**alpha * conj(x)**beta`` on C^n.

    Attributes
    ----------
    dimension : int
        Complex dimension ``n``.
    monomials : tuple
        Triples ``(alpha, beta, c)`` with ``alpha`` the exponents of ``x`` and
        ``beta`` those of ``conj(x)``. Coefficients may be exact (Fraction,
        int, sympy Gaussian rationals) or complex floats.
    base_point : tuple of complex
        Expansion point ``x0``.
    validity_radius : float
        Polydisk radius about ``x0`` on which the weight is trusted.
    """

    dimension: int
    monomials: tuple
    base_point: tuple = ()
    validity_radius: float = 1.0
    name: str = "weight"

    def __post_init__(self):
        n = self.dimension
        if n < 1:
            raise ValueError("dimension must be positive")
        if not self.base_point:
            object.__setattr__(self, "base_point", (0j,) * n)
        if len(self.base_point) != n:
            raise ValueError("base point has the wrong dimension")
        merged: dict = {}
        for alpha, beta, c in self.monomials:
            alpha, beta = tuple(int(a) for a in alpha), tuple(int(b) for b in beta)
            if len(alpha) != n or len(beta) != n or min(alpha + beta) < 0:
                raise ValueError(f"bad exponents {alpha}, {beta} for dimension {n}")
            c = to_exact(c)
            key = (alpha, beta)
            merged[key] = merged[key] + c if key in merged else c
        merged = {k: v for k, v in merged.items() if v}
        for (alpha, beta), c in merged.items():
            partner = merged.get((beta, alpha))
            if partner is None or partner != type(c)(c.x, -c.y):
                raise ValueError(
                    f"weight is not real: term {alpha}|{beta} lacks a conjugate partner"
                )
        object.__setattr__(
            self,
            "monomials",
            tuple(sorted(((a, b, c) for (a, b), c in merged.items()), key=lambda t: (sum(t[0]) + sum(t[1]), t[0], t[1]))),
        )

    @classmethod
    def from_terms(
        cls,
        dimension: int,
        terms: Iterable,
        base_point: Sequence[complex] = (),
        validity_radius: float = 1.0,
        complete: bool = True,
        name: str = "weight",
    ) -> "Weight":
        """Build a weight, adding missing Hermitian partner terms when ``complete``."""
        merged: dict = {}
        for alpha, beta, c in terms:
            key = (tuple(alpha), tuple(beta))
            c = to_exact(c)
            merged[key] = merged[key] + c if key in merged else c
        if complete:
            added = []
            for (alpha, beta), c in list(merged.items()):
                if (beta, alpha) not in merged:
                    merged[(beta, alpha)] = type(c)(c.x, -c.y)
                    added.append((beta, alpha))
            if added:
                warnings.warn(
                    f"auto-completed {len(added)} Hermitian partner term(s): {added}",
                    stacklevel=2,
                )
        return cls(
            dimension,
            tuple((a, b, c) for (a, b), c in merged.items()),
            tuple(base_point),
            validity_radius,
            name,
        )

    @classmethod
    def fock(cls, dimension: int = 1, **kw) -> "Weight":
        """The model weight ``|x|^2 / 2``."""
        terms = []
        for j in range(dimension):
            e = tuple(int(k == j) for k in range(dimension))
            terms.append((e, e, Fraction(1, 2)))
        return cls(dimension, tuple(terms), **kw)

    @property
    def degree(self) -> int:
        return max((sum(a) + sum(b) for a, b, _ in self.monomials), default=0)

    def evaluate(self, x: Sequence) -> np.ndarray:
        """Real value ``Phi(x)``; coordinates may be numpy arrays."""
        return np.real(self.evaluate_polarized(x, [np.conj(np.asarray(v, dtype=complex)) for v in x]))

    def evaluate_polarized(self, x: Sequence, y_tilde: Sequence):
        """Polynomial ``Psi(x, y_tilde)`` (the exact polarization of a polynomial weight)."""
        x = [np.asarray(v, dtype=complex) for v in x]
        y_tilde = [np.asarray(v, dtype=complex) for v in y_tilde]
        total = 0j
        for alpha, beta, c in self.monomials:
            term = to_complex(c)
            for j in range(self.dimension):
                if alpha[j]:
                    term = term * x[j] ** alpha[j]
                if beta[j]:
                    term = term * y_tilde[j] ** beta[j]
            total = total + term
        return total

    def polynomial_jet(self, field: Field | str = FLOAT) -> Jet:
        """The weight as an exact jet in ``(x, x_bar)`` about the origin."""
        field = get_field(field)
        n = self.dimension
        coeffs = {tuple(a) + tuple(b): c for a, b, c in self.monomials}
        if not field.exact:
            coeffs = {k: to_complex(v) for k, v in coeffs.items()}
        return Jet(coeffs, 2 * n, max(self.degree, 0), None, field)

    def jet(self, order: int, field: Field | str = FLOAT, base_point=None) -> Jet:
        """Taylor jet in ``(x, x_bar)`` about ``base_point`` (default ``x0``)."""
        field = get_field(field)
        n = self.dimension
        x0 = self.base_point if base_point is None else tuple(base_point)
        poly = self.polynomial_jet(field)
        if any(to_complex(v) != 0 for v in x0):
            conv = field.convert if field.exact else to_complex
            offset = [conv(v) for v in x0] + [field.conj(conv(v)) for v in x0]
            eye = np.eye(2 * n, dtype=int).tolist()
            poly = poly.compose_affine(eye, offset)
        bp = tuple(complex(v) for v in x0) + tuple(complex(v).conjugate() for v in x0)
        return Jet(poly.truncate(order).coeffs, 2 * n, order, bp, field, _trusted=True)

    def levi_matrix(self, x: Sequence[complex] | None = None) -> np.ndarray:
        """Mixed Hessian ``d^2 Phi / dx_j d conj(x_k)`` evaluated at ``x`` (no checks)."""
        n = self.dimension
        x = list(self.base_point if x is None else x)
        xb = [complex(v).conjugate() for v in x]
        m = np.zeros((n, n), dtype=complex)
        for alpha, beta, c in self.monomials:
            c = to_complex(c)
            for j in range(n):
                if not alpha[j]:
                    continue
                for k in range(n):
                    if not beta[k]:
                        continue
                    a = list(alpha)
                    b = list(beta)
                    a[j] -= 1
                    b[k] -= 1
                    term = c * alpha[j] * beta[k]
                    for i in range(n):
                        term *= complex(x[i]) ** a[i] * xb[i] ** b[i]
                    m[j, k] += term
        return m

    def with_base_point(self, x0: Sequence[complex]) -> "Weight":
        return Weight(self.dimension, self.monomials, tuple(x0), self.validity_radius, self.name)


@dataclass(frozen=True)
class Polarization:
    """Holomorphic extension ``Psi(x, y_tilde)`` of a weight, as a jet about ``(x0, conj x0)``."""

    psi: Jet
    order: int
    weight: Weight = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.weight.dimension

    def evaluate(self, x: Sequence, y_tilde: Sequence):
        """Numeric ``Psi(x, y_tilde)`` from the full polynomial (no truncation)."""
        return self.weight.evaluate_polarized(x, y_tilde)


def levi_form(w: Weight, x: Sequence[complex] | None = None) -> np.ndarray:
    """Levi form of ``w`` at ``x``, checked Hermitian and positive definite.

    Raises
    ------
    StrictPSHViolation
        If the matrix is not positive definite; the smallest eigenvalue is attached.
    """
    m = w.levi_matrix(x)
    defect = np.max(np.abs(m - m.conj().T), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if defect > HERMITIAN_TOL * scale:
        raise ValueError(f"Levi form is not Hermitian (defect {defect:.2e})")
    m = (m + m.conj().T) / 2
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise StrictPSHViolation(
            "weight is not strictly plurisubharmonic", float(np.linalg.eigvalsh(m)[0])
        ) from None
    return m


def hermitian_defect(psi: Jet, n: int) -> float:
    """Largest ``|c_{alpha beta} - conj(c_{beta alpha})|`` over the coefficients of ``psi``."""
    worst = 0.0
    for k, v in psi.coeffs.items():
        swapped = k[n:] + k[:n]
        other = psi.field.conj(psi.coeff(swapped))
        worst = max(worst, abs(to_complex(v - other)))
    return worst


def restrict(p: Polarization) -> Jet:
    """Jet of ``Psi(x, conj x)`` in ``(x, x_bar)``: slot ``n + j`` is read as ``conj x_j``."""
    return p.psi


def polarize(w: Weight, order: int, field: Field | str = FLOAT) -> Polarization:
    """Polarization jet of ``w`` about its base point, truncated at ``order``.

    Examples
    --------
    >>> p = polarize(Weight.fock(1), 4)
    >>> p.psi.terms()
    [((1, 1), (0.5+0j))]
    """
    field = get_field(field)
    levi_form(w)
    n = w.dimension
    phi = w.jet(order, field)
    half = field.convert(0.5)
    sym = {}
    for k, v in phi.coeffs.items():
        swapped = k[n:] + k[:n]
        c = (v + field.conj(phi.coeff(swapped))) * half
        if not field.is_zero(c):
            sym[k] = c
    psi = Jet(sym, 2 * n, order, phi.base_point, field, _trusted=True)
    # restriction identity; exact for real weights
    tol = 0.0 if field.exact else 1e-12 * max(1.0, phi.max_abs())
    diff = psi.max_abs_diff(phi)
    if diff > tol:
        raise ValueError(f"polarization does not restrict to the weight (defect {diff:.2e})")
    return Polarization(psi, order, w)


@dataclass
class DoublingReport:
    c_minus: float
    c_plus: float
    remainder_constant: float
    samples: int
    sample_radius: float
    witness: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.c_minus > 0


def check_doubling_estimate(
    p: Polarization,
    w: Weight | None = None,
    sample_radius: float | None = None,
    samples: int = 10_000,
    seed: int = 0,
    raise_on_violation: bool = True,
) -> DoublingReport:
    """Sample ``Phi(x) + Phi(y) - 2 Re Psi(x, conj y)`` against ``|x - y|^2``.

    Pairs are drawn uniformly from the polydisk of radius ``sample_radius``
    (default 0.3 times the validity radius) about the base point. The report
    carries the observed two-sided constants and the largest ratio
    ``|D - L(x)(y - x).conj(y - x)| / |x - y|^3``, the cubic remainder
    relative to the Levi quadratic form at ``x``.
    """
    w = p.weight if w is None else w
    n = w.dimension
    r = 0.3 * w.validity_radius if sample_radius is None else sample_radius
    rng = np.random.default_rng(seed)

    def draw():
        rad = r * np.sqrt(rng.random((n, samples)))
        ang = 2 * np.pi * rng.random((n, samples))
        return [np.asarray(w.base_point[j]) + rad[j] * np.exp(1j * ang[j]) for j in range(n)]

    x, y = draw(), draw()
    yb = [np.conj(v) for v in y]
    d = w.evaluate(x) + w.evaluate(y) - 2 * np.real(p.evaluate(x, yb))
    dist2 = sum(np.abs(x[j] - y[j]) ** 2 for j in range(n))
    ok = dist2 > 1e-24
    ratio = d[ok] / dist2[ok]
    c_minus, c_plus = float(ratio.min()), float(ratio.max())

    # quadratic model with the Levi form at x
    quad = np.zeros(samples)
    hess = _levi_field(w, x)
    for j in range(n):
        for k in range(n):
            quad = quad + np.real(hess[j][k] * (y[j] - x[j]) * np.conj(y[k] - x[k]))
    rem = np.abs(d - quad)[ok] / dist2[ok] ** 1.5
    report = DoublingReport(c_minus, c_plus, float(rem.max()), samples, r)
    if c_minus <= 0:
        i = int(np.argmin(ratio))
        idx = np.flatnonzero(ok)[i]
        report.witness = (
            tuple(complex(v[idx]) for v in x),
            tuple(complex(v[idx]) for v in y),
        )
        if raise_on_violation:
            raise DoublingEstimateViolation(
                f"Phi(x)+Phi(y)-2Re Psi(x,y_bar) not positive (ratio {c_minus:.3e})",
                report.witness,
            )
    return report


def _levi_field(w: Weight, x: Sequence[np.ndarray]):
    """Levi form entries as arrays over sample points."""
    n = w.dimension
    xb = [np.conj(v) for v in x]
    out = [[0j for _ in range(n)] for _ in range(n)]
    for alpha, beta, c in w.monomials:
        c = to_complex(c)
        for j in range(n):
            for k in range(n):
                if not (alpha[j] and beta[k]):
                    continue
                a, b = list(alpha), list(beta)
                a[j] -= 1
                b[k] -= 1
                term = c * alpha[j] * beta[k]
                for i in range(n):
                    if a[i]:
                        term = term * x[i] ** a[i]
                    if b[i]:
                        term = term * xb[i] ** b[i]
                out[j][k] = out[j][k] + term
    return out
