"""Quadrature realization of the approximate projection and exact-kernel comparisons.

All kernel quantities are handled in weighted form, e.g.
``exp(-Phi(x)/h) K(x, conj y) exp(-Phi(y)/h)``, with exponents combined
before exponentiating so nothing overflows for small ``h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .amplitude import Symbol
from .errors import DomainError, OracleError
from .polarize import Polarization, Weight, check_doubling_estimate
from .quadrature import QuadratureDomain, disk_rule, integrate
from .sweep import NOISE_FLOOR, SLOPE_SLACK, SweepReport

__all__ = [
    "KernelEstimate",
    "OracleKernel",
    "SupNormReport",
    "apply_projection",
    "reproducing_sweep",
    "oracle_kernel",
    "compare_local_global",
    "sup_norm_estimate",
    "polynomial_function",
    "check_h_gate",
]


def polynomial_function(u) -> Callable[[list], np.ndarray]:
    """Evaluator for a holomorphic polynomial ``{exponents: coeff}`` (callables pass through)."""
    if callable(u):
        return u
    terms = [(tuple(k), complex(v)) for k, v in dict(u).items()]

    def ev(y):
        total = 0j
        for k, c in terms:
            t = c
            for yj, e in zip(y, k):
                if e:
                    t = t * np.asarray(yj, dtype=complex) ** e
            total = total + t
        return total

    return ev


def check_h_gate(radius: float, h: float) -> None:
    """Localization gate ``h <= radius^2 / 10``."""
    if h > radius**2 / 10:
        raise DomainError(f"h = {h} too large for domain radius {radius} (need h <= {radius**2 / 10:.4g})")


@dataclass(frozen=True)
class KernelEstimate:
    """``Kt(x, conj y) = h^-n exp(2 Psi(x, conj y) / h) sum_{j<N} h^j a_j(x, conj y)``."""

    symbol: Symbol
    polarization: Polarization
    h: float
    terms: int | None = None

    @property
    def weight(self) -> Weight:
        return self.polarization.weight

    @property
    def dimension(self) -> int:
        return self.symbol.n

    def log_weighted_phase(self, x: Sequence, y: Sequence):
        """``(2 Psi(x, conj y) - Phi(x) - Phi(y)) / h``."""
        w = self.weight
        yb = [np.conj(np.asarray(v, dtype=complex)) for v in y]
        return (2 * w.evaluate_polarized(x, yb) - w.evaluate(x) - w.evaluate(y)) / self.h

    def amplitude(self, x: Sequence, y: Sequence):
        yb = [np.conj(np.asarray(v, dtype=complex)) for v in y]
        return self.symbol.evaluate(x, yb, self.h, self.terms)

    def weighted(self, x: Sequence, y: Sequence):
        """``exp(-Phi(x)/h) Kt(x, conj y) exp(-Phi(y)/h)``."""
        h, n = self.h, self.dimension
        return h**-n * np.exp(self.log_weighted_phase(x, y)) * self.amplitude(x, y)

    def __call__(self, x: Sequence, y: Sequence):
        """Unweighted ``Kt(x, conj y)``; may overflow for small ``h``."""
        h, n = self.h, self.dimension
        yb = [np.conj(np.asarray(v, dtype=complex)) for v in y]
        return h**-n * np.exp(2 * self.weight.evaluate_polarized(x, yb) / h) * self.amplitude(x, y)


def apply_projection(
    k: KernelEstimate,
    u,
    q: QuadratureDomain,
    x: Sequence[complex],
    tol: float = 1e-9,
    weighted: bool = False,
) -> complex:
    """Quadrature value of ``h^-n int_V Kt-integrand u(y) exp(-2 Phi(y)/h) dL(y)`` at ``x``.

    Returns the plain value, or with ``weighted`` the value times
    ``exp(-Phi(x)/h)``.

    Raises
    ------
    DomainError
        If ``x`` lies outside the inner polydisk of half radius, or ``h`` fails the gate.
    QuadratureError
        If grid doubling does not converge.
    """
    x = tuple(complex(v) for v in x)
    if not q.contains(x, 0.5):
        raise DomainError(f"point {x} outside the inner polydisk")
    h = k.h
    check_h_gate(q.radius, h)
    w = k.weight
    ufun = polynomial_function(u)
    phix = float(w.evaluate([np.asarray(v) for v in x]))
    dom = QuadratureDomain.for_h(q.center, q.radius, h, n_radial=q.n_radial, n_angular=q.n_angular)

    def integrand(y):
        xs = [np.full(y[0].shape, v) for v in x]
        yb = [np.conj(v) for v in y]
        expo = (2 * w.evaluate_polarized(xs, yb) - 2 * w.evaluate(y) - phix) / h
        return h ** -k.dimension * np.exp(expo) * k.symbol.evaluate(xs, yb, h, k.terms) * ufun(y)

    val = integrate(integrand, dom, tol=tol).value
    return val if weighted else val * math.exp(phix / h)


def _check_geometric(h_list: Sequence[float]) -> None:
    if len(h_list) < 4:
        raise ValueError("a sweep needs at least 4 h values")
    ratios = [b / a for a, b in zip(h_list[:-1], h_list[1:])]
    if any(abs(r - ratios[0]) > 1e-9 * abs(ratios[0]) for r in ratios):
        raise ValueError("h values must form a geometric progression")
    if len(set(h_list)) != len(h_list) or min(h_list) <= 0:
        raise ValueError("h values must be positive and distinct")


def reproducing_sweep(
    symbol: Symbol,
    polarization: Polarization,
    u,
    q: QuadratureDomain,
    x: Sequence[complex],
    h_list: Sequence[float],
    noise_floor: float = NOISE_FLOOR,
    label: str = "reproducing",
    gate_seed: int = 0,
) -> SweepReport:
    """Errors ``|Pi u(x) - u(x)| exp(-Phi(x)/h)`` over ``h`` with a fitted slope.

    The contract slope is ``N - 0.3``. The doubling estimate is checked
    first as a gate.
    """
    _check_geometric(list(h_list))
    w = polarization.weight
    check_doubling_estimate(polarization, w, seed=gate_seed)
    ufun = polynomial_function(u)
    ux = complex(ufun([np.asarray(complex(v)) for v in x]))
    phix = float(w.evaluate([np.asarray(complex(v)) for v in x]))
    errors = []
    for h in h_list:
        k = KernelEstimate(symbol, polarization, h)
        val = apply_projection(k, ufun, q, x, weighted=True)
        errors.append(abs(val - ux * math.exp(-phix / h)))
    meta = {"label": label, "N": symbol.N, "x": [str(complex(v)) for v in x], "weight": w.name}
    return SweepReport.from_errors(h_list, errors, symbol.N - SLOPE_SLACK, meta, noise_floor)


@dataclass
class OracleKernel:
    """Projection kernel onto polynomials of degree <= ``basis_degree`` in ``L^2(D_R, exp(-2 Phi/h))``."""

    weight: Weight
    h: float
    basis_degree: int
    radius: float
    gram: np.ndarray  # Jacobi-scaled Gram matrix
    scaling: np.ndarray  # diag(G)^(-1/2)
    condition: float
    inverse: np.ndarray = field(repr=False, default=None)
    log_scale: float = 0.0

    def _coeff_matrix(self) -> np.ndarray:
        # K(x, conj y) = sum_jk C_jk x^j conj(y)^k with C_jk = (G^-1)_kj
        if self.inverse is None:
            ginv = np.linalg.inv(self.gram)
            self.inverse = (self.scaling[:, None] * ginv * self.scaling[None, :]).T
        return self.inverse

    def _poly(self, x, y):
        c = complex(self.weight.base_point[0])
        x0 = np.asarray(x[0], dtype=complex)
        y0 = np.asarray(y[0], dtype=complex)
        d = self.basis_degree
        xp = (x0 - c)[..., None] ** np.arange(d + 1)
        yp = np.conj(y0 - c)[..., None] ** np.arange(d + 1)
        return np.einsum("...j,jk,...k->...", xp, self._coeff_matrix(), yp), x0, y0

    def weighted(self, x, y):
        """``exp(-Phi(x)/h) K(x, conj y) exp(-Phi(y)/h)`` for scalar or array points."""
        k, x0, y0 = self._poly(x, y)
        phi = self.weight.evaluate([x0]) + self.weight.evaluate([y0])
        return k * np.exp(-phi / self.h + self.log_scale)

    def __call__(self, x, y):
        return self._poly(x, y)[0] * math.exp(self.log_scale)

    def reproduce(self, u, x, level: int = 1) -> complex:
        """``int K(x, conj y) u(y) exp(-2 Phi(y)/h) dL(y)`` over the oracle disk."""
        ufun = polynomial_function(u)
        rule = _oracle_rule(self.radius, self.h, self.weight.base_point[0], level)
        y = rule.nodes
        vals = self([np.full(y.shape, complex(x[0]))], [y]) * ufun([y]) * np.exp(
            -2 * self.weight.evaluate([y]) / self.h - self.log_scale
        )
        return complex(np.sum(vals * rule.weights))


def _oracle_rule(radius: float, h: float, center: complex, level: int):
    panels = max(4, math.ceil(radius / (2 * math.sqrt(h))))
    return disk_rule(radius, 16 * 2**level, 64 * 2**level, center, panels)


def _auto_radius(w: Weight, h: float, degree: int, tol: float = 1e-10) -> float:
    """Smallest radius whose tail share of ``int |y|^(2d) exp(-2 Phi/h)`` is below ``tol``.

    Uses ``min_{|y - c| = r} Phi`` on each circle, which overestimates the tail.
    """
    th = np.linspace(0, 2 * np.pi, 129)[:-1]
    c = complex(w.base_point[0])

    def log_density(r):
        phimin = np.min(w.evaluate([c + r[:, None] * np.exp(1j * th)[None, :]]), axis=1)
        return math.log(2 * math.pi) + (2 * degree + 1) * np.log(r) - 2 * phimin / h

    r_max = 1.0
    while True:
        r = np.linspace(1e-6, r_max, 4000)
        ld = log_density(r)
        if ld[-1] < ld.max() - 80:
            break
        r_max *= 1.5
        if r_max > 1e3:
            raise OracleError("weight does not confine the basis; no finite integration radius")
    dens = np.exp(ld - ld.max())
    seg = 0.5 * (dens[1:] + dens[:-1]) * np.diff(r)
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    share = tail / tail[0]
    return float(r[np.argmax(share < tol)])


def oracle_kernel(
    w: Weight,
    basis_degree: int,
    integration_radius: float | None,
    h: float,
    cond_limit: float = 1e12,
) -> OracleKernel:
    """Gram-orthonormalization kernel on a disk about the base point (``n = 1``).

    With ``integration_radius=None`` the radius is grown until the tail
    bound ``2 pi R R^(2d) exp(-2 min_{|y|=R} Phi / h) h / G_dd`` drops below
    ``1e-10``.

    Raises
    ------
    OracleError
        For ``n != 1``, an ill-conditioned (Jacobi-scaled) Gram matrix, or a
        non-converged Gram quadrature.
    """
    if w.dimension != 1:
        raise OracleError("the exact-kernel oracle supports n = 1 only")
    d = basis_degree
    c = complex(w.base_point[0])
    phi_c = float(w.evaluate([np.asarray(c)]))
    log_scale = -2 * phi_c / h  # keeps the Gram entries O(1)-ish near the center

    def gram(R, level):
        rule = _oracle_rule(R, h, c, level)
        y = rule.nodes - c
        wt = rule.weights * np.exp(-2 * w.evaluate([rule.nodes]) / h - log_scale)
        V = y[:, None] ** np.arange(d + 1)
        return (V.T * wt) @ np.conj(V)  # G_jk = int y^j conj(y)^k

    R = integration_radius
    if R is None:
        R = _auto_radius(w, h, d)
    G = gram(R, 0)
    for level in range(1, 5):
        G2 = gram(R, level)
        s = 1 / np.sqrt(np.real(np.diag(G2)))
        if np.max(np.abs(s[:, None] * (G2 - G) * s[None, :])) < 1e-12:
            G = G2
            break
        G = G2
    else:
        raise OracleError("Gram quadrature did not converge")
    diag = np.real(np.diag(G))
    s = 1 / np.sqrt(diag)
    Gs = s[:, None] * G * s[None, :]
    cond = float(np.linalg.cond(Gs))
    if cond > cond_limit:
        raise OracleError(
            f"Gram matrix condition number {cond:.2e} exceeds {cond_limit:.0e}; "
            "use a smaller basis_degree or a larger h"
        )
    if c == 0 and all(a == b for a, b, _ in w.monomials):
        off = np.max(np.abs(Gs - np.diag(np.diag(Gs))))
        if off > 1e-12:
            raise OracleError(f"radial weight but off-diagonal Gram entries {off:.2e}")
    # K = sum_jk x^j conj(y)^k (G^-1)_kj carries the factor exp(-log_scale)
    return OracleKernel(w, h, d, float(R), Gs, s, cond, log_scale=-log_scale)


def compare_local_global(
    symbol: Symbol,
    polarization: Polarization,
    sample_points: Sequence,
    h_list: Sequence[float],
    basis_degree: int = 24,
    integration_radius: float | None = None,
    noise_floor: float = 1e-12,
    off_diagonal: Sequence | None = None,
) -> SweepReport:
    """Weighted kernel differences ``exp(-Phi(x)/h) (K - Kt) exp(-Phi(y)/h)`` over ``h``.

    The error at each ``h`` is ``h^n`` times the largest on-diagonal
    difference over ``sample_points``. Hermitian symmetry of the difference
    and positivity of the oracle density are asserted at every ``h``; pairs
    in ``off_diagonal`` (default: consecutive sample points) feed the
    symmetry check.
    """
    n = symbol.n
    w = polarization.weight
    pts = [complex(p[0]) if isinstance(p, (tuple, list)) else complex(p) for p in sample_points]
    pairs = list(off_diagonal) if off_diagonal is not None else list(zip(pts[:-1], pts[1:]))
    errors, asym, per_point = [], 0.0, []
    for h in h_list:
        orc = oracle_kernel(w, basis_degree, integration_radius, h)
        kt = KernelEstimate(symbol, polarization, h)
        diffs = []
        for p in pts:
            ko = complex(orc.weighted([p], [p]))
            if ko.real <= 0:
                raise OracleError(f"oracle density not positive at {p}")
            diffs.append(abs(ko - complex(kt.weighted([p], [p]))))
        per_point.append(diffs)
        errors.append(h**n * max(diffs))
        for a, b in pairs:
            dab = complex(orc.weighted([a], [b])) - complex(kt.weighted([a], [b]))
            dba = complex(orc.weighted([b], [a])) - complex(kt.weighted([b], [a]))
            scale = max(1.0, abs(complex(orc.weighted([a], [b]))))
            asym = max(asym, abs(dab - np.conj(dba)) / scale)
    if asym > 1e-12:
        raise OracleError(f"weighted kernel difference is not Hermitian (defect {asym:.2e})")
    meta = {
        "label": "local-global",
        "N": symbol.N,
        "n": n,
        "points": [str(p) for p in pts],
        "per_point": per_point,
        "hermitian_defect": asym,
        "weight": w.name,
    }
    return SweepReport.from_errors(h_list, errors, symbol.N - n - SLOPE_SLACK, meta, noise_floor)


@dataclass
class SupNormReport:
    dbar_term: float
    l2_term: float
    measured_constant: float
    h: float

    @property
    def bound_components(self) -> tuple[float, float]:
        return (self.dbar_term, self.l2_term)


def sup_norm_estimate(
    f,
    dbar_f,
    w: Weight,
    q: QuadratureDomain,
    h: float,
    level: int = 1,
) -> SupNormReport:
    """Right-hand side of the pointwise estimate from weighted L^2 and dbar data (with ``C = 1``).

    ``f`` and ``dbar_f`` are callables on coordinate arrays or arrays aligned
    with the nodes of ``q.rule(level)`` (one coordinate, ``n = 1``). The
    components are ``sup |h dbar f| exp(-Phi/h)`` and ``h^-n ||f||`` with
    ``||f||^2 = int |f|^2 exp(-2 Phi/h)``; the measured constant is the largest
    ``|f(x)| exp(-Phi(x)/h) / (sum of components)`` over nodes in the inner
    half-radius polydisk. It is reported, not asserted.
    """
    rules = q.rule(level)
    if len(rules) != 1:
        raise DomainError("sup_norm_estimate supports n = 1 grids")
    y = rules[0].nodes
    wt = rules[0].weights
    fv = np.asarray(f([y]) if callable(f) else f, dtype=complex) * np.ones(y.shape)
    dv = np.asarray(dbar_f([y]) if callable(dbar_f) else dbar_f, dtype=complex) * np.ones(y.shape)
    phi = w.evaluate([y])
    dbar_term = float(np.max(np.abs(h * dv) * np.exp(-phi / h), initial=0.0))
    l2 = math.sqrt(float(np.sum(np.abs(fv) ** 2 * np.exp(-2 * phi / h) * wt)))
    l2_term = h ** -w.dimension * l2
    inner = np.abs(y - q.center[0]) <= 0.5 * q.radius
    total = dbar_term + l2_term
    if total == 0.0:
        measured = 0.0
    else:
        measured = float(np.max(np.abs(fv[inner]) * np.exp(-phi[inner] / h))) / total
    return SupNormReport(dbar_term, l2_term, measured, h)
