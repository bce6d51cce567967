"""Truncated multivariate power series ("jets") over C.

A :class:`Jet` stores the Taylor coefficients of a function of ``num_vars``
complex formal variables about a base point, keeping every monomial of total
degree at most ``order``. Coefficients live either in double-precision complex
arithmetic or in exact Gaussian rationals (see :mod:`smooth_bergman.fields`).

Conjugated variables are not special: a jet in ``(x, x_bar)`` is simply a jet
in two independent formal variables. This is what makes polarization a
relabeling rather than a computation.

Examples
--------
>>> x, y = Jet.variable(0, 2, order=3), Jet.variable(1, 2, order=3)
>>> sorted((k, v.real) for k, v in ((x + y) * (x - y)).terms())
[((0, 2), -1.0), ((2, 0), 1.0)]
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import JetStructureError
from .fields import FLOAT, Field, get_field

__all__ = [
    "MultiIndex",
    "Jet",
    "graded_lex_key",
    "multi_indices",
    "jet_add",
    "jet_mul",
    "jet_partial",
    "jet_compose_shift",
    "jet_eval",
    "mul_box",
    "prune_box",
]

MultiIndex = tuple  # tuple[int, ...]


def graded_lex_key(idx: MultiIndex):
    """Sort key: total degree first, then lexicographic with the first variable leading."""
    return (sum(idx), tuple(-e for e in idx))


def multi_indices(num_vars: int, order: int) -> list[MultiIndex]:
    """All multi-indices of total degree <= order, in graded-lex order."""
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(num_vars), deg):
            idx = [0] * num_vars
            for v in combo:
                idx[v] += 1
            out.append(tuple(idx))
    return sorted(set(out), key=graded_lex_key)


def _factorial_multi(idx: MultiIndex) -> int:
    return math.prod(math.factorial(e) for e in idx)


class Jet:
    """Truncated power series in ``num_vars`` variables, exact to total degree ``order``.

    Jets are treated as immutable values; every operation returns a new jet.
    An ``order`` of -1 means no coefficient is known (e.g. a derivative of an
    order-0 jet).
    """

    __slots__ = ("base_point", "num_vars", "order", "coeffs", "field")

    def __init__(
        self,
        coeffs: Mapping[MultiIndex, object] | None,
        num_vars: int,
        order: int,
        base_point: Sequence[complex] | None = None,
        field: Field | str = FLOAT,
        _trusted: bool = False,
    ):
        field = get_field(field)
        if base_point is None:
            base_point = (0j,) * num_vars
        self.base_point = tuple(base_point)
        self.num_vars = int(num_vars)
        self.order = int(order)
        self.field = field
        if _trusted:
            self.coeffs = dict(coeffs)
            return
        clean = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(int(e) for e in idx)
            if len(idx) != self.num_vars or min(idx, default=0) < 0:
                raise JetStructureError(f"bad multi-index {idx} for {num_vars} variables")
            if sum(idx) > self.order:
                continue
            c = field.convert(c)
            if not field.is_zero(c):
                clean[idx] = clean[idx] + c if idx in clean else c
        self.coeffs = {k: v for k, v in clean.items() if not field.is_zero(v)}

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, num_vars, order, base_point=None, field=FLOAT) -> "Jet":
        return cls({}, num_vars, order, base_point, field)

    @classmethod
    def constant(cls, value, num_vars, order, base_point=None, field=FLOAT) -> "Jet":
        return cls({(0,) * num_vars: value}, num_vars, order, base_point, field)

    @classmethod
    def variable(cls, index, num_vars, order, base_point=None, field=FLOAT) -> "Jet":
        idx = [0] * num_vars
        idx[index] = 1
        return cls({tuple(idx): 1}, num_vars, order, base_point, field)

    def _new(self, coeffs, order=None, num_vars=None, base_point=None) -> "Jet":
        return Jet(
            coeffs,
            self.num_vars if num_vars is None else num_vars,
            self.order if order is None else order,
            self.base_point if base_point is None else base_point,
            self.field,
            _trusted=True,
        )

    # -- inspection -------------------------------------------------------

    def coeff(self, idx: MultiIndex):
        """Coefficient of ``idx``; exactly zero when absent."""
        return self.coeffs.get(tuple(idx), self.field.zero)

    def terms(self) -> list[tuple[MultiIndex, object]]:
        return sorted(self.coeffs.items(), key=lambda kv: graded_lex_key(kv[0]))

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.coeffs), default=-1)

    @property
    def valuation(self) -> int:
        """Smallest total degree present (``order + 1`` for the zero jet)."""
        return min((sum(k) for k in self.coeffs), default=self.order + 1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def constant_term(self):
        return self.coeff((0,) * self.num_vars)

    def __repr__(self) -> str:
        shown = ", ".join(f"{k}: {v}" for k, v in self.terms()[:6])
        more = " ..." if len(self.coeffs) > 6 else ""
        return f"Jet(nvars={self.num_vars}, order={self.order}, {{{shown}{more}}})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Jet):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    __hash__ = None

    def max_abs_diff(self, other: "Jet") -> float:
        """Largest coefficientwise modulus of ``self - other`` up to the shared order."""
        order = min(self.order, other.order)
        keys = {k for k in self.coeffs if sum(k) <= order} | {
            k for k in other.coeffs if sum(k) <= order
        }
        return max(
            (abs(self.field.to_complex(self.coeff(k)) - other.field.to_complex(other.coeff(k))) for k in keys),
            default=0.0,
        )

    def max_abs(self) -> float:
        return max((abs(self.field.to_complex(c)) for c in self.coeffs.values()), default=0.0)

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Jet") -> None:
        if self.num_vars != other.num_vars:
            raise JetStructureError(
                f"variable count mismatch: {self.num_vars} vs {other.num_vars}"
            )
        if self.base_point != other.base_point:
            raise JetStructureError("base point mismatch")
        if self.field is not other.field:
            raise JetStructureError(f"field mismatch: {self.field.name} vs {other.field.name}")

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return other
        return Jet.constant(other, self.num_vars, self.order, self.base_point, self.field)

    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        order = min(self.order, other.order)
        out = {k: v for k, v in self.coeffs.items() if sum(k) <= order}
        for k, v in other.coeffs.items():
            if sum(k) > order:
                continue
            if k in out:
                s = out[k] + v
                if self.field.is_zero(s):
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = v
        return self._new(out, order)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return self._new({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def scale(self, s) -> "Jet":
        s = self.field.convert(s)
        if self.field.is_zero(s):
            return self._new({})
        return self._new({k: v * s for k, v in self.coeffs.items()})

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.scale(other)
        self._check(other)
        order = min(self.order, other.order)
        return self._new(_mul_dicts(self.coeffs, other.coeffs, self.num_vars, order, self.field), order)

    def __rmul__(self, other) -> "Jet":
        return self.scale(other)

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self.scale(self.field.one / self.field.convert(other))

    def __pow__(self, k: int) -> "Jet":
        if k < 0:
            return self.reciprocal() ** (-k)
        result = Jet.constant(1, self.num_vars, self.order, self.base_point, self.field)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def reciprocal(self) -> "Jet":
        """Multiplicative inverse; requires a nonzero constant term."""
        c0 = self.constant_term()
        if self.field.is_zero(c0):
            raise ZeroDivisionError("jet with vanishing constant term is not invertible")
        inv0 = self.field.one / c0
        u = self.scale(inv0) - 1
        r = Jet.constant(1, self.num_vars, self.order, self.base_point, self.field)
        for _ in range(max(self.order, 0)):
            r = 1 - u * r
        return r.scale(inv0)

    # -- calculus ---------------------------------------------------------

    def partial(self, var_index: int) -> "Jet":
        """Formal partial derivative; the order drops by one."""
        if not 0 <= var_index < self.num_vars:
            raise JetStructureError(f"variable index {var_index} out of range")
        out = {}
        for k, v in self.coeffs.items():
            e = k[var_index]
            if e:
                nk = k[:var_index] + (e - 1,) + k[var_index + 1 :]
                out[nk] = v * e
        return self._new(out, self.order - 1)

    def derivative(self, alpha: MultiIndex) -> "Jet":
        out = self
        for i, e in enumerate(alpha):
            for _ in range(e):
                out = out.partial(i)
        return out

    def truncate(self, order: int) -> "Jet":
        order = min(order, self.order)
        return self._new({k: v for k, v in self.coeffs.items() if sum(k) <= order}, order)

    def substitute(self, images: Sequence["Jet"], base_point=None) -> "Jet":
        """Composition ``self(images[0], ..., images[num_vars-1])``.

        The images are jets in the new variables. The result is truncated at
        ``min(self.order, image orders)``; it equals the composed Taylor series
        whenever the images have no constant term or ``self`` is a polynomial
        of degree <= ``self.order``.
        """
        if len(images) != self.num_vars:
            raise JetStructureError(
                f"expected {self.num_vars} images, got {len(images)}"
            )
        first = images[0] if images else None
        if first is None:
            return self
        for im in images[1:]:
            if im.num_vars != first.num_vars or im.field is not first.field:
                raise JetStructureError("inconsistent substitution images")
        if first.field is not self.field:
            raise JetStructureError("field mismatch in substitution")
        order = min([self.order] + [im.order for im in images])
        images = [im.truncate(order) for im in images]
        bp = first.base_point if base_point is None else tuple(base_point)
        images = [Jet(im.coeffs, im.num_vars, im.order, bp, im.field, _trusted=True) for im in images]
        powers: list[list[Jet]] = [[] for _ in images]

        def power(i: int, e: int) -> Jet:
            cache = powers[i]
            if not cache:
                cache.append(Jet.constant(1, first.num_vars, order, bp, self.field))
            while len(cache) <= e:
                cache.append(cache[-1] * images[i])
            return cache[e]

        acc: dict = {}
        for k, v in self.coeffs.items():
            term = None
            for i, e in enumerate(k):
                if e:
                    p = power(i, e)
                    term = p if term is None else term * p
            if term is None:
                items = {(0,) * first.num_vars: v}.items()
            else:
                items = ((kk, vv * v) for kk, vv in term.coeffs.items())
            for kk, vv in items:
                acc[kk] = acc[kk] + vv if kk in acc else vv
        acc = {k: v for k, v in acc.items() if not self.field.is_zero(v)}
        return Jet(acc, first.num_vars, order, bp, self.field, _trusted=True)

    def compose_affine(self, matrix, offset=None, base_point=None) -> "Jet":
        """Pull back along ``old_i = sum_k matrix[i][k] * new_k + offset[i]``.

        ``matrix`` has one row per old variable and one column per new
        variable. Nonzero offsets are exact only for polynomial jets (degree
        not exceeding the order); otherwise higher terms would feed lower ones.
        """
        rows = [list(r) for r in matrix]
        if len(rows) != self.num_vars:
            raise JetStructureError(
                f"affine map has {len(rows)} rows, jet has {self.num_vars} variables"
            )
        m = len(rows[0]) if rows else 0
        if any(len(r) != m for r in rows):
            raise JetStructureError("ragged affine map")
        offset = [0] * self.num_vars if offset is None else list(offset)
        if len(offset) != self.num_vars:
            raise JetStructureError("offset length mismatch")
        if base_point is None:
            base_point = self.base_point if m == self.num_vars else (0j,) * m
        images = []
        for i, r in enumerate(rows):
            coeffs = {}
            for k, a in enumerate(r):
                if a:
                    idx = [0] * m
                    idx[k] = 1
                    coeffs[tuple(idx)] = a
            if offset[i]:
                coeffs[(0,) * m] = offset[i]
            images.append(Jet(coeffs, m, self.order, base_point, self.field))
        return self.substitute(images, base_point)

    def relabel(self, positions: Sequence[int], num_vars: int, base_point=None) -> "Jet":
        """Move variable ``i`` to slot ``positions[i]`` of a jet in ``num_vars`` variables."""
        out = {}
        for k, v in self.coeffs.items():
            idx = [0] * num_vars
            for i, e in enumerate(k):
                idx[positions[i]] += e
            idx = tuple(idx)
            out[idx] = out[idx] + v if idx in out else v
        if base_point is None:
            base_point = (0j,) * num_vars
        out = {k: v for k, v in out.items() if not self.field.is_zero(v)}
        return Jet(out, num_vars, self.order, base_point, self.field, _trusted=True)

    # -- evaluation -------------------------------------------------------

    def evaluate(self, point: Sequence) -> object:
        """Evaluate the stored polynomial at a displacement from the base point.

        ``point`` holds one entry per variable; entries may be numpy arrays,
        in which case evaluation broadcasts. Exact-field jets evaluated at
        exact scalar points return exact values.
        """
        if len(point) != self.num_vars:
            raise JetStructureError(
                f"point has dimension {len(point)}, jet has {self.num_vars} variables"
            )
        scalar_exact = self.field.exact and all(
            not isinstance(p, (np.ndarray, float, complex)) for p in point
        )
        if scalar_exact:
            pts = [self.field.convert(p) for p in point]
            total = self.field.zero
            for k, v in self.coeffs.items():
                term = v
                for p, e in zip(pts, k):
                    if e:
                        term = term * p**e
                total = total + term
            return total
        pts = [np.asarray(p, dtype=complex) for p in point]
        shape = np.broadcast_shapes(*[p.shape for p in pts]) if pts else ()
        maxe = [0] * self.num_vars
        for k in self.coeffs:
            for i, e in enumerate(k):
                if e > maxe[i]:
                    maxe[i] = e
        pw = []
        for i, p in enumerate(pts):
            lst = [np.ones_like(p)]
            for _ in range(maxe[i]):
                lst.append(lst[-1] * p)
            pw.append(lst)
        total = np.zeros(shape, dtype=complex)
        to_c = self.field.to_complex
        for k, v in self.coeffs.items():
            term = to_c(v)
            for i, e in enumerate(k):
                if e:
                    term = term * pw[i][e]
            total = total + term
        if total.shape == () and not any(np.ndim(p) for p in point):
            return complex(total)
        return total

    __call__ = evaluate

    def to_field(self, field: Field | str) -> "Jet":
        field = get_field(field)
        return Jet(
            {k: field.convert(v if not self.field.exact or field.exact else self.field.to_complex(v)) for k, v in self.coeffs.items()},
            self.num_vars,
            self.order,
            self.base_point,
            field,
        )

    def taylor_coefficient_of_derivative(self, alpha: MultiIndex):
        """Value at the base point of the derivative ``d^alpha``."""
        return self.coeff(alpha) * _factorial_multi(alpha)


def _mul_dicts(ca: dict, cb: dict, nv: int, order: int, field: Field) -> dict:
    """Cauchy product truncated at total degree ``order``.

    Exponent vectors are packed into integers with radix ``order + 1`` so that
    index addition is integer addition; kept terms never carry.
    """
    if order < 0 or not ca or not cb:
        return {}
    base = order + 1

    def pack(d):
        out = []
        for k, v in d.items():
            deg = sum(k)
            if deg <= order:
                key = 0
                for e in reversed(k):
                    key = key * base + e
                out.append((deg, key, v))
        return out

    pa, pb = pack(ca), pack(cb)
    if len(pa) > len(pb):
        pa, pb = pb, pa
    by_deg: list[list] = [[] for _ in range(order + 1)]
    for deg, key, v in pb:
        by_deg[deg].append((key, v))
    cumulative = []
    running: list = []
    for d in range(order + 1):
        running = running + by_deg[d]
        cumulative.append(running)
    res: dict = {}
    get = res.get
    for da, ka, va in pa:
        for kb, vb in cumulative[order - da]:
            k = ka + kb
            prev = get(k)
            res[k] = va * vb if prev is None else prev + va * vb
    out = {}
    for key, v in res.items():
        if field.is_zero(v):
            continue
        idx = []
        for _ in range(nv):
            key, e = divmod(key, base)
            idx.append(e)
        out[tuple(idx)] = v
    return out


def mul_box(a: Jet, b: Jet, groups: Sequence[Sequence[int]], limits: Sequence[int]) -> Jet:
    """Product keeping only terms whose degree in each variable group is within its limit.

    Coefficients inside the box are exact; everything outside is dropped, so
    the result is a jet only in the sense of the box. Used to skip work on
    terms a later evaluation would discard.
    """
    a._check(b)
    order = min(a.order, b.order)
    if order < 0 or not a.coeffs or not b.coeffs:
        return a._new({}, order)
    base = order + 1
    limits = tuple(limits)

    def bucket(d):
        out: dict = {}
        for k, v in d.items():
            if sum(k) > order:
                continue
            gd = tuple(sum(k[i] for i in grp) for grp in groups)
            if any(x > lim for x, lim in zip(gd, limits)):
                continue
            key = 0
            for e in reversed(k):
                key = key * base + e
            out.setdefault(gd, []).append((sum(k), key, v))
        return out

    ba, bb = bucket(a.coeffs), bucket(b.coeffs)
    res: dict = {}
    get = res.get
    for ga, ta in ba.items():
        for gb, tb in bb.items():
            if any(x + y > lim for x, y, lim in zip(ga, gb, limits)):
                continue
            for da, ka, va in ta:
                room = order - da
                for db, kb, vb in tb:
                    if db > room:
                        continue
                    k = ka + kb
                    prev = get(k)
                    res[k] = va * vb if prev is None else prev + va * vb
    out = {}
    for key, v in res.items():
        if a.field.is_zero(v):
            continue
        idx = []
        for _ in range(a.num_vars):
            key, e = divmod(key, base)
            idx.append(e)
        out[tuple(idx)] = v
    return a._new(out, order)


def prune_box(a: Jet, groups: Sequence[Sequence[int]], limits: Sequence[int]) -> Jet:
    """Drop the terms of ``a`` whose group degrees exceed ``limits``."""
    keep = {}
    for k, v in a.coeffs.items():
        if all(sum(k[i] for i in grp) <= lim for grp, lim in zip(groups, limits)):
            keep[k] = v
    return a._new(keep)


# -- functional aliases ---------------------------------------------------


def jet_add(a: Jet, b: Jet) -> Jet:
    a._check(b)
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    a._check(b)
    return a * b


def jet_partial(a: Jet, var_index: int) -> Jet:
    return a.partial(var_index)


def jet_compose_shift(a: Jet, matrix, offset=None, base_point=None) -> Jet:
    return a.compose_affine(matrix, offset, base_point)


def jet_eval(a: Jet, point: Sequence) -> object:
    return a.evaluate(point)


def from_polynomial(
    terms: Iterable[tuple[MultiIndex, object]], num_vars: int, order: int, field: Field | str = FLOAT
) -> Jet:
    acc: dict = {}
    f = get_field(field)
    for idx, c in terms:
        c = f.convert(c)
        acc[tuple(idx)] = acc[tuple(idx)] + c if tuple(idx) in acc else c
    return Jet(acc, num_vars, order, None, f)
