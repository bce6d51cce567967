"""Flat ``key = value`` run configuration.

Example::

    # quartic weight |x|^2/2 + |x|^4/10
    name = quartic
    dimension = 1
    base_point = 0 0
    N = 2
    h = 0.1 0.05 0.025 0.0125
    radius = 1.2
    validity_radius = 1.58
    monomial = 1 | 1 | 1/2 | 0
    monomial = 2 | 2 | 1/10 | 0

``base_point`` and ``sample_points`` hold real/imaginary pairs; sample
points are separated by ``;``. Each ``test_function = exps | re | im`` line
adds one monomial test function ``c y^exps``. Monomial coefficients are
parsed exactly, so ``1/10`` means the rational one tenth.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BergmanError, ConfigError
from .polarize import Weight

__all__ = ["RunConfig", "parse_config", "load_config", "normalize"]

_SCALARS = {
    "name": str,
    "dimension": int,
    "N": int,
    "radius": float,
    "validity_radius": float,
    "jet_order": int,
    "y_order": int,
    "mode": str,
    "basis_degree": int,
    "seed": int,
    "doubling_samples": int,
}
_ORDER = [
    "name",
    "dimension",
    "base_point",
    "N",
    "h",
    "radius",
    "validity_radius",
    "jet_order",
    "y_order",
    "mode",
    "basis_degree",
    "sample_points",
    "seed",
    "doubling_samples",
]


@dataclass
class RunConfig:
    """Validated run configuration; ``monomials`` hold exact ``(alpha, beta, re, im)``."""

    dimension: int = 1
    monomials: list = field(default_factory=list)
    base_point: tuple = ()
    N: int = 1
    h: tuple = (0.1, 0.05, 0.025, 0.0125)
    radius: float = 1.2
    validity_radius: float = 1.0
    jet_order: int | None = None
    y_order: int = 2
    mode: str = "float"
    basis_degree: int = 24
    sample_points: tuple = ()
    test_functions: list = field(default_factory=list)
    seed: int = 0
    doubling_samples: int = 10_000
    name: str = "weight"

    def __post_init__(self):
        if not self.base_point:
            self.base_point = (0j,) * self.dimension
        if not self.sample_points:
            self.sample_points = (tuple(self.base_point),)
        if not self.test_functions:
            self.test_functions = [((0,) * self.dimension, Fraction(1), Fraction(0))]
        self.validate()

    def validate(self) -> None:
        if self.dimension < 1:
            raise ConfigError("dimension must be at least 1")
        if self.N < 1:
            raise ConfigError(f"N must be at least 1, got {self.N}")
        if not self.h or any(v <= 0 for v in self.h):
            raise ConfigError("h values must be strictly positive")
        if len(set(self.h)) != len(self.h):
            raise ConfigError("h values must be distinct")
        if self.mode not in ("float", "rational"):
            raise ConfigError(f"mode must be 'float' or 'rational', got {self.mode!r}")
        if len(self.base_point) != self.dimension:
            raise ConfigError("base_point needs one re/im pair per dimension")
        if any(len(p) != self.dimension for p in self.sample_points):
            raise ConfigError("each sample point needs one re/im pair per dimension")
        if self.radius <= 0 or self.validity_radius <= 0:
            raise ConfigError("radii must be positive")
        if not self.monomials:
            raise ConfigError("no monomial lines")
        for a, b, _, _ in self.monomials:
            if len(a) != self.dimension or len(b) != self.dimension:
                raise ConfigError(f"monomial exponents {a} | {b} do not match dimension {self.dimension}")
        for e, _, _ in self.test_functions:
            if len(e) != self.dimension:
                raise ConfigError(f"test function exponents {e} do not match dimension")

    def weight(self) -> Weight:
        terms = [(a, b, (re, im)) for a, b, re, im in self.monomials]
        try:
            return Weight.from_terms(
                self.dimension, terms, self.base_point, self.validity_radius, complete=False, name=self.name
            )
        except BergmanError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def test_function_dicts(self) -> list[dict]:
        return [{e: complex(float(re), float(im))} for e, re, im in self.test_functions]

    def to_text(self) -> str:
        lines = []
        for key in _ORDER:
            v = getattr(self, key)
            if v is None:
                continue
            if key == "base_point":
                v = _fmt_point(v)
            elif key == "sample_points":
                v = " ; ".join(_fmt_point(p) for p in v)
            elif key == "h":
                v = " ".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{key} = {v}")
        for e, re, im in self.test_functions:
            lines.append(f"test_function = {_ints(e)} | {re} | {im}")
        for a, b, re, im in self.monomials:
            lines.append(f"monomial = {_ints(a)} | {_ints(b)} | {re} | {im}")
        return "\n".join(lines) + "\n"


def _ints(e) -> str:
    return " ".join(str(k) for k in e)


def _fmt_point(p) -> str:
    return " ".join(f"{complex(v).real!r} {complex(v).imag!r}" for v in p)


def _point(text: str, key: str) -> tuple:
    try:
        nums = [float(t) for t in text.split()]
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    if len(nums) % 2:
        raise ConfigError(f"{key}: expected re/im pairs, got {len(nums)} numbers")
    return tuple(complex(nums[i], nums[i + 1]) for i in range(0, len(nums), 2))


def _exps(text: str, key: str) -> tuple:
    try:
        e = tuple(int(t) for t in text.split())
    except ValueError as exc:
        raise ConfigError(f"{key}: bad exponent list {text!r}") from exc
    if any(k < 0 for k in e):
        raise ConfigError(f"{key}: negative exponent in {text!r}")
    return e


def _frac(text: str, key: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: bad coefficient {text!r}") from exc


def _complete(monos: list) -> list:
    """Add missing Hermitian partners ``(beta, alpha, conj c)`` with a warning."""
    keys = {(a, b) for a, b, _, _ in monos}
    added = [(b, a, re, -im) for a, b, re, im in monos if (b, a) not in keys]
    if added:
        warnings.warn(
            f"auto-completed {len(added)} Hermitian partner term(s): {[(a, b) for a, b, _, _ in added]}",
            stacklevel=3,
        )
    return monos + added


def parse_config(text: str) -> RunConfig:
    """Parse config text.

    Raises
    ------
    ConfigError
        On unknown keys, malformed values or violated invariants.
    """
    kw: dict = {}
    monos: list = []
    tests: list = []
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        if key == "monomial":
            parts = val.split("|")
            if len(parts) != 4:
                raise ConfigError(f"line {num}: monomial needs 'a_exps | b_exps | re | im'")
            monos.append(
                (_exps(parts[0], key), _exps(parts[1], key), _frac(parts[2], key), _frac(parts[3], key))
            )
        elif key == "test_function":
            parts = val.split("|")
            if len(parts) != 3:
                raise ConfigError(f"line {num}: test_function needs 'exps | re | im'")
            tests.append((_exps(parts[0], key), _frac(parts[1], key), _frac(parts[2], key)))
        elif key == "base_point":
            kw[key] = _point(val, key)
        elif key == "sample_points":
            kw[key] = tuple(_point(p, key) for p in val.split(";") if p.strip())
        elif key == "h":
            try:
                kw[key] = tuple(float(t) for t in val.replace(",", " ").split())
            except ValueError as exc:
                raise ConfigError(f"h: {exc}") from exc
        elif key in _SCALARS:
            try:
                kw[key] = _SCALARS[key](val)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from exc
        else:
            raise ConfigError(f"line {num}: unknown key {key!r}")
    merged: dict = {}
    for a, b, re, im in monos:
        k = (a, b)
        pr, pi = merged.get(k, (Fraction(0), Fraction(0)))
        merged[k] = (pr + re, pi + im)
    monos = [(a, b, re, im) for (a, b), (re, im) in merged.items() if re or im]
    kw["monomials"] = sorted(_complete(monos), key=lambda t: (sum(t[0]) + sum(t[1]), t[0], t[1]))
    kw["test_functions"] = tests
    cfg = RunConfig(**kw)
    cfg.weight()  # Hermitian-realness check at load time
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def normalize(text: str) -> str:
    """Canonical text of a config: ``parse_config`` followed by ``RunConfig.to_text``."""
    return parse_config(text).to_text()
