"""Command-line front end: ``smooth-bergman {expand,verify,sweep,oracle} --config PATH``.

Exit codes: 0 when everything passes, 1 on a computational failure (the
message names the failing stage), 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .amplitude import build_pipeline, verify_inversion
from .bergman_numerics import compare_local_global, oracle_kernel, reproducing_sweep
from .config import RunConfig, load_config
from .errors import BergmanError, ConfigError
from .fields import to_complex
from .polarize import check_doubling_estimate, levi_form
from .quadrature import QuadratureDomain
from .stationary_phase import brute_force_expand, expand, fit_coefficients

log = logging.getLogger("smooth_bergman")

# h window and fit degree for reading coefficients off brute-force values
FIT_WINDOW = (0.003, 0.02, 12)
FIT_DEGREE = 8
ORACLE_RTOL = 1e-4


class StageFailure(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage


@contextlib.contextmanager
def stage(name: str):
    log.info("stage: %s", name)
    try:
        yield
    except ConfigError:
        raise
    except (BergmanError, ArithmeticError, ValueError) as exc:
        raise StageFailure(name, f"{type(exc).__name__}: {exc}") from exc


def fmt(v) -> str:
    """Short deterministic rendering of a real or complex number."""
    c = complex(v)
    if c == 0:
        return "0"
    if abs(c.imag) <= 1e-14 * abs(c):
        return repr(c.real)
    return f"{c.real!r}{c.imag:+.17g}j"


def _pipeline(cfg: RunConfig, N: int | None = None):
    w = cfg.weight()
    with stage("pipeline"):
        return build_pipeline(w, cfg.N if N is None else N, cfg.mode, cfg.y_order, cfg.jet_order)


def cmd_expand(cfg: RunConfig, out: Path) -> int:
    cp, sym = _pipeline(cfg)
    print(f"# expand: weight {cfg.name}, n = {cfg.dimension}, N = {cfg.N}, mode = {cfg.mode}")
    for j, v in enumerate(sym.at_base()):
        print(f"a_{j}(x0) = {fmt(v)}")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "symbol.txt"
    path.write_text(sym.to_text())
    print(f"symbol written to {path}")
    return 0


def _oracle_equivalence(cp, N: int):
    """Largest relative gap between ``expand`` and fitted brute-force coefficients for ``b = 1``."""
    from .jets import Jet

    n = cp.dimension
    one = Jet.constant(1, 2 * n, cp.order, cp.f.base_point[: 2 * n], cp.field)
    k = min(N, 3)
    series = [t.at_base() for t in expand(cp, one, k)]
    lo, hi, m = FIT_WINDOW
    hs = np.linspace(lo, hi, m)
    vals = brute_force_expand(cp, one, hs, tol=1e-13, max_level=6)
    fitted = fit_coefficients(hs, vals, FIT_DEGREE)
    ref = max(abs(c) for c in series)
    return max(abs(fitted[j] - series[j]) / max(abs(series[j]), ref) for j in range(k))


def cmd_verify(cfg: RunConfig, out: Path | None = None) -> int:
    rows = []
    witnesses = []

    def add(name, ok, measured, threshold, witness=None):
        rows.append((name, "pass" if ok else ("skip" if ok is None else "FAIL"), measured, threshold))
        if ok is False and witness:
            witnesses.append(f"{name}: {witness}")

    w = cfg.weight()
    try:
        lam = float(np.min(np.linalg.eigvalsh(levi_form(w))))
        add("levi form", True, f"{lam:.6g}", "> 0")
    except BergmanError as exc:
        add("levi form", False, getattr(exc, "smallest_eigenvalue", "n/a"), "> 0", str(exc))
        return _print_table(rows, witnesses)

    try:
        cp, sym = _pipeline(cfg)
    except StageFailure as exc:
        add("pipeline", False, "error", "-", str(exc))
        return _print_table(rows, witnesses)

    with stage("doubling estimate"):
        rep = check_doubling_estimate(
            cp.phase.polarization, w, samples=cfg.doubling_samples, seed=cfg.seed, raise_on_violation=False
        )
    add("doubling estimate c_-", rep.passed, f"{rep.c_minus:.6g}", "> 0", rep.witness)

    with stage("hessian identity"):
        det_h = to_complex(cp.hessian_det())
        lev = to_complex(cp.levi_det().constant_term())
        target = 2 ** (4 * cfg.dimension) * lev**2
        defect = abs(det_h - target) / abs(target)
    tol_h = 0.0 if cp.field.exact else 1e-10
    add("hessian identity", defect <= tol_h, f"{defect:.3e}", f"<= {tol_h:g}", f"det = {det_h}, want {target}")

    with stage("inversion"):
        h_ok = len(cfg.h) >= 3
        rep_inv = verify_inversion(sym, cp, h_list=sorted(cfg.h, reverse=True) if h_ok else None,
                                   raise_on_failure=False)
    worst = max(rep_inv.residuals)
    add("inversion residuals", rep_inv.symbolic_passed, f"{worst:.3e}", f"<= {rep_inv.tolerance:g}",
        f"residuals {rep_inv.residuals}")
    if rep_inv.sweep is not None:
        sw = rep_inv.sweep
        add("inversion slope", sw.passed, "exact" if sw.exact else f"{sw.slope:.3f}",
            f">= {sw.threshold:.2f}", f"errors {sw.errors}")
    else:
        add("inversion slope", None, "-", "needs >= 3 h values")

    if cfg.dimension == 1:
        with stage("oracle equivalence"):
            gap = _oracle_equivalence(cp, cfg.N)
        add("oracle equivalence", gap <= ORACLE_RTOL, f"{gap:.3e}", f"<= {ORACLE_RTOL:g}")
    else:
        add("oracle equivalence", None, "-", "n = 1 only")
    return _print_table(rows, witnesses)


def _print_table(rows, witnesses) -> int:
    width = max(len(r[0]) for r in rows)
    print(f"{'check':<{width}}  status  {'measured':>12}  threshold")
    for name, status, measured, threshold in rows:
        print(f"{name:<{width}}  {status:<6}  {str(measured):>12}  {threshold}")
    failed = [r for r in rows if r[1] == "FAIL"]
    for wline in witnesses:
        print(f"witness {wline}")
    print("verify: " + ("FAIL" if failed else "pass"))
    return 1 if failed else 0


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    if len(cfg.h) < 4:
        raise ConfigError(f"sweep needs at least 4 h values, got {len(cfg.h)}")
    hs = sorted(cfg.h, reverse=True)
    ratios = [b / a for a, b in zip(hs[:-1], hs[1:])]
    if any(abs(r - ratios[0]) > 1e-9 for r in ratios):
        raise ConfigError("sweep h values must form a geometric progression")
    cp, sym = _pipeline(cfg)
    pol = cp.phase.polarization
    dom = QuadratureDomain(tuple(cfg.base_point), cfg.radius)
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    x = cfg.sample_points[0]
    for k, u in enumerate(cfg.test_function_dicts()):
        (exps, c), = u.items()
        label = f"reproducing u={fmt(c)}*y^{list(exps)}"
        with stage("reproducing sweep"):
            rep = reproducing_sweep(sym, pol, u, dom, x, hs, label=label, gate_seed=cfg.seed)
        rep.to_csv(out / f"reproducing_{k}.csv")
        print(rep.summary())
        ok &= rep.passed
    if cfg.dimension == 1:
        with stage("local-global comparison"):
            rep = compare_local_global(sym, pol, [p[0] for p in cfg.sample_points], hs,
                                       basis_degree=cfg.basis_degree)
        rep.to_csv(out / "local_global.csv")
        print(rep.summary())
        ok &= rep.passed
    print(f"CSV written to {out}")
    return 0 if ok else 1


def cmd_oracle(cfg: RunConfig, out: Path | None = None) -> int:
    w = cfg.weight()
    cp, sym = _pipeline(cfg)
    from .bergman_numerics import KernelEstimate

    print(f"# oracle: weight {cfg.name}, basis degree {cfg.basis_degree}")
    print("h  radius  cond  weighted_K(x,x)  weighted_Kt(x,x)  h^n|diff|")
    for h in sorted(cfg.h, reverse=True):
        with stage("oracle kernel"):
            orc = oracle_kernel(w, cfg.basis_degree, None, h)
        kt = KernelEstimate(sym, cp.phase.polarization, h)
        for p in cfg.sample_points:
            ko = complex(orc.weighted([p[0]], [p[0]]))
            ke = complex(kt.weighted([p[0]], [p[0]]))
            print(f"{h!r}  {orc.radius:.6g}  {orc.condition:.3e}  {fmt(ko)}  {fmt(ke)}  "
                  f"{h ** cfg.dimension * abs(ko - ke):.3e}")
    return 0


COMMANDS = {"expand": cmd_expand, "verify": cmd_verify, "sweep": cmd_sweep, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smooth-bergman", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="run configuration file")
    ap.add_argument("--out", default="out", help="output directory (default: out)")
    ap.add_argument("--mode", choices=["rational", "float"], help="override the config mode")
    ap.add_argument("--seed", type=int, help="override the config seed for sampling checks")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda m, *a, **k: print(f"warning: {m}", file=sys.stderr)
            cfg = load_config(args.config)
            if args.mode:
                cfg.mode = args.mode
            if args.seed is not None:
                cfg.seed = args.seed
            cfg.validate()
            return COMMANDS[args.command](cfg, Path(args.out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageFailure as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except BergmanError as exc:
        print(f"stage 'unknown' failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
