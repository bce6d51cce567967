import warnings
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smooth_bergman.cli import main
from smooth_bergman.config import RunConfig, normalize, parse_config
from smooth_bergman.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

QUARTIC = """
# quartic
name = quartic
N = 2
h = 0.1 0.05 0.025 0.0125
validity_radius = 1.58
monomial = 1 | 1 | 1/2 | 0
monomial = 2 | 2 | 0.1 | 0   # decimal coefficients are read exactly
"""


def test_parse_exact_coefficients():
    cfg = parse_config(QUARTIC)
    assert cfg.monomials == [((1,), (1,), Fraction(1, 2), 0), ((2,), (2,), Fraction(1, 10), 0)]
    assert cfg.base_point == (0j,)
    assert cfg.weight().name == "quartic"


def test_round_trip_is_idempotent():
    once = normalize(QUARTIC)
    assert normalize(once) == once
    assert parse_config(once) == parse_config(QUARTIC)


def test_partner_completion():
    text = "monomial = 1 | 1 | 1/2 | 0\nmonomial = 2 | 0 | 1/4 | 1/3\n"
    with pytest.warns(UserWarning, match="auto-completed"):
        cfg = parse_config(text)
    assert ((0,), (2,), Fraction(1, 4), Fraction(-1, 3)) in cfg.monomials


@pytest.mark.parametrize(
    "text",
    [
        "N = 0\nmonomial = 1 | 1 | 1/2 | 0\n",
        "h = 0.1 0.1\nmonomial = 1 | 1 | 1/2 | 0\n",
        "h = 0.1 -0.05\nmonomial = 1 | 1 | 1/2 | 0\n",
        "bogus = 1\nmonomial = 1 | 1 | 1/2 | 0\n",
        "monomial = 1 | 1 | 1/2\n",
        "dimension = 2\nmonomial = 1 | 1 | 1/2 | 0\n",
        "mode = symbolic\nmonomial = 1 | 1 | 1/2 | 0\n",
        "monomial = 2 | 0 | 1 | 0\nmonomial = 0 | 2 | 1 | 1\nmonomial = 1 | 1 | 1 | 0\n",
        "",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


_frac = st.fractions(min_value=-2, max_value=2, max_denominator=9)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), _frac, _frac), min_size=1, max_size=4),
    st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=5, unique=True),
    st.integers(1, 5),
)
def test_round_trip_property(terms, hs, N):
    lines = [f"N = {N}", "h = " + " ".join(repr(h) for h in hs), "monomial = 1 | 1 | 1 | 0"]
    for a, b, re, im in terms:
        if a == b:
            im = 0
        lines.append(f"monomial = {a} | {b} | {re} | {im}")
    text = "\n".join(lines)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            once = normalize(text)
        except ConfigError:
            return
        assert normalize(once) == once


def _run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_expand_fock(tmp_path, capsys):
    code, out, _ = _run(capsys, "expand", "--config", str(CONFIGS / "fock.cfg"), "--out", str(tmp_path))
    assert code == 0
    assert "a_0(x0) = 0.3183098861837907" in out
    assert "a_1(x0) = 0\n" in out
    assert (tmp_path / "symbol.txt").exists()


def test_expand_quartic_rational(tmp_path, capsys):
    code, out, _ = _run(
        capsys, "expand", "--config", str(CONFIGS / "quartic.cfg"), "--out", str(tmp_path), "--mode", "rational"
    )
    assert code == 0 and "a_0(x0) = 0.3183098861837907" in out
    assert "field = rational" in (tmp_path / "symbol.txt").read_text()


def test_expand_is_deterministic(tmp_path, capsys):
    outs = []
    for sub in ("a", "b"):
        _run(capsys, "expand", "--config", str(CONFIGS / "quartic.cfg"), "--out", str(tmp_path / sub))
        outs.append((tmp_path / sub / "symbol.txt").read_bytes())
    assert outs[0] == outs[1]


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("N = 0\nmonomial = 1 | 1 | 1/2 | 0\n")
    code, _, err = _run(capsys, "expand", "--config", str(bad))
    assert code == 2 and "N must be at least 1" in err
    three = tmp_path / "three.cfg"
    three.write_text("h = 0.1 0.05 0.025\nmonomial = 1 | 1 | 1/2 | 0\n")
    assert _run(capsys, "sweep", "--config", str(three), "--out", str(tmp_path))[0] == 2
    assert _run(capsys, "expand", "--config", str(tmp_path / "missing.cfg"))[0] == 2
    assert _run(capsys, "frobnicate", "--config", str(bad))[0] == 2


def test_verify_not_psh(capsys):
    code, out, _ = _run(capsys, "verify", "--config", str(CONFIGS / "not_psh.cfg"))
    assert code == 1
    assert "levi form  FAIL" in out and "smallest eigenvalue" in out


def test_verify_fock_all_pass(capsys):
    code, out, _ = _run(capsys, "verify", "--config", str(CONFIGS / "fock.cfg"))
    assert code == 0
    assert "FAIL" not in out
    for check in ("doubling estimate", "hessian identity", "inversion residuals", "inversion slope", "oracle equivalence"):
        assert check in out


def test_verify_quartic(capsys):
    code, out, _ = _run(capsys, "verify", "--config", str(CONFIGS / "quartic.cfg"), "--seed", "7")
    assert code == 0 and out.endswith("verify: pass\n")


def test_pipeline_failure_names_stage(tmp_path, capsys):
    cfg = tmp_path / "low.cfg"
    cfg.write_text("N = 3\njet_order = 4\nmonomial = 1 | 1 | 1/2 | 0\n")
    code, _, err = _run(capsys, "expand", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 1 and "stage 'pipeline'" in err and "OrderTooLow" in err


def test_sweep_fock_exact(tmp_path, capsys):
    code, out, _ = _run(capsys, "sweep", "--config", str(CONFIGS / "fock.cfg"), "--out", str(tmp_path))
    assert code == 0
    assert out.count(": exact (") == 4
    text = (tmp_path / "reproducing_0.csv").read_text().splitlines()
    assert text[1] == "h,error,slope,residual" and text[2].split(",")[2] == "exact"


def test_sweep_quartic(tmp_path, capsys):
    cfg = tmp_path / "q1.cfg"
    cfg.write_text((CONFIGS / "quartic.cfg").read_text().replace("N = 2", "N = 1"))
    code, out, _ = _run(capsys, "sweep", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "reproducing_0.csv").read_text().splitlines()[2:]
    assert float(rows[0].split(",")[2]) >= 0.7


def test_oracle_command(capsys):
    code, out, _ = _run(capsys, "oracle", "--config", str(CONFIGS / "fock.cfg"))
    assert code == 0 and "3.18309886183790" in out


def test_run_config_defaults():
    cfg = RunConfig(monomials=[((1,), (1,), Fraction(1, 2), 0)])
    assert cfg.sample_points == ((0j,),)
    assert cfg.test_function_dicts() == [{(0,): 1 + 0j}]
