"""End-to-end acceptance suite.

``ringq report-all`` runs twice with the same seed in a subprocess. The
tests for criteria 1-8 re-check the stated tolerances on the measured
values of the first run; criterion 9 compares the two outputs byte for byte.
Each test prints one ``[PASS]``/``[FAIL]`` line.
"""
import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

SEED = "0"
ORACLES = {
    # 30-digit references
    "n2_exact": 9.06472028365438762,   # 2 pi / log 2
    "n3_exact": 26.1552540005475654,   # 4 pi / log^2 2
    "cap2": 11.4384034695205091,       # 2 pi / log sqrt 3
}


def _report(path):
    cmd = [sys.executable, "-m", "ringq", "report-all", "--seed", SEED, "-o", str(path)]
    proc = subprocess.run(cmd, capture_output=True, text=True, env=dict(os.environ))
    return proc


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("report")
    out = []
    for k in (1, 2):
        path = d / f"run{k}.csv"
        proc = _report(path)
        out.append((proc, path.read_bytes() if path.exists() else b""))
    return out


@pytest.fixture(scope="module")
def measured(runs):
    proc, data = runs[0]
    assert proc.returncode == 0, proc.stderr
    rows = list(csv.DictReader(io.StringIO(data.decode())))
    return {int(r["criterion"]): json.loads(r["measured"]) for r in rows}


def _line(capsys, k, name, ok):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {k}: {name}")
    assert ok


def test_criterion_1_capacity_vs_ring_modulus(measured, capsys):
    m = measured[1]
    ok = (m["n2_exact"] == pytest.approx(ORACLES["n2_exact"], rel=1e-15)
          and m["n3_exact"] == pytest.approx(ORACLES["n3_exact"], rel=1e-15)
          and abs(m["n2_numeric"] / ORACLES["n2_exact"] - 1) <= 0.03
          and abs(m["n3_numeric"] / ORACLES["n3_exact"] - 1) <= 0.05
          and m["n2_within_time"] and m["n3_within_time"])
    _line(capsys, 1, "grid capacity within 3% (n=2, 256^2) and 5% (n=3, 96^3)", ok)


def test_criterion_2_weighted_annulus_identity(measured, capsys):
    m = measured[2]
    ok = m["max_rel_error"] <= 1e-6 and m["max_rel_error_vs_adaptive"] <= 1e-6
    _line(capsys, 2, "int Q psi^n = omega I within 1e-6", ok)


def test_criterion_3_canonical_closed_form(measured, capsys):
    _line(capsys, 3, "canonical admissibility integral within 1e-8",
          measured[3]["max_rel_error"] <= 1e-8)


def test_criterion_4_ring_q_inequality(measured, capsys):
    m = measured[4]
    ok = (abs(m["identity_extremal_slack"]) <= 1e-6 and m["identity_violations"] == 0
          and m["family_violations"] == 0 and m["half_profile_violations"] >= 1)
    _line(capsys, 4, "ring-Q inequality: equality, no violations, negative control fires", ok)


def test_criterion_5_family_stays_away(measured, capsys):
    m = measured[5]
    sup = m["control_sup_by_radius"]  # radii 2^-3 .. 2^-12
    ok = (m["sigma"] == pytest.approx(math.exp(-m["C"]), rel=1e-12) and m["sigma"] > 0
          and m["min_image_radius"] >= m["sigma"]
          and all(b < a for a, b in zip(sup, sup[1:])))
    _line(capsys, 5, "|f_m(x_m)| >= exp(-C) for m <= 64; control decreases", ok)


def test_criterion_6_bound_identities(measured, capsys):
    m = measured[6]
    ok = (m["identity_error"] <= 1e-12 and m["integral_bound_rel_error"] <= 1e-9
          and m["decay_exponent_rel_error"] <= 0.02)
    _line(capsys, 6, "constant identities, q=1 bound, exponent slope within 2%", ok)


def test_criterion_7_inner_dilatation(measured, capsys):
    _line(capsys, 7, "K_I equals truncated mean within 1e-6",
          measured[7]["max_rel_error"] <= 1e-6)


def test_criterion_8_set_function(measured, capsys):
    m = measured[8]
    cap = ORACLES["cap2"]
    sweep = m["point_sweep"]
    ok = (m["cap_value"] == pytest.approx(cap, rel=1e-15)
          and max(m["values"].values()) <= cap * 1.05
          and m["min_monotone_gap"] >= -0.01 * cap
          and len(m["values"]) >= 14
          and all(b < a for a, b in zip(sweep, sweep[1:])))
    _line(capsys, 8, "c(E) below cap value, monotone, point value shrinks on refinement", ok)


def test_criterion_9_determinism(runs, capsys):
    (p1, a), (p2, b) = runs
    ok = p1.returncode == 0 and p2.returncode == 0 and len(a) > 0 and a == b
    _line(capsys, 9, "report-all twice with the same seed is byte-identical", ok)
