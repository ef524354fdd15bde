"""Acceptance criteria 1-8.

Each test prints (and records for the terminal summary) a single
``criterion N ...: PASS|FAIL`` line before asserting.
"""

import filecmp
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

import spoilers
import test_cannon_thurston
import test_groups
import test_limit_set
import test_moebius
from conftest import ACCEPTANCE_LINES
from rank1_limits.automaton import build_pingpong_automaton, refine_limit_set, verify_automaton
from rank1_limits.cannon_thurston import check_type_preserving
from rank1_limits.cli import load_document, main
from rank1_limits.fixtures import fixture
from rank1_limits.limit_set import hausdorff_distance, sample_limit_set

FIX = Path(__file__).resolve().parent.parent / "fixtures"

# tolerances pinned from the acceptance criteria
ORACLE_ABS = 5e-3
ORACLE_SECONDS = 60.0
ORACLE_DEPTH = 10
AUT_TRUNCATION = 8
AUT_EPS_MIN = 1e-3
REAL_CIRCLE_DEPTH = 10
REAL_CIRCLE_TOL = 1e-6
THM1_FINAL = 1e-3
THM1_SECONDS = 120.0
THM1_DEPTH = 8
THM2_FINAL = 1e-3
THM2_BUDGET = 10
COMPOSITION_TOL = 1e-9


def record(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _csv_column(path: Path):
    lines = path.read_text().splitlines()[1:]
    return [int(x.split(",")[0]) for x in lines], [float(x.split(",")[1]) for x in lines]


def _strictly_decreasing_from_second(vals):
    tail = vals[1:]
    return all(b < a for a, b in zip(tail, tail[1:]))


def test_criterion_1_oracle_equivalence():
    parts, ok = [], True
    t0 = time.perf_counter()
    for name in ("schottky", "cusped_schottky"):
        rep, caps = fixture(name)
        aut = build_pingpong_automaton(rep, caps, threads=1)
        ref = refine_limit_set(rep, aut, ORACLE_DEPTH)
        oracle = sample_limit_set(rep, ORACLE_DEPTH)
        d = hausdorff_distance(ref, oracle)
        bound = ref.resolution + oracle.resolution
        ok &= d <= bound and d <= ORACLE_ABS
        parts.append(f"{name}: d_H={d:.3g} res_sum={bound:.3g}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= ORACLE_SECONDS
    record(1, "oracle equivalence", ok, "; ".join(parts) + f"; {elapsed:.1f} s")


def test_criterion_2_automaton_properties():
    parts, ok = [], True
    auts = {}
    for name in ("schottky", "cusped_schottky"):
        rep, caps = fixture(name)
        aut = build_pingpong_automaton(rep, caps)
        auts[name] = (rep, aut)
        rpt = verify_automaton(rep, aut, AUT_TRUNCATION)
        ok &= rpt.all_pass and aut.epsilon >= AUT_EPS_MIN
        parts.append(f"{name}: {'all pass' if rpt.all_pass else rpt.failed()} eps={aut.epsilon:.4g}")
    srep, saut = auts["schottky"]
    crep, caut = auts["cusped_schottky"]
    cases = [
        ("shrunk cap", srep, spoilers.shrunk_cap(saut), ["A2"]),
        ("dropped edge", srep, spoilers.drop_one_edge(saut), ["A6"]),
        ("mislabeled coset", crep, spoilers.mislabeled_coset(caut, crep.group), ["A3"]),
    ]
    for label, rep, aut, expected in cases:
        failed = verify_automaton(rep, aut, AUT_TRUNCATION).failed()
        ok &= failed == expected
        parts.append(f"{label} fails {failed}")
    record(2, "automaton property suite", ok, "; ".join(parts))


def test_criterion_3_real_circle():
    rep, _ = fixture("sl2z_level2")
    s = sample_limit_set(rep, REAL_CIRCLE_DEPTH)
    # R + infinity is the great circle y = 0; angular distance to it is asin|y|
    worst = float(np.arcsin(np.abs(s.points[:, 1])).max())
    record(3, "real circle", worst <= REAL_CIRCLE_TOL, f"{len(s)} points, max distance {worst:.3g}")


def test_criterion_4_theorem1(tmp_path):
    t0 = time.perf_counter()
    code = main(["theorem1", "--input", str(FIX / "family_schottky_perturb.json"), "--depth", str(THM1_DEPTH), "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    idx, vals = _csv_column(tmp_path / "theorem1.csv")
    ok = code == 0 and idx == list(range(1, 11)) and _strictly_decreasing_from_second(vals)
    ok &= vals[-1] <= THM1_FINAL and elapsed <= THM1_SECONDS
    record(4, "Theorem 1 desk scale", ok, f"first {vals[0]:.3g}, final {vals[-1]:.3g}, {elapsed:.1f} s")


def test_criterion_5_theorem2(tmp_path):
    doc = FIX / "family_cusped_schottky.json"
    fam = load_document(str(doc)).family
    tp = check_type_preserving(fam).weakly_type_preserving
    code = main(["theorem2", "--input", str(doc), "--budget", str(THM2_BUDGET), "--composition", "--out", str(tmp_path)])
    idx, vals = _csv_column(tmp_path / "theorem2.csv")
    _, comp = _csv_column(tmp_path / "composition.csv")
    ok = code == 0 and tp and _strictly_decreasing_from_second(vals) and vals[-1] <= THM2_FINAL
    ok &= len(comp) == len(idx) and max(comp) <= COMPOSITION_TOL
    record(5, "Theorem 2 desk scale", ok, f"final deviation {vals[-1]:.3g}, max composition {max(comp):.3g}")


FAMILY_DOCS = sorted(p.name for p in FIX.glob("family_*.json")) + sorted(p.name for p in FIX.glob("converge_*.json"))


def test_criterion_6_coherence(tmp_path):
    parts, ok = [], True
    for name in FAMILY_DOCS:
        out = tmp_path / name
        code = main(["converge", "--input", str(FIX / name), "--out", str(out)])
        rpt = json.loads((out / "report.json").read_text())
        in_scope = rpt["algebraic"]["pass"] and rpt["faithful_peripherals"]
        if in_scope:
            ok &= code == 0 and rpt["coherent"]
            parts.append(f"{rpt['family']}:{'coherent' if rpt['coherent'] else 'INCOHERENT'}")
        else:
            parts.append(f"{rpt['family']}:out of scope")
        if rpt["family"] == "elliptic_cusp":
            stab = rpt["peripheral_stability"]["P"]
            rel = rpt["relative_strong"]["P"]
            ok &= not stab["pass"] and stab["witness"] is not None
            ok &= not rel["pass"] and rel["C1"]["witness"] is not None
            parts.append("elliptic_cusp witnesses " + json.dumps([stab["witness"]["element"], rel["C1"]["witness"]["word"]]))
    record(6, "equivalence coherence", ok, ", ".join(parts))


# hypothesis suites; each call runs every example at the pinned settings
HYGIENE = [
    test_moebius.test_group_axioms,
    test_moebius.test_action_compatibility,
    test_moebius.test_metric_axioms,
    test_moebius.test_cap_image_boundary,
    test_moebius.test_classify_conjugation_invariant,
    test_groups.test_evaluate_homomorphism,
    test_groups.test_relative_length_at_most_word_length,
    test_groups.test_alternating_form_round_trip,
    test_limit_set.test_hausdorff_metric_axioms,
    test_cannon_thurston.test_pair_equivariance,
]


def test_criterion_7_hygiene():
    failures = []
    for fn in HYGIENE:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001
            failures.append(f"{fn.__name__}: {type(exc).__name__}")
    cases = min(fn._hypothesis_internal_use_settings.max_examples for fn in HYGIENE)
    ok = not failures and cases >= 1000
    record(7, "numerical hygiene", ok, f"{len(HYGIENE)} suites, {cases} cases each" + (f"; {failures}" if failures else ""))


GROUP_DOCS = ["schottky", "cusped_schottky", "rank2_cusp", "sl2z_level2", "cyclic_parabolic", "cyclic_loxodromic"]
FAMILY_ONLY = sorted(p.name for p in FIX.glob("family_*.json"))


def _determinism_runs():
    runs = []
    for g in GROUP_DOCS:
        doc = str(FIX / f"{g}.json")
        runs.append(("limitset", ["limitset", "--input", doc, "--depth", "5", "--width", "64", "--height", "64"]))
        runs.append(("limitset", ["limitset", "--input", doc, "--method", "automaton", "--depth", "4", "--width", "64", "--height", "64"]))
        for action in ("build", "verify", "dot"):
            runs.append(("automaton", ["automaton", action, "--input", doc, "--truncation", "4"]))
    for f in FAMILY_ONLY:
        doc = str(FIX / f)
        runs.append(("converge", ["converge", "--input", doc, "--truncation", "4", "--budget", "256"]))
        runs.append(("theorem1", ["theorem1", "--input", doc, "--depth", "5"]))
        runs.append(("theorem2", ["theorem2", "--input", doc, "--budget", "5", "--composition", "--pairs"]))
    return runs


def _run(argv, out, capsys):
    code = main([*argv, "--out", str(out)])
    err = capsys.readouterr().err
    files = {p.name: p.read_bytes() for p in sorted(out.iterdir())} if out.exists() else {}
    return code, err, files


def test_criterion_8_determinism(tmp_path, capsys):
    runs = _determinism_runs()
    mismatches, commands = [], set()
    for k, (cmd, argv) in enumerate(runs):
        a = _run(argv + ["--threads", "1"], tmp_path / f"{k}a", capsys)
        b = _run(argv + ["--threads", "1"], tmp_path / f"{k}b", capsys)
        c = _run(argv + ["--threads", "8"], tmp_path / f"{k}c", capsys)
        commands.add(cmd)
        if not (a == b == c):
            mismatches.append(" ".join(argv[:2]))
    ok = not mismatches and commands == {"limitset", "converge", "theorem1", "theorem2", "automaton"}
    record(8, "determinism", ok, f"{len(runs)} invocations x 3 runs, {len(commands)} subcommands" + (f"; mismatches {mismatches}" if mismatches else ""))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
