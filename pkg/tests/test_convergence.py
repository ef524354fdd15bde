import math

import numpy as np
import pytest

from rank1_limits.convergence import (
    TruncationParams,
    check_algebraic,
    check_chabauty,
    check_peripheral_stability,
    check_relative_strong,
    convergence_report,
    default_stability_instance,
    faithful_peripherals,
    minimal_stability_radius,
)
from rank1_limits.errors import BadStabilityInstance, DocumentError, UnknownFamily
from rank1_limits.families import RepFamily, builtin_family, schedule
from rank1_limits.fixtures import fixture
from rank1_limits.groups import Representation
from rank1_limits.moebius import (
    BoundaryPoint,
    Moebius,
    SphericalCap,
    apply,
    classify,
    compose,
    matrix_distance,
)


def _family(base, images_at, indices, name="test"):
    snaps = tuple((n, Representation(base.group, images_at(n))) for n in indices)
    return RepFamily(base.group, snaps, base, name)


@pytest.fixture(scope="module")
def elliptic():
    return builtin_family("elliptic_cusp")


# --- families ----------------------------------------------------------------


def test_family_invariants(schottky):
    rep, _ = schottky
    with pytest.raises(DocumentError):
        RepFamily(rep.group, ((2, rep), (1, rep)), rep)
    with pytest.raises(UnknownFamily):
        builtin_family("nope")
    with pytest.raises(DocumentError):
        builtin_family("pinch", {"schedule": "weird"})


def test_zero_amplitude_is_constant():
    fam = builtin_family("schottky_perturb", {"amplitude": 0.0}, range(1, 5))
    for _, rep in fam.snapshots:
        for k in rep.images:
            assert matrix_distance(rep.images[k], fam.limit.images[k]) == 0


def test_schedules():
    assert schedule(3, {}) == 0.125
    assert schedule(4, {"schedule": "harmonic", "amplitude": 2}) == 0.5


def test_schottky_perturb_harmonic_converges_algebraically():
    fam = builtin_family("schottky_perturb", {"schedule": "harmonic"}, [2**k for k in range(0, 21)])
    assert check_algebraic(fam)["pass"]


def test_pinch_final_snapshots_near_limit():
    fam = builtin_family("pinch")
    assert classify(fam.snapshot(5).images["p"])[0].value == "Loxodromic"
    p = fam.snapshots[-1][1].images["p"]
    assert matrix_distance(p, fam.limit.images["p"]) <= 1e-4


# --- algebraic ---------------------------------------------------------------


def test_algebraic_constant():
    res = check_algebraic(builtin_family("constant"))
    assert res["pass"] and res["final"] == 0


def test_algebraic_conjugation_to_identity(schottky):
    rep, _ = schottky

    def images(n):
        s = 1 + 1 / n
        return rep.conjugate(Moebius(s, 0, 0, 1 / s)).images

    fam = _family(rep, images, [2**k for k in range(0, 21)])
    assert check_algebraic(fam)["pass"]


def test_algebraic_fixed_gap(schottky):
    rep, _ = schottky
    off = Moebius(1, 0.5, 0, 1)
    fam = _family(rep, lambda n: {**rep.images, "b": compose(rep.images["b"], off)}, range(1, 6))
    res = check_algebraic(fam)
    assert not res["pass"]
    w = res["witness"]
    assert w["word"] == "b" and w["distance"] > 0.1
    assert abs(matrix_distance(fam.snapshot(w["index"]).images["b"], rep.images["b"]) - w["distance"]) <= 1e-12


# --- Chabauty ----------------------------------------------------------------


def test_chabauty_constant():
    res = check_chabauty(builtin_family("constant"))
    assert res["C1"]["pass"] and res["C2"]["pass"]


def test_chabauty_indiscrete_translation():
    fam = builtin_family("indiscrete_translation")
    res = check_chabauty(fam)
    w = res["C1"]["witness"]
    assert not res["C1"]["pass"] and w is not None
    # independent re-check: the witness is far from every element of the trivial limit
    m = fam.snapshot(w["index"]).evaluate(fam.group.parse(w["word"]))
    assert matrix_distance(m, Moebius.identity()) > TruncationParams().tolerance
    assert not check_algebraic(fam)["pass"]


def test_chabauty_pinch():
    res = check_chabauty(builtin_family("pinch"))
    assert res["C2"]["pass"]
    assert math.isfinite(res["C1"]["margin"]) and res["C1"]["stable_elements"] > 0


def test_relative_strong_examples(elliptic):
    assert builtin_family("constant").group.peripherals == ()
    assert check_relative_strong(builtin_family("constant", {"base": "cusped_schottky"}))["P"]["pass"]
    assert check_relative_strong(builtin_family("cusped_schottky"))["P"]["pass"]
    res = check_relative_strong(elliptic)["P"]
    assert not res["C1"]["pass"]
    w = res["C1"]["witness"]
    m = elliptic.snapshot(w["index"]).evaluate(elliptic.group.parse(w["word"]))
    # the parabolic limit subgroup has no element that close
    lim_p = elliptic.limit.images["p"]
    best = min(
        matrix_distance(m, Moebius(1, k * 40.0, 0, 1)) for k in range(-5000, 5001)
    )
    assert best > TruncationParams().tolerance
    assert abs(lim_p.b - 40) < 1e-12


def test_monotone_on_counterexamples(elliptic):
    fam = builtin_family("indiscrete_translation")
    for r, tol in ((8, 1e-4), (9, 1e-4), (8, 1e-5)):
        t = TruncationParams(word_radius=r, tolerance=tol)
        assert not check_chabauty(fam, t)["C1"]["pass"]
    for tol in (1e-4, 1e-5):
        t = TruncationParams(tolerance=tol)
        assert not check_relative_strong(elliptic, t)["P"]["pass"]


# --- peripheral stability ----------------------------------------------------


def _ring(p, n=16):
    return SphericalCap(p, math.pi / 2).boundary_points(n)


def test_stability_constant_cusped(cusped):
    rep, _ = cusped
    fam = builtin_family("constant", {"base": "cusped_schottky"})
    per = rep.group.peripherals[0]
    U = SphericalCap(BoundaryPoint.infinity(), 0.5)
    K = [BoundaryPoint.from_complex(complex(math.cos(t), math.sin(t))) for t in np.linspace(0, 2 * math.pi, 16, endpoint=False)]
    F = minimal_stability_radius(rep, per, U, K, 256)
    res = check_peripheral_stability(fam, per, U, K, F, budget=256)
    assert res["pass"] and not res["vacuous"] and res["N"] == fam.indices[0]


def test_stability_elliptic_fails_with_witness(elliptic):
    per = elliptic.group.peripherals[0]
    U, K, F = default_stability_instance(elliptic.limit, per, 4096)
    res = check_peripheral_stability(elliptic, per, U, K, F)
    assert not res["pass"]
    w = res["witness"]
    m = elliptic.snapshot(w["index"]).evaluate(elliptic.group.parse(w["element"]))
    img = apply(m, BoundaryPoint.from_vector(w["point"]))
    assert not U.contains(img)


def test_stability_vacuous(cusped):
    rep, _ = cusped
    fam = builtin_family("constant", {"base": "cusped_schottky"})
    per = rep.group.peripherals[0]
    U, K, _ = default_stability_instance(rep, per, 64)
    res = check_peripheral_stability(fam, per, U, K, 10**6, budget=64)
    assert res["pass"] and res["vacuous"]


def test_stability_bad_instance(cusped):
    rep, _ = cusped
    fam = builtin_family("constant", {"base": "cusped_schottky"})
    per = rep.group.peripherals[0]
    U, K, F = default_stability_instance(rep, per, 64)
    with pytest.raises(BadStabilityInstance):
        check_peripheral_stability(fam, per, SphericalCap(BoundaryPoint.from_complex(0), 0.5), K, F, 64)
    with pytest.raises(BadStabilityInstance):
        check_peripheral_stability(fam, per, U, [U.center], F, 64)
    if F > 0:
        with pytest.raises(BadStabilityInstance):
            check_peripheral_stability(fam, per, U, K, 0, 64)


# --- report ------------------------------------------------------------------


def test_report_shape_and_faithfulness(elliptic):
    rep = convergence_report(builtin_family("cusped_schottky"))
    assert rep["coherent"] and rep["faithful_peripherals"]
    assert set(rep["verdicts"]) == {"strong", "relative_strong", "peripheral_stability"}
    assert rep["truncation"]["word_radius"] == 8
    assert not faithful_peripherals(elliptic)
