"""Smoke test for the permstab_py extension module.

Build and install first:
    pip install maturin && maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/permstab_py-*.whl
"""

import math
import tempfile
from fractions import Fraction
from pathlib import Path

import permstab_py as ps


def main():
    a = ps.Perm([1, 2, 0, 3])
    b = ps.Perm([0, 1, 3, 2])
    assert a.compose(a.inverse()) == ps.Perm.identity(4)
    ai, bi = a.images(), b.images()
    diff = sum(x != y for x, y in zip(ai, bi))
    assert ps.hamming(a, b) == Fraction(diff, 4)
    assert math.isclose(ps.hs_distance(a, b), math.sqrt(2 * diff / 4))
    ab = [ai[bi[x]] for x in range(4)]
    ba = [bi[ai[x]] for x in range(4)]
    assert ps.commutator_defect(a, b) == Fraction(sum(x != y for x, y in zip(ab, ba)), 4)

    g = ps.Group("cyclic(10)")
    k = g.kazhdan()
    assert math.isclose(k["lower"], 2 * math.sin(math.pi / 10), abs_tol=1e-9)
    assert g.right_translation(3).apply(0) == g.inv(3)

    s = ps.Group("sl2(5)")
    assert s.order() == 120
    bracket = s.kazhdan()
    assert 0 < bracket["lower"] <= bracket["upper"] <= 2

    fam = ps.Family(7)
    summary = fam.summary()
    assert summary["order"] == 336
    curve = fam.commutator_curve()
    assert all(closed == direct for _, closed, direct in curve)
    assert max(d for _, _, d in curve) >= Fraction(1, 126)
    assert fam.distance_floor() >= Fraction(1, 252)

    try:
        ps.Family(11)
    except ValueError as e:
        assert "window" in str(e)
    else:
        raise AssertionError("p = 11 should have an empty window")

    c6 = ps.Group("cyclic(6)")
    k_gen = ps.Perm([1, 2, 3, 4, 5, 0, 7, 6])
    r = c6.round_almost_action(8, [k_gen])
    assert len(r["x1"]) == 6 and r["bounds"]["moved"] == 0

    best = ps.nearest_commuting_pair(ps.Perm([1, 2, 3, 0]), ps.Perm([2, 3, 1, 0]))
    assert best["exhaustive"]

    with tempfile.TemporaryDirectory() as out:
        report = ps.run("[grid]\noracle_points = [3]\n", out, seed=2)
        assert report["violations"] == 0
        assert (Path(out) / "oracle.csv").exists()

    print("python smoke test ok")


if __name__ == "__main__":
    main()
