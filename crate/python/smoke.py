"""Smoke test for the gmtkit Python bindings.

Build and install the extension first:

    pip install maturin
    maturin develop -m crates/python/Cargo.toml   # or: pip install --no-build-isolation crates/python
    python python/smoke.py
"""

from fractions import Fraction

import gmtkit_py as g


def main() -> None:
    # a single triangle: the boundary is filled by the face, area 1/2
    tri = g.Complex.single_triangle()
    face = g.PolyChain(2, [([0, 1, 2], 1)])
    cycle = face.boundary()
    assert cycle.is_cycle()
    rep = g.fillvol(tri, cycle)
    assert rep["verdict"] == "filled" and rep["value"] == "1/2", rep
    assert rep["boundary_verified"]

    # 4x4 grid of side 1/4: the outer boundary bounds the whole square
    grid = g.Complex.grid_2d(4, 4, Fraction(1, 4))
    outer = g.PolyChain.region_boundary(grid, grid.simplices(2))
    for mode in ("lp", "ilp"):
        assert g.fillvol(grid, outer, mode)["value"] == "1", mode
    flat = g.flat_norm(grid, outer)
    assert Fraction(flat["value"]) <= Fraction(1)
    assert flat["decomposition_verified"]

    # a hole makes the cycle around it a non-boundary
    kept = [s for s in grid.simplices(2) if s not in ([6, 7, 12], [6, 11, 12])]
    annulus = grid.subcomplex(kept)
    around = g.PolyChain.region_boundary(grid, [[6, 7, 12], [6, 11, 12]])
    assert g.fillvol(annulus, around)["verdict"] == "not_a_boundary"
    und = g.undistortion(grid, annulus, [around])
    assert und["rows"][0]["flag"] == "obstruction_in_x"

    # PL chains: cone identity and deformation certificate
    loop = g.PLChain(1, 2, [
        ([["1/4", "1/8"], ["3/4", "1/8"]], 1),
        ([["3/4", "1/8"], ["3/4", "5/8"]], 1),
        ([["3/4", "5/8"], ["1/4", "1/8"]], 1),
    ])
    apex = ["1/2", "1/4"]
    lhs = loop.cone(apex).boundary() + loop.boundary().cone(apex)
    assert lhs.equals(loop)
    cone = g.cone_fill(loop, apex)
    assert cone["bound_holds"]

    square = g.Complex.grid_2d(1, 1, 1)
    res = g.deform(square, loop, seed=3)
    assert res["certificate"]["equal"], res["certificate"]
    assert all(res["supports"].values())
    p = g.PolyChain.from_json(__import__("json").dumps(res["p"]))
    assert p.is_cycle()

    # round trips through the file formats
    assert g.Complex.from_json(grid.to_json()) == grid
    assert g.PLChain.from_json(loop.to_json()) == loop
    assert g.PolyChain.from_json(outer.to_json()) == outer

    # nerve of 11 collinear points at scale 5/2 is a path
    nerve = g.build_nerve([[i] for i in range(11)], "5/2")
    sigma = g.Complex.from_json(__import__("json").dumps(nerve["complex"]))
    assert sigma.dim == 1 and sigma.simplices(1) == [[0, 1], [1, 2], [2, 3]]

    try:
        g.fillvol(tri, g.PolyChain(1, [([0, 1], 1)]))
    except ValueError:
        pass
    else:
        raise AssertionError("a non-cycle must be rejected")

    print("gmtkit smoke: ok")


if __name__ == "__main__":
    main()
