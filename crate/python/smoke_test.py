"""Smoke test for the `dman` extension module.

Build it with maturin (`pip install --no-build-isolation ./crates/py`) or copy
the shared library next to this file:

    cargo build -p dman-py --release --features extension-module
    cp target/release/libdman.so python/dman.so
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import dman  # noqa: E402

DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")


def load(name):
    with open(os.path.join(DATA, name)) as f:
        return json.load(f)


def main():
    u = dman.Atlas(load("disjoint_atlas.json"))
    assert u.is_atlas() and u.meet_condition()
    h = u.to_hypercover(2)
    assert h.is_hypercover()
    assert h.to_atlas()["verdict"]

    bad = dman.Atlas(load("overlap_nonatlas.json"))
    assert not bad.is_atlas()
    assert not bad.to_hypercover(2).is_hypercover()

    f = dman.Presheaf(load("sierpinski_constant2.json"))
    assert not f.is_sheaf()
    assert f.sheafify().is_sheaf()

    x2 = dman.Cospan(load("cospan_x2.json"))
    assert x2.vdim() == 0
    loop = dman.Cospan(load("cospan_loop.json"))
    assert loop.vdim() == -1
    assert loop.betti(jet=2, levels=3) == [1, 1, 0]
    assert loop.betti(target=2) == [2, 2, 0]
    assert loop.nerve_betti()[:2] == [1, 1]

    parabola = dman.Cospan(load("parabola_vs_axis.json"))
    assert not parabola.is_transverse(["0"], ["0"])

    assert dman.koszul_betti(1) == [1, 1]
    assert dman.pl_check("3")["witness"]["left_quotient"] == "1"

    r = dman.run_sweep("atlas-equiv", points=2)
    assert r["instances"] == r["agree"]

    try:
        dman.Atlas('{"space": {"points": ["a"], "opens": [[]]}, "index": {"elements": []}, "assignment": {}}')
    except dman.DmanError as e:
        assert "space_contains_full" in str(e)
    else:
        raise AssertionError("invalid space accepted")

    print("dman smoke test passed")


if __name__ == "__main__":
    main()
