#!/usr/bin/env python3
"""Smoke test for the horocorr Python bindings.

Exercises every exported function once with small grids; exits nonzero on
the first broken expectation. Run after `pip install -e . --no-build-isolation`:

    python3 python/smoke.py
"""

import math
import tempfile
from pathlib import Path

import horocorr


def main() -> None:
    cards = horocorr.catalog_cards()
    ids = sorted(card["id"] for card in cards)
    assert ids == ["constant:0", "cylindric", "flat-punctured"], ids
    assert all(card["expectations"] for card in cards)

    # The flat example: unit-curvature hypersurface already at t = 0.
    surface = horocorr.build("flat-punctured", 0.0, resolution=[32, 32])
    assert surface.node_count == 32 * 32
    assert surface.sphere_dim == 2
    assert surface.max_invariant_residual() < 1e-9
    surface.validate()
    kappas = [k for row in surface.kappas() if row for k in row]
    assert kappas and all(abs(k - 1.0) < 1e-3 for k in kappas)
    assert "UniformlyWeaklyHC" in surface.convexity()
    assert surface.is_embedded()
    assert surface.embeddedness()["verdict"] == "Embedded"

    # Flow forward along normals: the invariance report stays clean and the
    # measured curvatures follow the Möbius law.
    flowed, report = surface.flow(0.8)
    assert report["violations"] == [], report["violations"]
    assert math.isclose(flowed.flow_time, 0.8)
    want = horocorr.riccati(1.0, 0.8)
    assert all(
        abs(k - want) < 2e-3 for row in flowed.kappas() if row for k in row
    )

    # The round sphere is admissible only past a positive flow time, and its
    # curvatures are coth(t) once immersed.
    t0 = horocorr.min_flow_time("constant:0", resolution=[24, 24])
    assert 0.0 < t0 < 1.0, t0
    sphere = horocorr.build("constant:0", 1.0, resolution=[24, 24])
    coth1 = 1.0 / math.tanh(1.0)
    assert all(
        abs(k - coth1) < 5e-3 for row in sphere.kappas() if row for k in row
    )

    # The eigenvalue ↔ curvature dictionary inverts itself.
    lam = horocorr.lambda_from_kappa(2.0)
    assert math.isclose(horocorr.kappa_from_lambda(lam), 2.0, rel_tol=1e-12)

    # File export round-trips through OBJ text and the JSON sidecar dict.
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "flat.obj"
        surface.write_obj(path)
        text = path.read_text()
        assert any(line.startswith("o ") for line in text.splitlines())
        assert any(line.startswith("v ") for line in text.splitlines())
        assert any(line.startswith("f ") for line in text.splitlines())
    sidecar = surface.sidecar()
    assert sidecar["schema"] == "horocorr-sidecar/v1"
    assert len(sidecar["kappas"]) == surface.node_count

    # One acceptance criterion end to end through the bindings.
    results = horocorr.verify("riccati")
    assert len(results) == 1, results
    assert results[0]["passed"], results[0]

    print(f"horocorr {horocorr.__version__} python smoke: OK")


if __name__ == "__main__":
    main()
