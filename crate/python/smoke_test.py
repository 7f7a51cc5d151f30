"""Smoke test for the Python extension.

Build it first, then run from the repository root:

    cargo build --release -p fractura-py --features extension-module
    cp target/release/libfractura_py.so python/fractura.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

import fractura  # noqa: E402

STRIP = os.path.join(HERE, "..", "crates", "core", "scenarios", "strip_tearing.json")


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    square = fractura.CrackSet([[0, 0, 1, 0], [1, 0, 1, 1]])
    assert close(square.length(), 2.0)
    assert square.components() == 1
    diag = fractura.CrackSet([[0, 0, 1, 1]])
    assert close(square.hausdorff(diag), math.sqrt(0.5))

    eu = fractura.AnisotropyField.euclidean()
    cr = fractura.AnisotropyField.crystalline([1, 0], [0, 1])
    assert close(eu.surface_energy(diag), math.sqrt(2))
    assert close(cr.surface_energy(diag), 2.0)
    weighted = fractura.AnisotropyField(
        json.dumps({"kind": "weighted_norm", "parameters": {"metric": {"type": "constant", "m": [4, 0, 1]}}, "c1": 1, "c2": 2})
    )
    assert close(weighted.evaluate([0.5, 0.5], [1, 0]), 2.0)

    lsc = fractura.lsc_experiment("staircase", eu, 32)
    assert lsc["lower_semicontinuous"] and close(lsc["gap"], 2 - math.sqrt(2), 1e-9)

    s = fractura.Scenario.load(STRIP)
    trace = s.evolve(0.25)
    assert len(trace) == 5
    steps = trace.steps()
    assert all(set(a["edges"]) <= set(b["edges"]) for a, b in zip(steps, steps[1:]))
    report = s.verify(trace)
    assert report["passed"], report
    e = s.energies(1.0)
    assert close(e["total"], e["bulk"] + e["surface"])
    again = fractura.EvolutionTrace.from_json(trace.to_json())
    assert again.totals() == trace.totals()

    with tempfile.TemporaryDirectory() as out:
        code = fractura.run_cli(["evolve", "--scenario", STRIP, "--out", out, "--delta", "1/4", "--reproducible"])
        assert code == 0
        assert os.path.exists(os.path.join(out, "trace-0.25.csv"))

    try:
        s.crack([10**6])
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range edge accepted")

    print(f"fractura {fractura.__version__}: python smoke test passed")


if __name__ == "__main__":
    main()
