"""Smoke test for the pymorse extension.

Build it first:

    cargo build --release -p morse-simplify-py --features extension-module

The script imports an installed `pymorse` if there is one, otherwise the
library built under target/.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import pymorse
        return pymorse
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libpymorse.so"
        if lib.exists():
            tmp = Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "pymorse.so")
            sys.path.insert(0, str(tmp))
            import pymorse
            return pymorse
    sys.exit("pymorse not found; build it with cargo first")


def main():
    pm = load()

    triangle = {
        "cells": [
            {"id": "a", "dim": 0, "facets": []},
            {"id": "b", "dim": 0, "facets": []},
            {"id": "c", "dim": 0, "facets": []},
            {"id": "ab", "dim": 1, "facets": ["a", "b"]},
            {"id": "bc", "dim": 1, "facets": ["b", "c"]},
            {"id": "ca", "dim": 1, "facets": ["c", "a"]},
        ],
        "values": {"a": 0, "b": 1, "c": 2, "ab": 3, "bc": 4, "ca": 5},
    }
    ms = pm.MorseState.from_json(json.dumps(triangle))
    assert len(ms) == 6
    assert sorted(p[:2] for p in ms.off_diagonal()) == [("b", "ab"), ("c", "bc")]
    assert ms.verify() == 0

    regions = ms.regions("b")
    assert "death_region" in regions and "birth_region" in regions
    assert ms.eligible("c")

    trace = ms.cancel("c", verify=True)
    assert trace["max_change"] <= trace["lifetime"]
    assert [p[:2] for p in ms.off_diagonal()] == [("b", "ab")]

    report = ms.simplify(verify=True)
    assert ms.off_diagonal() == []
    assert report["c"] == 1

    assert ms.render("svg").startswith("<svg")
    json.loads(ms.to_json())

    try:
        ms.eligible("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown cell accepted")

    big = pm.MorseState.simplex(5, seed=2)
    before = len(big.off_diagonal())
    rep = big.simplify()
    classes = [o["class"] for o in rep["outcomes"]]
    assert len(classes) == before
    assert big.verify() == 0

    exp = pm.experiment(4, seed=1, verify=True)
    assert exp["standard"] + exp["region"] + exp["not_cancellable"] == exp["simplify"]["c"]

    print("pymorse smoke test passed")


if __name__ == "__main__":
    main()
