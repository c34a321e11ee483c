"""Smoke test for the pyfsasc extension.

Build it first:

    cargo build -p fsasc-python --release --features extension-module
    cp target/release/libpyfsasc.so python/pyfsasc.so
    python3 python/smoke_test.py
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import pyfsasc  # noqa: E402


def main():
    assert pyfsasc.monomial_count(5, 3) == 35
    v = pyfsasc.veronese([1.0, 2.0], 2)
    assert v == [1.0, 2.0, 4.0], v

    # x*y vanishes on the two coordinate axes
    p = pyfsasc.Polynomial(2, 2, [0.0, 1.0, 0.0])
    assert p.eval([3.0, 0.0]) == 0.0
    assert p.grad([3.0, 0.0]) == [0.0, 3.0]

    points, labels = pyfsasc.sample_cloud([1, 2, 3], seed=3)
    assert len(points) == 300 and len(points[0]) == 5

    fitted = pyfsasc.Polynomial.fit(points, 3)
    assert max(abs(fitted.eval(x)) for x in points) < 1e-9
    assert math.isclose(sum(c * c for c in fitted.coeffs), 1.0, rel_tol=1e-9)

    res = pyfsasc.cluster_points(points, 3, seed=1)
    assert pyfsasc.clustering_error(res.labels, labels, 3) == 0.0
    assert sorted(set(res.depths)) == [2, 3, 4], sorted(set(res.depths))
    assert pyfsasc.intra_connectivity(res.affinity, labels) > 99.9
    assert pyfsasc.inter_connectivity(res.affinity, labels) < 1.5
    spec = pyfsasc.laplacian_spectrum(res.affinity)
    assert all(-1e-9 <= s <= 2 + 1e-9 for s in spec)

    clusters = pyfsasc.fasc(points, 3)
    assert sorted(d for _, d in clusters) == [1, 2, 3]

    row, depth, why = pyfsasc.filtration_row(points, 0, 3, 1e-9)
    assert depth == 5 - 1 and why == "dimension_floor", (depth, why)
    assert len(row) == 300

    sd = pyfsasc.cluster_points(points, 3, method="sasc_d")
    assert sd.chosen_gamma is None
    try:
        pyfsasc.cluster_points(points[:10], 3)
    except RuntimeError as e:
        assert "not enough points" in str(e)
    else:
        raise AssertionError("expected a numerical failure")
    try:
        pyfsasc.cluster_points(points, 3, method="ssc")
    except ValueError:
        pass
    else:
        raise AssertionError("expected an unknown-method error")
    print("pyfsasc smoke test ok:", res)


if __name__ == "__main__":
    main()
