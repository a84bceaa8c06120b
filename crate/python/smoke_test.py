"""Smoke test for the vortexlab extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import math

import vortexlab as vl


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    euler = vl.Kernel.euler()
    assert euler.value(1.0) == 0.0
    assert close(vl.Kernel.sqg(0.5).value(2.0), 1 / (4 * math.pi), 1e-15)

    gx, gy = euler.perp_gradient((1.0, 0.0))
    assert gx == 0.0 and close(gy, -1 / (2 * math.pi), 1e-15)
    reg = vl.Kernel.sqg(0.5).regularize(0.1)
    assert reg.perp_gradient((0.0, 0.0)) == (0.0, 0.0)
    try:
        euler.regularize(0.6)
    except ValueError:
        pass
    else:
        raise AssertionError("cutoff above 1/2 accepted")

    two_pi = 2 * math.pi
    pair = vl.VortexSystem([two_pi, -two_pi], [(0.5, 0.0), (-0.5, 0.0)])
    v1, v2 = pair.velocity(euler)
    assert close(v1[1], v2[1], 1e-15) and close(abs(v1[1]), 1.0, 1e-14)

    rec = vl.integrate(pair, euler, 5.0)
    assert rec["termination"][0] == "reached_final_time"
    assert rec["max_drift"] <= 1e-8
    (x1, y1), (x2, y2) = rec["states"][-1]
    assert close(math.hypot(x1 - x2, y1 - y2), 1.0, 1e-8)

    inv = vl.VortexSystem([1.0, -1.0], [(0.0, 0.0), (1.0, 0.0)]).invariants(euler)
    assert inv["collapse_constraint"] == -2.0
    assert inv["center_of_vorticity"] is None

    diag = vl.cluster_diagnostics([1.0, 1.0, -0.5])
    assert diag["classification"] == "NonNeutralClusters"

    system, t_c = vl.find_collapse_candidate([1.0, 1.0, -0.5], 7)
    assert abs(system.invariants(euler)["collapse_constraint"]) <= 1e-10
    run = vl.integrate(system, euler, 1.5 * t_c)
    assert run["termination"][0] == "step_underflow"
    assert run["min_pair_distance"][-1] < 1e-4
    try:
        vl.find_collapse_candidate([1.0, 1.0, 1.0], 7)
    except LookupError:
        pass
    else:
        raise AssertionError("same-sign collapse candidate returned")

    result = vl.scan(0.75, [1.0, 1.0, -0.5], [0.2, 0.1], 200, 3, horizon=0.5)
    assert [c["sample_count"] for c in result["cells"]] == [200, 200]
    assert result == vl.scan(0.75, [1.0, 1.0, -0.5], [0.2, 0.1], 200, 3, horizon=0.5)

    print("vortexlab smoke test passed")


if __name__ == "__main__":
    main()
