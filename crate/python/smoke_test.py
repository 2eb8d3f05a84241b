"""Smoke test for the orbitscope_py extension module.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import json

import orbitscope_py as osc


def main():
    t = osc.Operator.preset("paper-prop32")
    assert t.index_set == "Z" and t.mode == "exact"

    norms = t.orbit_norms("e0", 50)
    assert norms == [1.0] * 51, norms

    image = json.loads(t.apply_power("e0 + 1/2*e3", 2))
    assert image["index_set"] == "Z"

    w = json.loads(t.j_witness("e0", "3*e2", "2"))
    times = [tr["time"] for tr in w["triples"]]
    assert len(times) == 5 and times == sorted(set(times))

    assert t.coarse_witness("e0", "5*e0", "1/2", horizon=200) is None
    assert json.loads(t.d_witness("e0", "e-3", "1/2"))["branch"] == "orbit"

    half = osc.Operator.preset("constant-half-unilateral", mode="float")
    assert abs(half.spectral_radius(64, 0, 256) - 0.5) < 0.005

    assert osc.cone_contains("e0", "1/2", "3*e0 + e1")
    assert not osc.cone_contains("e0", "1/2", "e1")

    report = json.loads(osc.run_certificate("prop22", seed=1))
    assert report["verdict"] == "PASS", report["verdict"]
    assert "prop32" in osc.certificate_names()

    try:
        osc.Operator.preset("no-such-preset")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown preset accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
