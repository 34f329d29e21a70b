"""Smoke test for the pycondind extension module."""

import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pycondind as cit


def main():
    assert "no_binary_r1" in cit.families()
    assert cit.moment_match_check()

    dist, raw_total = cit.generate("no_binary_r1", n=100, eps=0.5, m=10.0, seed=1)
    assert dist.dims == (2, 2, 100)
    assert dist.is_normalized
    assert 1.0 <= raw_total < 2.0
    assert dist.ci_distance_proxy() > 0.0
    assert dist.mixture_q().ci_distance_proxy() < 1e-12

    v = cit.test(dist, "binary", 0.5, m=20000, seed=3)
    assert v.statistic_a == cit.test(dist, "binary", 0.5, m=20000, seed=3).statistic_a
    assert v.m_used == 20000

    samples = dist.sample(5000, seed=2)
    g = cit.test_samples(samples, dist.dims, "general", 0.5)
    assert g.samples_drawn == 5000

    assert abs(cit.l2_estimator([1, 1, 1, 1], 2, 2) + 1.0 / 3.0) < 1e-12
    assert cit.unbiased_estimate("1 : 1^2\n-1 : 1 2\n", 2, [3, 1]) == "1/4"
    assert cit.flattening_grid([(0, 0), (0, 0)], 3, 3, 1, 1) == [3, 1, 1, 1, 0, 0, 1, 0, 0]
    assert cit.sample_complexity_binary(200, 0.3, 1.0) > 0

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "dist.txt")
        dist.write(path)
        assert cit.JointDistribution.read(path).mass == dist.mass

    try:
        cit.generate("nope", 10, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown family accepted")

    print("pycondind smoke test passed")


if __name__ == "__main__":
    main()
