"""Smoke test for the `stin` extension module.

Build and install the module first, e.g.

    pip install maturin
    maturin develop --release -m crates/py/Cargo.toml

then run `python python/smoke_test.py`.
"""

import itertools
import math
import tempfile

import stin


def brute_force(g):
    best = 0.0
    for r in range(g.n + 1):
        for s in itertools.combinations(range(g.n), r):
            if all(not g.has_edge(a, b) for a, b in itertools.combinations(s, 2)):
                best = max(best, sum(g.weights[v] for v in s))
    return best


def main():
    # Star: greedy takes the heavy centre, the two leaves weigh more.
    star = stin.Graph([3.0, 2.0, 2.0], [(0, 1), (0, 2)], labels=["c", "l1", "l2"])
    assert stin.Graph.from_json(star.to_json()).labels == ["c", "l1", "l2"]
    exact = stin.mwis_exact(star)
    assert exact["status"] == "optimal" and exact["objective"] == 4.0
    assert exact["solution"]["members"] == [1, 2]
    assert stin.mwis_greedy(star)["objective"] == 3.0
    assert stin.mwis_bruteforce(star)["objective"] == brute_force(star)

    gsp = stin.Bipartite(["s0", "s1", "s2"], ["g0", "g1"], [(0, 0), (1, 0), (1, 1), (2, 1)])
    assert stin.gsp_solve(gsp)["objective"] == 2.0

    c5 = stin.Coloring.anonymous(5, [(i, (i + 1) % 5) for i in range(5)], 4)
    assert stin.sap_solve(c5)["solution"]["bands_used"] == 3
    assert stin.sap_solve(c5, "dsatur")["status"] != "infeasible"

    path = stin.Graph([1.0, 2.0, 1.5], [(0, 1), (1, 2)])
    out = stin.embed(path, seed=1)
    report = out["report"]
    assert report["constraint_violations"] == [], report
    coords = out["layout"]["coords"]
    run = stin.simulate(path, coords, shots=200, seed=2)
    assert sum(run["shots"]["counts"].values()) == 200
    refined = stin.refine(path, run["shots"]["counts"])
    best = refined["best"]["members"]
    assert path.is_independent(best) and path.is_maximal(best)
    assert refined["best"]["objective"] <= brute_force(path)

    suite = stin.synth_suite(7, 3, 4, 7)
    assert [t.id for t in suite] == ["synth-7-000", "synth-7-001", "synth-7-002"]
    for t in suite:
        chain = stin.run_pipeline(t, "exact", seed=7)
        assert math.isclose(chain["ssp"]["objective"], brute_force(t.ssp))
    with tempfile.TemporaryDirectory() as d:
        suite[0].write(d + "/x")
        assert stin.Triple.read(d + "/x").ssp.edges == suite[0].ssp.edges
        res = stin.bench(suite, ["exact", "greedy"], seed=7, out_dir=d)
        assert res["summary"]["instances"] == 3
        with open(d + "/instances.csv") as f:
            assert f.readline().startswith("id,n,edges")

    assert stin.js_divergence([1.0, 0.0], [1.0, 0.0]) == 0.0
    assert abs(stin.js_divergence([1.0, 0.0], [0.0, 1.0]) - math.log(2)) < 1e-12
    assert abs(stin.relative_improvement(16.50, 16.22) - 0.01726) < 1e-5
    try:
        stin.Graph([1.0], [(0, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("self-loop accepted")
    print("stin smoke test passed")


if __name__ == "__main__":
    main()
