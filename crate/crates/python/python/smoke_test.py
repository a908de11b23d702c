"""Quick end-to-end check of the Python bindings."""

import os
import tempfile

import iidbench_py as ib


def main():
    assert ib.kl_divergence([0.5, 0.5], [0.5, 0.5]) < 1e-12
    assert ib.kl_divergence([0.9, 0.1], [0.1, 0.9]) > 0.0

    g = ib.Graph.generate_sbm([150, 150], 0.06, 0.01, 16, indicator_noise=1.0, seed=1)
    assert g.n == 300 and g.k == 2 and g.feature_dim == 16
    assert len(g.edges()) == g.edge_count

    cal = ib.calibrate(g, 100, pilot_count=20, percentile=50.0, seed=2)
    samples = ib.sample(g, 100, 5, cal["node_threshold"], cal["edge_threshold"], seed=3)
    assert len(samples) == 5
    assert all(s.edge_count == 100 and s.is_connected() for s in samples)

    st = ib.stats(samples, g)
    print("stats", {k: st[k] for k in list(st)[:4]})

    graphs = [s.to_graph(g) for s in samples]
    report = ib.evaluate("proplin", {"depth": [1, 2], "epochs": [50]}, graphs, seed=4)
    assert len(report["per_graph_accuracy"]) == 5
    print("mean accuracy", round(report["mean"], 4))

    vu = ib.validutil("proplin", g, {"depth": [1]}, base={"epochs": 50}, budget=5, seed=5)
    print("validutil test accuracy", round(vu["test_accuracy"], 4))

    assert ib.inversion_number(["a", "b", "c"], [["c", "b", "a"]]) == 3

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "g")
        g.write_bundle(path)
        h = ib.Graph.load_bundle(path)
        assert h.edges() == g.edges() and h.labels() == g.labels()

    try:
        ib.evaluate("proplin", {}, graphs)
    except (ValueError, ib.IidbenchError):
        pass
    else:
        raise AssertionError("empty grid accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
