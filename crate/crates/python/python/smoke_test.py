"""Smoke test for the compiled `dispersion` extension module."""

import json

import dispersion


def main():
    g = dispersion.Graph.generate("gen:random:24:40:3")
    assert g.node_count == 24 and g.edge_count == 40
    assert dispersion.Graph.parse(g.to_text()).edges() == g.edges()
    v, port = g.neighbor_via(0, 0)
    assert g.neighbor_via(v, port)[0] == 0

    run = dispersion.simulate(g, k=15, root=2, seed=9)
    summary = run.summary
    assert summary["outcome"] == "dispersed_all_terminated", summary
    assert run.rounds == run.t1 + run.t2 + 2
    assert len(set(run.positions)) == 15

    verdicts = run.verify(g)
    assert [v["checker"] for v in verdicts] == dispersion.CHECKERS
    assert all(v["pass"] for v in verdicts), verdicts

    reloaded = dispersion.Run.from_jsonl(run.trace_jsonl())
    assert reloaded.summary == summary
    records = reloaded.records()
    assert len(records) == run.rounds
    bits = {r["bits"] for rec in records for r in rec["robots"]}
    assert bits == {dispersion.memory_footprint_bits(g.max_degree)}
    assert dispersion.memory_footprint_bits(8) <= dispersion.memory_bound(8)

    ref = dispersion.reference_dfs(g, 2, 15)
    assert set(ref["rootpath"]) <= set(run.positions)
    walk = [next(r["node"] for r in rec["robots"] if r["role"] == "explore") for rec in records[: run.t1]]
    assert walk == ref["walk"]

    leaders, followers, alone, subrounds = dispersion.elect(16, seed=4)
    assert (leaders, followers, alone) == (1, 15, 0) and subrounds >= 3

    try:
        dispersion.simulate(g, k=0)
    except ValueError as e:
        assert "k = 0" in str(e)
    else:
        raise AssertionError("k = 0 accepted")

    print(json.dumps({"ok": True, "rounds": run.rounds, "checkers": len(verdicts)}))


if __name__ == "__main__":
    main()
