"""Exit criteria, each at its stated scale and time budget.

A summary line per criterion is printed at the end of the session.
"""

import copy
import csv
import io
import json
import time
from collections import Counter

import numpy as np
import pytest

from arbor.axes import classify_pair
from arbor.cli import main
from arbor.descent import (
    ReplacementSpec,
    TrackedTuple,
    apply_replacement,
    big_L,
    decide,
    enumerate_specs,
    pair_lengths,
)
from arbor.exact import det, trace, vp
from arbor.harness import GenConfig, conjecture_scan, random_tuple, run_bench, grid_csv
from arbor.tree import (
    OverlapBeyondCutoff,
    apply,
    check_pingpong,
    distance,
    elliptic_product_offset,
    oracle_translation_length,
    predict_product_length,
)
from conftest import TRIPLE_Q5_ROWS, QUINTUPLE_Q7_ROWS, elliptic_product_pairs, hyperbolic_pairs, random_det1


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        print(f"elapsed {self.elapsed:.2f}s (budget {self.seconds}s)")
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


@pytest.mark.criterion(1, "three hyperbolic elements over Q_5")
def test_criterion_1_triple(triple5):
    with Budget(1):
        assert all(det(g.matrix) == 1 for g in triple5)
        assert [g.length for g in triple5] == [2, 2, 2]
        report = check_pingpong(triple5)
        print(json.dumps(report.to_json()))
        assert not report.passed
        gamma3 = report.diagnostics[2]
        assert gamma3["union_diameter"] == 2, f"union on the third axis spans {gamma3['union_diameter']}, expected 2"


@pytest.mark.criterion(2, "five hyperbolic elements over Q_7")
def test_criterion_2_quintuple(quint7):
    with Budget(10):
        X = TrackedTuple.from_matrices([g.matrix for g in quint7], 7)
        assert X.lengths() == [4, 4, 4, 4, 2]
        products = Counter(v for _, _, a, b in pair_lengths(X) for v in (a, b))
        assert products == Counter({8: 10, 6: 4, 4: 6})
        assert big_L(X) == 146
        assert big_L(apply_replacement(X, ReplacementSpec(5, {1, 3}, {3}))) == 144
        for spec in enumerate_specs(5):
            single = len(spec.S1) + len(spec.S2) == 1
            one_sided = not spec.S1 or not spec.S2
            if single or one_sided:
                assert big_L(apply_replacement(X, spec)) >= 146, spec
        cert = decide(QUINTUPLE_Q7_ROWS, 7)
        assert cert.initial_L == 146 and cert.trace[0].L < 146


@pytest.mark.criterion(3, "length formula equals tree oracle")
def test_criterion_3_formula_oracle():
    with Budget(60):
        counted = Counter()
        for p in (2, 3, 5):
            rng = np.random.default_rng(p)
            for k in range(200):
                A = random_det1(rng, p, N=1 + k % 5)
                formula = -2 * min(0, vp(trace(A.matrix), p))
                assert oracle_translation_length(A) == formula
                counted[formula > 0] += 1
        print(f"{sum(counted.values())} elements, {counted[True]} hyperbolic")
        assert sum(counted.values()) >= 500


@pytest.mark.criterion(4, "product-length cases from measured geometry")
def test_criterion_4_product_cases():
    with Budget(120):
        pairs = []
        for p in (2, 3, 5):
            pairs += hyperbolic_pairs(p, 3, 100, seed=400 + p)
            pairs += elliptic_product_pairs(p, 10, seed=410 + p)
        cases = Counter()
        for g1, g2 in pairs:
            pred = predict_product_length(g1, g2)
            cases[pred.case] += 1
            assert pred.length == (g1 @ g2).length, (pred, g1, g2)
            rel, m = classify_pair(g1, g2), pred.measured
            if rel.kind == "disjoint":
                assert m.kind == "disjoint" and m.distance == rel.d
            elif rel.kind == "touch":
                assert m.kind == "overlap" and m.delta == 0
            elif rel.kind == "overlap":
                assert m.kind == "overlap" and (m.delta, m.same_orientation) == (rel.delta, rel.same_orientation)
            else:
                assert m.same_orientation == rel.same_orientation
                assert m.kind == "beyond_cutoff" or m.delta >= rel.delta_lower_bound
        print(f"{len(pairs)} pairs, cases {dict(sorted(cases.items()))}")
        assert len(pairs) >= 300
        assert cases["3iii"] > 0 and cases["indeterminate"] == 0


@pytest.mark.criterion(5, "elliptic product fixes a vertex |l1-l2|/2 from q")
def test_criterion_5_fixed_vertex_offset():
    with Budget(60):
        measured, skipped = 0, 0
        for p in (2, 3, 5):
            for g1, g2 in elliptic_product_pairs(p, 40, seed=500 + p):
                try:
                    q, fv, d = elliptic_product_offset(g1, g2)
                except OverlapBeyondCutoff:
                    skipped += 1
                    continue
                assert apply(g1 @ g2, fv) == fv
                assert d == distance(q, fv) == abs(g1.length - g2.length) // 2
                measured += 1
        print(f"{measured} pairs measured, {skipped} with overlap beyond the cutoff")
        assert measured >= 100


@pytest.mark.criterion(6, "zero-violation scans for n = 2, 3")
@pytest.mark.parametrize("n", [2, 3])
def test_criterion_6_scans(n):
    with Budget(30 * 60 / 2):
        rep = conjecture_scan(n, [2, 3, 5], 10, 10 ** 4, seed=6)
        print(json.dumps({k: v for k, v in rep.to_json().items() if k != "violations"}))
        assert rep.trials == 10 ** 4
        assert rep.violations == []
        assert rep.minimal_count == rep.trials
        assert rep.indeterminate_count < rep.trials / 100


@pytest.mark.criterion(7, "termination and determinism")
def test_criterion_7_termination():
    with Budget(600):
        primes = (2, 3, 5, 7, 11)
        runs, steps = 0, 0
        for k in range(1000):
            n, p = 1 + k % 5, primes[(k // 5) % 5]
            cfg = GenConfig(p, 10, n, seed=7)
            mats = [g.matrix for g in random_tuple(cfg, k)]
            cert = decide(mats, p)
            Ls = [cert.initial_L] + [s.L for s in cert.trace]
            assert all(a > b for a, b in zip(Ls, Ls[1:]))
            assert len(cert.trace) <= cert.initial_L
            again = decide([g.matrix for g in random_tuple(cfg, k)], p)
            assert again.to_json() == cert.to_json()
            runs += 1
            steps += len(cert.trace)
        print(f"{runs} runs, {steps} replacement steps")


@pytest.mark.criterion(8, "bench grid over six primes and n = 2..6")
def test_criterion_8_bench(tmp_path):
    primes, sizes = (2, 3, 5, 7, 11, 13), (2, 3, 4, 5, 6)
    with Budget(2 * 3600):
        records, cells = run_bench([(p, n) for p in primes for n in sizes], 10, 50, seed=8)
        table = grid_csv(cells)
        print(table)
    assert len(records) == 30 * 50
    slowest = max(r.wall_s for r in records)
    print(f"slowest instance {slowest:.3f}s")
    assert slowest < 120
    assert all(r.iterations <= r.initial_L for r in records)
    rows = list(csv.reader(io.StringIO(table)))
    assert rows[0][: 1 + len(sizes)] == ["p"] + [str(n) for n in sizes]
    assert [int(r[0]) for r in rows[1:]] == list(primes)
    assert all(r[1 + k] for r in rows[1:] for k in range(len(sizes)))


def _cli_json(capsys, argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.criterion(9, "certificate soundness")
def test_criterion_9_certificates(tmp_path, capsys):
    with Budget(300):
        inputs = [(7, QUINTUPLE_Q7_ROWS), (5, TRIPLE_Q5_ROWS)]
        primes = (2, 3, 5, 7)
        for k in range(98):
            p, n = primes[k % 4], 2 + (k // 4) % 3
            inputs.append((p, [g.matrix.to_json() for g in random_tuple(GenConfig(p, 10, n, 9), k)]))
        outcomes = Counter()
        for k, (p, gens) in enumerate(inputs):
            src = tmp_path / f"in{k}.json"
            src.write_text(json.dumps({"p": p, "generators": gens}))
            code, cert = _cli_json(capsys, ["decide", src])
            assert code == (0 if cert["result"] == "free_discrete" else 3)
            outcomes[cert["result"]] += 1
            path = tmp_path / f"cert{k}.json"
            path.write_text(json.dumps(cert))
            code, rep = _cli_json(capsys, ["certify", path])
            assert code == 0 and rep["verified"], rep

            bad = copy.deepcopy(cert)
            if cert["result"] == "free_discrete":
                bad["final_tuple"][0]["word"].append(1)
            else:
                bad["witness_word"] = bad["witness_word"] + [1]
            path.write_text(json.dumps(bad))
            code, rep = _cli_json(capsys, ["certify", path])
            assert code == 1 and "word_evaluation" in rep["failed_invariants"]

            bad = copy.deepcopy(cert)
            ft = bad["final_tuple"]
            ft[0]["matrix"], ft[1]["matrix"] = ft[1]["matrix"], ft[0]["matrix"]
            if ft[0]["matrix"] != ft[1]["matrix"]:
                path.write_text(json.dumps(bad))
                code, rep = _cli_json(capsys, ["certify", path])
                assert code == 1 and "final_tuple_replay" in rep["failed_invariants"]
        print(f"{len(inputs)} certificates: {dict(outcomes)}")
        assert outcomes["free_discrete"] > 0 and outcomes["not_free_discrete"] > 0
