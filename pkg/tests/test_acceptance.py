"""The thirteen acceptance criteria, each run through the check registry at its default parameters.

Every criterion prints one PASS/FAIL line; the lines are also collected into
the terminal summary.  Time limits are wall-clock on the check itself.
"""

import time

import pytest

from spinverify.checks import run_check

# (number, check id, explicit params, time limit in seconds or None)
CRITERIA = [
    (1, "macdonald", {"p": [2, 3, 5, 7], "K": 8}, 30),
    (2, "ib-ip", {"p": [2, 3, 5], "bound": 4, "shape": 3}, 120),
    (3, "factorization", {"bound": 12}, 10),
    (4, "alpha-chi", {"p": [2, 3, 5], "D": [-1, -2, 2, 3, 5, -7], "bound": 3, "samples": 50, "tol": 1e-9}, 300),
    (5, "unipotent-lemma", {"p": [2, 3, 5], "D": [-1, -2, 2, 3, 5, -7], "tol": 1e-9}, None),
    (6, "bijection", {"bound": 3}, None),
    (7, "w-identity", {"samples": 1000}, None),
    (8, "contour", {"r": [2, 6, 8, 10], "y": [0.5, 1.0, 2.0], "tol": 1e-6}, 30),
    (9, "f-infty", {"samples": 20, "s": [0.75, 1.0, 1.5], "tol": 1e-8}, None),
    (10, "i-infty-gamma", {"r": 6, "D": [-1, -7], "s": [0.75, 1.0, 1.25], "tol": 1e-4}, 300),
    (11, "orbits", {"p": [3, 5], "D": [-1, 1]}, 10),
    (12, "pd-modularity", {"D": -1, "r": 10, "Z": [[0, 2], [0, 0], [0, 2]], "gamma": "inversion",
                           "radius": 12.0, "tol": 1e-3}, 120),
    (13, "stabilizer", {"samples": 50, "words": 100}, None),
]


@pytest.mark.parametrize("number,check_id,params,limit", CRITERIA, ids=[f"{n:02d}-{c}" for n, c, _, _ in CRITERIA])
def test_criterion(acceptance_log, number, check_id, params, limit):
    t0 = time.perf_counter()
    rep = run_check(check_id, params, seed=0)
    elapsed = time.perf_counter() - t0
    in_time = limit is None or elapsed < limit
    ok = rep["status"] == "pass" and in_time
    budget = f" / {limit}s" if limit else ""
    line = (f"criterion {number:2d} {check_id:16s} {'PASS' if ok else 'FAIL'}  "
            f"max_discrepancy={rep['max_discrepancy']}  {elapsed:.1f}s{budget}")
    print(line)
    acceptance_log.append(line)
    assert rep["status"] == "pass", rep["witness"] or rep["details"]
    assert in_time, f"took {elapsed:.1f}s, limit {limit}s"
