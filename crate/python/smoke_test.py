"""Smoke test for the winomem_py extension module.

Build and install first, e.g. `pip install --no-build-isolation ./crates/py`.
"""

import sys

import winomem_py as wm

P = 65521


def check(cond, what):
    if not cond:
        print("FAIL:", what)
        sys.exit(1)
    print("ok:", what)


def classical(a, b, c, alpha, beta, p):
    rows, inner, cols = len(a), len(b), len(b[0])
    return [
        [(alpha * sum(a[i][l] * b[l][j] for l in range(inner)) + beta * c[i][j]) % p for j in range(cols)]
        for i in range(rows)
    ]


def main():
    n = 16
    a, b = wm.Matrix.random(n, n, P, 1), wm.Matrix.random(n, n, P, 2)
    want = classical(a.to_list(), b.to_list(), [[0] * n] * n, 1, 0, P)

    c = wm.Matrix.zeros(n, n, P)
    cost = wm.multiply("std2", a, b, c)
    check(c.to_list() == want, "std2 matches the triple loop")
    check(cost == wm.expected_costs("std2", n, n, n), "std2 costs match the model")

    c0 = wm.Matrix.random(n, n, P, 3)
    c = wm.Matrix.from_text(c0.to_text())
    acc_want = classical(a.to_list(), b.to_list(), c0.to_list(), 3, 5, P)
    wm.multiply("acc3", a, b, c, alpha=3, beta=5, cutoff=2)
    check(c.to_list() == acc_want, "acc3 computes 3AB + 5C")

    a2, b2 = wm.Matrix.random(n, n, P, 1), wm.Matrix.random(n, n, P, 2)
    c = wm.Matrix.zeros(n, n, P)
    cost = wm.multiply("ip", a2, b2, c)
    check(c.to_list() == want and cost["peak_extra"] == 0, "ip needs no extra memory")

    check(not wm.supported("ovl", 4, 8, 4), "ovl rejects a non-square shape")
    try:
        wm.multiply("ovl", wm.Matrix.zeros(4, 8), wm.Matrix.zeros(8, 4), wm.Matrix.zeros(4, 4))
        check(False, "unsupported shape raises")
    except ValueError:
        check(True, "unsupported shape raises")

    ok, _ = wm.validate_schedule(wm.builtin_schedule("acc2"))
    check(ok, "builtin acc2 validates")
    bad = wm.builtin_schedule("std2").replace(" - ", " + ", 1)
    ok, report = wm.validate_schedule(bad)
    check(not ok, "corrupted std2 is rejected")

    res = wm.search("builtin:winograd", pebbles=0, overwrite="both", copy_budget=0)
    check(res["outcome"] == "found", "in-place search finds a schedule")
    check(wm.validate_schedule(res["schedule"])[0], "found schedule validates")
    res = wm.search("builtin:winograd", pebbles=1, overwrite="none", copy_budget=0)
    check(res["outcome"] == "exhausted", "read-only with one temporary is infeasible")

    m = wm.Matrix(2, 2, [1, -1, 2, 0], 7)
    check(m.to_list() == [[1, 6], [2, 0]] and (m @ m).to_list() == [[6, 6], [2, 5]], "Matrix basics")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
