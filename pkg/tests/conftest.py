import itertools

import numpy as np
import pytest

from oddlink.graph import BipartiteGraph, UnipartiteGraph


def random_bipartite(rng, max_left=20, max_right=20, density=None):
    """Random bipartite graph with at least one edge."""
    while True:
        nl = int(rng.integers(1, max_left + 1))
        nr = int(rng.integers(1, max_right + 1))
        p = density if density is not None else rng.uniform(0.1, 0.6)
        B = rng.random((nl, nr)) < p
        if B.any():
            u, w = np.nonzero(B)
            return BipartiteGraph(nl, nr, u, w)


def complete_bipartite(m, n):
    u, w = np.divmod(np.arange(m * n), n)
    return BipartiteGraph(m, n, u, w)


def complete_graph(n):
    return UnipartiteGraph(n, np.array(list(itertools.combinations(range(n), 2))))


def complete_bipartite_unipartite(m, n):
    return UnipartiteGraph(m + n, np.array([(i, m + j) for i in range(m) for j in range(n)]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def synthetic_ratings(path, n_users=943, n_items=1682, n_edges=100_000, seed=0):
    """Write a tab-separated ``user item rating timestamp`` file.

    Users and items get heavy-tailed activity and popularity, and each
    belongs to one of a few latent groups so that there is structure to
    predict.
    """
    rng = np.random.default_rng(seed)
    activity = rng.pareto(1.5, n_users) + 1
    popularity = rng.pareto(1.2, n_items) + 1
    user_group = rng.integers(0, 5, n_users)
    item_group = rng.integers(0, 5, n_items)
    pairs = set()
    rows = []
    while len(rows) < n_edges:
        m = 2 * (n_edges - len(rows))
        u = rng.choice(n_users, m, p=activity / activity.sum())
        w = rng.choice(n_items, m, p=popularity / popularity.sum())
        keep = (user_group[u] == item_group[w]) | (rng.random(m) < 0.3)
        for a, b in zip(u[keep], w[keep]):
            if (a, b) not in pairs and len(rows) < n_edges:
                pairs.add((a, b))
                rows.append((a, b))
    times = 874_724_710 + np.sort(rng.integers(0, 20_000_000, n_edges))
    order = rng.permutation(n_edges)
    with open(path, "w") as fh:
        for i in order:
            a, b = rows[i]
            fh.write(f"{a + 1}\t{b + 1}\t{rng.integers(1, 6)}\t{times[i]}\n")
    return path


# acceptance summary: tests marked ``acceptance("name")`` report one line each

_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    state = _acceptance.setdefault(name, {"outcomes": [], "notes": []})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        state["outcomes"].append(report.outcome)
        state["notes"].extend(v for k, v in report.user_properties if k == "measured")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, state in _acceptance.items():
        outcomes = state["outcomes"]
        if "failed" in outcomes:
            verdict = "FAIL"
        elif outcomes and all(o == "skipped" for o in outcomes):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        note = "; ".join(state["notes"])
        terminalreporter.write_line(f"{verdict}  {name}" + (f"  [{note}]" if note else ""))
