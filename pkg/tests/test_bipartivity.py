import numpy as np
import pytest

from oddlink.bipartivity import NEARLY_BIPARTITE, NOT_BIPARTITE, assess, verdict_for
from oddlink.graph import UnipartiteGraph

from conftest import complete_bipartite_unipartite, complete_graph


def random_unipartite(rng, n, p, bipartite=False):
    A = np.triu(rng.random((n, n)) < p, 1)
    if bipartite:
        side = np.arange(n) % 2
        A &= side[:, None] != side[None, :]
    i, j = np.nonzero(A)
    return UnipartiteGraph(n, np.column_stack([i, j]))


class TestFixtures:
    @pytest.mark.parametrize("seed", range(10))
    def test_k34(self, seed):
        assert assess(complete_bipartite_unipartite(3, 4), seed=seed).verdict == NEARLY_BIPARTITE

    @pytest.mark.parametrize("seed", range(10))
    def test_k6(self, seed):
        assert assess(complete_graph(6), seed=seed).verdict == NOT_BIPARTITE

    def test_random_bipartite(self):
        rng = np.random.default_rng(3)
        g = random_unipartite(rng, 60, 0.15, bipartite=True)
        assert assess(g).verdict == NEARLY_BIPARTITE


class TestProperties:
    def test_bipartite_spectrum_symmetric(self, rng):
        for _ in range(5):
            g = random_unipartite(rng, 50, 0.2, bipartite=True)
            lam = np.sort(assess(g).eigenvalues)
            np.testing.assert_allclose(lam, -lam[::-1], atol=1e-8)

    def test_verdict_recomputable(self, rng):
        for g in (complete_graph(6), complete_bipartite_unipartite(3, 4), random_unipartite(rng, 40, 0.2)):
            r = assess(g)
            ratio, verdict = verdict_for(r.sinh_fit.residual, r.exp_fit.residual)
            assert (ratio, verdict) == (r.ratio, r.verdict)
            assert r.ratio > 0

    def test_permutation_invariance(self, rng):
        graphs = [complete_graph(6), complete_bipartite_unipartite(3, 4),
                  random_unipartite(rng, 40, 0.2, bipartite=True)]
        for g in graphs:
            base = assess(g).verdict
            for _ in range(5):
                assert assess(g.relabeled(rng.permutation(g.node_count))).verdict == base

    def test_positive_scales(self):
        r = assess(complete_graph(8))
        assert r.sinh_fit.transform.beta >= 0 and r.exp_fit.transform.beta >= 0

    def test_threshold(self):
        r = assess(complete_bipartite_unipartite(3, 4), threshold=1e-9)
        assert r.verdict == NOT_BIPARTITE

    def test_outputs(self):
        r = assess(complete_bipartite_unipartite(3, 4))
        lines = r.curve_csv().splitlines()
        assert lines[0] == "lambda,target,sinh_fit,exp_fit"
        assert len(lines) == 1 + len(r.eigenvalues)
        assert r.summary("k34").startswith("k34\tnearly-bipartite\tratio=")

    def test_verdict_for(self):
        assert verdict_for(1.0, 2.0) == (0.5, NEARLY_BIPARTITE)
        assert verdict_for(2.0, 2.0)[1] == NOT_BIPARTITE
        assert verdict_for(0.0, 0.0)[1] == NOT_BIPARTITE
