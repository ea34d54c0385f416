import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wahlkit.configuration import (Configuration, ConfigurationError, K3,
                                   det_exact, geography_check, rank_exact)


def cofactor_det(matrix):
    n = len(matrix)
    if n == 0:
        return 1
    if n == 1:
        return matrix[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        total += (-1) ** j * matrix[0][j] * cofactor_det(minor)
    return total


small_matrices = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n),
                       min_size=n, max_size=n))


def random_configuration(rng):
    r = rng.randint(1, 7)
    names = [f"C{i}" for i in range(r)]
    curves = [(n, rng.randint(-4, -1)) for n in names]
    nodes = []
    for _ in range(rng.randint(0, 10)):
        a, b = rng.choice(names), rng.choice(names)
        if a == b and rng.random() < 0.7:
            continue  # keep self-nodes occasional
        nodes.append((a, b))
    return Configuration.build(curves, nodes)


class TestStructure:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ConfigurationError):
            Configuration.build([("A", -2), ("A", -2)], [])

    def test_unknown_node_curve_rejected(self):
        with pytest.raises(ConfigurationError):
            Configuration.build([("A", -2)], [("A", "B")])

    def test_pairing_and_self_nodes(self):
        cfg = Configuration.build([("A", -2), ("B", -2)],
                                  [("A", "B"), ("A", "B"), ("A", "A")])
        assert cfg.pairing("A", "B") == 2
        assert cfg.self_nodes("A") == 1
        assert cfg.t2 == 3

    def test_json_round_trip(self):
        cfg = Configuration.build([("A", -2), ("B", -3)], [("A", "B"), ("A", "A")])
        again = Configuration.from_json(cfg.to_json())
        assert again.intersection_matrix(["A", "B"]) == \
            cfg.intersection_matrix(["A", "B"])
        assert again.t2 == cfg.t2

    def test_json_rejects_unknown_fields(self):
        with pytest.raises(ConfigurationError):
            Configuration.from_json('{"curves": [], "nodes": [], "extra": 1}')
        with pytest.raises(ConfigurationError):
            Configuration.from_json('{"curves": [{"name": "A", "self_int": -2, '
                                    '"color": "red"}], "nodes": []}')


class TestMatrices:
    def test_i2_restriction(self):
        cfg = Configuration.build([("B1", -2), ("B2", -2)], [("B1", "B2"), ("B1", "B2")])
        assert cfg.intersection_matrix(["B1", "B2"]) == [[-2, 2], [2, -2]]
        assert det_exact(cfg.intersection_matrix()) == 0

    def test_empty_matrix(self):
        cfg = Configuration.build([("A", -2)], [])
        assert cfg.intersection_matrix([]) == []
        assert det_exact([]) == 1

    @given(small_matrices)
    def test_det_matches_cofactor_oracle(self, rows):
        sym = [[rows[i][j] + rows[j][i] for j in range(len(rows))]
               for i in range(len(rows))]
        assert det_exact(sym) == cofactor_det(sym)
        assert det_exact(rows) == cofactor_det(rows)

    @given(small_matrices, st.randoms(use_true_random=False))
    def test_det_under_permutation(self, rows, rng):
        n = len(rows)
        perm = list(range(n))
        rng.shuffle(perm)
        sign = 1
        seen = [False] * n
        for start in range(n):
            if seen[start]:
                continue
            length = 0
            cursor = start
            while not seen[cursor]:
                seen[cursor] = True
                cursor = perm[cursor]
                length += 1
            if length % 2 == 0:
                sign = -sign
        # reordering curves conjugates the matrix: determinant unchanged
        conjugated = [[rows[perm[i]][perm[j]] for j in range(n)] for i in range(n)]
        assert det_exact(conjugated) == det_exact(rows)
        # permuting rows alone flips the sign with the parity
        row_permuted = [rows[perm[i]] for i in range(n)]
        assert det_exact(row_permuted) == sign * det_exact(rows)

    def test_rank(self):
        assert rank_exact([[-2, 2], [2, -2]]) == 1
        assert rank_exact([[1, 0], [0, 1]]) == 2
        assert rank_exact([[0, 0], [0, 0]]) == 0


class TestBlowUp:
    def test_simple_node(self):
        cfg = Configuration.build([("A", -2), ("B", -2)], [("A", "B")])
        out = cfg.blow_up(0)
        assert out.curve("A").self_int == -3
        assert out.curve("B").self_int == -3
        assert out.curve("E1").self_int == -1
        assert out.pairing("A", "B") == 0
        assert out.pairing("E1", "A") == 1 and out.pairing("E1", "B") == 1
        assert (out.r, out.t2) == (3, 2)
        assert out.blowup_count == 1

    def test_double_pair_keeps_other_node(self):
        cfg = Configuration.build([("C1", -2), ("C2", -2)], [("C1", "C2"), ("C1", "C2")])
        out = cfg.blow_up(0)
        assert out.pairing("C1", "C2") == 1
        assert out.curve("C1").self_int == -3

    def test_self_node_flagged(self):
        cfg = Configuration.build([("G", -2)], [("G", "G")])
        out = cfg.blow_up(0)
        assert out.curve("G").self_int == -4
        assert out.pairing("E1", "G") == 2
        assert out.history[-1].self_node

    def test_pk_preserved_randomized(self):
        rng = random.Random(20240)
        done = 0
        while done < 1000:
            cfg = random_configuration(rng)
            if not cfg.nodes:
                continue
            node = rng.choice(cfg.nodes)
            out = cfg.blow_up(node.id)
            assert out.pk_invariants() == cfg.pk_invariants()
            assert (out.r, out.t2) == (cfg.r + 1, cfg.t2 + 1)
            drop = sum(c.self_int for c in out.curves) - \
                sum(c.self_int for c in cfg.curves)
            assert drop == -3  # two decrements plus the new (-1)-curve
            done += 1

    def test_unknown_node(self):
        cfg = Configuration.build([("A", -2)], [])
        with pytest.raises(ConfigurationError):
            cfg.blow_up(0)


class TestInvariants:
    def test_log_chern_examples(self):
        six = Configuration.build(
            [(n, -2) for n in ("C1", "C2", "B1", "B3", "A2", "D1")],
            [("C1", "C2"), ("C1", "C2"), ("C1", "A2"), ("C2", "D1"),
             ("B1", "A2"), ("B1", "D1"), ("B3", "A2"), ("B3", "D1")])
        assert six.log_chern() == (4, 20)
        assert six.pk_invariants() == (2, 2)
        empty = Configuration.build([], [])
        assert empty.log_chern() == (0, 24)
        assert empty.pk_invariants() == (0, 0)

    def test_single_wahl_chain_has_p_one(self):
        chain = (4, 2, 3, 5, 4, 2, 2)
        curves = [(f"L{i}", -b) for i, b in enumerate(chain)]
        nodes = [(f"L{i}", f"L{i+1}") for i in range(len(chain) - 1)]
        cfg = Configuration.build(curves, nodes)
        assert cfg.pk_invariants()[0] == 1

    def test_geography_examples(self):
        geo = geography_check(2, 9)
        assert geo.admissible and (geo.r, geo.t2, geo.nodes_to_blow_up) == (20, 29, 11)
        assert not geography_check(2, 14).admissible
        geo = geography_check(2, 2)
        assert (geo.r, geo.t2, geo.nodes_to_blow_up) == (6, 8, 4)
        with pytest.raises(ConfigurationError):
            geography_check(-1, 2)
        with pytest.raises(ConfigurationError):
            geography_check(2, 0)
