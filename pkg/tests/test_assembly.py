import pytest

from wahlkit.assembly import (AssemblyError, MarkedSurface, k_squared,
                              nef_ample_check, obstruction_dim, pi1_verdict,
                              singularity_report, surface_report)
from wahlkit.configuration import Configuration, det_exact


def chain_config(*chains, extra_curves=(), extra_nodes=()):
    """Lay out disjoint chains [b1..bl] as named curve paths."""
    curves, nodes = [], []
    for ci, entries in enumerate(chains):
        names = [f"K{ci}_{i}" for i in range(len(entries))]
        curves += [(n, -b) for n, b in zip(names, entries)]
        nodes += [(names[i], names[i + 1]) for i in range(len(entries) - 1)]
    curves += list(extra_curves)
    nodes += list(extra_nodes)
    return Configuration.build(curves, nodes)


def chain_names(config, ci):
    return tuple(c.name for c in config.curves if c.name.startswith(f"K{ci}_"))


class TestMarking:
    def test_valid_marking(self):
        cfg = chain_config((4, 5, 3, 2, 2))
        ms = MarkedSurface(cfg, (chain_names(cfg, 0),))
        assert ms.wahl_data()[0].n == 11

    def test_non_wahl_string_rejected(self):
        cfg = chain_config((4, 4))
        with pytest.raises(AssemblyError):
            MarkedSurface(cfg, (chain_names(cfg, 0),))

    def test_overlapping_chains_rejected(self):
        cfg = chain_config((4,))
        with pytest.raises(AssemblyError):
            MarkedSurface(cfg, (("K0_0",), ("K0_0",)))

    def test_chain_curves_must_be_adjacent_once(self):
        cfg = Configuration.build([("A", -3), ("B", -5), ("C", -2), ("D", -2)],
                                  [("A", "B"), ("A", "B"), ("B", "C"), ("C", "D")])
        with pytest.raises(AssemblyError):
            MarkedSurface(cfg, (("A", "B", "C", "D"),))

    def test_ade_only_minus_two(self):
        cfg = chain_config((4,), extra_curves=[("R", -3)])
        with pytest.raises(AssemblyError):
            MarkedSurface(cfg, (chain_names(cfg, 0),), (("R",),))

    def test_ade_disjoint_from_wahl(self):
        cfg = chain_config((4,), extra_curves=[("R", -2)],
                           extra_nodes=[("R", "K0_0")])
        with pytest.raises(AssemblyError):
            MarkedSurface(cfg, (chain_names(cfg, 0),), (("R",),))


class TestNefAmple:
    def test_t_join_is_nef_only_with_contraction(self):
        cfg = chain_config((4,), (4,), extra_curves=[("G", -1)],
                           extra_nodes=[("G", "K0_0"), ("G", "K1_0")])
        ms = MarkedSurface(cfg, (("K0_0",), ("K1_0",)))
        report = nef_ample_check(ms)
        assert report.status == "nef-only"
        assert report.canonical_ample
        joint = report.contractions[0]
        assert (joint.result.m, joint.result.q) == (8, 3)
        assert joint.t_type is not None and joint.t_type.d == 2

    def test_single_attachment_not_nef(self):
        cfg = chain_config((4,), extra_curves=[("G", -1)],
                           extra_nodes=[("G", "K0_0")])
        ms = MarkedSurface(cfg, (("K0_0",),))
        report = nef_ample_check(ms)
        assert report.status == "not-nef"
        assert report.witnesses[0].curve == "G"

    def test_isolated_minus_one_not_nef(self):
        cfg = chain_config((4,), extra_curves=[("G", -1)])
        ms = MarkedSurface(cfg, (("K0_0",),))
        assert nef_ample_check(ms).status == "not-nef"

    def test_free_deep_curve_not_nef(self):
        cfg = chain_config((4,), extra_curves=[("R", -3)])
        ms = MarkedSurface(cfg, (chain_names(cfg, 0),))
        report = nef_ample_check(ms)
        assert report.status == "not-nef"
        assert report.witnesses[0].kind == "bad-free-curve"

    def test_free_two_curve_blocks_ample(self):
        # strict joins but an untouched (-2)-curve away from the chains
        cfg = chain_config((4,), (2, 5), extra_curves=[("G", -1), ("R", -2)],
                           extra_nodes=[("G", "K0_0"), ("G", "K1_0"),
                                        ("G", "K1_0")])
        ms = MarkedSurface(cfg, (("K0_0",), chain_names(cfg, 1)))
        report = nef_ample_check(ms)
        assert report.status == "nef-only"
        assert any(w.kind == "free-two-isolated" for w in report.warnings)
        assert not report.canonical_ample or all(
            c.t_type for c in report.contractions)

    def test_multiplicity_two_meeting(self):
        # G meets the (-4)-curve twice: s = -1 exactly
        cfg = chain_config((4,), extra_curves=[("G", -1)],
                           extra_nodes=[("G", "K0_0"), ("G", "K0_0")])
        ms = MarkedSurface(cfg, (("K0_0",),))
        report = nef_ample_check(ms)
        assert report.status == "nef-only"
        assert report.contractions[0].result is None  # single-chain join


class TestReports:
    def test_k_squared(self):
        cfg = chain_config((4,), (4, 2, 3, 5, 4, 2, 2))
        ms = MarkedSurface(cfg, (chain_names(cfg, 0), chain_names(cfg, 1)))
        assert k_squared(ms) == 8  # no blow-ups recorded on a synthetic layout

    def test_singularity_report(self):
        cfg = chain_config((3, 2, 6, 2), extra_curves=[("R1", -2), ("R2", -2)],
                           extra_nodes=[("R1", "R2")])
        ms = MarkedSurface(cfg, (chain_names(cfg, 0),), (("R1", "R2"),))
        entries = singularity_report(ms)
        assert entries[0].wahl.n == 7 and entries[0].wahl.a == 3
        assert str(entries[0]) == "1/49(1,20)"
        assert entries[1].ade_k == 2 and str(entries[1]) == "A2 = 1/3(1,2)"

    def test_obstruction_dim(self):
        i2 = Configuration.build([("B1", -2), ("B2", -2)],
                                 [("B1", "B2"), ("B1", "B2")])
        assert obstruction_dim(i2) == 1
        assert obstruction_dim(i2, ambient_rank_cap=1) == 1
        single = Configuration.build([("A", -2)], [])
        assert obstruction_dim(single) == 0

    def test_surface_report_lines_stable(self):
        cfg = chain_config((4,), (4,), extra_curves=[("G", -1)],
                           extra_nodes=[("G", "K0_0"), ("G", "K1_0")])
        ms = MarkedSurface(cfg, (("K0_0",), ("K1_0",)))
        report = surface_report(ms, cfg)
        lines = report.lines()
        assert lines[0].startswith("K^2 = ")
        assert report.family_dim == 20 - 2 * report.k2
        again = surface_report(ms, cfg)
        assert again.lines() == lines


class TestPi1:
    def test_coprime_join_trivial(self):
        cfg = chain_config((4,), (4, 2, 3, 5, 4, 2, 2), extra_curves=[("G", -1)],
                           extra_nodes=[("G", "K0_0"), ("G", "K1_0")])
        ms = MarkedSurface(cfg, (("K0_0",), chain_names(cfg, 1)))
        report = pi1_verdict(ms)
        assert report.status == "trivial"
        assert "gcd(2,27)=1" in report.per_chain[0]

    def test_end_curve_alone_trivial(self):
        cfg = chain_config((4,), extra_curves=[("C", -2)],
                           extra_nodes=[("C", "K0_0")])
        ms = MarkedSurface(cfg, (("K0_0",),))
        assert pi1_verdict(ms).status == "trivial"

    def test_bare_chain_inconclusive(self):
        cfg = chain_config((4,))
        report = pi1_verdict(MarkedSurface(cfg, (("K0_0",),)))
        assert report.status == "inconclusive"

    def test_non_coprime_join_inconclusive(self):
        # two chains with the same index joined by one curve
        cfg = chain_config((4,), (4,), extra_curves=[("G", -1)],
                           extra_nodes=[("G", "K0_0"), ("G", "K1_0")])
        ms = MarkedSurface(cfg, (("K0_0",), ("K1_0",)))
        assert pi1_verdict(ms).status == "inconclusive"

    def test_meridian_propagation(self):
        # chain [5,2] killed by an external curve at its second position
        # (t=1); a second chain [5,2] dies only after the first is dead
        cfg = chain_config((5, 2), (5, 2),
                           extra_curves=[("C", -2), ("G", -1)],
                           extra_nodes=[("C", "K0_1"),
                                        ("G", "K0_0"), ("G", "K1_1")])
        ms = MarkedSurface(cfg, (chain_names(cfg, 0), chain_names(cfg, 1)))
        report = pi1_verdict(ms)
        assert report.status == "trivial"

    def test_never_reports_nontrivial(self):
        cfg = chain_config((5, 2))
        report = pi1_verdict(MarkedSurface(cfg, (chain_names(cfg, 0),)))
        assert report.status in ("trivial", "inconclusive")
