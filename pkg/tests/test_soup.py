"""Loop measure, truncated enumeration, and the Poisson sampler."""

import math

import numpy as np
import pytest

from loopsoup import (
    BasedLoop,
    ConfigError,
    MeasureConfig,
    LoopSoupSampler,
    NumericError,
    canonical_class,
    dumps_soup,
    enumerate_measure,
    loop_to_word,
    loop_weight,
    occupation,
    parse_soup,
    sample_soup,
    spectral_radius,
    tail_bound,
    total_mass,
    truncated_mass,
    winding_masses,
)


class TestMeasure:
    def test_loop_weight_by_hand(self, triangle):
        # two-step loop 0-1-0: measure (1/3)(1/3), based weight /2
        based, unbased = loop_weight(triangle, BasedLoop((0, 1, 0)))
        assert based == pytest.approx(1.0 / 18.0)
        assert unbased == pytest.approx(1.0 / 9.0)

    def test_loop_weight_multiplicity(self, triangle):
        # traversing 0-1-0 twice has multiplicity 2
        based, unbased = loop_weight(triangle, BasedLoop((0, 1, 0, 1, 0)))
        assert based == pytest.approx((1.0 / 3.0) ** 4 / 4.0)
        assert unbased == pytest.approx((1.0 / 3.0) ** 4 / 2.0)

    def test_total_mass_triangle(self, triangle):
        # det(I - P) = 16/27 for the unit triangle with unit killing
        assert total_mass(triangle) == pytest.approx(math.log(27.0 / 16.0), abs=1e-14)

    def test_total_mass_infinite_without_killing(self, k4_free):
        with pytest.raises(NumericError):
            total_mass(k4_free)

    def test_spectral_radius(self, triangle):
        assert spectral_radius(triangle) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_tail_bound_decreases(self, triangle):
        ts = [tail_bound(triangle, n) for n in (8, 12, 16, 20)]
        assert all(a > b > 0 for a, b in zip(ts, ts[1:]))

    def test_truncated_mass_converges(self, triangle):
        full = total_mass(triangle)
        for n in (10, 20, 30):
            assert abs(truncated_mass(triangle, n) - full) <= tail_bound(triangle, n)


class TestEnumeration:
    def test_masses_sum_to_truncated_mass(self, triangle, triangle_frame):
        em = enumerate_measure(triangle, triangle_frame, 14)
        assert sum(em.masses.values()) == pytest.approx(
            truncated_mass(triangle, 14), abs=1e-13)

    def test_bowtie_masses_sum(self, bowtie, bowtie_frame):
        em = enumerate_measure(bowtie, bowtie_frame, 10)
        assert sum(em.masses.values()) == pytest.approx(
            truncated_mass(bowtie, 10), abs=1e-13)

    def test_monotone_in_depth(self, triangle, triangle_frame):
        e1 = enumerate_measure(triangle, triangle_frame, 10)
        e2 = enumerate_measure(triangle, triangle_frame, 14)
        for cls, m in e1.items():
            assert e2.get(cls) >= m - 1e-15

    def test_class_masses_within_tail_of_total(self, triangle, triangle_frame):
        em = enumerate_measure(triangle, triangle_frame, 16)
        assert total_mass(triangle) - sum(em.masses.values()) <= em.tail

    def test_trivial_class_present(self, triangle, triangle_frame):
        em = enumerate_measure(triangle, triangle_frame, 8)
        assert em.get(canonical_class(())) > 0.3

    def test_winding_masses(self, triangle, triangle_frame):
        em = enumerate_measure(triangle, triangle_frame, 12)
        wm = em.winding(triangle_frame.rank)
        assert wm == winding_masses(em.masses, triangle_frame.rank)
        # rank 1: winding h only from the class (sign h)^|h|
        assert wm[(1,)] == pytest.approx(em.get(canonical_class((1,))), abs=1e-15)
        assert sum(wm.values()) == pytest.approx(sum(em.masses.values()), abs=1e-13)

    def test_symmetric_under_inversion(self, triangle, triangle_frame):
        # reversing every loop is measure preserving
        em = enumerate_measure(triangle, triangle_frame, 12)
        assert em.get(canonical_class((1,))) == pytest.approx(
            em.get(canonical_class((-1,))), abs=1e-15)


class TestConfig:
    def test_defaults(self):
        cfg = MeasureConfig()
        assert cfg.alpha == 1.0 and cfg.n_max == 24

    def test_rejects_bad_values(self):
        with pytest.raises(ConfigError):
            MeasureConfig(alpha=0.0)
        with pytest.raises(ConfigError):
            MeasureConfig(n_max=0)
        with pytest.raises(ConfigError):
            MeasureConfig(tail_tol=-1.0)

    def test_tail_tolerance_enforced(self, triangle, triangle_frame):
        with pytest.raises(ConfigError, match="tail bound"):
            sample_soup(triangle, triangle_frame,
                        MeasureConfig(n_max=5, tail_tol=1e-12, seed=1))


class TestSampler:
    def test_reproducible(self, triangle, triangle_frame):
        cfg = MeasureConfig(n_max=42, tail_tol=1e-7, seed=99)
        s1 = sample_soup(triangle, triangle_frame, cfg)
        s2 = sample_soup(triangle, triangle_frame, cfg)
        assert dumps_soup(s1) == dumps_soup(s2)

    def test_loops_live_on_graph(self, triangle, triangle_frame):
        sampler = LoopSoupSampler(triangle, triangle_frame, n_max=42)
        for seed in range(25):
            soup = sampler.sample(seed)
            for lp in soup.loops:
                lp.check_edges(triangle)
                assert 2 <= lp.length <= 42

    def test_round_trip_text(self, triangle, triangle_frame):
        soup = sample_soup(triangle, triangle_frame,
                           MeasureConfig(n_max=42, tail_tol=1e-7, seed=3))
        back = parse_soup(dumps_soup(soup), triangle)
        assert [lp.vertices for lp in back.loops] == \
            [lp.vertices for lp in soup.loops]

    def test_parse_soup_rejects_bad_loop(self, triangle):
        with pytest.raises(ValueError):
            parse_soup("3 0 1\n", triangle)  # wrong vertex count
        with pytest.raises(ValueError):
            parse_soup("2 0 7\n", triangle)  # vertex off the graph

    def test_count_mean(self, triangle, triangle_frame):
        # number of loops per soup is Poisson(total mass); 1500 draws
        # put the sample mean well inside four standard errors
        mass = total_mass(triangle)
        sampler = LoopSoupSampler(triangle, triangle_frame, n_max=42)
        n = 1500
        counts = [len(sampler.sample(seed).loops) for seed in range(n)]
        se = math.sqrt(mass / n)
        assert abs(np.mean(counts) - mass) < 4 * se

    def test_class_frequency(self, triangle, triangle_frame):
        # frequency of the one-step winding class tracks its mass
        em = enumerate_measure(triangle, triangle_frame, 20)
        want = em.get(canonical_class((1,)))
        sampler = LoopSoupSampler(triangle, triangle_frame, n_max=42)
        n = 1500
        hit = 0
        for seed in range(n):
            for lp in sampler.sample(seed).loops:
                if canonical_class(loop_to_word(lp, triangle_frame)) == \
                        canonical_class((1,)):
                    hit += 1
        se = math.sqrt(want / n)
        assert abs(hit / n - want) < 4 * se

    def test_length_profile(self, triangle, triangle_frame):
        # loop length n has mass tr(P^n)/n; chi-square on 1500 soups
        from scipy import stats
        P = triangle.transition
        mass = {}
        M = np.eye(3)
        for n in range(1, 43):
            M = M @ P
            mass[n] = np.trace(M) / n
        sampler = LoopSoupSampler(triangle, triangle_frame, n_max=42)
        obs = {}
        draws = 1500
        for seed in range(draws):
            for lp in sampler.sample(seed).loops:
                obs[lp.length] = obs.get(lp.length, 0) + 1
        total = sum(mass.values())
        # bins with expected count >= 5, remainder pooled
        bins = [n for n in mass if draws * mass[n] >= 5]
        exp = [draws * mass[n] for n in bins]
        exp.append(draws * total - sum(exp))
        got = [obs.get(n, 0) for n in bins]
        got.append(sum(obs.values()) - sum(got))
        # condition on the realized loop count
        scale = sum(got) / sum(exp)
        _, p = stats.chisquare(got, [e * scale for e in exp])
        assert p > 0.001


class TestOccupation:
    def test_eulerian_and_counts(self, triangle, triangle_frame):
        soup = sample_soup(triangle, triangle_frame,
                           MeasureConfig(n_max=42, tail_tol=1e-7, seed=12))
        occ = occupation(soup)
        steps = sum(lp.length for lp in soup.loops)
        assert sum(n for (_, _, n, _) in occ.rows()) == steps
        # loops are closed, so every vertex has zero net current
        for u, v, n, cur in occ.rows():
            assert cur == occ.current(u, v)

    def test_net_current_vanishes(self, triangle, triangle_frame):
        sampler = LoopSoupSampler(triangle, triangle_frame, n_max=42)
        for seed in (0, 5, 9):
            occ = occupation(sampler.sample(seed))
            for x in range(3):
                net = 0
                for (u, v, n, _) in occ.rows():
                    if u == x:
                        net += n
                    if v == x:
                        net -= n
                assert net == 0
