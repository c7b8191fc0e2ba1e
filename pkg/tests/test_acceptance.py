"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints a single `criterion NN PASS/FAIL` line (run pytest with
-s or inspect captured output) and enforces the stated runtime budget.
"""

import math
import time

import numpy as np
import pytest

from lexmatch import bp, exact, genfn, rde
from lexmatch.cli import cli
from lexmatch.genfn import OffspringLaw
from lexmatch.randgraph import RngSeed, WeightLaw, assign_weights, ubgw_tree
from lexmatch.rde import GridSpec
from lexmatch.xharness import (
    ExperimentConfig,
    run_decay,
    run_eps_sweep,
    run_mandatory,
    run_separation,
    run_size,
)

GAMMA = 0.5671432904097838


def report(idx: int, ok: bool, detail: str) -> bool:
    print(f"criterion {idx:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


class Budget:
    def __init__(self, seconds: float):
        self.limit = seconds
        self.start = time.monotonic()

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.start

    def check(self) -> bool:
        return self.elapsed < self.limit


def test_criterion_01_oracle_equivalence():
    budget = Budget(60.0)
    law = OffspringLaw.poisson(2.0)
    base = RngSeed(101)
    checked = 0
    i = 0
    max_weight_gap = 0.0
    while checked < 1000:
        g = ubgw_tree(law, "vertex", 1 + i % 4, base.child(2 * i))
        g = assign_weights(g, WeightLaw.uniform(0, 1), base.child(2 * i + 1))
        i += 1
        if g.m == 0 or g.m > 26:
            continue
        swept = bp.extract_matching(g, bp.sweep_tree(g, 1))
        oracle = exact.brute_force_opt(g)
        assert swept.edges == oracle.edges, f"edge sets differ on instance {i}"
        max_weight_gap = max(max_weight_gap, abs(swept.weight - oracle.weight))
        checked += 1
    ok = checked == 1000 and max_weight_gap < 1e-9 and budget.check()
    assert report(
        1,
        ok,
        f"{checked} forests, max weight gap {max_weight_gap:.2e}, "
        f"{budget.elapsed:.1f}s (< 60s)",
    )


def test_criterion_02_karp_sipser_size():
    budget = Budget(120.0)
    recs = run_size(
        ExperimentConfig(experiment="size", law="poisson:1.0", n=20_000, replicas=20, seed=202)
    )
    rec = recs[0]
    ok = (
        abs(rec.estimate - 0.5441) < 0.01
        and "certified 20/20" in rec.notes
        and budget.check()
    )
    assert report(
        2,
        ok,
        f"matched fraction {rec.estimate:.4f} vs 0.5441 +/- 0.01 "
        f"({rec.notes}), {budget.elapsed:.1f}s (< 120s)",
    )


def test_criterion_03_subcriticality_coefficient():
    budget = Budget(60.0)
    r1 = genfn.rho_subcritical(OffspringLaw.poisson(1.0))
    r2 = genfn.rho_subcritical(OffspringLaw.poisson(2.0))
    re_ = genfn.rho_subcritical(OffspringLaw.poisson(math.e))
    ok = (
        abs(r1 - math.exp(-1.0)) < 1e-6
        and abs(r2 - 2.0 / math.e) < 1e-6
        and abs(re_ - 1.0) < 1e-3
        and budget.check()
    )
    assert report(
        3,
        ok,
        f"rho(1)={r1:.8f} (e^-1 +/- 1e-6), rho(2)={r2:.8f} (2/e +/- 1e-6), "
        f"rho(e)={re_:.5f} (1 +/- 1e-3), {budget.elapsed:.1f}s",
    )


def test_criterion_04_correlation_decay():
    budget = Budget(300.0)
    recs = run_decay(
        ExperimentConfig(
            experiment="decay", law="poisson:1.0", samples=10_000, h_min=2, h_max=12, seed=404
        )
    )
    rec = recs[0]
    fracs = [pt["uncertified_fraction"] for pt in rec.curve]
    monotone = all(a >= b for a, b in zip(fracs, fracs[1:]))
    ok = monotone and rec.estimate is not None and rec.estimate <= -0.9 and budget.check()
    assert report(
        4,
        ok,
        f"slope {rec.estimate:.3f} (<= -0.9), monotone={monotone}, "
        f"curve={['%.4f' % f for f in fracs]}, {budget.elapsed:.1f}s (< 300s)",
    )


def test_criterion_05_mandatory_blocking_densities():
    budget = Budget(300.0)
    recs = run_mandatory(
        ExperimentConfig(
            experiment="mandatory",
            law="poisson:1.0",
            depth=12,
            samples=10_000,
            seed=505,
            cross_forests=1000,
        )
    )
    mand = next(r for r in recs if r.name == "mandatory_edge_density")
    block = next(r for r in recs if r.name == "blocking_edge_density")
    cross = next(r for r in recs if "mismatches" in r.name)
    ok = (
        abs(mand.estimate - 0.3217) < 0.02
        and abs(block.estimate - 0.1874) < 0.02
        and cross.estimate == 0.0
        and cross.params["forests"] == 1000
        and budget.check()
    )
    assert report(
        5,
        ok,
        f"mandatory {mand.estimate:.4f} (0.3217 +/- 0.02), "
        f"blocking {block.estimate:.4f} (0.1874 +/- 0.02), "
        f"enumeration mismatches {int(cross.estimate)}/1000 forests, "
        f"{budget.elapsed:.1f}s (< 300s)",
    )


def test_criterion_06_rde_solver_identities():
    budget = Budget(120.0)
    law = OffspringLaw.poisson(1.0)
    system = rde.solve_system(law, WeightLaw.uniform(0, 1), 1, GridSpec(4096))
    l1 = system.plateau[0]
    cons = rde.conservation_check(system)["bords"]
    size = rde.size_from_system(system)
    cross = rde.size_from_functional(system)
    ok = (
        abs(l1 - GAMMA) < 1e-4
        and cons < 2e-3
        and abs(size - 0.544062) < 2e-3
        and abs(size - cross) < 2e-3
        and budget.check()
    )
    assert report(
        6,
        ok,
        f"l1-gamma={abs(l1 - GAMMA):.2e} (<1e-4), conservation={cons:.2e} (<2e-3), "
        f"size={size:.6f} vs 0.544062 and functional {cross:.6f} (+/- 2e-3), "
        f"{budget.elapsed:.1f}s (< 120s)",
    )


def test_criterion_07_rde_stationarity():
    budget = Budget(120.0)
    law = OffspringLaw.poisson(1.0)
    wlaw = WeightLaw.uniform(0, 1)
    system = rde.solve_system(law, wlaw, 1, GridSpec(4096))
    sampler = rde.zeta_prime(system)
    rng = np.random.default_rng(707)
    lv_in, _ = sampler.sample(rng, 100_000)
    lv_out, _ = rde.rde_step(sampler, law, wlaw, rng, 100_000)
    tv_step = 0.5 * sum(abs((lv_out == j).mean() - (lv_in == j).mean()) for j in (0, 1))
    pool = rde.population_dynamics(law, wlaw, 1, pool_size=30_000, iters=60, seed=RngSeed(708))
    tv_pool = 0.5 * float(np.abs(pool.level_probs - system.level_masses()).sum())
    ok = tv_step < 0.02 and tv_pool < 0.02 and budget.check()
    assert report(
        7,
        ok,
        f"one-step level TV {tv_step:.4f} (<0.02), grid-vs-pool TV {tv_pool:.4f} (<0.02), "
        f"{budget.elapsed:.1f}s",
    )


def test_criterion_08_eps_renormalisation():
    budget = Budget(120.0)
    recs = run_eps_sweep(
        ExperimentConfig(experiment="eps-sweep", trees=500, eps_min_exp=1, eps_max_exp=12, seed=808)
    )
    rec = recs[0]
    final = rec.curve[-1]["disagreement_fraction"]
    ok = bool(rec.passed) and final == 0.0 and budget.check()
    assert report(
        8,
        ok,
        f"final disagreement {final} at eps=2^-12, {rec.notes}, "
        f"{budget.elapsed:.1f}s",
    )


def test_criterion_09_separation():
    budget = Budget(120.0)
    recs = run_separation(
        ExperimentConfig(
            experiment="separation",
            p=1,
            samples=6000,
            weights="uniform:0:1",
            weights_b="exp:1.0",
            seed=909,
        )
    )
    weighted = next(r for r in recs if r.name == "weighted_root_match_prob")
    uniform = next(r for r in recs if r.name == "uniform_root_match_prob")
    gap = next(r for r in recs if "invariance" in r.name)
    ok = (
        abs(weighted.estimate - 0.75) < 0.02
        and abs(uniform.estimate - 0.6667) < 0.02
        and gap.estimate < 0.02
        and budget.check()
    )
    assert report(
        9,
        ok,
        f"weighted {weighted.estimate:.4f} (0.75 +/- 0.02), "
        f"uniform {uniform.estimate:.4f} (0.6667 +/- 0.02), "
        f"weight-law gap {gap.estimate:.4f} (< 0.02), {budget.elapsed:.1f}s",
    )


def test_criterion_10_structural_suite():
    budget = Budget(120.0)
    code = cli(["check", "--seed", "1010"])
    ok = code == 0 and budget.check()
    assert report(10, ok, f"check subcommand exit code {code}, {budget.elapsed:.1f}s")
