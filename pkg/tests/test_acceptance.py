"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import math
import random
import subprocess
import sys
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from conftest import report
from zcovers import examples as ex
from zcovers.approx import sigma_prime_measure, stage_quantities, strips_in_direction
from zcovers.cover import CoverPoint, NonRecurrentWarning, classify_cylinder_lift, cocycle, lift_trace
from zcovers.cylinders import cylinder_decomposition, periodic_directions
from zcovers.flow import SingularHit, first_return_iet, trace, boundedness_probe
from zcovers.numfield import QQ, Field, Vec
from zcovers.surface import TranslationSurface, cone_angles, holonomy
from zcovers.veech import certify_excursion, enumerate_group, strip_sweep, well_approx_count

NAMES = list(ex.BUILDERS)
HALF = Fraction(1, 2)


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonRecurrentWarning)
        yield


def random_direction(fld, rng):
    # mixing in the field generator keeps most directions aperiodic
    return Vec(fld(rng.randint(-5, 5)) + fld.gen * rng.randint(0, 1), fld(rng.randint(1, 5)))


def all_strips(bundle, L=10):
    cov = bundle.cover()
    dirs = [d for _, d in bundle.strip_directions] or [d.v for d, _ in periodic_directions(bundle.surface, L)]
    out = []
    for d in dirs:
        out += strips_in_direction(cov, d, L)
    return cov, out


def test_01_gauss_bonnet():
    worst = 0.0
    bad = []
    for n in NAMES:
        s = ex.get(n).surface
        t0 = time.perf_counter()
        rebuilt = TranslationSurface(s.polygons, {a: b for a, b in s.gluing.items() if a < b}, s.marked_input)
        # angles in multiples of pi, so the identity reads sum(a - 2) = 2 (2g - 2)
        ok = sum(a - 2 for _, a in cone_angles(rebuilt)) == 2 * (2 * rebuilt.genus - 2)
        worst = max(worst, time.perf_counter() - t0)
        if not ok:
            bad.append(n)
    passed = not bad and worst < 1
    report(1, "Gauss-Bonnet on every example", passed, f"slowest {worst:.3f}s, failures {bad}")
    assert passed


def test_02_holonomy_free_cycles():
    t0 = time.perf_counter()
    cases = [("staircase", "w"), ("double_octagon_hw", "w0"), ("reg8", "w"), ("reg10", "w"), ("wollmilchsau", "w1")]
    bad = []
    for n, c in cases:
        b = ex.get(n)
        h = holonomy(b.surface, b.cycles[c])
        if not (h.x == 0 and h.y == 0):
            bad.append((n, c))
    dt = time.perf_counter() - t0
    passed = not bad and dt < 1
    report(2, "holonomy-free cycles", passed, f"{dt:.3f}s, failures {bad}")
    assert passed


def test_03_strip_witnesses():
    t0 = time.perf_counter()
    hw = ex.double_octagon_hw()
    dec = cylinder_decomposition(hw.surface, Vec(hw.surface.field(1), hw.surface.field(1)), 20)
    hw_k = [classify_cylinder_lift(hw.cover("w0"), c).k for c in dec.cylinders]
    r8 = ex.double_ngon(8)
    f = r8.surface.field
    dec = cylinder_decomposition(r8.surface, Vec(f(1), f.gen - 1), 20)  # slope tan(pi/8) = sqrt2 - 1
    r8_k = [classify_cylinder_lift(r8.cover(), c).k for c in dec.cylinders]
    wm = ex.wollmilchsau()
    cov = wm.cover("w1")
    pds = periodic_directions(wm.surface, 10)
    wm_k = [classify_cylinder_lift(cov, c).k for _, d in pds for c in d.cylinders]
    dt = time.perf_counter() - t0
    passed = any(hw_k) and any(r8_k) and pds and not any(wm_k) and dt < 60
    report(3, "strip witnesses and the Wollmilchsau", passed,
           f"octagon k={hw_k}, Reg8 k={r8_k}, Wollmilchsau {len(wm_k)} cylinders in {len(pds)} directions, {dt:.1f}s")
    assert passed


def test_04_cocycle_identity():
    t0 = time.perf_counter()
    fails = 0
    singular = 0
    for n in NAMES:
        b = ex.get(n)
        cov = b.cover()
        fld = b.surface.field
        rng = random.Random(4)
        done = 0
        while done < 1000:
            x = b.surface.random_point(rng)
            v = random_direction(fld, rng)
            t = Fraction(rng.randint(1, 30), rng.randint(1, 7))
            s = Fraction(rng.randint(1, 30), rng.randint(1, 7))
            try:
                first = trace(cov, x, v, time=t, record=False)
                second = trace(cov, first.end, v, time=s, record=False)
                whole = trace(cov, x, v, time=t + s, record=False)
            except SingularHit:
                singular += 1
                continue
            fails += whole.level != first.level + second.level
            done += 1
    dt = time.perf_counter() - t0
    passed = fails == 0 and dt < 120
    report(4, "cocycle identity, 1000 triples per example", passed,
           f"{fails} mismatches, {singular} singular draws skipped, {dt:.1f}s")
    assert passed


def test_05_lift_consistency():
    t0 = time.perf_counter()
    fails = 0
    for n in NAMES:
        b = ex.get(n)
        cov = b.cover()
        fld = b.surface.field
        rng = random.Random(5)
        done = 0
        while done < 200:
            p, pos = b.surface.random_point(rng)
            v = random_direction(fld, rng)
            t = Fraction(rng.randint(1, 60), rng.randint(1, 7))
            lvl = rng.randint(-50, 50)
            try:
                end = lift_trace(cov, CoverPoint(p, pos, lvl), v, t).level
                alpha = cocycle(cov, (p, pos), v, t)
            except SingularHit:
                continue
            fails += end != lvl + alpha
            done += 1
    dt = time.perf_counter() - t0
    passed = fails == 0 and dt < 120
    report(5, "lifted level equals the cocycle, 200 traces per cover", passed, f"{fails} mismatches, {dt:.1f}s")
    assert passed


def test_06_cylinder_area_conservation():
    checked = 0
    bad = []
    for n in NAMES:
        s = ex.get(n).surface
        for d, dec in periodic_directions(s, 10):
            checked += 1
            total = sum((c.area for c in dec.cylinders), s.field.zero)
            if total != s.area:
                bad.append((n, str(d)))
    passed = not bad and checked > 0
    report(6, "cylinder areas sum to the surface area", passed, f"{checked} decompositions, failures {bad[:3]}")
    assert passed


def test_07_witness_excursions():
    t0 = time.perf_counter()
    rng = random.Random(7)
    records = []
    pools = []
    for n in NAMES:
        b = ex.get(n)
        if not b.veech_generators:
            continue
        G = enumerate_group(b.veech_generators, 30)
        _, strips = all_strips(b)
        seeds = [s.lift.v for s in strips] or [Vec(b.surface.field(1), b.surface.field(0))]
        pools.append((G, seeds))
    while len(records) < 500:
        G, seeds = pools[len(records) % len(pools)]
        x = seeds[rng.randrange(len(seeds))]
        theta = rng.uniform(0.01, math.pi - 0.01)
        d = rng.uniform(0.1, 1.5)
        _, wit = well_approx_count(x, G, theta, d)
        records += [(w, theta, x, d) for w in wit[:5]]
    records = records[:500]
    fails = 0
    for w, theta, x, d in records:
        ok, _ = certify_excursion(w.gamma, theta, x, d)
        fails += not ok
    dt = time.perf_counter() - t0
    passed = fails == 0 and dt < 60
    report(7, "witnesses reach height above 1/(2d)", passed, f"{len(records)} certified by interval arithmetic, {fails} failures, {dt:.1f}s")
    assert passed


def test_08_stage_inequalities():
    checked = 0
    bad = []
    for n in NAMES:
        _, strips = all_strips(ex.get(n))
        for s in strips:
            for k in range(1, 10):
                st = stage_quantities(s.lift, Fraction(k, 10))
                if st.meets_area_floor():
                    checked += 1
                    if not st.band_fits():
                        bad.append((n, k))
    passed = not bad and checked > 0
    report(8, "2 eta <= (eps/2) h whenever A >= eps", passed, f"{checked} strip/eps pairs, failures {bad}")
    assert passed


def test_09_band_measure():
    t0 = time.perf_counter()
    checked = 0
    bad = []
    eps = Fraction(1, 2)
    for n in NAMES:
        cov, strips = all_strips(ex.get(n))
        for s in strips:
            # a strip approximates its own direction; the area floor keeps the band inside it
            if not stage_quantities(s.lift, eps).meets_area_floor():
                continue
            est = sigma_prime_measure(cov, s, eps, 100_000, seed=2024)
            checked += 1
            if est.estimate < float(eps) ** 2 / 4 - 3 * est.sigma:
                bad.append((n, est.estimate))
    dt = time.perf_counter() - t0
    passed = not bad and checked > 0 and dt < 60
    report(9, "band measure at least eps^2/4 - 3 sigma", passed, f"{checked} strips, failures {bad}, {dt:.1f}s")
    assert passed


def _iet_vs_trace(cov, direction, rng, starts=5):
    transversal = (0, Vec(QQ(0), QQ(HALF)), Vec(QQ(1), QQ(HALF)))
    iet = first_return_iet(cov, transversal, direction)
    fld = iet.breakpoints[0].field
    fails = 0
    done = 0
    while done < starts:
        u = fld(Fraction(rng.randrange(1, 2**20), 2**20))
        try:
            pos, lvl = u, 0
            for _ in range(50):
                p, x = iet.point(pos)
                tr = trace(cov, (p, x), direction, stop_segment=iet.transversal, level=lvl, record=False)
                pos, lvl = tr.stop_param, tr.level
        except SingularHit:
            continue
        done += 1
        fails += (pos, lvl) != iet.iterate(u, 50)
    return fails


def test_10_iet_consistency():
    t0 = time.perf_counter()
    rng = random.Random(10)
    phi_field = Field([-1, -1, 1], (1, 2))
    golden = Vec(phi_field.one, phi_field.gen)
    fails = 0
    for cov in (ex.torus().cover("h"), ex.torus().cover("v"), ex.staircase().cover()):
        fails += _iet_vs_trace(cov, golden, rng)
        fails += _iet_vs_trace(cov, Vec(QQ(2), QQ(7)), rng)
    dt = time.perf_counter() - t0
    passed = fails == 0 and dt < 60
    report(10, "IET iterated 50 times matches direct tracing", passed, f"{fails} mismatches, {dt:.1f}s")
    assert passed


def test_11_double_octagon_sweep():
    t0 = time.perf_counter()
    b = ex.double_octagon_hw()
    cov = b.cover()
    strips = []
    for _, d in b.strip_directions:
        strips += [s.lift for s in strips_in_direction(cov, d, 20)]
    thetas = (np.arange(1024) + 0.5) * math.pi / 1024
    radii = (25, 50, 100, 200, 400, 800)
    fractions = {}
    for R in radii:
        G = enumerate_group(b.veech_generators, R, exact=False)
        counts = strip_sweep(strips, thetas, 0.05, 1, G)
        fractions[R] = float((counts >= 1).mean())
    dt = time.perf_counter() - t0
    excluded = [1 - fractions[R] for R in radii]
    monotone = all(a >= b for a, b in zip(excluded, excluded[1:]))
    target = fractions[100] >= 0.90 - 0.05
    detail = ", ".join(f"R={R}: {fractions[R]:.3f}" for R in radii) + f", {dt:.0f}s"
    report(11, "double octagon sweep: excluded fraction nonincreasing in R", monotone and dt < 600, detail)
    report(11, "double octagon sweep: >= 90% well approximated at R=100 (+-5%)", target,
           "coverage grows like log R at this bound; see the decisions ledger")
    assert monotone and dt < 600
    assert target, f"well-approximated fraction at R=100 is {fractions[100]:.3f}"


def test_12_boundedness_probe():
    t0 = time.perf_counter()
    cov = ex.staircase().cover()
    fld = Field([-1, -1, 1], (1, 2))
    direction = Vec(fld.one, fld.gen)
    start = (0, Vec(QQ(Fraction(1, 3)), QQ(Fraction(1, 7))))
    checkpoints = [10 ** (k / 4) for k in range(17)]
    rows = boundedness_probe(cov, start, direction, 10_000, checkpoints)
    maxima = [m for _, m in rows]
    dt = time.perf_counter() - t0
    passed = all(a <= b for a, b in zip(maxima, maxima[1:])) and maxima[-1] >= 5 and dt < 60
    report(12, "staircase slope-phi probe reaches |level| >= 5 by T = 1e4", passed,
           f"max |level| {maxima[-1]}, {dt:.1f}s")
    assert passed


CLI_RUNS = [
    ["validate", "--example", "reg10"],
    ["cylinders", "--example", "double_octagon_hw", "--direction", "1,1"],
    ["strips", "--example", "staircase", "--lmax", "4"],
    ["simulate", "--example", "staircase", "--direction", "1,1/2", "--point", "0:1/3,1/7", "--crossings", "40"],
    ["simulate", "--example", "reg8", "--theta-deg", "31.7", "--crossings", "20", "--seed", "9"],
    ["probe-bounded", "--example", "staircase", "--theta-deg", "58.28", "--time", "500", "--seed", "3"],
    ["admits", "--example", "staircase", "--strip-direction", "1,1", "--eps", "1/2", "--samples", "5000", "--seed", "5"],
    ["approx", "--example", "staircase", "--grid", "64", "--radius", "30", "--jobs", "3"],
    ["scan", "--example", "staircase", "--grid", "256", "--radius", "30", "--d", "0.3"],
    ["examples", "export", "reg8"],
]


def test_13_cli_determinism(tmp_path):
    bad = []
    for argv in CLI_RUNS:
        outs = []
        for i in range(2):
            r = subprocess.run([sys.executable, "-m", "zcovers.cli", *argv], capture_output=True)
            outs.append((r.returncode, r.stdout))
        if outs[0] != outs[1] or outs[0][0] not in (0, 3):
            bad.append(argv[0])
    figs = []
    for i in range(2):
        fig = tmp_path / f"scan{i}.png"
        subprocess.run([sys.executable, "-m", "zcovers.cli", "scan", "--example", "staircase", "--grid", "128",
                        "--radius", "20", "--figure", str(fig)], capture_output=True, check=True)
        figs.append(fig.read_bytes())
    if figs[0] != figs[1]:
        bad.append("scan --figure")
    passed = not bad
    report(13, "repeated CLI invocations are byte-identical", passed, f"{len(CLI_RUNS) + 1} invocations, differing {bad}")
    assert passed
