"""Seeded property suite behind the ``selftest`` command."""

from __future__ import annotations

import math

import numpy as np

from . import bloch, tomography
from .belt import (
    BeltParameters,
    belt_full_content_falsifier,
    belt_map,
    covariant_state_map,
    sample_directions,
    to_spherical,
    verify_belt_born,
)
from .lemmas import (
    InconsistentInputError,
    conjugation_map,
    lemma1_verify,
    lemma2_verify,
    orthogonal_map,
    random_rotation,
)
from .operators import (
    ginibre,
    make_rng,
    min_eigenvalue,
    negative_eigenprojection,
    random_density,
    random_hermitian,
    random_unitary,
    subseed,
)
from .reports import RepresentationReport

CORNER_REGION = dict(p=(0.76, 1.0), phi=(math.pi / 3, math.pi / 2 - 0.01), steps=50)


def random_setup(rng) -> bloch.ThreeMeasurementSetup:
    while True:
        v = rng.standard_normal((3, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        try:
            return bloch.ThreeMeasurementSetup(*v)
        except bloch.DegenerateSetupError:
            continue


def check_region(report):
    res = bloch.scan_region(CORNER_REGION["phi"], CORNER_REGION["p"], CORNER_REGION["steps"])
    report.add("region_all_norms_exceed_one", res.min_norm > 1.0, res.min_norm)
    report.add("region_no_density_points", res.density_count == 0, res.density_count)
    s = bloch.solve_state_vector(bloch.tilted_setup(math.pi / 3), bloch.ConditionalProbTriple(0.76, 0.76, 0.76))
    norm = float(np.linalg.norm(s))
    report.add("region_corner_norm_1.0377", abs(norm - 1.0377) <= 1e-3, abs(norm - 1.0377))


def check_closed_form(report, seed, count=1000):
    rng = make_rng(seed, 2)
    worst = 0.0
    for _ in range(count):
        setup = random_setup(rng)
        probs = bloch.ConditionalProbTriple(*rng.uniform(0, 1, 3))
        s = bloch.solve_state_vector(setup, probs)
        ref = np.linalg.solve(np.vstack(setup.directions), probs.as_array() - 0.5)
        worst = max(worst, float(np.max(np.abs(s - ref))) / max(1.0, float(np.linalg.norm(ref))))
    report.add("closed_form_vs_linear_solve", worst <= 1e-12, worst)


def check_counting(report, seed, trials=100):
    for n in (2, 3, 4):
        hits = sum(
            tomography.frame_rank(tomography.random_frame(subseed(seed, n, t), n, n + 1, ensure_rank=False)) == n * n
            for t in range(trials)
        )
        report.add(f"counting_rank_n{n}", hits >= 0.99 * trials, 1.0 - hits / trials)


def check_round_trip(report, seed, count=100):
    for n in (2, 3, 4):
        frame = tomography.random_frame(subseed(seed, n), n, n + 1)
        worst = 0.0
        for t in range(count):
            W = random_density(subseed(seed, n, t), n)
            R = tomography.reconstruct_state(frame, tomography.born_table(W, frame))
            worst = max(worst, float(np.max(np.abs(R - W))))
        report.add(f"round_trip_n{n}", worst <= 1e-9, worst)


def check_witnesses(report, seed, count=20):
    for n in (2, 3):
        worst_eig = -math.inf
        ok = True
        for t in range(count):
            frame = tomography.random_frame(subseed(seed, n, t), n, n + 1)
            w = tomography.find_nonpsd_witness(frame, seed=subseed(seed, t))
            ok &= tomography.is_valid_witness(w.W, frame)
            worst_eig = max(worst_eig, w.min_eigenvalue)
        report.add(f"witness_n{n}", ok and worst_eig < -1e-8, worst_eig)
    phi = math.pi / 3
    setup = bloch.tilted_setup(phi)
    frame = tomography.MeasurementFrame.from_bloch_directions(setup.directions)
    s = bloch.solve_state_vector(setup, bloch.ConditionalProbTriple(0.9, 0.9, 0.9))
    W = bloch.state_operator(s)
    report.add("witness_case1_instance", tomography.is_valid_witness(W, frame), min_eigenvalue(W))


def _random_psd(seed, n):
    G = ginibre(make_rng(seed), n)
    # random rank so the boundary of the cone is exercised too
    r = int(make_rng(seed, 1).integers(1, n + 1))
    G[:, r:] = 0
    return G @ G.conj().T


def check_fejer(report, seed, count=500):
    worst = math.inf
    for n in (2, 3, 4):
        for t in range(count):
            A, B = _random_psd(subseed(seed, n, t, 0), n), _random_psd(subseed(seed, n, t, 1), n)
            worst = min(worst, float(np.trace(A @ B).real))
    report.add("fejer_psd_pairs_nonnegative", worst >= -1e-10, worst)
    found = 0
    worst_neg = -math.inf
    t = 0
    while found < count:
        n = 2 + t % 3
        A = random_hermitian(subseed(seed, 99, t), n)
        t += 1
        Q = negative_eigenprojection(A)
        if Q is None:
            continue
        found += 1
        worst_neg = max(worst_neg, float(np.trace(A @ Q).real))
    report.add("fejer_negative_witness", worst_neg < 0, worst_neg)


def check_belt(report, seed, samples=10_000):
    for r in (1.5, 2.0, 3.0):
        params = BeltParameters(r)
        err = verify_belt_born(params, samples, seed)
        report.add(f"belt_born_r{r:g}", err <= 1e-12, err)
        theta_b, _ = to_spherical(belt_map(params)(sample_directions(seed, samples)))
        excess = float(np.max(np.abs(np.cos(theta_b))) - 1.0 / r)
        report.add(f"belt_band_r{r:g}", excess <= 1e-12, excess)


def check_lemma1(report, seed, count=50):
    worst = 0.0
    ok = True
    for t in range(count):
        R = random_rotation(subseed(seed, t))
        rep = lemma1_verify(orthogonal_map(R), orthogonal_map(R), tol=1e-10, seed=subseed(seed, t))
        ok &= rep.passed
        worst = max(worst, max(c.residual for c in rep.checks))
    report.add("lemma1_rotations", ok, worst)
    for r in (1.5, 2.0, 3.0):
        params = BeltParameters(r)
        try:
            belt_pass = lemma1_verify(belt_map(params), covariant_state_map(params), tol=1e-10).passed
            resid = 0.0
        except InconsistentInputError as e:
            belt_pass, resid = False, e.residual
        report.add(f"lemma1_belt_rejected_r{r:g}", not belt_pass, resid)
        pair = belt_full_content_falsifier(params, seed)
        disc = 0.0 if pair is None else pair.discrepancy
        report.add(f"belt_falsifier_r{r:g}", disc > 1e-6, disc)


def check_lemma2(report, seed, count=20):
    for n in (2, 3):
        ok = True
        worst = 0.0
        rejected = True
        for t in range(count):
            U = random_unitary(subseed(seed, n, t), n)
            rep = lemma2_verify(conjugation_map(U), conjugation_map(U), n=n, tol=1e-9, seed=subseed(seed, t))
            ok &= rep.passed
            worst = max(worst, max(c.residual for c in rep.checks))
            V = random_unitary(subseed(seed, n, t, 1), n)
            try:
                lemma2_verify(conjugation_map(U), conjugation_map(V), n=n, tol=1e-9, num_pairs=1)
                rejected = False
            except InconsistentInputError:
                pass
        report.add(f"lemma2_unitaries_n{n}", ok, worst)
        report.add(f"lemma2_mismatch_rejected_n{n}", rejected, 0.0)


def run_selftest(seed: int = 0) -> RepresentationReport:
    report = RepresentationReport("selftest", verdict="", seed=seed)
    check_region(report)
    check_closed_form(report, seed)
    check_counting(report, seed)
    check_round_trip(report, seed)
    check_witnesses(report, seed)
    check_fejer(report, seed)
    check_belt(report, seed)
    check_lemma1(report, seed)
    check_lemma2(report, seed)
    report.verdict = "pass" if report.all_passed else "fail"
    return report
