"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS line with the measured numbers (visible with
pytest -s; the test name itself is the pass/fail line under -v).

Desk-scale resolution table (this box: 1 core, 5 GB):
  * contrast runs near k ~ 9.2 and 10.0 use a single mesh with h = 0.012
    (paper rule would give ~0.0066-0.0075);
  * contrast runs near k ~ 22.5 and 22.7 use two meshes, h = 0.008 and
    0.00566, with one Richardson step in h^2 on matched eigenvalue pairs
    (paper rule ~0.0020 would need ~7M triangles, beyond this machine);
  * the sweep criterion runs at h = 0.02, R = 1.5.
The discretization floor of near-zero eigenvalues was measured to follow
|mu_floor| ~ k^4 h^2 / 19.7, which sets these choices; the Richardson pair
cancels the floor to ~2e-4 at k=22.5.
"""

import math

import numpy as np
import pytest

from helmlab import bem_dtn as bd
from helmlab import ellipse_modes as em
from helmlab import eigsolve as es
from helmlab import geometry as geo
from helmlab import specfun as sf
from helmlab import spectral_lab as lab

GOLD = {
    (0, 3, "odd"): 9.17017539835808,
    (1, 0, "even"): 9.977120156613617,
    (3, 0, "even"): 22.526496854613104,
    (2, 4, "odd"): 22.6811692253925,
}

H_MID = 0.012          # contrast meshes near k ~ 9-10
H_HIGH = (0.008, 0.00566)   # Richardson pair near k ~ 22.5-22.7
H_SWEEP = 0.02
DETUNE = 0.3
CONTRAST = 0.1         # "shows a near-zero eigenvalue": >=10x contrast
# "does not show": the 10x contrast must clearly fail AND the nearest
# eigenvalue must sit at an O(1) distance from the origin. The absolute
# floor matters because a detuned reference can land in a sparse spectral
# region (|mu_min| ~ 15 at k ~ 22.98), deflating the raw ratio.
NO_CONTRAST_RATIO = 0.15
NO_CONTRAST_ABS = 0.3

# records every eigenvalue computed by the acceptance runs; the sign
# criterion is evaluated over this pool
IM_MU_SAMPLES: list[tuple[float, complex]] = []


def _collect(k, records):
    IM_MU_SAMPLES.extend((k, r.mu) for r in records)


def _min_mu(domain, k, cache, nev=4):
    recs = lab.spectrum_near_zero(domain, k, nev=nev, dtn_backend="fourier",
                                  fem_cache=cache)
    _collect(k, recs)
    return min(abs(r.mu) for r in recs), recs


def _richardson_min_mu(domain, k, caches):
    """|mu_min| after one h^2 Richardson step on matched pairs."""
    mus = []
    for cache in caches:
        recs = lab.spectrum_near_zero(domain, k, nev=4, dtn_backend="fourier",
                                      fem_cache=cache)
        _collect(k, recs)
        mus.append(sorted((r.mu for r in recs), key=abs)[:3])
    r2 = (caches[0].h / caches[1].h) ** 2
    extrapolated = []
    for mu_fine in mus[1]:
        mu_coarse = min(mus[0], key=lambda z: abs(z - mu_fine))
        extrapolated.append((r2 * mu_fine - mu_coarse) / (r2 - 1.0))
    return min(abs(z) for z in extrapolated)


@pytest.mark.acceptance
class TestCriterion1GoldFrequencies:
    def test_mathieu_route(self):
        for (m, n, parity), k_ref in GOLD.items():
            mode = em.ellipse_mode_frequency(m, n, parity)
            rel = abs(mode.k - k_ref) / k_ref
            assert rel <= 1e-9, (m, n, parity, mode.k)
        print("\nCRITERION gold-frequencies (Mathieu, <=1e-9): PASS")

    @pytest.mark.slow
    def test_fem_oracle_route(self):
        for (m, n, parity), k_ref in GOLD.items():
            k_fem = em.fem_ellipse_oracle(m, n, parity, h=0.01,
                                          k_cap=math.ceil(k_ref) + 2.0)
            rel = abs(k_fem - k_ref) / k_ref
            assert rel <= 5e-3, (m, n, parity, k_fem)
        print("CRITERION gold-frequencies (FEM oracle, <=5e-3): PASS")


@pytest.mark.acceptance
class TestCriterion2DtnOracle:
    def test_hankel_trace(self):
        k, R, N = 5.0, 2.0, 512
        theta = 2 * np.pi * np.arange(N) / N
        nodes = R * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        ops = bd.assemble_bem(nodes, k)
        h0, h0p = sf.hankel1(0, k * R)
        nu = bd.dtn_apply(ops, np.full(N, h0, dtype=complex), backend="bem")
        rel = float(np.max(np.abs(nu - k * h0p)) / abs(k * h0p))
        assert rel <= 1e-5
        print(f"\nCRITERION dtn-oracle (H0 trace rel {rel:.2e} <= 1e-5): PASS")

    def test_backend_agreement(self):
        k, R, N = 5.0, 2.0, 512
        theta = 2 * np.pi * np.arange(N) / N
        nodes = R * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        ops = bd.assemble_bem(nodes, k)
        worst = 0.0
        for n in range(0, 11):
            g = np.exp(1j * n * theta)
            nu = bd.dtn_apply(ops, g, backend="bem")
            dn = bd.fourier_dtn_symbol(n, k, R)
            worst = max(worst, float(np.max(np.abs(nu - dn * g)) / abs(dn)))
        assert worst <= 1e-5
        print(f"CRITERION dtn-oracle (backend agreement {worst:.2e} <= 1e-5): PASS")


@pytest.mark.acceptance
@pytest.mark.slow
class TestCriterion3NearZeroContrast:
    @pytest.fixture(scope="class")
    def mid_caches(self):
        return {kind: lab.FemCache(lab.lab_domain(kind, 2.0), H_MID)
                for kind in ("small", "large")}

    def test_mid_frequencies(self, mid_caches):
        k_o03 = GOLD[(0, 3, "odd")]
        k_e10 = GOLD[(1, 0, "even")]
        lines = []
        for kind, k_mode, expect_zero in [
                ("large", k_o03, True), ("large", k_e10, True),
                ("small", k_o03, False), ("small", k_e10, True)]:
            dom = lab.lab_domain(kind, 2.0)
            cache = mid_caches[kind]
            tuned, _ = _min_mu(dom, k_mode, cache)
            detuned, _ = _min_mu(dom, k_mode + DETUNE, cache)
            ratio = tuned / detuned
            lines.append(f"  {kind} k={k_mode:.3f}: ratio={ratio:.4f}")
            if expect_zero:
                assert ratio < CONTRAST, (kind, k_mode, ratio)
            else:
                assert ratio > NO_CONTRAST_RATIO, (kind, k_mode, ratio)
                assert tuned > NO_CONTRAST_ABS, (kind, k_mode, tuned)
        print("\nCRITERION near-zero contrast (k~9.2, 10.0): PASS")
        print("\n".join(lines))

    def test_high_frequencies(self):
        k_e30 = GOLD[(3, 0, "even")]
        k_o24 = GOLD[(2, 4, "odd")]
        lines = []
        for kind in ("large", "small"):
            dom = lab.lab_domain(kind, 2.0)
            caches = [lab.FemCache(dom, h) for h in H_HIGH]
            for k_mode, expect_zero in [(k_e30, True),
                                        (k_o24, kind == "large")]:
                tuned = _richardson_min_mu(dom, k_mode, caches)
                detuned = _richardson_min_mu(dom, k_mode + DETUNE, caches)
                ratio = tuned / detuned
                lines.append(f"  {kind} k={k_mode:.3f}: ratio={ratio:.5f}")
                if expect_zero:
                    assert ratio < CONTRAST, (kind, k_mode, ratio)
                else:
                    assert ratio > NO_CONTRAST_RATIO, (kind, k_mode, ratio)
                    assert tuned > NO_CONTRAST_ABS, (kind, k_mode, tuned)
            del caches
        print("\nCRITERION near-zero contrast (k~22.5, 22.7): PASS")
        print("\n".join(lines))


@pytest.mark.acceptance
@pytest.mark.slow
class TestCriterion4SweepBoxCount:
    def test_large_exceeds_small(self):
        counts = {}
        for kind in ("large", "small"):
            dom = lab.lab_domain(kind, 1.5)
            traj = lab.sweep(dom, 8.5, 10.5, 0.025, nev=8,
                             dtn_backend="fourier", h=H_SWEEP)
            for tr in traj.tracks:
                IM_MU_SAMPLES.extend(zip(tr.ks, tr.mus))
            box = lab.BoxSpec(0.2, 0.05, 8.5, float(traj.k_grid[-1]))
            counts[kind], _ = lab.box_count(traj, box)
        assert counts["large"] > counts["small"], counts
        print(f"\nCRITERION sweep box count: PASS "
              f"(large={counts['large']} > small={counts['small']})")


@pytest.mark.acceptance
class TestCriterion6QuasimodeTrend:
    def test_exponential_decay(self):
        cavity = geo.build_cavity("large").spec
        eps, ks = [], []
        for m in (1, 2, 3):
            mode = em.ellipse_mode_frequency(m, 0, "even")
            rep = lab.quasimode_quality(mode, cavity)
            eps.append(rep.quality_renormalized)
            ks.append(mode.k)
        assert eps[0] > eps[1] > eps[2]
        logs = np.log(eps)
        slope, intercept = np.polyfit(ks, logs, 1)
        fit = slope * np.array(ks) + intercept
        ss_res = float(np.sum((logs - fit) ** 2))
        ss_tot = float(np.sum((logs - np.mean(logs)) ** 2))
        r2 = 1.0 - ss_res / ss_tot
        assert r2 > 0.9
        print(f"\nCRITERION quasimode trend: PASS "
              f"(eps={[f'{e:.3e}' for e in eps]}, r2={r2:.4f}, "
              f"rate={-slope:.3f}/k)")


@pytest.mark.acceptance
class TestCriterion7PencilOracle:
    def test_hundred_random_trials(self):
        rng = np.random.default_rng(0x5EED)
        import scipy.sparse as sp
        worst = 0.0
        for trial in range(100):
            n = 30
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            m = rng.normal(size=(n, n))
            m = m @ m.T + n * np.eye(n)
            sys = es.CoupledSystem(A=sp.csr_matrix(a.astype(complex)),
                                   C12=np.zeros((n, 0)),
                                   C21=np.zeros((0, n)), C22=np.zeros((0, 0)),
                                   M=sp.csr_matrix(m), k=1.0)
            recs = es.shift_invert_arnoldi(sys, nev=5, tol=1e-12)
            mus = np.sort_complex(np.array([r.mu for r in recs]))
            oracle = np.sort_complex(es.dense_pencil_eigs((a, m), count=5))
            worst = max(worst, float(np.max(np.abs(mus - oracle))))
        assert worst <= 1e-8
        print(f"\nCRITERION pencil oracle: PASS (worst dev {worst:.2e} over "
              f"100 trials)")


@pytest.mark.acceptance
@pytest.mark.slow
class TestCriterion8Theorem1:
    def test_single_frequency_bound(self):
        mode = em.ellipse_mode_frequency(1, 0, "even")
        dom = lab.lab_domain("large", 2.0)
        out = lab.theorem1_check(dom, mode, alpha=4.6, h=H_MID)
        assert out["applicable"]
        assert "mu_min" in out and "bound" in out and "budget" in out
        assert out["passed"], out
        print(f"\nCRITERION theorem-1 check: PASS "
              f"(|mu_min|={out['mu_min']:.4g} <= k^4.6*eps={out['bound']:.4g} "
              f"+ budget {out['budget']:.3g})")

    def test_alpha_precondition(self):
        dom = lab.lab_domain("large", 2.0)
        with pytest.raises(lab.LabError):
            lab.theorem1_check(dom, None, alpha=4.4)


# Runs last in file order: checks every eigenvalue the criteria produced.
@pytest.mark.acceptance
@pytest.mark.slow
class TestCriterion5SignInvariantZ:
    def test_all_computed_eigenvalues(self):
        if not IM_MU_SAMPLES:
            dom = lab.lab_domain("small", 2.0)
            cache = lab.FemCache(dom, 0.05)
            _min_mu(dom, 4.0, cache)
        worst = max(mu.imag for _, mu in IM_MU_SAMPLES)
        assert worst <= 1e-6
        print(f"\nCRITERION sign invariant: PASS (max Im mu = {worst:.3e} "
              f"over {len(IM_MU_SAMPLES)} eigenvalues)")
