"""有理写像の表現・検証・閉形式計算のテスト.

テスト方針:
  1. 基底状態ソリトンと R(x) = x の立体射影写像を既知の閉形式と比べる
  2. 制約違反（非冪零・高階数・共通因子）が検出されることを確認する
  3. 対称性（回転・並進・反転・スケーリング）の整合性
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hwm.errors import ConstraintViolationError, RankError, StereographicError
from hwm.rational_maps import (
    PAULI,
    GrassmannTarget,
    PoleExpansion,
    RationalMap,
    ResiduePair,
    SphereMap,
    apply_halfD,
    difference,
    energy,
    evaluate,
    evaluate_derivative,
    from_stereographic,
    hwm_rhs,
    kronecker_rank,
    max_distance,
    pauli_decode,
    pauli_encode,
    rank1_factor,
    reflect,
    rescale,
    resultant,
    rotate,
    seminorm_squared,
    sobolev_seminorm,
    translate,
    validate,
    validation_grid,
)
from hwm.sampling import random_grassmann_map, random_sphere_map
from hwm.solitons import single_soliton


# ============================================================
# ヘルパー
# ============================================================
def _half_harmonic(x):
    """v = 0 の孤立波 u = (2x/(x²+1), 0, (x²-1)/(x²+1))."""
    x = np.asarray(x, dtype=float)
    return np.stack([2 * x / (x**2 + 1), np.zeros_like(x), (x**2 - 1) / (x**2 + 1)], axis=-1)


def _corrupted_soliton() -> RationalMap:
    """留数を非冪零 diag(1, 0) に差し替えたもの."""
    profile = single_soliton(0.5).profile
    bad = ResiduePair(z=-1j, e=np.array([1.0, 0.0]), xi=np.array([1.0, 0.0]))
    return RationalMap(profile.target, (bad,))


GRID = np.linspace(-5.0, 5.0, 41)


# ============================================================
# 1. GrassmannTarget
# ============================================================
class TestGrassmannTarget:
    def test_standard_is_valid(self):
        target = GrassmannTarget.standard(4, 1)
        assert all(value == 0.0 for value in target.residuals().values())
        assert np.trace(target.U_inf).real == pytest.approx(2.0)

    def test_from_matrix_reads_k(self):
        target = GrassmannTarget.from_matrix(-PAULI[2])
        assert (target.d, target.k) == (2, 1)
        assert GrassmannTarget.from_matrix(np.eye(3)).k == 0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            GrassmannTarget(d=3, k=1, U_inf=np.eye(2))


# ============================================================
# 2. 評価と検証
# ============================================================
class TestEvaluate:
    def test_constant_map(self):
        target = GrassmannTarget.standard(3, 1)
        constant = RationalMap.constant(target)
        values = evaluate(constant, GRID)
        assert values.shape == (GRID.size, 3, 3)
        assert np.allclose(values, target.U_inf)
        assert kronecker_rank(constant) == 0
        assert validate(constant).passed

    def test_half_harmonic_components(self):
        sphere = SphereMap(single_soliton(0.0).profile)
        assert np.allclose(sphere.u(GRID), _half_harmonic(GRID), atol=1e-12)

    def test_scalar_argument(self):
        profile = single_soliton(0.0).profile
        assert evaluate(profile, 0.0).shape == (2, 2)
        assert np.allclose(evaluate(profile, 0.0), -PAULI[2])

    def test_derivative_matches_finite_difference(self):
        profile = single_soliton(0.5, y=1.0).profile
        h = 1e-5
        numeric = (evaluate(profile, GRID + h) - evaluate(profile, GRID - h)) / (2 * h)
        assert np.allclose(evaluate_derivative(profile, GRID), numeric, atol=1e-8)

    def test_grid_clusters_near_poles(self):
        profile = single_soliton(0.0, y=3.0, delta=0.5).profile
        grid = validation_grid(profile)
        assert np.any(np.isclose(grid, 3.0))
        assert np.any(np.isclose(grid, 3.25))
        assert grid.max() >= 40.0


class TestValidate:
    @pytest.mark.parametrize("v", [0.0, 0.5, -0.5, 0.9])
    def test_soliton_passes(self, v):
        report = validate(single_soliton(v).profile)
        assert report.passed, report.violations
        assert report.involution_residual < 1e-10

    def test_non_nilpotent_residue_fails(self):
        report = validate(_corrupted_soliton())
        assert not report.passed
        assert report.nilpotency_residual == pytest.approx(1.0)
        assert any("nilpotency" in v for v in report.violations)

    def test_random_maps_pass(self, rng):
        for N in (1, 2, 3):
            assert validate(random_sphere_map(rng, N).map, tol=1e-6).passed
        assert validate(random_grassmann_map(rng, 4, 2, 2), tol=1e-6).passed

    @pytest.mark.parametrize("seed", range(6))
    def test_algebraic_and_pointwise_agree(self, seed):
        rng = np.random.default_rng(seed)
        map = random_sphere_map(rng, 1 + seed % 3).map if seed % 2 == 0 else random_grassmann_map(rng, 3, 1, 2)
        report = validate(map, tol=1e-6)
        assert report.passed, report.violations
        assert max(report.nilpotency_residual, report.anticommutator_residual) < 1e-6
        assert max(report.involution_residual, report.hermitian_residual) < 1e-6

        first, *rest = map.residues
        # ξ の伸長は ⟨ξ, e⟩ = 0 を保つが反交換関係を壊す
        stretched = ResiduePair(z=first.z, e=first.e, xi=1.1 * first.xi)
        report = validate(RationalMap(map.target, (stretched, *rest)), tol=1e-6)
        assert not report.passed
        assert report.anticommutator_residual > 1e-6
        assert report.involution_residual > 1e-6

        # e を ξ 方向へ傾けると冪零性が壊れる
        tilted = ResiduePair(z=first.z, e=first.e + 0.1 * first.xi / np.linalg.norm(first.xi), xi=first.xi)
        report = validate(RationalMap(map.target, (tilted, *rest)), tol=1e-6)
        assert not report.passed
        assert report.nilpotency_residual > 1e-6
        assert report.involution_residual > 1e-6

    def test_pole_in_upper_half_plane_rejected(self):
        with pytest.raises(ConstraintViolationError):
            ResiduePair(z=1j, e=np.array([1.0, 0.0]), xi=np.array([0.0, 1.0]))


# ============================================================
# 3. 階数1分解
# ============================================================
class TestRank1Factor:
    def test_canonical_gauge(self):
        A = np.array([[-1j, 1], [1, 1j]])
        e, xi = rank1_factor(A)
        assert np.allclose(e, np.array([1, 1j]) / np.sqrt(2))
        assert np.allclose(xi, np.sqrt(2) * np.array([1j, 1]))
        assert np.allclose(np.outer(e, xi.conj()), A)

    def test_rank_two_rejected(self):
        with pytest.raises(RankError):
            rank1_factor(np.eye(2))

    def test_zero_rejected(self):
        with pytest.raises(RankError):
            rank1_factor(np.zeros((2, 2)))

    def test_non_nilpotent_rejected(self):
        with pytest.raises(RankError):
            rank1_factor(np.diag([1.0, 0.0]))

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-2, 2), min_size=6, max_size=6),
        st.lists(st.floats(-2, 2), min_size=6, max_size=6),
    )
    def test_orthogonal_factors_reconstruct(self, a, b):
        e = np.array(a[:3]) + 1j * np.array(a[3:])
        xi = np.array(b[:3]) + 1j * np.array(b[3:])
        if np.linalg.norm(e) < 0.1:
            return
        xi = xi - np.vdot(e, xi) / np.vdot(e, e) * e
        if np.linalg.norm(xi) < 0.1:
            return
        A = np.outer(e, xi.conj())
        e_out, xi_out = rank1_factor(A)
        assert np.linalg.norm(e_out) == pytest.approx(1.0)
        assert np.allclose(np.outer(e_out, xi_out.conj()), A, atol=1e-12)
        lead = e_out[np.flatnonzero(np.abs(e_out) > 1e-8)[0]]
        assert abs(lead.imag) < 1e-12 and lead.real > 0


# ============================================================
# 4. Pauli 符号化と立体射影
# ============================================================
class TestPauli:
    def test_decode_encode(self):
        sphere = SphereMap(single_soliton(0.3, y=-1.0).profile)
        u1, u2, u3 = pauli_decode(sphere)
        assert u3.constant[0, 0] == pytest.approx(1.0)
        rebuilt = pauli_encode(u1, u2, u3)
        assert max_distance(sphere.map, rebuilt.map) < 1e-12

    def test_non_unit_value_at_infinity(self):
        u1, u2, u3 = pauli_decode(SphereMap(single_soliton(0.0).profile))
        shifted = PoleExpansion.scalar(0.5, u3.poles, u3.residues[:, 0, 0])
        with pytest.raises(ConstraintViolationError):
            pauli_encode(u1, u2, shifted)

    def test_trace_must_vanish(self):
        with pytest.raises(ConstraintViolationError):
            SphereMap(RationalMap.constant(GrassmannTarget.standard(2, 0)))

    def test_constant_components(self):
        sphere = pauli_encode(PoleExpansion.scalar(0.0), PoleExpansion.scalar(0.0), PoleExpansion.scalar(1.0))
        assert sphere.map.N == 0
        assert np.allclose(sphere.map.U_inf, PAULI[2])

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(-0.95, 0.95),
        st.floats(-10.0, 10.0),
        st.floats(0.2, 5.0),
    )
    def test_round_trip_single_solitons(self, v, y, delta):
        sphere = SphereMap(single_soliton(v, y, delta).profile)
        rebuilt = pauli_encode(*pauli_decode(sphere))
        for before, after in zip(pauli_decode(sphere), pauli_decode(rebuilt)):
            assert np.allclose(before.poles, after.poles)
            assert np.allclose(before.residues, after.residues, atol=1e-10)
            assert np.allclose(before.constant, after.constant)


class TestStereographic:
    def test_identity_ratio(self):
        sphere, N = from_stereographic([0, 1], [1])
        assert N == 1
        assert np.allclose(sphere.map.poles, [-1j])
        assert np.allclose(sphere.u(GRID), _half_harmonic(GRID), atol=1e-10)

    def test_common_factor(self):
        with pytest.raises(StereographicError):
            from_stereographic([-1, 0, 1], [-1, 1])
        with pytest.raises(StereographicError):
            from_stereographic([0, 0, 1], [0, 1])

    def test_two_pole_example(self):
        # R = (x² + i)/x, |P|² + |Q|² = x⁴ + x² + 1
        sphere, N = from_stereographic([1j, 0, 1], [0, 1])
        assert N == 2
        assert kronecker_rank(sphere.map) == 2
        assert validate(sphere.map).passed
        u = sphere.u(GRID)
        assert np.allclose(np.sum(u**2, axis=-1), 1.0, atol=1e-12)

    def test_degree_condition(self):
        with pytest.raises(StereographicError):
            from_stereographic([0, 1], [1, 1])

    def test_zero_denominator(self):
        with pytest.raises(StereographicError):
            from_stereographic([0, 1], [0])

    def test_random_degrees(self, rng):
        for N in (1, 2, 3, 4):
            P = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
            Q = rng.standard_normal(N) + 1j * rng.standard_normal(N)
            sphere, degree = from_stereographic(P, Q)
            assert degree == N == sphere.map.N
            assert validate(sphere.map, tol=1e-6).passed

    def test_resultant(self):
        # Res(x - 2, x - 3) = -1 （定数項から並べた係数）
        assert resultant([-2, 1], [-3, 1]) == pytest.approx(-1.0)
        assert abs(resultant([-1, 0, 1], [-1, 1])) < 1e-12


# ============================================================
# 5. 閉形式の微積分
# ============================================================
class TestClosedForms:
    @pytest.mark.parametrize("v", np.linspace(-0.9, 0.9, 10))
    def test_ground_state_energy(self, v):
        profile = single_soliton(v, y=2.0, delta=0.7).profile
        assert energy(profile) == pytest.approx((1 - v**2) * np.pi, abs=1e-8)
        assert energy(profile, "matrix") == pytest.approx(2 * (1 - v**2) * np.pi, abs=1e-8)

    def test_seminorm_of_constant_is_zero(self):
        assert sobolev_seminorm(RationalMap.constant(GrassmannTarget.standard(2, 1)), 1.0) == 0.0

    def test_seminorm_requires_positive_s(self):
        with pytest.raises(ValueError):
            sobolev_seminorm(single_soliton(0.0).profile, 0.0)

    def test_single_pole_seminorm(self):
        # ‖A/(x - z) + h.c.‖²_{Ḣ^{1/2}} = π Tr(AA*)/δ²
        expansion = PoleExpansion.scalar(0.0, [0.5 - 2j], [1.5 + 0.5j])
        expected = np.pi * abs(1.5 + 0.5j) ** 2 / 4.0
        assert sobolev_seminorm(expansion, 0.5) ** 2 == pytest.approx(expected)

    def test_half_derivative_of_scalar(self):
        # |D|(2x/(x²+1)) = 4x/(x²+1)²
        expansion = PoleExpansion.scalar(0.0, [-1j], [1.0])
        values = apply_halfD(expansion)(GRID)[:, 0, 0]
        assert np.allclose(values, 4 * GRID / (GRID**2 + 1) ** 2, atol=1e-13)

    @pytest.mark.parametrize("v", [0.0, 0.5, -0.7])
    def test_rhs_is_transport(self, v):
        profile = single_soliton(v, y=0.5).profile
        assert np.allclose(hwm_rhs(profile, GRID), -v * evaluate_derivative(profile, GRID), atol=1e-10)

    def test_difference_of_equal_maps(self):
        profile = single_soliton(0.2).profile
        gap = difference(profile, profile)
        assert np.allclose(gap(GRID), 0.0)
        assert seminorm_squared(gap, 0.5) < 1e-10


# ============================================================
# 6. 対称性
# ============================================================
class TestSymmetries:
    def test_translate(self):
        profile = single_soliton(0.4).profile
        moved = translate(profile, 3.0)
        assert np.allclose(moved.poles, profile.poles + 3.0)
        assert np.allclose(evaluate(moved, GRID + 3.0), evaluate(profile, GRID))

    def test_rescale_keeps_energy(self):
        profile = single_soliton(0.4).profile
        scaled = rescale(profile, 2.5)
        assert np.allclose(evaluate(scaled, 2.5 * GRID), evaluate(profile, GRID))
        assert energy(scaled) == pytest.approx(energy(profile))
        assert validate(scaled).passed

    def test_reflect(self):
        profile = single_soliton(0.4, y=1.0).profile
        mirrored = reflect(profile)
        assert np.allclose(evaluate(mirrored, GRID), -evaluate(profile, -GRID))
        assert validate(mirrored).passed
        assert max_distance(reflect(mirrored), profile) < 1e-12

    def test_rotate(self, rng):
        from scipy.stats import unitary_group

        map = random_grassmann_map(rng, 3, 1, 2)
        W = unitary_group.rvs(3, random_state=rng)
        rotated = rotate(map, W)
        assert validate(rotated, tol=1e-6).passed
        expected = W @ evaluate(map, GRID) @ W.conj().T
        assert np.allclose(evaluate(rotated, GRID), expected, atol=1e-10)
