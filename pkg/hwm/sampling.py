"""乱数による有効な有理写像の生成."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from hwm.errors import StereographicError
from hwm.rational_maps import (
    GrassmannTarget,
    RationalMap,
    ResiduePair,
    SphereMap,
    from_stereographic,
    rotate,
)


MAX_ATTEMPTS = 20


def random_polynomial(rng: np.random.Generator, degree: int) -> np.ndarray:
    """複素正規分布の係数を持つ次数 degree の多項式（定数項から）."""
    return rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)


def random_stereographic_data(rng: np.random.Generator, N: int):
    """deg P = N, deg Q = N - 1 のランダムな (P, Q)."""
    return random_polynomial(rng, N), random_polynomial(rng, N - 1)


def random_sphere_map(rng: np.random.Generator, N: int) -> SphereMap:
    """N 個の極を持つランダムな球面写像（前提条件を満たすまで引き直す）."""
    if N < 1:
        raise ValueError("N ≥ 1 が必要です")
    last_error = None
    for _ in range(MAX_ATTEMPTS):
        P, Q = random_stereographic_data(rng, N)
        try:
            sphere, _ = from_stereographic(P, Q)
            return sphere
        except StereographicError as exc:
            last_error = exc
    raise StereographicError(f"{MAX_ATTEMPTS} 回試しても有効な (P, Q) が得られません: {last_error}")


def embed(sphere: SphereMap, d: int, k: int) -> RationalMap:
    """U ↦ diag(U_sphere, 1, …, 1, -1, …, -1) により Gr_k(ℂ^d) に埋め込む."""
    if d < 2 or not 1 <= k <= d - 1:
        raise ValueError(f"埋め込みには d ≥ 2, 1 ≤ k ≤ d - 1 が必要です（d={d}, k={k}）")
    tail = np.concatenate([np.ones(d - 1 - k), -np.ones(k - 1)])
    U_inf = np.zeros((d, d), dtype=complex)
    U_inf[:2, :2] = sphere.map.U_inf
    U_inf[2:, 2:] = np.diag(tail)

    def pad(vector: np.ndarray) -> np.ndarray:
        return np.concatenate([vector, np.zeros(d - 2, dtype=complex)])

    residues = tuple(ResiduePair(z=p.z, e=pad(p.e), xi=pad(p.xi)) for p in sphere.map.residues)
    return RationalMap(GrassmannTarget(d=d, k=k, U_inf=U_inf), residues)


def random_grassmann_map(rng: np.random.Generator, d: int, k: int, N: int) -> RationalMap:
    """球面写像を埋め込み、ランダムなユニタリで共役したもの."""
    W = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1)
    return rotate(embed(random_sphere_map(rng, N), d, k), W)
