"""写像・レポートの JSON / CSV 入出力."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from hwm.errors import ConstraintViolationError
from hwm.flow import Trajectory
from hwm.rational_maps import GrassmannTarget, RationalMap, ResiduePair, SphereMap, evaluate
from hwm.solitons import ResolutionReport
from models.schemas import (
    ComplexJSON,
    ConvergenceRow,
    RationalMapJSON,
    PoleJSON,
    ResolutionReportOutput,
    SolitonOutput,
)


def _vector(values: Iterable[complex]) -> List[ComplexJSON]:
    return [ComplexJSON.of(value) for value in values]


def _matrix(values: np.ndarray) -> List[List[ComplexJSON]]:
    return [_vector(row) for row in values]


def _array(values) -> np.ndarray:
    return np.array([[item.to_complex() for item in row] for row in values], dtype=complex)


def is_sphere(map: RationalMap) -> bool:
    return map.d == 2 and abs(np.trace(map.U_inf)) < 1e-12


def map_to_json(map: Union[RationalMap, SphereMap]) -> RationalMapJSON:
    map = map.map if isinstance(map, SphereMap) else map
    return RationalMapJSON(
        d=map.d,
        k=map.target.k,
        U_inf=_matrix(map.U_inf),
        poles=[PoleJSON(z=ComplexJSON.of(pair.z), A=_matrix(pair.A)) for pair in map.residues],
        sphere=is_sphere(map),
    )


def map_from_json(data: RationalMapJSON) -> RationalMap:
    """留数行列を e ξ* に分解する（階数1でなければ RankError、冪零性は validate で検査する）."""
    target = GrassmannTarget(d=data.d, k=data.k, U_inf=_array(data.U_inf))
    residues = []
    for pole in data.poles:
        A = _array(pole.A)
        if A.shape != (data.d, data.d):
            raise ConstraintViolationError(f"留数行列の形が {A.shape} です（期待値 ({data.d}, {data.d})）")
        residues.append(ResiduePair.from_matrix(pole.z.to_complex(), A, nilpotent=False))
    return RationalMap(target, tuple(residues))


def write_map(path: Union[str, Path], map: Union[RationalMap, SphereMap]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(map_to_json(map).model_dump_json(indent=2), encoding="utf-8")
    return path


def read_map(path: Union[str, Path]) -> RationalMap:
    text = Path(path).read_text(encoding="utf-8")
    return map_from_json(RationalMapJSON.model_validate_json(text))


def write_model(path: Union[str, Path], model) -> Path:
    """pydantic モデルを整形済み JSON として書き出す."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    return path


# ============================================================
# CSV
# ============================================================
def samples_frame(times: Sequence[float], grid: np.ndarray, values: np.ndarray, sphere: bool) -> pd.DataFrame:
    """values: (len(times), len(grid), d, d) を t, x, U<a><b>_re, U<a><b>_im (, u1, u2, u3) の表にする."""
    grid = np.asarray(grid, dtype=float)
    n_t, n_x, d, _ = values.shape
    columns = {
        "t": np.repeat(np.asarray(times, dtype=float), n_x),
        "x": np.tile(grid, n_t),
    }
    flat = values.reshape(n_t * n_x, d, d)
    for a in range(d):
        for b in range(d):
            columns[f"U{a + 1}{b + 1}_re"] = flat[:, a, b].real
            columns[f"U{a + 1}{b + 1}_im"] = flat[:, a, b].imag
    if sphere:
        # u₁ = Re U₁₂, u₂ = -Im U₁₂, u₃ = Re U₁₁
        columns["u1"] = flat[:, 0, 1].real
        columns["u2"] = -flat[:, 0, 1].imag
        columns["u3"] = flat[:, 0, 0].real
    return pd.DataFrame(columns)


def trajectory_frame(traj: Trajectory, grid) -> pd.DataFrame:
    values = np.stack([evaluate(snapshot.map, grid) for snapshot in traj.snapshots])
    return samples_frame(traj.times, grid, values, is_sphere(traj.initial))


def convergence_frame(rows: Sequence[ConvergenceRow]) -> pd.DataFrame:
    records = []
    for row in rows:
        record = {"t": row.t, "sup": row.sup}
        record.update({f"H{key}": value for key, value in row.Hs.items()})
        records.append(record)
    return pd.DataFrame.from_records(records)


def write_csv(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


# ============================================================
# レポート
# ============================================================
def resolution_to_output(report: ResolutionReport, slopes=None) -> ResolutionReportOutput:
    return ResolutionReportOutput(
        solitons=[
            SolitonOutput(
                v=soliton.v,
                y=soliton.y,
                delta=soliton.delta,
                A=_matrix(soliton.A),
                solitary_residual=float(residual),
            )
            for soliton, residual in zip(report.solitons, report.solitary_residuals)
        ],
        w=_vector(report.w),
        convergence=list(report.convergence),
        slopes=dict(slopes or {}),
    )
