"""Reading and writing models, signals, configs and results.

Structured objects are JSON, signals and trajectories are CSV with a
``t,<name>_1,...,<name>_m`` header and 17 significant digits, so every
value survives a save/load round trip bit-exactly.
"""

import csv
import json
import logging
from typing import NamedTuple

import numpy as np

from phsid.calibration.forms import CalibrationConfigForm
from phsid.calibration.logic import CalibrationConfig, CalibrationResult
from phsid.core.exceptions import InvariantError, MalformedFileError
from phsid.core.matrices import PSDMatrix, SkewSymmetricMatrix
from phsid.core.systems import PHSystem, Signal, TimeGrid, Trajectory
from phsid.data.forms import SystemForm, raise_for_form
from phsid.sensitivity.logic import ParameterPoint

logger = logging.getLogger(__name__)

GRID_TOLERANCE = 1e-9


def _number(x: float) -> str:
    return f"{x:.17g}"


def _read_json(path) -> dict:
    logger.debug("Reading %s", path)
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise MalformedFileError(f"{path}: cannot read file ({e.strerror}).") from e
    except json.JSONDecodeError as e:
        raise MalformedFileError(f"{path}: invalid JSON ({e.msg}).") from e
    if not isinstance(data, dict):
        raise MalformedFileError(f"{path}: expected a JSON object.")
    return data


def _write_json(path, data: dict):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def load_model(path) -> PHSystem:
    form = SystemForm(_read_json(path))
    raise_for_form(form, str(path))
    return form.system()


def model_data(sys: PHSystem) -> dict:
    data = {
        "n": sys.n,
        "k": sys.k,
        "J": sys.J.entries.tolist(),
        "R": sys.R.entries.tolist(),
    }
    if not sys.Q.is_identity():
        data["Q"] = sys.Q.entries.tolist()
    data["B"] = sys.B.tolist()
    data["x_hat"] = sys.x_hat.tolist()
    return data


def save_model(path, sys: PHSystem):
    _write_json(path, model_data(sys))


def save_series_csv(path, grid: TimeGrid, values: np.ndarray, name: str):
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t"] + [f"{name}_{i + 1}" for i in range(values.shape[1])])
        for t, row in zip(grid.nodes, values):
            writer.writerow([_number(t)] + [_number(x) for x in row])


def save_signal_csv(path, signal: Signal, name: str = "y"):
    save_series_csv(path, signal.grid, signal.values, name)


def save_trajectory_csv(path, traj: Trajectory, name: str = "w"):
    save_series_csv(path, traj.grid, traj.states, name)


def load_series_csv(path, grid: TimeGrid | None = None) -> tuple[TimeGrid, np.ndarray]:
    """Read a CSV series. The grid is inferred from the t column unless given."""
    logger.debug("Reading %s", path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = [row for row in csv.reader(f) if row]
    except OSError as e:
        raise MalformedFileError(f"{path}: cannot read file ({e.strerror}).") from e

    if not rows or rows[0][0] != "t" or len(rows[0]) < 2:
        raise MalformedFileError(f"{path}: header must be 't,<name>_1,...'.")
    width = len(rows[0])
    if any(len(row) != width for row in rows[1:]):
        raise MalformedFileError(f"{path}: every row needs {width} columns.")
    if len(rows) < 3:
        raise InvariantError(f"{path}: a signal needs at least two rows.", "grid")
    try:
        table = np.array([[float(cell) for cell in row] for row in rows[1:]])
    except ValueError as e:
        raise MalformedFileError(f"{path}: non-numeric cell ({e}).") from e
    if not np.all(np.isfinite(table)):
        raise InvariantError(f"{path}: non-finite values.", code="range")

    t = table[:, 0]
    if grid is None:
        grid = TimeGrid(t_end=float(t[-1]), steps=table.shape[0] - 1)
    if table.shape[0] != grid.steps + 1:
        raise InvariantError(
            f"{path}: has {table.shape[0]} rows, grid needs {grid.steps + 1} "
            f"(missing or extra rows).",
            code="grid",
        )
    if np.max(np.abs(t - grid.nodes)) > GRID_TOLERANCE * grid.t_end:
        raise InvariantError(
            f"{path}: t column is not a uniform grid (missing or extra rows).", "grid"
        )
    return grid, table[:, 1:]


def load_signal_csv(path, grid: TimeGrid | None = None) -> Signal:
    grid, values = load_series_csv(path, grid)
    return Signal(grid, values)


def load_config(path) -> CalibrationConfig:
    return config_from_data(_read_json(path), str(path))


def config_from_data(data: dict, source: str = "config") -> CalibrationConfig:
    form = CalibrationConfigForm(data)
    raise_for_form(form, source)
    return form.config()


def point_data(v: ParameterPoint) -> dict:
    return {
        "J": v.J.entries.tolist(),
        "R": v.R.entries.tolist(),
        "x_hat": v.w_hat.tolist(),
    }


def save_result(path, result: CalibrationResult):
    _write_json(
        path,
        {
            "v_opt": point_data(result.v_opt),
            "iterations": result.iterations,
            "converged": result.converged,
            "final_cost": result.final_cost,
            "reason": str(result.reason),
        },
    )


def load_result(path) -> tuple[ParameterPoint, dict]:
    data = _read_json(path)
    try:
        v = data["v_opt"]
        point = ParameterPoint(
            J=SkewSymmetricMatrix.from_array(v["J"], "J"),
            R=PSDMatrix.from_array(v["R"], "R"),
            w_hat=v["x_hat"],
        )
    except (KeyError, TypeError) as e:
        raise MalformedFileError(f"{path}: missing v_opt fields.") from e
    return point, {k: v for k, v in data.items() if k != "v_opt"}


HISTORY_HEADER = ["iter", "cost", "sigma", "grad_norm2"]


class HistoryRow(NamedTuple):
    iter: int
    cost: float
    sigma: float | None
    grad_norm2: float | None


def save_history_csv(path, result: CalibrationResult):
    """One row per accepted iterate; sigma and |g|^2 belong to the step into it."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        sigmas = [""] + [_number(s) for s in result.step_sizes]
        norms = [""] + [_number(g) for g in result.gradient_norms]
        for i, (c, s, g) in enumerate(zip(result.cost_history, sigmas, norms)):
            writer.writerow([i, _number(c), s, g])


def load_history_csv(path) -> list[HistoryRow]:
    logger.debug("Reading %s", path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise MalformedFileError(f"{path}: cannot read file ({e.strerror}).") from e

    if not rows or rows[0] != HISTORY_HEADER:
        raise MalformedFileError(f"{path}: header must be '{','.join(HISTORY_HEADER)}'.")
    if len(rows) < 2:
        raise MalformedFileError(f"{path}: history is empty.")
    try:
        return [
            HistoryRow(int(i), float(c), float(s) if s else None, float(g) if g else None)
            for i, c, s, g in rows[1:]
        ]
    except ValueError as e:
        raise MalformedFileError(f"{path}: malformed history row ({e}).") from e


def save_energy_csv(path, grid: TimeGrid, energy: np.ndarray, residual: np.ndarray):
    """Columns t,H,residual; the residual of step j sits on node j+1."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t", "H", "residual"])
        for j, t in enumerate(grid.nodes):
            r = _number(residual[j - 1]) if j else ""
            writer.writerow([_number(t), _number(energy[j]), r])
