"""Photovoltaic parameter identification objectives.

Single-diode (SDM), double-diode (DDM) and series/parallel module models,
written as residuals with the measured current substituted on the right
hand side, and RMSE over an I-V dataset as the fitness. Saturation
currents are in microamperes everywhere outside the residual kernels.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from ._backend import kernels
from .core import ObjectiveSpec, SearchSpace, UsageError

Q_ELECTRON = 1.60217646e-19
K_BOLTZMANN = 1.3806503e-23
DEFAULT_TEMPERATURE = 306.15

SDM, DDM, MODULE = "sdm", "ddm", "module"
MODELS = (SDM, DDM, MODULE)

PARAM_NAMES = {
    SDM: ("I_ph", "I_sd", "R_s", "R_sh", "n"),
    DDM: ("I_ph", "I_sd1", "R_s", "R_sh", "n_1", "I_sd2", "n_2"),
    MODULE: ("I_ph", "I_sd", "R_s", "R_sh", "n"),
}

_CELL_LB = [0.0, 0.0, 0.0, 0.0, 1.0]
_CELL_UB = [1.0, 1.0, 0.5, 100.0, 2.0]
BOUNDS = {
    SDM: (_CELL_LB, _CELL_UB),
    DDM: (_CELL_LB + [0.0, 1.0], _CELL_UB + [1.0, 2.0]),
    MODULE: ([0.0, 0.0, 0.0, 0.0, 1.0], [2.0, 50.0, 2.0, 2000.0, 50.0]),
}

# best fits reported for the memory-enhanced fractional-order DBO
PUBLISHED_BEST = {
    SDM: ((0.76078, 0.32302, 0.03638, 53.71795, 1.48118), 9.86022e-4),
    DDM: ((0.76077, 0.80672, 0.03673, 55.95082, 2.00000, 0.22164, 1.44953), 9.82673e-4),
    MODULE: ((0.20611, 0.70133, 2.00000, 1626.26441, 16.22338), 2.42563e-3),
}

BUNDLED = {SDM: "rtc_france.csv", DDM: "rtc_france.csv", MODULE: "photowatt_pwp201.csv"}


def model_space(model: str) -> SearchSpace:
    lo, hi = BOUNDS[_check_model(model)]
    return SearchSpace(np.array(lo), np.array(hi))


def _check_model(model: str) -> str:
    m = model.lower()
    if m not in MODELS:
        raise UsageError(f"unknown PV model {model!r}; choose from {MODELS}")
    return m


@dataclass
class IvDataset:
    voltage: np.ndarray
    current: np.ndarray
    temperature_kelvin: float = DEFAULT_TEMPERATURE
    label: str = ""
    n_series: int = 36
    n_parallel: int = 1
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.voltage = np.ascontiguousarray(self.voltage, dtype=float).reshape(-1)
        self.current = np.ascontiguousarray(self.current, dtype=float).reshape(-1)
        if self.voltage.shape != self.current.shape:
            raise UsageError("voltage and current columns differ in length")
        if self.voltage.size < 1:
            raise UsageError("an I-V dataset needs at least one point")
        if not self.temperature_kelvin > 0:
            raise UsageError("temperature must be positive (kelvin)")
        if self.n_series < 1 or self.n_parallel < 1:
            raise UsageError("N_s and N_p must be positive integers")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.voltage.tolist(), self.current.tolist()))

    def __len__(self) -> int:
        return self.voltage.size


_KV = re.compile(r"^#\s*([A-Za-z_][\w]*)\s*=\s*(\S+)\s*$")


def load_iv_csv(path: Union[str, Path]) -> IvDataset:
    """Read ``voltage,current`` rows with optional ``# key=value`` header lines.

    Recognized keys: ``T`` (kelvin, default 306.15), ``Ns`` and ``Np``
    (defaults 36 and 1), ``label``. Other comments are ignored.
    """
    path = Path(path)
    meta: dict[str, str] = {}
    v, i = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _KV.match(line)
                if m:
                    meta[m.group(1)] = m.group(2)
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                if len(parts) != 2:
                    raise ValueError
                v.append(float(parts[0]))
                i.append(float(parts[1]))
            except ValueError:
                raise UsageError(f"{path}:{lineno}: expected 'voltage,current', got {line!r}") from None
    if not v:
        raise UsageError(f"{path}: no data rows")
    try:
        return IvDataset(
            np.array(v),
            np.array(i),
            temperature_kelvin=float(meta.get("T", DEFAULT_TEMPERATURE)),
            label=meta.get("label", path.stem),
            n_series=int(meta.get("Ns", 36)),
            n_parallel=int(meta.get("Np", 1)),
            meta=meta,
        )
    except ValueError as exc:
        raise UsageError(f"{path}: bad header value ({exc})") from None


def write_iv_csv(dataset: IvDataset, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# T={dataset.temperature_kelvin!r}\n")
        fh.write(f"# Ns={dataset.n_series}\n# Np={dataset.n_parallel}\n")
        if dataset.label and " " not in dataset.label:
            fh.write(f"# label={dataset.label}\n")
        for v, i in zip(dataset.voltage, dataset.current):
            fh.write(f"{float(v)!r},{float(i)!r}\n")


def bundled_dataset(model: str) -> IvDataset:
    name = BUNDLED[_check_model(model)]
    with resources.as_file(resources.files("mfodbo") / "data" / name) as p:
        return load_iv_csv(p)


def _p(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=float)


def sdm_residual(x, v_l, i_l, temperature: float = DEFAULT_TEMPERATURE):
    """I_ph - I_sd[exp((I R_s + V) q / (T n k)) - 1] - (I R_s + V)/R_sh - I.

    ``v_l`` and ``i_l`` may be scalars or arrays; the exponent is capped at
    700 so out-of-range corners give a huge but finite residual.
    """
    out = kernels.sdm_residuals(_p(x), np.atleast_1d(_p(v_l)), np.atleast_1d(_p(i_l)), float(temperature))
    return out if np.ndim(v_l) else float(out[0])


def ddm_residual(x, v_l, i_l, temperature: float = DEFAULT_TEMPERATURE):
    out = kernels.ddm_residuals(_p(x), np.atleast_1d(_p(v_l)), np.atleast_1d(_p(i_l)), float(temperature))
    return out if np.ndim(v_l) else float(out[0])


def module_residual(x, v_l, i_l, temperature: float = DEFAULT_TEMPERATURE, n_series: int = 36, n_parallel: int = 1):
    out = kernels.module_residuals(
        _p(x), np.atleast_1d(_p(v_l)), np.atleast_1d(_p(i_l)), float(temperature),
        float(n_series), float(n_parallel),
    )
    return out if np.ndim(v_l) else float(out[0])


def residuals(x, dataset: IvDataset, model: str) -> np.ndarray:
    model = _check_model(model)
    if model == SDM:
        return sdm_residual(x, dataset.voltage, dataset.current, dataset.temperature_kelvin)
    if model == DDM:
        return ddm_residual(x, dataset.voltage, dataset.current, dataset.temperature_kelvin)
    return module_residual(
        x, dataset.voltage, dataset.current, dataset.temperature_kelvin,
        dataset.n_series, dataset.n_parallel,
    )


def rmse(x, dataset: IvDataset, model: str) -> float:
    """Root-mean-square residual over every measured point."""
    if len(dataset) == 0:
        raise UsageError("cannot score an empty dataset")
    return float(kernels.rms(residuals(x, dataset, model)))


def pv_objective(model: str, dataset: IvDataset | None = None) -> ObjectiveSpec:
    """RMSE fitness over the model's parameter box, bound to one dataset."""
    model = _check_model(model)
    ds = dataset if dataset is not None else bundled_dataset(model)
    v, i, temp = ds.voltage, ds.current, float(ds.temperature_kelvin)
    if model == SDM:
        def f(x):
            return kernels.sdm_rmse(_p(x), v, i, temp)
    elif model == DDM:
        def f(x):
            return kernels.ddm_rmse(_p(x), v, i, temp)
    else:
        ns, np_ = float(ds.n_series), float(ds.n_parallel)

        def f(x):
            return kernels.module_rmse(_p(x), v, i, temp, ns, np_)
    return ObjectiveSpec(f"pv-{model}", model_space(model), f)


def simulate_current(x, dataset: IvDataset, model: str, tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
    """Model current at each measured voltage (plotting aid, never fitness).

    Solves residual(I) = 0 point by point with Newton steps on a forward
    difference derivative, starting from the measured current. Points that
    fail to converge keep their last finite iterate.
    """
    model = _check_model(model)
    probe = IvDataset(dataset.voltage, dataset.current.copy(), dataset.temperature_kelvin,
                      dataset.label, dataset.n_series, dataset.n_parallel)
    cur = probe.current.copy()
    for _ in range(max_iter):
        probe.current = cur
        g = residuals(x, probe, model)
        h = 1e-7 * np.maximum(1.0, np.abs(cur))
        probe.current = cur + h
        dg = (residuals(x, probe, model) - g) / h
        step = np.where(np.isfinite(g) & np.isfinite(dg) & (dg != 0.0), g / np.where(dg == 0.0, 1.0, dg), 0.0)
        cur = cur - step
        if np.max(np.abs(step)) < tol:
            break
    return cur


def describe(x, model: str) -> dict[str, float]:
    return dict(zip(PARAM_NAMES[_check_model(model)], (float(v) for v in x)))


__all__ = [
    "BOUNDS", "DDM", "IvDataset", "MODELS", "MODULE", "PARAM_NAMES", "PUBLISHED_BEST", "SDM",
    "bundled_dataset", "ddm_residual", "describe", "load_iv_csv", "model_space", "module_residual",
    "pv_objective", "residuals", "rmse", "sdm_residual", "simulate_current", "write_iv_csv",
]
