"""Deterministic closed-loop simulation of the supervised hybrid controller.

Fixed-step classical Runge-Kutta integration of the reduced plant.  The
supervisor and the selected law are evaluated once per step, at the step's
start, and the resulting input is held constant across the step (zero-
order hold).  Identical scenarios therefore produce bitwise-identical
trajectories.

Scenario files are JSON with exactly the fields of :class:`Scenario`;
unknown keys are rejected.  Trajectories serialise to CSV with the header
``t,x1,x2,x3,x4,u,law,a1,err,abscos3`` at 9 significant digits.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from .ballbeam import PlantParams, reduced_dynamics
from .controllers import (
    GainSet,
    LawDescriptor,
    SwitchThresholds,
    TrackingReference,
    apply_law,
    outer_loop_v,
    pole_gains,
    supervisor,
    table_laws,
)

__all__ = [
    "CSV_HEADER",
    "IntegrationError",
    "Metrics",
    "Scenario",
    "ScenarioError",
    "SimulationError",
    "load_scenario",
    "rk4_step",
    "run",
    "scenario_from_dict",
    "scenario_to_dict",
    "sweep",
]

CSV_HEADER = "t,x1,x2,x3,x4,u,law,a1,err,abscos3"

#: default integration step [s]; three decades below the reference period
DEFAULT_STEP = 1e-3

#: default tail window for the RMS tracking-error metric [s]
DEFAULT_TAIL_WINDOW = 10.0


class SimulationError(RuntimeError):
    """A closed-loop run could not be completed."""


class IntegrationError(SimulationError):
    """The integrated state became non-finite."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class ScenarioError(ValueError):
    """A scenario description is malformed."""


@dataclass(frozen=True)
class Scenario:
    """Everything needed for one deterministic closed-loop run."""

    plant: PlantParams
    initial_state: tuple[float, float, float, float]
    reference: TrackingReference
    thresholds: SwitchThresholds
    pole_law1: float = -4.0
    pole_law2: float = -3.0
    pole_law3: float = -3.0
    step: float = DEFAULT_STEP
    duration: float = 30.0
    tail_window: float = DEFAULT_TAIL_WINDOW

    def __post_init__(self):
        object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))
        if len(self.initial_state) != 4:
            raise ScenarioError("initial_state must have exactly 4 components")
        if not all(math.isfinite(v) for v in self.initial_state):
            raise ScenarioError("initial_state must be finite")
        if not self.step > 0:
            raise ScenarioError("step must be positive")
        if self.duration < self.step:
            raise ScenarioError("duration must be at least one step")
        if not self.tail_window > 0:
            raise ScenarioError("tail_window must be positive")
        for name in ("pole_law1", "pole_law2", "pole_law3"):
            if not getattr(self, name) < 0:
                raise ScenarioError(f"{name} must be strictly negative")

    @property
    def sample_count(self) -> int:
        # floor(duration/step) + 1, with a little slack so an exact
        # multiple is not lost to the float division (30/0.001 < 30000)
        return int(math.floor(self.duration / self.step + 1e-9)) + 1


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled closed-loop record; all arrays share one length."""

    t: np.ndarray
    states: np.ndarray  # shape (n, 4)
    u: np.ndarray
    law: np.ndarray  # int law ids
    a1: np.ndarray  # control coefficient 2 B x1 x4 along the run
    error: np.ndarray  # x1 - y_d(t)
    abscos3: np.ndarray  # |cos x3|, distance to the law-2 singularity

    def __len__(self) -> int:
        return len(self.t)

    def write_csv(self, stream: TextIO) -> None:
        stream.write(CSV_HEADER + "\n")
        for k in range(len(self.t)):
            x1, x2, x3, x4 = self.states[k]
            row = (
                _fmt(self.t[k]),
                _fmt(x1),
                _fmt(x2),
                _fmt(x3),
                _fmt(x4),
                _fmt(self.u[k]),
                str(int(self.law[k])),
                _fmt(self.a1[k]),
                _fmt(self.error[k]),
                _fmt(self.abscos3[k]),
            )
            stream.write(",".join(row) + "\n")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as stream:
            self.write_csv(stream)


@dataclass(frozen=True)
class Metrics:
    """Summary statistics of one run; dwell fractions sum to one."""

    rms_tail_error: float
    max_abs_x3: float
    switch_count: int
    min_abs_a1: float
    dwell_fractions: tuple[float, float, float]  # laws 1, 2, 3
    tail_window: float

    def report_text(self) -> str:
        lines = [
            f"rms_tail_error_m: {_fmt(self.rms_tail_error)}",
            f"tail_window_s: {_fmt(self.tail_window)}",
            f"max_abs_x3_rad: {_fmt(self.max_abs_x3)}",
            f"switch_count: {self.switch_count}",
            f"min_abs_a1: {_fmt(self.min_abs_a1)}",
            f"dwell_fraction_law1: {_fmt(self.dwell_fractions[0])}",
            f"dwell_fraction_law2: {_fmt(self.dwell_fractions[1])}",
            f"dwell_fraction_law3: {_fmt(self.dwell_fractions[2])}",
        ]
        return "\n".join(lines) + "\n"


def _fmt(value: float) -> str:
    if value == 0.0:
        value = 0.0  # normalise negative zero
    return f"{value:.9g}"


def rk4_step(
    deriv: Callable[[Sequence[float]], Sequence[float]],
    x: Sequence[float],
    h: float,
) -> tuple[float, ...]:
    """One classical 4-stage Runge-Kutta step of size h.

    ``deriv`` must already hold any input constant (zero-order hold is the
    caller's responsibility).  Raises IntegrationError if the update is
    not finite.
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    k1 = deriv(x)
    half = 0.5 * h
    k2 = deriv(tuple(xi + half * ki for xi, ki in zip(x, k1)))
    k3 = deriv(tuple(xi + half * ki for xi, ki in zip(x, k2)))
    k4 = deriv(tuple(xi + h * ki for xi, ki in zip(x, k3)))
    sixth = h / 6.0
    out = tuple(
        xi + sixth * (a + 2.0 * (b + c) + d)
        for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
    )
    if not all(math.isfinite(v) for v in out):
        raise IntegrationError("integration produced a non-finite state")
    return out


def _law_table(sc: Scenario) -> dict[int, tuple[LawDescriptor, GainSet]]:
    laws = table_laws()
    gains = {
        1: pole_gains(sc.pole_law1, 3),
        2: pole_gains(sc.pole_law2, 4),
        3: pole_gains(sc.pole_law3, 4),
    }
    return {law.law_id: (law, gains[law.law_id]) for law in laws}


def run(sc: Scenario) -> tuple[Trajectory, Metrics]:
    """Simulate the supervised closed loop over the scenario horizon.

    At each step: select the law with the supervisor, compute the virtual
    input for that law's outer loop, compute u, record the sample, then
    advance one RK4 step with u held constant.  A beam angle beyond pi in
    magnitude means the model has left its meaningful regime; that is
    reported as a warning, not an error.
    """
    p = sc.plant
    ref = sc.reference
    table = _law_table(sc)
    n = sc.sample_count
    h = sc.step

    t_out = np.empty(n)
    states = np.empty((n, 4))
    u_out = np.empty(n)
    law_out = np.empty(n, dtype=np.int64)
    a1_out = np.empty(n)
    err_out = np.empty(n)
    abscos_out = np.empty(n)

    x = tuple(sc.initial_state)
    two_b = 2.0 * p.B
    warned_regime = False
    for k in range(n):
        t = k * h
        law_id = supervisor(x, sc.thresholds)
        law, gains = table[law_id]
        v = outer_loop_v(x, ref, t, law, gains, p)
        try:
            u = apply_law(law_id, x, v, p)
        except ArithmeticError as exc:
            raise IntegrationError(f"control failed at t={t:.6f}: {exc}", t) from exc

        t_out[k] = t
        states[k] = x
        u_out[k] = u
        law_out[k] = law_id
        a1_out[k] = two_b * x[0] * x[3]
        err_out[k] = x[0] - ref.value(t)
        abscos_out[k] = abs(math.cos(x[2]))

        if not warned_regime and abs(x[2]) > math.pi:
            warnings.warn(
                f"beam angle |x3| exceeded pi at t={t:.3f}s; the planar model "
                "has left its meaningful regime",
                stacklevel=2,
            )
            warned_regime = True

        if k + 1 < n:
            try:
                x = rk4_step(lambda s: reduced_dynamics(s, u, p), x, h)
            except IntegrationError as exc:
                raise IntegrationError(f"{exc} at t={t + h:.6f}", t + h) from exc
            except (ValueError, OverflowError) as exc:
                # a stage state overflowed before the finiteness check
                raise IntegrationError(
                    f"integration failed at t={t + h:.6f}: {exc}", t + h
                ) from exc

    trajectory = Trajectory(
        t=t_out,
        states=states,
        u=u_out,
        law=law_out,
        a1=a1_out,
        error=err_out,
        abscos3=abscos_out,
    )
    return trajectory, _metrics(trajectory, sc)


def _metrics(trajectory: Trajectory, sc: Scenario) -> Metrics:
    tail_start = sc.duration - sc.tail_window
    tail = trajectory.t >= tail_start - 1e-12
    if not np.any(tail):
        tail = np.ones_like(trajectory.t, dtype=bool)
    rms = float(np.sqrt(np.mean(trajectory.error[tail] ** 2)))
    switches = int(np.count_nonzero(np.diff(trajectory.law) != 0))
    total = len(trajectory)
    dwell = tuple(
        float(np.count_nonzero(trajectory.law == law_id) / total) for law_id in (1, 2, 3)
    )
    return Metrics(
        rms_tail_error=rms,
        max_abs_x3=float(np.max(np.abs(trajectory.states[:, 2]))),
        switch_count=switches,
        min_abs_a1=float(np.min(np.abs(trajectory.a1))),
        dwell_fractions=dwell,
        tail_window=sc.tail_window,
    )


def sweep(scenarios: Iterable[Scenario]) -> list[tuple[Trajectory, Metrics]]:
    """Run scenarios independently, in order.

    Each run is a pure function of its scenario, so results do not depend
    on execution order; callers wanting per-scenario fault isolation
    should wrap individual `run` calls instead.
    """
    return [run(sc) for sc in scenarios]


# ---------------------------------------------------------------------------
# scenario (de)serialisation

_PLANT_KEYS = {"M", "R", "J", "J_b", "G"}
_REFERENCE_KEYS = {"amplitude", "period"}
_THRESHOLD_KEYS = {"eps1", "eps4"}
_POLE_KEYS = {"law1", "law2", "law3"}
_TOP_KEYS = {
    "plant",
    "initial_state",
    "reference",
    "thresholds",
    "poles",
    "step",
    "duration",
    "tail_window",
}


def _require_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(f"{where} must be an object")
    return value


def _check_keys(mapping: dict, allowed: set[str], required: set[str], where: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise ScenarioError(f"unknown key '{key}' in {where}")
    for key in required:
        if key not in mapping:
            raise ScenarioError(f"missing key '{key}' in {where}")


def _number(mapping: dict, key: str, where: str) -> float:
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"key '{key}' in {where} must be a number")
    return float(value)


def scenario_from_dict(data: dict) -> Scenario:
    data = _require_mapping(data, "scenario")
    _check_keys(data, _TOP_KEYS, _TOP_KEYS - {"tail_window"}, "scenario")

    plant_map = _require_mapping(data["plant"], "plant")
    _check_keys(plant_map, _PLANT_KEYS, _PLANT_KEYS - {"G"}, "plant")
    try:
        plant = PlantParams(
            M=_number(plant_map, "M", "plant"),
            R=_number(plant_map, "R", "plant"),
            J=_number(plant_map, "J", "plant"),
            Jb=_number(plant_map, "J_b", "plant"),
            G=_number(plant_map, "G", "plant") if "G" in plant_map else 9.81,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None

    state = data["initial_state"]
    if not isinstance(state, list) or len(state) != 4:
        raise ScenarioError("initial_state must be a list of 4 numbers")
    for v in state:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioError("initial_state must be a list of 4 numbers")

    ref_map = _require_mapping(data["reference"], "reference")
    _check_keys(ref_map, _REFERENCE_KEYS, _REFERENCE_KEYS, "reference")
    th_map = _require_mapping(data["thresholds"], "thresholds")
    _check_keys(th_map, _THRESHOLD_KEYS, _THRESHOLD_KEYS, "thresholds")
    pole_map = _require_mapping(data["poles"], "poles")
    _check_keys(pole_map, _POLE_KEYS, _POLE_KEYS, "poles")

    try:
        reference = TrackingReference(
            amplitude=_number(ref_map, "amplitude", "reference"),
            period=_number(ref_map, "period", "reference"),
        )
        thresholds = SwitchThresholds(
            eps1=_number(th_map, "eps1", "thresholds"),
            eps4=_number(th_map, "eps4", "thresholds"),
        )
        return Scenario(
            plant=plant,
            initial_state=tuple(float(v) for v in state),
            reference=reference,
            thresholds=thresholds,
            pole_law1=_number(pole_map, "law1", "poles"),
            pole_law2=_number(pole_map, "law2", "poles"),
            pole_law3=_number(pole_map, "law3", "poles"),
            step=_number(data, "step", "scenario"),
            duration=_number(data, "duration", "scenario"),
            tail_window=(
                _number(data, "tail_window", "scenario")
                if "tail_window" in data
                else DEFAULT_TAIL_WINDOW
            ),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "plant": {
            "M": sc.plant.M,
            "R": sc.plant.R,
            "J": sc.plant.J,
            "J_b": sc.plant.Jb,
            "G": sc.plant.G,
        },
        "initial_state": list(sc.initial_state),
        "reference": {
            "amplitude": sc.reference.amplitude,
            "period": sc.reference.period,
        },
        "thresholds": {"eps1": sc.thresholds.eps1, "eps4": sc.thresholds.eps4},
        "poles": {"law1": sc.pole_law1, "law2": sc.pole_law2, "law3": sc.pole_law3},
        "step": sc.step,
        "duration": sc.duration,
        "tail_window": sc.tail_window,
    }


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as stream:
            data = json.load(stream)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid JSON: {exc}") from None
    return scenario_from_dict(data)
