"""XXZ chains in a transverse field, with optional Dzyaloshinskii-Moriya term,
and linear driving schedules between two parameter sets.

The Hamiltonian built here is

    H = - sum_l [ (J/2)(sx_l sx_{l+1} + sy_l sy_{l+1}) + Jz sz_l sz_{l+1} + B sz_l ]

with the two-site sum wrapping around for periodic chains (the l = n bond is
dropped for open ones) and the field always running over all n sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .operators import (
    HermitianOperator,
    QubitRegister,
    embed_pauli,
)

BOUNDARIES = ("periodic", "open")
INTERPOLATIONS = ("linear", "quench-at-start")


@dataclass(frozen=True)
class XXZParams:
    """Chain parameters: size, in-plane coupling J, axial coupling Jz, field B."""

    n: int
    J: float
    Jz: float
    B: float
    boundary: str = "periodic"

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"chain needs at least two sites, got n={self.n!r}")
        for name in ("J", "Jz", "B"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(
                f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}"
            )


@dataclass(frozen=True)
class DMParams:
    """Dzyaloshinskii-Moriya vector D for the bond term D . (sigma_l x sigma_{l+1})."""

    d_x: float = 0.0
    d_y: float = 0.0
    d_z: float = 0.0

    def __post_init__(self) -> None:
        for name in ("d_x", "d_y", "d_z"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class DrivingSchedule:
    """Piecewise protocol from ``initial`` to ``final`` parameters over t_f.

    ``steps`` slices of width dt = t_f/steps; interpolation is either a linear
    parameter ramp or a quench at t = 0 (final parameters for every t > 0).
    """

    initial: XXZParams
    final: XXZParams
    t_f: float = 1.0
    steps: int = 1000
    interpolation: str = "linear"

    def __post_init__(self) -> None:
        if self.initial.n != self.final.n:
            raise ValueError("schedule endpoints must share the chain size")
        if self.initial.boundary != self.final.boundary:
            raise ValueError("schedule endpoints must share the boundary condition")
        if not isinstance(self.steps, int) or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if not math.isfinite(self.t_f) or self.t_f < 0:
            raise ValueError(f"t_f must be finite and non-negative, got {self.t_f!r}")
        if self.interpolation not in INTERPOLATIONS:
            raise ValueError(
                f"interpolation must be one of {INTERPOLATIONS}, got {self.interpolation!r}"
            )

    @property
    def dt(self) -> float:
        return self.t_f / self.steps

    @property
    def n(self) -> int:
        return self.initial.n


def build_xxz(params: XXZParams) -> HermitianOperator:
    """Dense Hamiltonian matrix for the given chain parameters."""
    n = params.n
    register = QubitRegister(n)
    sx = [embed_pauli(register, site, "x").entries for site in register.sites()]
    sy = [embed_pauli(register, site, "y").entries for site in register.sites()]
    sz = [embed_pauli(register, site, "z").entries for site in register.sites()]
    h = np.zeros((register.dim, register.dim), dtype=np.complex128)
    last_bond = n if params.boundary == "periodic" else n - 1
    for l in range(last_bond):
        m = (l + 1) % n
        h -= 0.5 * params.J * (sx[l] @ sx[m] + sy[l] @ sy[m])
        h -= params.Jz * (sz[l] @ sz[m])
    for l in range(n):
        h -= params.B * sz[l]
    return HermitianOperator(register, h)


def build_dm_term(
    register: QubitRegister, dm: DMParams, boundary: str = "periodic"
) -> HermitianOperator:
    """Bond-summed D . (sigma_l x sigma_{l+1}); add it to a chain Hamiltonian."""
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    n = register.n
    if n < 2:
        raise ValueError("the Dzyaloshinskii-Moriya term needs at least two sites")
    sx = [embed_pauli(register, site, "x").entries for site in register.sites()]
    sy = [embed_pauli(register, site, "y").entries for site in register.sites()]
    sz = [embed_pauli(register, site, "z").entries for site in register.sites()]
    h = np.zeros((register.dim, register.dim), dtype=np.complex128)
    last_bond = n if boundary == "periodic" else n - 1
    for l in range(last_bond):
        m = (l + 1) % n
        h += dm.d_x * (sy[l] @ sz[m] - sz[l] @ sy[m])
        h += dm.d_y * (sz[l] @ sx[m] - sx[l] @ sz[m])
        h += dm.d_z * (sx[l] @ sy[m] - sy[l] @ sx[m])
    return HermitianOperator(register, h)


def total_sz(register: QubitRegister) -> HermitianOperator:
    """Total magnetization sum_l sz_l (the U(1) charge of the XXZ chain)."""
    h = np.zeros((register.dim, register.dim), dtype=np.complex128)
    for site in register.sites():
        h += embed_pauli(register, site, "z").entries
    return HermitianOperator(register, h)


def params_at(schedule: DrivingSchedule, t: float) -> XXZParams:
    """Interpolated chain parameters at time ``t`` in [0, t_f]."""
    if not 0 <= t <= schedule.t_f * (1 + 1e-12) + 1e-15:
        raise ValueError(f"t={t} outside the schedule window [0, {schedule.t_f}]")
    initial, final = schedule.initial, schedule.final
    if schedule.interpolation == "quench-at-start":
        return final
    frac = 0.0 if schedule.t_f == 0 else min(t / schedule.t_f, 1.0)
    return XXZParams(
        n=initial.n,
        J=initial.J + frac * (final.J - initial.J),
        Jz=initial.Jz + frac * (final.Jz - initial.Jz),
        B=initial.B + frac * (final.B - initial.B),
        boundary=initial.boundary,
    )


def hamiltonian_at(schedule: DrivingSchedule, step: int) -> HermitianOperator:
    """Hamiltonian at the left endpoint of slice ``step`` (0 <= step < steps)."""
    if not isinstance(step, int) or not 0 <= step < schedule.steps:
        raise ValueError(f"step must lie in 0..{schedule.steps - 1}, got {step!r}")
    return build_xxz(params_at(schedule, step * schedule.dt))


def xxz_params_from_config(payload: dict, path: str = "params") -> XXZParams:
    """Strictly parse an XXZParams block from JSON config data."""
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: expected an object with keys n, J, Jz, B, boundary")
    allowed = {"n", "J", "Jz", "B", "boundary"}
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("n", "J", "Jz", "B"):
        if key not in payload:
            raise ConfigError(f"{path}: missing required key {key!r}")
    try:
        return XXZParams(
            n=payload["n"],
            J=float(payload["J"]),
            Jz=float(payload["Jz"]),
            B=float(payload["B"]),
            boundary=payload.get("boundary", "periodic"),
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: {err}") from err


def schedule_from_config(payload: dict, path: str = "schedule") -> DrivingSchedule:
    """Strictly parse a DrivingSchedule block from JSON config data."""
    if not isinstance(payload, dict):
        raise ConfigError(
            f"{path}: expected an object with keys initial, final, t_f, steps, interpolation"
        )
    allowed = {"initial", "final", "t_f", "steps", "interpolation"}
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("initial", "final"):
        if key not in payload:
            raise ConfigError(f"{path}: missing required key {key!r}")
    initial = xxz_params_from_config(payload["initial"], f"{path}.initial")
    final = xxz_params_from_config(payload["final"], f"{path}.final")
    try:
        return DrivingSchedule(
            initial=initial,
            final=final,
            t_f=float(payload.get("t_f", 1.0)),
            steps=payload.get("steps", 1000),
            interpolation=payload.get("interpolation", "linear"),
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: {err}") from err
