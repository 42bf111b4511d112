"""Chain Hamiltonian construction and driving schedules."""

import numpy as np
import pytest

from entwit import (
    ConfigError,
    DMParams,
    DrivingSchedule,
    QubitRegister,
    XXZParams,
    build_dm_term,
    build_xxz,
    build_w_state,
    embed_operator,
    hamiltonian_at,
    params_at,
    schedule_from_config,
    total_sz,
    xxz_params_from_config,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def bond_term(reg, l, m, J, Jz):
    xx = embed_operator(reg, np.kron(SX, SX), (l, m))
    yy = embed_operator(reg, np.kron(SY, SY), (l, m))
    zz = embed_operator(reg, np.kron(SZ, SZ), (l, m))
    return -0.5 * J * (xx + yy) - Jz * zz


def test_two_site_open_closed_form():
    params = XXZParams(2, J=1.3, Jz=0.4, B=0.25, boundary="open")
    reg = QubitRegister(2)
    expected = bond_term(reg, 1, 2, 1.3, 0.4)
    expected -= 0.25 * total_sz(reg).entries
    assert np.max(np.abs(build_xxz(params).entries - expected)) < 1e-14


def test_periodic_adds_wrap_bond():
    open_h = build_xxz(XXZParams(3, J=0.9, Jz=0.2, B=0.0, boundary="open"))
    per_h = build_xxz(XXZParams(3, J=0.9, Jz=0.2, B=0.0, boundary="periodic"))
    wrap = bond_term(QubitRegister(3), 3, 1, 0.9, 0.2)
    assert np.max(np.abs(per_h.entries - open_h.entries - wrap)) < 1e-14


def test_two_site_periodic_doubles_the_bond():
    # on two sites the wrap bond coincides with the open bond
    open_h = build_xxz(XXZParams(2, J=1.0, Jz=0.3, B=0.0, boundary="open"))
    per_h = build_xxz(XXZParams(2, J=1.0, Jz=0.3, B=0.0, boundary="periodic"))
    assert np.max(np.abs(per_h.entries - 2 * open_h.entries)) < 1e-14


@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_magnetization_is_conserved(boundary):
    h = build_xxz(XXZParams(4, J=1.0, Jz=0.7, B=0.31, boundary=boundary))
    sz = total_sz(QubitRegister(4))
    comm = h.entries @ sz.entries - sz.entries @ h.entries
    assert np.max(np.abs(comm)) < 1e-12


def test_w_state_is_ground_state_of_final_hamiltonian():
    # at Jz = 0 with a moderate field the one-flip sector wins and the
    # symmetric combination is the ground state
    h = build_xxz(XXZParams(3, J=1.0, Jz=0.0, B=0.5))
    vals, vecs = np.linalg.eigh(h.entries)
    w = build_w_state(3)
    overlap = vecs[:, 0].conj() @ w.entries @ vecs[:, 0]
    assert abs(overlap.real - 1.0) < 1e-12
    assert abs(vals[0] - (-2.5)) < 1e-12  # -2J - B(n-2)


def test_w7_ground_energy():
    h = build_xxz(XXZParams(7, J=1.0, Jz=0.0, B=0.92))
    vals = np.linalg.eigvalsh(h.entries)
    assert abs(vals[0] - (-2.0 - 0.92 * 5)) < 1e-12


def test_dm_term_structure():
    reg = QubitRegister(2)
    got = build_dm_term(reg, DMParams(d_z=0.6), boundary="open")
    xy = embed_operator(reg, np.kron(SX, SY), (1, 2))
    yx = embed_operator(reg, np.kron(SY, SX), (1, 2))
    assert np.max(np.abs(got.entries - 0.6 * (xy - yx))) < 1e-14


def test_dm_term_breaks_nothing_when_zero():
    reg = QubitRegister(3)
    got = build_dm_term(reg, DMParams(), boundary="periodic")
    assert np.max(np.abs(got.entries)) == 0.0


# ---------------------------------------------------------------- schedules

def make_schedule(steps=10):
    return DrivingSchedule(
        XXZParams(3, J=1.0, Jz=0.5, B=0.0),
        XXZParams(3, J=1.0, Jz=0.0, B=0.5),
        t_f=2.0,
        steps=steps,
    )


def test_params_at_endpoints_and_midpoint():
    sched = make_schedule()
    assert params_at(sched, 0.0) == sched.initial
    assert params_at(sched, 2.0) == sched.final
    mid = params_at(sched, 1.0)
    assert abs(mid.Jz - 0.25) < 1e-15 and abs(mid.B - 0.25) < 1e-15


def test_params_at_rejects_out_of_range():
    sched = make_schedule()
    with pytest.raises(ValueError):
        params_at(sched, -0.1)
    with pytest.raises(ValueError):
        params_at(sched, 2.1)


def test_quench_returns_final_immediately():
    sched = DrivingSchedule(
        XXZParams(2, 1.0, 0.3, 0.0),
        XXZParams(2, 1.0, 0.0, 0.4),
        interpolation="quench-at-start",
    )
    assert params_at(sched, 0.0) == sched.final


def test_hamiltonian_at_uses_left_endpoint():
    sched = make_schedule(steps=4)
    h0 = hamiltonian_at(sched, 0)
    expected = build_xxz(sched.initial)
    assert np.max(np.abs(h0.entries - expected.entries)) < 1e-14
    h_last = hamiltonian_at(sched, 3)
    expected_last = build_xxz(params_at(sched, 1.5))
    assert np.max(np.abs(h_last.entries - expected_last.entries)) < 1e-14


def test_hamiltonian_at_step_bounds():
    sched = make_schedule(steps=4)
    with pytest.raises(ValueError):
        hamiltonian_at(sched, 4)
    with pytest.raises(ValueError):
        hamiltonian_at(sched, -1)


def test_schedule_rejects_mismatched_registers():
    with pytest.raises(ValueError):
        DrivingSchedule(XXZParams(2, 1.0, 0.0, 0.0), XXZParams(3, 1.0, 0.0, 0.0))


def test_schedule_rejects_mixed_boundaries():
    with pytest.raises(ValueError):
        DrivingSchedule(
            XXZParams(3, 1.0, 0.0, 0.0, boundary="open"),
            XXZParams(3, 1.0, 0.0, 0.0, boundary="periodic"),
        )


# ---------------------------------------------------------------- config

def test_params_from_config_round_trip():
    payload = {"n": 3, "J": 1.0, "Jz": 0.25, "B": 0.1, "boundary": "open"}
    params = xxz_params_from_config(payload)
    assert params == XXZParams(3, 1.0, 0.25, 0.1, boundary="open")


def test_params_from_config_unknown_key_names_path():
    payload = {"n": 3, "J": 1.0, "Jz": 0.25, "B": 0.1, "typo": 1}
    with pytest.raises(ConfigError, match="params"):
        xxz_params_from_config(payload)


def test_params_from_config_missing_key():
    with pytest.raises(ConfigError, match="Jz"):
        xxz_params_from_config({"n": 3, "J": 1.0, "B": 0.1})


def test_params_from_config_bad_boundary():
    payload = {"n": 3, "J": 1.0, "Jz": 0.0, "B": 0.0, "boundary": "twisted"}
    with pytest.raises(ConfigError):
        xxz_params_from_config(payload)


def test_schedule_from_config():
    payload = {
        "initial": {"n": 2, "J": 1.0, "Jz": 0.5, "B": 0.0},
        "final": {"n": 2, "J": 1.0, "Jz": 0.0, "B": 0.5},
        "t_f": 0.5,
        "steps": 16,
    }
    sched = schedule_from_config(payload)
    assert sched.steps == 16 and sched.t_f == 0.5
    with pytest.raises(ConfigError, match="schedule"):
        schedule_from_config({**payload, "oops": True})
