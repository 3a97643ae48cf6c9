"""Time stepper behaviour: fixed points, exact decay rates, symmetries,
subspace confinement, and the failure modes that must raise loudly.
"""

import numpy as np
import pytest

from thermoflow import diagnostics, operators as ops
from thermoflow.dynamics import (
    HeatForm,
    SimConfig,
    State,
    check_galerkin_bound,
    project_galerkin,
    run,
    step_coupled,
    step_heat_tau,
    step_heat_theta,
    total_modes,
)
from thermoflow.elliptic import SolverSpec, dirichlet_eigenvalues, neumann_eigenvalues
from thermoflow.errors import (
    DivergenceError,
    InvalidInputError,
    PositivityError,
    ThermoflowError,
    TimeStepTooLargeError,
)
from thermoflow.grid import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField, boundary_mask


SPECTRAL = SolverSpec(method="spectral")


def make_state(grid, v_amp=0.2, theta_amp=0.3, theta_base=1.0, t=0.0):
    """Lowest-mode standing start: u = 0, v = amp sin, theta = base + amp cos."""
    comps = []
    for axis in range(grid.dim):
        x = grid.axis_coords(axis) / grid.lengths[axis]
        vals = np.sin(np.pi * x).reshape([-1 if a == axis else 1 for a in range(grid.dim)])
        vals = v_amp * np.broadcast_to(vals, grid.shape).copy()
        vals[boundary_mask(grid)] = 0.0
        comps.append(ScalarField(grid, vals, DIRICHLET))
    v = VectorField(tuple(comps))
    u = VectorField.zeros(grid)
    x0 = grid.axis_coords(0) / grid.lengths[0]
    th = theta_base + theta_amp * np.cos(np.pi * x0).reshape(
        [-1 if a == 0 else 1 for a in range(grid.dim)]
    )
    theta = ScalarField(grid, np.broadcast_to(th, grid.shape).copy(), NEUMANN)
    return State(t, u, v, theta)


def constant_state(grid, theta_value=2.0):
    return State(
        0.0,
        VectorField.zeros(grid),
        VectorField.zeros(grid),
        ScalarField.constant(grid, theta_value),
    )


# ----------------------------------------------------------- fixed points


def test_uniform_rest_state_is_fixed():
    """u = v = 0 with constant theta must not move at all."""
    g = Grid((65,), (1.0,))
    s = constant_state(g, 1.7)
    cfg = SimConfig(mu=1.0, dt=1e-2, t_end=0.0, solver=SPECTRAL)
    out = step_coupled(s, cfg)
    assert np.all(out.u.components[0].values == 0.0)
    assert np.all(out.v.components[0].values == 0.0)
    assert np.max(np.abs(out.theta.values - 1.7)) < 1e-13
    assert out.t == s.t + cfg.dt


def test_uniform_rest_state_is_fixed_tau_form():
    g = Grid((33,), (1.0,))
    s = constant_state(g, 0.4)
    cfg = SimConfig(mu=2.0, dt=1e-2, t_end=0.0, heat_form=HeatForm.TAU, solver=SPECTRAL)
    out = step_coupled(s, cfg)
    assert np.max(np.abs(out.theta.values - 0.4)) < 1e-13
    assert np.all(out.v.components[0].values == 0.0)


def test_zero_velocity_heat_decay_rate():
    """At mu = 0 the theta update is pure implicit Euler diffusion, so a
    single cosine mode decays by exactly 1/(1 + dt*lambda_h) per step."""
    g = Grid((65,), (1.0,))
    dt = 1e-2
    x = g.axis_coords(0)
    theta0 = 2.0 + 0.5 * np.cos(np.pi * x)
    s = State(
        0.0,
        VectorField.zeros(g),
        VectorField.zeros(g),
        ScalarField(g, theta0.copy(), NEUMANN),
    )
    cfg = SimConfig(mu=0.0, dt=dt, t_end=0.0, solver=SPECTRAL)
    lam = neumann_eigenvalues(65, g.spacing[0])[1]
    state = s
    for k in range(1, 21):
        state = step_coupled(state, cfg)
        want = 2.0 + 0.5 * np.cos(np.pi * x) / (1.0 + dt * lam) ** k
        assert np.max(np.abs(state.theta.values - want)) < 1e-12
    # diffusion with mirror ghosts conserves thermal content
    assert ops.integrate(state.theta) == pytest.approx(ops.integrate(s.theta), rel=1e-13)


def test_decoupled_wave_energy_invariant():
    """mu = 0 turns the momentum update into plain implicit midpoint, whose
    operator energy is conserved to solver precision."""
    g = Grid((65,), (1.0,))
    s = make_state(g)
    cfg = SimConfig(mu=0.0, dt=1e-3, t_end=0.0, solver=SPECTRAL)
    e0 = diagnostics.wave_energy(s.u, s.v)
    state = s
    for _ in range(200):
        state = step_coupled(state, cfg)
    e1 = diagnostics.wave_energy(state.u, state.v)
    assert abs(e1 - e0) / e0 < 1e-12


# ------------------------------------------------------------- symmetries


def test_velocity_sign_flip_symmetry():
    """(u, v, mu) -> (-u, -v, -mu) leaves theta bitwise unchanged and negates
    the wave variables: every sign flip passes through the linear solves
    exactly."""
    g = Grid((49,), (1.0,))
    cfg_p = SimConfig(mu=1.3, dt=2e-3, t_end=0.0, solver=SPECTRAL)
    cfg_m = SimConfig(mu=-1.3, dt=2e-3, t_end=0.0, solver=SPECTRAL)
    sp = make_state(g)
    sm = State(
        0.0,
        VectorField(tuple(ScalarField(g, -c.values, DIRICHLET) for c in sp.u.components)),
        VectorField(tuple(ScalarField(g, -c.values, DIRICHLET) for c in sp.v.components)),
        sp.theta.copy(),
    )
    for _ in range(25):
        sp = step_coupled(sp, cfg_p)
        sm = step_coupled(sm, cfg_m)
    assert np.array_equal(sp.theta.values, sm.theta.values)
    assert np.array_equal(sp.v.components[0].values, -sm.v.components[0].values)
    assert np.array_equal(sp.u.components[0].values, -sm.u.components[0].values)


def test_trajectory_deterministic():
    g = Grid((33,), (1.0,))
    cfg = SimConfig(mu=1.0, dt=1e-3, t_end=0.05, solver=SPECTRAL)
    a = run(make_state(g), cfg)
    b = run(make_state(g), cfg)
    assert np.array_equal(a.theta.values, b.theta.values)
    assert np.array_equal(a.u.components[0].values, b.u.components[0].values)
    assert np.array_equal(a.v.components[0].values, b.v.components[0].values)


# ---------------------------------------------------------------- tau form


def test_tau_form_entropy_monotone():
    g = Grid((65,), (1.0,))
    cfg = SimConfig(mu=1.0, dt=1e-3, t_end=0.2, heat_form=HeatForm.TAU, solver=SPECTRAL)
    entropies = []
    run(make_state(g), cfg, sink=lambda r: entropies.append(r.entropy))
    diffs = np.diff(entropies)
    assert len(entropies) > 100
    assert np.min(diffs) > -1e-12


def test_tau_form_positive_by_construction():
    # start barely above zero; exp(tau) cannot cross it
    g = Grid((33,), (1.0,))
    x = g.axis_coords(0)
    theta = ScalarField(g, 0.02 + 0.015 * np.cos(np.pi * x), NEUMANN)
    s = State(0.0, VectorField.zeros(g), VectorField.zeros(g), theta)
    cfg = SimConfig(mu=1.0, dt=1e-3, t_end=0.05, heat_form=HeatForm.TAU, solver=SPECTRAL)
    out = run(s, cfg)
    assert np.min(out.theta.values) > 0.0


def test_tau_cfl_warning():
    g = Grid((65,), (1.0,))
    x = g.axis_coords(0)
    theta = ScalarField(g, np.exp(7.3 * np.cos(np.pi * x)), NEUMANN)
    s = State(0.0, VectorField.zeros(g), VectorField.zeros(g), theta)
    cfg = SimConfig(mu=0.0, dt=1e-3, t_end=0.0, heat_form=HeatForm.TAU, solver=SPECTRAL)
    div_zero = ScalarField.zeros(g, NEUMANN)
    with pytest.warns(RuntimeWarning, match="grad tau"):
        step_heat_tau(s, div_zero, cfg)


def test_tau_overflow_raises_divergence_error():
    g = Grid((17,), (1.0,))
    s = State(
        0.0,
        VectorField.zeros(g),
        VectorField.zeros(g),
        ScalarField.constant(g, 1e300),
    )
    cfg = SimConfig(mu=1.0, dt=1e-2, t_end=0.0, heat_form=HeatForm.TAU, solver=SPECTRAL)
    # constant positive divergence pumps log-theta over the overflow guard
    div = ScalarField.constant(g, 20.0 / (cfg.dt * cfg.mu))
    with pytest.raises(DivergenceError):
        step_heat_tau(s, div, cfg)


# ------------------------------------------------------------ failure modes


def test_state_rejects_nonpositive_theta():
    g = Grid((17,), (1.0,))
    vals = np.ones(17)
    vals[5] = -0.25
    with pytest.raises(PositivityError) as exc:
        State(
            0.0,
            VectorField.zeros(g),
            VectorField.zeros(g),
            ScalarField(g, vals, NEUMANN),
        )
    assert exc.value.index == (5,)
    assert exc.value.value == -0.25


def test_state_rejects_wrong_theta_tag():
    g = Grid((17,), (1.0,))
    with pytest.raises(InvalidInputError):
        State(
            0.0,
            VectorField.zeros(g),
            VectorField.zeros(g),
            ScalarField.constant(g, 1.0, DIRICHLET),
        )


def test_state_rejects_nonzero_dirichlet_boundary():
    g = Grid((17,), (1.0,))
    vals = np.zeros(17)
    vals[0] = 1e-16
    bad = VectorField((ScalarField(g, vals, DIRICHLET),))
    with pytest.raises(InvalidInputError):
        State(0.0, bad, VectorField.zeros(g), ScalarField.constant(g, 1.0))


def test_theta_form_degenerate_weight_raises():
    g = Grid((33,), (1.0,))
    s = constant_state(g)
    cfg = SimConfig(mu=1.0, dt=0.1, t_end=0.0, solver=SPECTRAL)
    # s = 2/(dt*mu) sends the predictor weight denominator to zero
    div = ScalarField.constant(g, 2.0 / (cfg.dt * cfg.mu))
    with pytest.raises(TimeStepTooLargeError):
        step_heat_theta(s, div, cfg)


def test_run_prefixes_step_index_on_failure():
    g = Grid((33,), (1.0,))
    x = g.axis_coords(0)
    v_vals = 500.0 * np.sin(np.pi * x)
    v_vals[0] = v_vals[-1] = 0.0
    s = State(
        0.0,
        VectorField.zeros(g),
        VectorField((ScalarField(g, v_vals, DIRICHLET),)),
        ScalarField.constant(g, 1.0),
    )
    cfg = SimConfig(mu=10.0, dt=0.05, t_end=1.0, solver=SPECTRAL)
    with pytest.raises(ThermoflowError, match=r"^step 1 \(t = 0\.05\)"):
        run(s, cfg)


def test_sim_config_validation():
    with pytest.raises(InvalidInputError):
        SimConfig(dt=0.0)
    with pytest.raises(InvalidInputError):
        SimConfig(t_end=-1.0)
    with pytest.raises(InvalidInputError):
        SimConfig(record_every=0)
    with pytest.raises(InvalidInputError):
        SimConfig(galerkin_modes=0)
    with pytest.raises(InvalidInputError):
        SimConfig(heat_form="theta")
    with pytest.raises(InvalidInputError):
        SimConfig(mu=float("nan"))


# ------------------------------------------------------------------ driver


def test_run_zero_horizon_emits_one_record():
    g = Grid((17,), (1.0,))
    records = []
    out = run(constant_state(g), SimConfig(t_end=0.0, solver=SPECTRAL), sink=records.append)
    assert len(records) == 1
    assert records[0].t == 0.0
    assert out.t == 0.0


def test_run_emission_cadence():
    g = Grid((17,), (1.0,))
    cfg = SimConfig(mu=0.0, dt=0.1, t_end=1.0, record_every=3, solver=SPECTRAL)
    times = []
    run(constant_state(g), cfg, observer=lambda s: times.append(round(s.t, 10)))
    assert times == [0.0, 0.3, 0.6, 0.9, 1.0]


def test_run_sink_and_observer_see_same_instants():
    g = Grid((17,), (1.0,))
    cfg = SimConfig(mu=0.0, dt=0.1, t_end=0.5, record_every=2, solver=SPECTRAL)
    sink_t, obs_t = [], []
    run(
        constant_state(g),
        cfg,
        sink=lambda r: sink_t.append(r.t),
        observer=lambda s: obs_t.append(s.t),
    )
    assert sink_t == obs_t


def test_run_does_not_mutate_input():
    g = Grid((17,), (1.0,))
    s = make_state(g)
    before = s.theta.values.copy()
    run(s, SimConfig(dt=1e-2, t_end=0.05, solver=SPECTRAL))
    assert np.array_equal(s.theta.values, before)
    assert s.t == 0.0


# ---------------------------------------------------------------- galerkin


def test_total_modes_counts_interior():
    assert total_modes(Grid((65,), (1.0,))) == 63
    assert total_modes(Grid((9, 9), (1.0, 1.0))) == 49


def test_projection_idempotent():
    g = Grid((33,), (1.0,))
    s = make_state(g)
    once = project_galerkin(s.v, 5)
    twice = project_galerkin(once, 5)
    assert np.max(np.abs(once.components[0].values - twice.components[0].values)) < 1e-13


def test_projection_with_all_modes_is_identity():
    g = Grid((33,), (1.0,))
    s = make_state(g, v_amp=0.7)
    full = project_galerkin(s.v, total_modes(g))
    assert np.max(np.abs(full.components[0].values - s.v.components[0].values)) < 1e-12


def test_projection_filters_high_mode():
    g = Grid((65,), (1.0,))
    x = g.axis_coords(0)
    vals = np.sin(np.pi * x) + 0.4 * np.sin(3 * np.pi * x)
    vals[0] = vals[-1] = 0.0
    w = VectorField((ScalarField(g, vals, DIRICHLET),))
    kept = project_galerkin(w, 2)  # modes k = 1, 2 survive; k = 3 dies
    want = np.sin(np.pi * x)
    want[0] = want[-1] = 0.0
    assert np.max(np.abs(kept.components[0].values - want)) < 1e-12


def test_projection_mode_order_by_eigenvalue():
    """In 2D the first mode is (1,1) and the next two are (1,2)/(2,1)."""
    g = Grid((17, 17), (1.0, 1.0))
    xx, yy = g.meshgrid()

    def mode(i, j):
        m = np.sin(i * np.pi * xx) * np.sin(j * np.pi * yy)
        m[boundary_mask(g)] = 0.0
        return m

    w = VectorField(
        (
            ScalarField(g, mode(1, 1) + mode(2, 2), DIRICHLET),
            ScalarField.zeros(g, DIRICHLET),
        )
    )
    kept = project_galerkin(w, 3)
    # (2,2) has a larger eigenvalue sum than (1,2) and (2,1), so it is cut
    assert np.max(np.abs(kept.components[0].values - mode(1, 1))) < 1e-12


def test_projection_range_check():
    g = Grid((17,), (1.0,))
    s = make_state(g)
    with pytest.raises(InvalidInputError):
        project_galerkin(s.v, 0)
    with pytest.raises(InvalidInputError):
        project_galerkin(s.v, total_modes(g) + 1)


def test_galerkin_bound_checked():
    g = Grid((17,), (1.0,))
    cfg = SimConfig(galerkin_modes=16, solver=SPECTRAL)
    with pytest.raises(InvalidInputError):
        check_galerkin_bound(g, cfg)
    with pytest.raises(InvalidInputError):
        run(make_state(g), cfg)


def test_galerkin_run_stays_in_subspace():
    """After stepping with n modes, re-projecting the wave variables onto
    the same subspace must be a no-op."""
    g = Grid((33,), (1.0,))
    cfg = SimConfig(mu=1.0, dt=1e-3, t_end=0.02, galerkin_modes=3, solver=SPECTRAL)
    out = run(make_state(g), cfg)
    for w in (out.u, out.v):
        again = project_galerkin(w, 3)
        for c_out, c_again in zip(w.components, again.components):
            assert np.max(np.abs(c_out.values - c_again.values)) < 1e-12


def test_galerkin_single_mode_dispersion():
    """One retained mode oscillates at the discrete frequency
    sqrt(lambda_h/(1+lambda_h)) of that mode, untouched by truncation."""
    g = Grid((65,), (1.0,))
    dt = 1e-3
    cfg = SimConfig(mu=0.0, dt=dt, t_end=0.0, galerkin_modes=1, solver=SPECTRAL)
    s = make_state(g, v_amp=1.0, theta_amp=0.0)
    lam = dirichlet_eigenvalues(65, g.spacing[0])[0]
    omega = np.sqrt(lam / (1.0 + lam))
    state = s
    n = 500
    for _ in range(n):
        state = step_coupled(state, cfg)
    x = g.axis_coords(0)
    basis = np.sin(np.pi * x)
    amp = np.dot(state.u.components[0].values, basis) / np.dot(basis, basis)
    # the implicit midpoint phase error over n steps stays tiny at this dt
    want = np.sin(omega * n * dt) / omega
    assert amp == pytest.approx(want, rel=1e-5)
