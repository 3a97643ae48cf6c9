"""The verification lab: structural checks, their negative controls, and the
inequality sampler.

Synthetic DiagnosticsRecord sequences drive the record-based checks so the
pass and fail branches are both exercised without long simulations.
"""

import math

import numpy as np
import pytest

from thermoflow import verify
from thermoflow.dynamics import HeatForm, SimConfig, State
from thermoflow.diagnostics import DiagnosticsRecord
from thermoflow.elliptic import SolverSpec
from thermoflow.errors import InvalidInputError, PositivityError
from thermoflow.grid import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField, boundary_mask
from thermoflow.verify import (
    FISHER_HESSIAN_CONSTANT,
    CheckReport,
    check_boundedness,
    check_convergence_to_equilibrium,
    check_energy_balance,
    check_entropy_balance,
    check_fisher_hessian_inequality,
    check_stability,
    fisher_hessian_ensemble,
    fisher_hessian_ratio,
    hessian_allowance,
    make_field_draws,
    predicted_equilibrium,
    run_suite,
    sample_positive_field,
)


SPECTRAL = SolverSpec(method="spectral")


def synth_record(t, energy=1.0, entropy=0.0, production=0.0, u_h1=0.0, v_h1=0.0,
                 theta_l2=1.0, theta_min=1.0, theta_max=1.0, higher=1.0):
    return DiagnosticsRecord(
        t=t,
        energy=energy,
        entropy=entropy,
        entropy_production=production,
        fisher=0.0,
        higher_functional=higher,
        theta_min=theta_min,
        theta_max=theta_max,
        u_h1=u_h1,
        v_h1=v_h1,
        theta_l2=theta_l2,
        lp_norms=(theta_l2,) * 5,
    )


def reference_state(n=65):
    g = Grid((n,), (1.0,))
    x = g.axis_coords(0)
    v_vals = 0.2 * np.sin(np.pi * x)
    v_vals[0] = v_vals[-1] = 0.0
    return State(
        0.0,
        VectorField.zeros(g),
        VectorField((ScalarField(g, v_vals, DIRICHLET),)),
        ScalarField(g, 1.0 + 0.3 * np.cos(np.pi * x), NEUMANN),
    )


# -------------------------------------------------------------- predictions


def test_constant_prediction_exact():
    g = Grid((33,), (1.0,))
    s = State(0.0, VectorField.zeros(g), VectorField.zeros(g), ScalarField.constant(g, 2.0))
    pred = predicted_equilibrium(s)
    assert pred.theta_inf == pytest.approx(2.0, rel=1e-14)
    assert pred.omega_measure == 1.0


def test_prediction_includes_wave_energy():
    g = Grid((257,), (1.0,))
    x = g.axis_coords(0)
    v = np.sin(np.pi * x)
    v[0] = v[-1] = 0.0
    s = State(
        0.0,
        VectorField.zeros(g),
        VectorField((ScalarField(g, v, DIRICHLET),)),
        ScalarField.constant(g, 1.0),
    )
    want = 0.25 + np.pi**2 / 4.0 + 1.0
    assert predicted_equilibrium(s).theta_inf == pytest.approx(want, abs=1e-3)


def test_prediction_refines_quadratically():
    exact = 0.25 + np.pi**2 / 4.0 + 1.0

    def err(n):
        g = Grid((n,), (1.0,))
        x = g.axis_coords(0)
        v = np.sin(np.pi * x)
        v[0] = v[-1] = 0.0
        s = State(
            0.0,
            VectorField.zeros(g),
            VectorField((ScalarField(g, v, DIRICHLET),)),
            ScalarField.constant(g, 1.0),
        )
        return abs(predicted_equilibrium(s).theta_inf - exact)

    assert err(65) / err(257) > 10.0


# ------------------------------------------------------------ record checks


def test_energy_balance_flat_passes():
    records = [synth_record(t, energy=2.0) for t in np.linspace(0.0, 10.0, 21)]
    rep = check_energy_balance(records)
    assert rep.passed
    assert rep.measured == 0.0
    assert rep.threshold == pytest.approx(1e-4)


def test_energy_balance_drift_fails():
    records = [synth_record(t, energy=2.0 + 1e-3 * t) for t in np.linspace(0.0, 10.0, 21)]
    rep = check_energy_balance(records)
    assert not rep.passed
    assert rep.measured == pytest.approx(5e-3)


def test_energy_balance_needs_two_records():
    with pytest.raises(InvalidInputError):
        check_energy_balance([synth_record(0.0)])


def test_entropy_balance_consistent_records_pass():
    # entropy(t) = t with production identically 1: the trapezoidal
    # integral matches the increment exactly
    records = [synth_record(t, entropy=t, production=1.0) for t in np.linspace(0.0, 4.0, 17)]
    rep = check_entropy_balance(records)
    assert rep.passed
    assert rep.measured < 1e-14


def test_entropy_balance_detects_decrease():
    records = [synth_record(t, entropy=-t * 1e-3, production=0.0)
               for t in np.linspace(0.0, 4.0, 17)]
    rep = check_entropy_balance(records)
    assert not rep.passed
    assert "VIOLATED" in rep.details


def test_entropy_balance_detects_residual():
    records = [synth_record(t, entropy=0.5 * t, production=1.0)
               for t in np.linspace(0.0, 4.0, 17)]
    rep = check_entropy_balance(records)
    assert not rep.passed
    assert rep.measured == pytest.approx(2.0)


def test_boundedness_flat_passes():
    records = [synth_record(t) for t in np.linspace(0.0, 8.0, 16)]
    rep = check_boundedness(records)
    assert rep.passed
    assert "theta floor 1" in rep.details


def test_boundedness_catches_growth():
    records = [
        synth_record(t, theta_max=1.0 if t <= 4.0 else 1.2)
        for t in np.linspace(0.0, 8.0, 16)
    ]
    rep = check_boundedness(records)
    assert not rep.passed
    assert "theta_max" in rep.details


def test_boundedness_catches_lp_growth():
    records = [
        synth_record(t, theta_l2=1.0 if t <= 4.0 else 1.1)
        for t in np.linspace(0.0, 8.0, 16)
    ]
    rep = check_boundedness(records)
    assert not rep.passed
    assert "lp_" in rep.details


def test_boundedness_needs_enough_records():
    with pytest.raises(InvalidInputError):
        check_boundedness([synth_record(0.0), synth_record(1.0)])


def test_convergence_synthetic_decay_passes():
    # decay chosen to end below the thresholds but well above the
    # rounding-noise floor of the theta-deviation reconstruction
    c, vol = 2.0, 1.0
    records = []
    for t in np.linspace(0.0, 10.0, 21):
        amp = 0.5 * math.exp(-0.7 * t)
        wave = 0.5 * (amp**2 + amp**2)
        records.append(
            synth_record(t, energy=c * vol + wave, u_h1=amp, v_h1=amp,
                         theta_l2=math.sqrt(c * c * vol + amp**2))
        )
    pred = verify.EquilibriumPrediction(theta_inf=c, e0=c * vol, omega_measure=vol)
    rep = check_convergence_to_equilibrium(records, pred)
    assert rep.passed
    assert rep.measured <= 1.0


def test_convergence_flags_stalled_wave():
    c, vol = 2.0, 1.0
    records = [
        synth_record(t, energy=c * vol + 0.25, u_h1=0.5, v_h1=0.5, theta_l2=c)
        for t in np.linspace(0.0, 10.0, 21)
    ]
    pred = verify.EquilibriumPrediction(theta_inf=c, e0=c * vol, omega_measure=vol)
    rep = check_convergence_to_equilibrium(records, pred)
    assert not rep.passed


def test_convergence_needs_ten_records():
    pred = verify.EquilibriumPrediction(theta_inf=1.0, e0=1.0, omega_measure=1.0)
    with pytest.raises(InvalidInputError):
        check_convergence_to_equilibrium([synth_record(t) for t in range(5)], pred)


def test_decoupled_run_does_not_converge():
    """mu = 0 negative control: the wave keeps ringing, so the convergence
    check must refuse to pass."""
    from thermoflow.dynamics import run

    init = reference_state(33)
    cfg = SimConfig(mu=0.0, dt=1e-3, t_end=0.1, record_every=10, solver=SPECTRAL)
    records = []
    final = run(init, cfg, sink=records.append)
    rep = check_convergence_to_equilibrium(records, predicted_equilibrium(init), final)
    assert not rep.passed


def test_windowed_envelope_helper():
    down = np.exp(-np.linspace(0.0, 3.0, 40)) * (1.1 + np.sin(np.linspace(0, 20, 40)) * 0.1)
    assert verify._windowed_envelope_decreasing(down)
    up = np.linspace(1.0, 2.0, 40)
    assert not verify._windowed_envelope_decreasing(up)


# ----------------------------------------------------------------- stability


def test_stability_identical_inits_rejected():
    init = reference_state(33)
    cfg = SimConfig(dt=1e-3, t_end=0.05, solver=SPECTRAL)
    with pytest.raises(InvalidInputError, match="coincide"):
        check_stability(cfg, init, init.copy(), horizon=0.05)


def test_stability_linear_response_passes():
    init = reference_state(33)
    g = init.grid
    x = g.axis_coords(0)
    pert = ScalarField(g, init.theta.values + 1e-3 * np.cos(np.pi * x), NEUMANN)
    init_b = State(0.0, init.u.copy(), init.v.copy(), pert)
    cfg = SimConfig(dt=1e-3, t_end=0.05, record_every=10, solver=SPECTRAL)
    rep = check_stability(cfg, init, init_b, horizon=0.05)
    assert rep.passed
    assert rep.direction == "<"
    assert rep.measured < 0.10


def test_stability_grid_mismatch_rejected():
    a = reference_state(33)
    b = reference_state(65)
    cfg = SimConfig(dt=1e-3, t_end=0.05, solver=SPECTRAL)
    with pytest.raises(InvalidInputError):
        check_stability(cfg, a, b, horizon=0.05)


# ------------------------------------------------------- Hessian inequality


def test_constant_reference_value():
    assert FISHER_HESSIAN_CONSTANT == pytest.approx(11.0 / 8.0 + math.sqrt(3.0) / 2.0, rel=1e-15)
    assert FISHER_HESSIAN_CONSTANT == pytest.approx(2.2410254, abs=1e-7)


def test_hessian_allowance_reference_grid():
    assert hessian_allowance(Grid((33, 33, 33), (1.0, 1.0, 1.0))) == pytest.approx(0.05)
    assert hessian_allowance(Grid((65,), (1.0,))) == pytest.approx(0.025)


def test_ratio_for_constant_field_is_nan():
    g = Grid((17,), (1.0,))
    num, den, ratio = fisher_hessian_ratio(ScalarField.constant(g, 3.0))
    assert num == pytest.approx(0.0, abs=1e-20)
    assert math.isnan(ratio)


def test_ratio_requires_positive_field():
    g = Grid((17,), (1.0,))
    vals = np.ones(17)
    vals[8] = -1.0
    with pytest.raises(PositivityError):
        fisher_hessian_ratio(ScalarField(g, vals, NEUMANN))


def test_ratio_perturbative_limit():
    """For phi = 1 + eps*psi the ratio tends to 1/4: D^2 sqrt(phi) and
    D^2 log(phi) are eps/2 * D^2 psi and eps * D^2 psi to leading order."""
    g = Grid((65,), (1.0,))
    x = g.axis_coords(0)
    phi = ScalarField(g, 1.0 + 1e-4 * np.cos(2 * np.pi * x), NEUMANN)
    _, _, ratio = fisher_hessian_ratio(phi)
    assert ratio == pytest.approx(0.25, abs=1e-3)


def test_ratio_against_bare_numpy():
    """Cross-check the 1D ratio with a from-scratch mirror-ghost stencil."""
    g = Grid((33,), (1.0,))
    h = g.spacing[0]
    x = g.axis_coords(0)
    phi_vals = 1.4 + 0.6 * np.cos(np.pi * x) + 0.2 * np.cos(3 * np.pi * x)

    def second(f):
        padded = np.concatenate(([f[1]], f, [f[-2]]))
        return (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / h**2

    w = np.full(33, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    num = float(np.sum(w * second(np.sqrt(phi_vals)) ** 2))
    den = float(np.sum(w * phi_vals * second(np.log(phi_vals)) ** 2))
    got = fisher_hessian_ratio(ScalarField(g, phi_vals, NEUMANN))
    assert got[0] == pytest.approx(num, rel=1e-12)
    assert got[1] == pytest.approx(den, rel=1e-12)
    assert got[2] == pytest.approx(num / den, rel=1e-12)


def test_inequality_constant_field_indeterminate_not_failed():
    g = Grid((9, 9, 9), (1.0, 1.0, 1.0))
    rep = check_fisher_hessian_inequality(ScalarField.constant(g, 1.0))
    assert rep.passed
    assert rep.measured == 0.0
    assert "indeterminate" in rep.details


def test_inequality_low_dimension_reported_only():
    g = Grid((33,), (1.0,))
    x = g.axis_coords(0)
    rep = check_fisher_hessian_inequality(ScalarField(g, 1.0 + 0.8 * np.cos(np.pi * x), NEUMANN))
    assert rep.passed
    assert "reported only" in rep.details
    assert rep.measured > 0.0


def test_inequality_asserted_in_3d():
    g = Grid((17, 17, 17), (1.0, 1.0, 1.0))
    xx, yy, zz = g.meshgrid()
    phi = 1.0 + 0.7 * np.cos(np.pi * xx) * np.cos(np.pi * yy) * np.cos(np.pi * zz)
    rep = check_fisher_hessian_inequality(ScalarField(g, phi, NEUMANN))
    assert rep.passed
    assert rep.measured < FISHER_HESSIAN_CONSTANT


def test_exponential_form_stays_under_constant():
    """exp(a cos cos cos) pushes the ratio off the perturbative branch but
    still far below the proved constant."""
    g = Grid((17, 17, 17), (1.0, 1.0, 1.0))
    xx, yy, zz = g.meshgrid()
    phi = np.exp(1.5 * np.cos(np.pi * xx) * np.cos(np.pi * yy) * np.cos(np.pi * zz))
    rep = check_fisher_hessian_inequality(ScalarField(g, phi, NEUMANN))
    assert rep.passed


# ----------------------------------------------------------------- sampler


def test_draws_deterministic_and_in_range():
    d1 = make_field_draws(20, np.random.default_rng(99))
    d2 = make_field_draws(20, np.random.default_rng(99))
    assert d1 == d2
    for _, eps, c in d1:
        assert 0.5 <= eps <= 0.9
        assert 0.5 <= c <= 2.0


def test_sampled_fields_positive_and_bounded():
    g = Grid((17, 17, 17), (1.0, 1.0, 1.0))
    for draw in make_field_draws(10, np.random.default_rng(3)):
        _, eps, c = draw
        phi = sample_positive_field(g, draw)
        assert np.min(phi.values) > 0.0
        assert np.min(phi.values) >= c * (1.0 - eps) - 1e-12
        assert np.max(phi.values) <= c * (1.0 + eps) + 1e-12


def test_sampled_field_reproducible_across_grids():
    # the same draw evaluated on two grids must describe the same function
    draw = make_field_draws(1, np.random.default_rng(17))[0]
    coarse = sample_positive_field(Grid((9, 9, 9), (1.0, 1.0, 1.0)), draw)
    fine = sample_positive_field(Grid((17, 17, 17), (1.0, 1.0, 1.0)), draw)
    assert coarse.values[4, 4, 4] == pytest.approx(fine.values[8, 8, 8], rel=1e-12)


def test_ensemble_report_shape():
    g = Grid((9, 9, 9), (1.0, 1.0, 1.0))
    draws = make_field_draws(5, np.random.default_rng(7))
    rep, ratios = fisher_hessian_ensemble(g, draws)
    assert rep.name == "fisher_hessian_ensemble_9x9x9"
    assert len(ratios) == 5
    assert np.all(np.isfinite(ratios))
    assert rep.measured == pytest.approx(float(np.max(ratios)))


# ------------------------------------------------------------------- suites


def test_run_suite_rejects_unknown_name():
    init = reference_state(33)
    cfg = SimConfig(dt=1e-3, t_end=0.01, solver=SPECTRAL)
    with pytest.raises(InvalidInputError):
        run_suite("everything", init, cfg)


def test_stability_suite_end_to_end():
    init = reference_state(33)
    cfg = SimConfig(dt=1e-3, t_end=0.05, record_every=10, solver=SPECTRAL)
    reports = run_suite("stability", init, cfg)
    assert len(reports) == 1
    assert reports[0].name == "stability"
    assert reports[0].passed


def test_balance_suite_end_to_end():
    init = reference_state(33)
    cfg = SimConfig(dt=1e-3, t_end=0.5, record_every=10, solver=SPECTRAL)
    reports = run_suite("balance", init, cfg)
    names = [r.name for r in reports]
    assert names == ["energy_balance", "entropy_balance"]
    assert all(r.passed for r in reports)


def test_check_report_line_format():
    rep = CheckReport(name="demo", passed=False, measured=2.5, threshold=1.0)
    line = rep.line()
    assert line.startswith("FAIL")
    assert "demo" in line
    rep_ok = CheckReport(name="demo", passed=True, measured=0.5, threshold=1.0)
    assert rep_ok.line().startswith("PASS")
