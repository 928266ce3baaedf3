import math

import numpy as np
import pytest

from ptstab.blowup import BlowUpFunction, TimeScaleTransform, XiPolynomial
from ptstab.errors import (
    DomainError,
    MissingSignal,
    NonFiniteState,
    NoQuadraticFloor,
)
from ptstab.sim import (
    CertificateReport,
    IntegratorOptions,
    LyapunovEvaluator,
    LyapunovInequality,
    SignalRef,
    TimeHorizon,
    Trajectory,
    VectorField,
    certify_pt_exp,
    fd_agrees,
    gronwall_envelope,
    integrate,
    lyapunov_residual,
    read_csv_columns,
    terminal_metrics,
    trajectory_to_csv,
)


def gain(T, offset=0.0, **powers):
    terms = tuple((int(name[1:]), c) for name, c in powers.items())
    return BlowUpFunction(XiPolynomial(terms, T), offset)


HORIZON = TimeHorizon(5.0, 5.05)


def scalar_decay_field(phi, scale=2.0, v0=2.0, with_stiffness=True):
    # v' = -scale * phi * v, the exactly solvable benchmark
    a = TimeScaleTransform(phi)

    def rhs(t, x):
        return np.array([-scale * phi(t) * x[0]])

    return VectorField(
        state_names=("v",),
        rhs=rhs,
        lyapunov={"V": lambda t, x: float(x[0])},
        envelopes={"env": lambda t: v0 * math.exp(-scale * a(t))},
        stiffness=(lambda t: scale * phi(t) + 1.0) if with_stiffness else None,
    )


# --- step law -----------------------------------------------------------


def test_pure_step_law_without_stiffness():
    phi = gain(5.05, k1=0.2)  # mild rate so the pure law is stable
    field = scalar_decay_field(phi, scale=1.0, with_stiffness=False)
    traj = integrate(field, HORIZON, [2.0], IntegratorOptions(h0=2e-3))
    hs = np.diff(traj.times)
    # early steps pinned at h0, late steps at kappa * (Tbar - t);
    # hs[i] is the step taken from times[i]
    assert hs[0] == pytest.approx(2e-3, rel=1e-12)
    t_from = traj.times[-11]
    assert hs[-10] == pytest.approx(
        min(2e-3, 1e-2 * (5.05 - t_from)), rel=1e-12
    )
    assert traj.meta["min_step"] > 0.0
    assert traj.meta["rejected"] == 0


def test_stiffness_cap_two_regimes():
    def rhs(t, x):
        return np.array([-x[0]])

    field = VectorField(("x",), rhs, stiffness=lambda t: 1000.0)
    traj = integrate(field, HORIZON, [1.0], IntegratorOptions(h0=5e-3))
    hs = np.diff(traj.times)
    ts = traj.times[:-1]
    early = hs[ts < 0.5]
    late = hs[(ts > 1.0) & (ts < 2.0)]
    # budget = integral of 1000 dt crosses 800 at t = 0.8
    assert np.allclose(early, 0.05 / 1000.0)
    assert np.allclose(late, 2.0 / 1000.0)


def test_trajectory_grid_invariants():
    phi = gain(5.05, offset=6.0, k2=1.0)
    traj = integrate(scalar_decay_field(phi), HORIZON, [2.0])
    assert traj.times[0] == 0.0
    assert np.all(np.diff(traj.times) > 0.0)
    # default stop time is T - 1e-4 * T
    assert traj.times[-1] == pytest.approx(5.0 - 5e-4, abs=1e-12)
    assert traj.meta["steps"] == len(traj.times) - 1


def test_explicit_stop_time():
    phi = gain(5.05, k2=1.0)
    traj = integrate(
        scalar_decay_field(phi), HORIZON, [2.0], IntegratorOptions(t_stop=4.0)
    )
    assert traj.times[-1] == pytest.approx(4.0, abs=1e-12)


def test_options_validation():
    with pytest.raises(DomainError):
        IntegratorOptions(t_stop=6.0).resolve(HORIZON)
    with pytest.raises(DomainError):
        IntegratorOptions(h0=-1.0).resolve(HORIZON)
    with pytest.raises(DomainError):
        TimeHorizon(5.0, 4.0)
    with pytest.raises(DomainError):
        TimeHorizon(-5.0)


# --- accuracy against the closed-form benchmark ---------------------------


def test_benchmark_accuracy_squared_rate():
    phi = gain(5.05, k2=1.0)
    v0 = 2.0
    traj = integrate(scalar_decay_field(phi, v0=v0), HORIZON, [v0])
    v = traj.signal("V")
    env = traj.signal("env")
    mask = (env > 1e-250) & (traj.times <= 0.95 * 5.0)
    rel = np.abs(v[mask] - env[mask]) / env[mask]
    assert np.max(rel) < 1e-4


def test_fourth_order_convergence():
    # no stiffness cap, fixed h through 0.8 T, halving h shrinks the
    # terminal error by roughly 2^4
    phi = gain(5.05, k2=1.0)
    v0 = 2.0
    a = TimeScaleTransform(phi)
    exact = v0 * math.exp(-2.0 * a(4.0))
    errs = []
    for h0 in (5e-3, 2.5e-3):
        field = scalar_decay_field(phi, v0=v0, with_stiffness=False)
        traj = integrate(
            field, HORIZON, [v0], IntegratorOptions(h0=h0, t_stop=4.0)
        )
        errs.append(abs(float(traj.signal("V")[-1]) - exact))
    ratio = errs[0] / errs[1]
    assert 12.0 <= ratio <= 20.0


def test_zero_field_constant_trajectory():
    def rhs(t, x):
        return np.zeros_like(x)

    field = VectorField(("x1", "x2"), rhs)
    traj = integrate(field, HORIZON, [3.0, -1.5])
    assert np.all(traj.states[:, 0] == 3.0)
    assert np.all(traj.states[:, 1] == -1.5)


def test_quiescent_fast_path_after_flush():
    # rate parameterized by the plant horizon itself: the gain reaches 1e4
    # by the stop time, far beyond what the stiffness cap could step
    # through, but the state flushes to zero long before that and the cap
    # must disengage
    phi = gain(5.0, k3=1.0)
    field = scalar_decay_field(phi, scale=2.0, v0=1.0)
    traj = integrate(field, TimeHorizon(5.0, 5.05), [1.0])
    assert traj.times[-1] == pytest.approx(5.0 - 5e-4, abs=1e-12)
    assert traj.signal("V")[-1] == 0.0
    assert traj.meta["steps"] < 40_000
    # while live, the benchmark stays glued to the exact solution
    v = traj.signal("V")
    env = traj.signal("env")
    mask = (env > 1e-250) & (traj.times <= 0.95 * 5.0)
    assert np.max(np.abs(v[mask] - env[mask]) / env[mask]) < 1e-4


def test_flush_prevents_denormal_plateau():
    phi = gain(5.05, k2=1.0)
    traj = integrate(scalar_decay_field(phi), HORIZON, [2.0])
    v = traj.signal("V")
    # the exact solution underflows long before the stop time; the
    # recorded state must reach a hard zero, not hover at a denormal
    assert v[-1] == 0.0
    assert np.min(v) >= 0.0


def test_nonfinite_state_detected():
    def rhs(t, x):
        return np.array([x[0] ** 2])  # finite-time escape

    field = VectorField(("x",), rhs)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NonFiniteState) as exc:
            integrate(field, TimeHorizon(5.0, 5.05), [10.0], IntegratorOptions(h0=5e-3))
    assert 0.0 < exc.value.t <= 5.0


def test_initial_state_shape_checked():
    phi = gain(5.05, k2=1.0)
    with pytest.raises(DomainError):
        integrate(scalar_decay_field(phi), HORIZON, [1.0, 2.0])


# --- gronwall envelope -----------------------------------------------------


def test_gronwall_envelope_values():
    phi = gain(5.05, k2=1.0)
    a = TimeScaleTransform(phi)
    assert gronwall_envelope(2.0, phi, 2.0, 0.0) == 2.0
    t = 3.0
    assert gronwall_envelope(2.0, phi, 2.0, t) == pytest.approx(
        2.0 * math.exp(-2.0 * a(t)), rel=1e-14
    )
    with pytest.raises(DomainError):
        gronwall_envelope(-1.0, phi, 2.0, 0.0)
    with pytest.raises(DomainError):
        gronwall_envelope(1.0, phi, 0.0, 0.0)


def test_trajectory_dominated_by_envelope():
    phi = gain(5.05, offset=6.0, k2=1.0)
    v0 = 2.0
    traj = integrate(scalar_decay_field(phi, v0=v0), HORIZON, [v0])
    v = traj.signal("V")
    env = traj.signal("env")
    # integration error is one-sided here (the stability function exceeds
    # the exponential for negative arguments), so dominance holds only up
    # to the accumulated relative error
    assert np.all(v <= env * (1.0 + 1e-4) + 1e-280)


# --- residual checks ---------------------------------------------------------


def make_exact_gated_run(a_coeff=2.0):
    phi = gain(5.05, offset=6.0, k2=1.0)
    field = scalar_decay_field(phi, scale=a_coeff)
    traj = integrate(field, HORIZON, [2.0])
    V = LyapunovEvaluator(
        "V",
        value=lambda t, x: float(x[0]),
        vdot=lambda t, x: -a_coeff * phi(t) * float(x[0]),
    )
    return phi, traj, V


def test_residual_gated_exact_satisfied():
    phi, traj, V = make_exact_gated_run()
    ineq = LyapunovInequality(form="gated", rate=phi, a=2.0)
    rep = lyapunov_residual(traj, V, ineq)
    assert rep.satisfied
    assert np.max(np.abs(rep.residual)) < 1e-9
    assert fd_agrees(rep)


def test_residual_flags_overclaimed_rate():
    phi, traj, V = make_exact_gated_run()
    # claiming a faster decay than the dynamics deliver must fail
    ineq = LyapunovInequality(form="gated", rate=phi, a=2.5)
    rep = lyapunov_residual(traj, V, ineq)
    assert not rep.satisfied
    assert rep.max_violation > 0.0


def test_residual_direct_form_with_drive():
    phi = gain(5.05, offset=6.0, k2=1.0)
    omega = 2.0

    def rhs(t, x):
        return np.array([-phi(t) * x[0] + math.sin(omega * t)])

    field = VectorField(
        ("v",),
        rhs,
        inputs={"w": lambda t, x: math.sin(omega * t)},
        stiffness=lambda t: phi(t) + 1.0,
    )
    traj = integrate(field, TimeHorizon(5.0, 5.05), [1.0], IntegratorOptions(t_stop=4.0))
    V = LyapunovEvaluator(
        "V",
        value=lambda t, x: abs(float(x[0])),
        vdot=lambda t, x: math.copysign(1.0, x[0])
        * (-phi(t) * float(x[0]) + math.sin(omega * t))
        if x[0] != 0.0
        else abs(math.sin(omega * t)),
    )
    ineq = LyapunovInequality(
        form="direct", rate=phi, a=1.0, b=1.0, drive=SignalRef("w")
    )
    rep = lyapunov_residual(traj, V, ineq)
    assert rep.satisfied  # |v|' <= -phi |v| + |w|


def test_residual_coupled_form():
    phi = gain(5.05, offset=6.0, k2=1.0)

    def rhs(t, x):
        return np.array([-phi(t) * x[0], -phi(t) * x[1] + phi(t) * 0.5 * x[0]])

    field = VectorField(
        ("x1", "x2"),
        rhs,
        lyapunov={
            "V1": lambda t, x: float(x[0]),
            "V2": lambda t, x: float(x[1]),
        },
        stiffness=lambda t: phi(t) + 1.0,
    )
    traj = integrate(field, HORIZON, [1.0, 1.0])
    V2 = LyapunovEvaluator(
        "V2",
        value=lambda t, x: float(x[1]),
        vdot=lambda t, x: -phi(t) * float(x[1]) + phi(t) * 0.5 * float(x[0]),
    )
    ineq = LyapunovInequality(
        form="coupled", rate=phi, a=1.0, partners=("V1",), gains=(0.5,)
    )
    rep = lyapunov_residual(traj, V2, ineq)
    assert rep.satisfied
    assert np.max(np.abs(rep.residual)) < 1e-9
    assert fd_agrees(rep)


def test_residual_missing_drive_signal():
    phi, traj, V = make_exact_gated_run()
    ineq = LyapunovInequality(
        form="gated", rate=phi, a=2.0, b=1.0, drive=SignalRef("nope")
    )
    with pytest.raises(MissingSignal):
        lyapunov_residual(traj, V, ineq)


def test_residual_drive_transform_applied():
    phi, traj, V = make_exact_gated_run()
    # v' = -2 phi v = phi * (-3 v + w) with w = phi-independent transform v
    ineq = LyapunovInequality(
        form="gated",
        rate=phi,
        a=3.0,
        b=1.0,
        drive=SignalRef("V", transform=lambda t, v: v),
    )
    rep = lyapunov_residual(traj, V, ineq)
    assert rep.satisfied
    assert np.max(np.abs(rep.residual)) < 1e-9


def test_fd_agrees_with_sign_change():
    # V = (x - 1)^2 with x' = -x: vdot crosses zero when x passes 1
    def rhs(t, x):
        return np.array([-x[0]])

    phi = gain(5.05, k2=1.0)
    field = VectorField(("x",), rhs)
    traj = integrate(field, HORIZON, [2.0], IntegratorOptions(h0=1e-3, t_stop=4.0))
    V = LyapunovEvaluator(
        "V",
        value=lambda t, x: (float(x[0]) - 1.0) ** 2,
        vdot=lambda t, x: -2.0 * (float(x[0]) - 1.0) * float(x[0]),
    )
    ineq = LyapunovInequality(form="gated", rate=phi, a=0.0)
    rep = lyapunov_residual(traj, V, ineq)
    assert fd_agrees(rep)


def test_inequality_form_validation():
    phi = gain(5.05, k2=1.0)
    with pytest.raises(DomainError):
        LyapunovInequality(form="weird", rate=phi, a=1.0)
    with pytest.raises(DomainError):
        LyapunovInequality(
            form="coupled", rate=phi, a=1.0, partners=("V1",), gains=(0.5, 0.1)
        )


# --- certification ------------------------------------------------------------


def test_certify_exact_decay():
    phi = gain(5.05, offset=6.0, k2=1.0)
    v0 = 2.0
    traj = integrate(scalar_decay_field(phi, scale=2.0, v0=v0), HORIZON, [v0])
    # v = v0 exp(-2 a(t)), so the tight envelope constant for rate 2*phi is v0
    double = BlowUpFunction(phi.poly.scaled(2.0), 2.0 * phi.offset)
    rep = certify_pt_exp(traj, "V", double)
    assert rep.certified
    assert rep.c == pytest.approx(v0, rel=1e-3)
    assert np.all(rep.margins >= 0.0)
    assert rep.first_violation is None


def test_certify_detects_too_fast_claim():
    phi = gain(5.05, offset=6.0, k2=1.0)
    v0 = 2.0
    traj = integrate(scalar_decay_field(phi, scale=2.0, v0=v0), HORIZON, [v0])
    # claiming decay at 4*a when the signal only delivers 2*a must blow
    # past any reasonable constant
    quad = BlowUpFunction(phi.poly.scaled(4.0), 4.0 * phi.offset)
    rep = certify_pt_exp(traj, "V", quad)
    assert rep.verdict == "violated"
    assert rep.first_violation is not None
    assert 0.0 < rep.first_violation < 5.0


def test_certify_requires_quadratic_floor():
    phi = gain(5.05, k2=1.0)
    traj = integrate(scalar_decay_field(phi), HORIZON, [2.0])
    with pytest.raises(NoQuadraticFloor):
        certify_pt_exp(traj, "V", gain(5.05, k1=1.0))


def test_certify_onset_search_skips_transient():
    phi = gain(5.05, offset=6.0, k2=1.0)
    a = TimeScaleTransform(phi)

    def rhs(t, x):
        # grows until t = 1, decays at rate 2 phi afterwards
        if t < 1.0:
            return np.array([x[0]])
        return np.array([-2.0 * phi(t) * x[0]])

    field = VectorField(("q",), rhs, stiffness=lambda t: 2.0 * phi(t) + 1.0)
    traj = integrate(field, HORIZON, [1.0])
    # with the envelope rate phi (slower than the true decay) the fitted
    # constant at onset 0 is the transient peak, above this tight cap
    rep0 = certify_pt_exp(traj, "q", phi, c_cap=2.0)
    assert rep0.verdict == "violated"
    rep = certify_pt_exp(traj, "q", phi, c_cap=2.0, onset_search=True)
    assert rep.certified
    assert rep.onset > 0.0


def test_certify_missing_signal():
    phi = gain(5.05, offset=6.0, k2=1.0)
    traj = integrate(scalar_decay_field(phi), HORIZON, [2.0])
    with pytest.raises(MissingSignal):
        certify_pt_exp(traj, "nope", phi)


# --- metrics and CSV -----------------------------------------------------------


def test_terminal_metrics_shape():
    phi = gain(5.05, offset=6.0, k2=1.0)
    traj = integrate(scalar_decay_field(phi), HORIZON, [2.0])
    m = terminal_metrics(traj)
    assert m["final_time"] == pytest.approx(5.0 - 5e-4)
    assert m["signals"]["V"]["final"] == 0.0
    assert m["signals"]["V"]["max_abs"] == pytest.approx(2.0)
    assert m["signals"]["V"]["finite"]
    assert m["signals"]["v"]["tail_max_abs"] < 1e-200


def test_csv_round_trip_and_determinism():
    phi = gain(5.05, offset=6.0, k2=1.0)
    traj1 = integrate(scalar_decay_field(phi), HORIZON, [2.0])
    traj2 = integrate(scalar_decay_field(phi), HORIZON, [2.0])
    csv1 = trajectory_to_csv(traj1)
    csv2 = trajectory_to_csv(traj2)
    assert csv1 == csv2  # bit-for-bit reproducible
    header = csv1.split("\n", 1)[0]
    assert header == "t,v,V,env"
    ts, cols = read_csv_columns(csv1)
    assert np.array_equal(ts, traj1.times)
    assert np.array_equal(cols["V"], traj1.signal("V"))
    assert np.array_equal(cols["env"], traj1.signal("env"))


def test_csv_rejects_malformed():
    with pytest.raises(DomainError):
        read_csv_columns("a,b\n1,2\n")
    with pytest.raises(DomainError):
        read_csv_columns("t,v\n1,2,3\n")


def test_signal_lookup_missing():
    phi = gain(5.05, k2=1.0)
    traj = integrate(scalar_decay_field(phi), HORIZON, [2.0])
    with pytest.raises(MissingSignal):
        traj.signal("u9")
