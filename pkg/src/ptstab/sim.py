"""Simulation and trajectory checking near a terminal time.

The integrator is a fixed-order RK4 with a step law built for vector
fields whose gains blow up at T. Controllers are parameterized by a
design horizon Tbar slightly beyond the simulated plant horizon T, so
every evaluated gain stays finite on [0, T); the simulation itself runs
up to T - terminalGap. The nominal step is

    h = min(h0, kappa * (Tbar - t))

which shrinks geometrically toward the horizon. Fields may declare a
stiffness estimate Lambda(t) (an upper rate of their fastest mode).
When they do, the step is additionally capped at z / Lambda(t), with a
small z while the accumulated budget integral of Lambda is below a
threshold (accuracy regime) and a larger z afterwards (stability
regime, where the state has already collapsed by hundreds of e-folds
and only boundedness matters). Without a declared stiffness the two
nominal terms are used alone.

States are flushed to zero once below 1e-300. Near the terminal time
the exact solutions decay through the denormal range, where rounding
would otherwise park a component at the smallest denormal and break
comparisons against envelopes that have already underflowed to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .blowup import BlowUpFunction, TimeScaleTransform, quadratic_floor
from .errors import (
    DomainError,
    MissingSignal,
    NonFiniteState,
    TimeOutOfHorizon,
)

__all__ = [
    "TimeHorizon",
    "IntegratorOptions",
    "VectorField",
    "Trajectory",
    "integrate",
    "gronwall_envelope",
    "LyapunovEvaluator",
    "SignalRef",
    "LyapunovInequality",
    "ResidualReport",
    "lyapunov_residual",
    "fd_agrees",
    "CertificateReport",
    "certify_pt_exp",
    "terminal_metrics",
    "trajectory_to_csv",
    "read_csv_columns",
]


@dataclass(frozen=True)
class TimeHorizon:
    """Plant horizon T and controller design horizon Tbar > T."""

    T: float
    Tbar: Optional[float] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise DomainError(f"T={self.T!r} must be finite and positive")
        if self.Tbar is None:
            object.__setattr__(self, "Tbar", 1.01 * self.T)
        if not self.Tbar > self.T:
            raise DomainError("design horizon Tbar must exceed the plant horizon T")


@dataclass(frozen=True)
class IntegratorOptions:
    h0: Optional[float] = None  # default 1e-3 * T
    kappa: float = 1e-2
    terminal_gap: Optional[float] = None  # default 1e-4 * T
    t_stop: Optional[float] = None  # overrides T - terminal_gap when set
    cap_accurate: float = 0.05
    cap_stable: float = 2.0
    cap_budget: float = 800.0
    flush: float = 1e-300

    def resolve(self, horizon: TimeHorizon) -> "_ResolvedOptions":
        T = horizon.T
        h0 = 1e-3 * T if self.h0 is None else self.h0
        gap = 1e-4 * T if self.terminal_gap is None else self.terminal_gap
        t_stop = T - gap if self.t_stop is None else self.t_stop
        if not 0.0 < h0:
            raise DomainError("h0 must be positive")
        if not 0.0 < t_stop < T:
            raise DomainError(f"stop time {t_stop!r} must lie strictly inside (0, T)")
        return _ResolvedOptions(
            h0,
            self.kappa,
            gap,
            t_stop,
            self.cap_accurate,
            self.cap_stable,
            self.cap_budget,
            self.flush,
        )


@dataclass(frozen=True)
class _ResolvedOptions:
    h0: float
    kappa: float
    terminal_gap: float
    t_stop: float
    cap_accurate: float
    cap_stable: float
    cap_budget: float
    flush: float


@dataclass
class VectorField:
    """Dynamics plus the named observables recorded along a run.

    ``rhs(t, x)`` returns the state derivative. ``inputs``, ``lyapunov``
    and ``envelopes`` map column names to evaluators; inputs and
    Lyapunov evaluators see (t, x), envelopes see t alone. ``stiffness``
    optionally returns an upper rate estimate for the fastest closed
    loop mode at time t and activates the stabilized step cap.
    """

    state_names: tuple[str, ...]
    rhs: Callable[[float, np.ndarray], np.ndarray]
    inputs: Mapping[str, Callable[[float, np.ndarray], float]] = field(default_factory=dict)
    lyapunov: Mapping[str, Callable[[float, np.ndarray], float]] = field(default_factory=dict)
    envelopes: Mapping[str, Callable[[float], float]] = field(default_factory=dict)
    stiffness: Optional[Callable[[float], float]] = None


@dataclass
class Trajectory:
    times: np.ndarray
    state_names: tuple[str, ...]
    states: np.ndarray  # shape (len(times), len(state_names))
    inputs: dict[str, np.ndarray]
    lyapunov: dict[str, np.ndarray]
    envelopes: dict[str, np.ndarray]
    meta: dict

    def signal(self, name: str) -> np.ndarray:
        if name in self.state_names:
            return self.states[:, self.state_names.index(name)]
        for group in (self.inputs, self.lyapunov, self.envelopes):
            if name in group:
                return group[name]
        raise MissingSignal(f"no recorded signal named {name!r}")

    def column_names(self) -> list[str]:
        return (
            ["t"]
            + list(self.state_names)
            + list(self.inputs)
            + list(self.lyapunov)
            + list(self.envelopes)
        )


def integrate(
    field_: VectorField,
    horizon: TimeHorizon,
    x0: Sequence[float],
    options: Optional[IntegratorOptions] = None,
) -> Trajectory:
    """Run RK4 from t = 0 up to the stop time, recording every step."""
    opts = (options or IntegratorOptions()).resolve(horizon)
    rhs = field_.rhs
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (len(field_.state_names),):
        raise DomainError("initial state length does not match state names")
    t = 0.0
    t_stop = opts.t_stop
    Tbar = horizon.Tbar
    lam = field_.stiffness
    ell = 0.0

    times: list[float] = []
    states: list[np.ndarray] = []
    inputs: dict[str, list[float]] = {k: [] for k in field_.inputs}
    lyap: dict[str, list[float]] = {k: [] for k in field_.lyapunov}
    env: dict[str, list[float]] = {k: [] for k in field_.envelopes}

    def record(t: float, x: np.ndarray) -> None:
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"state became non-finite at t={t:.9g}", t)
        times.append(t)
        states.append(x.copy())
        for name, g in field_.inputs.items():
            u = g(t, x)
            if not math.isfinite(u):
                raise NonFiniteState(f"input {name!r} became non-finite at t={t:.9g}", t)
            inputs[name].append(u)
        for name, g in field_.lyapunov.items():
            v = g(t, x)
            if v < 0.0:
                raise DomainError(f"evaluator {name!r} returned a negative value")
            lyap[name].append(v)
        for name, g in field_.envelopes.items():
            env[name].append(g(t))

    record(t, x)
    steps = 0
    min_step = math.inf
    max_step = 0.0
    while t < t_stop - 1e-12 * horizon.T:
        h = min(opts.h0, opts.kappa * (Tbar - t))
        k1 = rhs(t, x)
        quiescent = not np.any(x) and not np.any(k1)
        rate = 0.0
        if lam is not None and not quiescent:
            # Once the state has flushed to an exact equilibrium at zero the
            # step is exact at any size; the stiffness cap only matters for
            # live modes.
            rate = lam(t)
            if rate > 0.0:
                z = opts.cap_accurate if ell < opts.cap_budget else opts.cap_stable
                h = min(h, z / rate)
        if t + h >= t_stop:
            h = t_stop - t
        if not quiescent:
            k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
            k4 = rhs(t + h, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            x[np.abs(x) < opts.flush] = 0.0
        t = t + h
        if rate > 0.0:
            ell += h * rate
        steps += 1
        min_step = min(min_step, h)
        max_step = max(max_step, h)
        record(t, x)

    return Trajectory(
        times=np.asarray(times),
        state_names=field_.state_names,
        states=np.asarray(states),
        inputs={k: np.asarray(v) for k, v in inputs.items()},
        lyapunov={k: np.asarray(v) for k, v in lyap.items()},
        envelopes={k: np.asarray(v) for k, v in env.items()},
        meta={
            "steps": steps,
            "rejected": 0,
            "min_step": min_step,
            "max_step": max_step,
            "t_stop": t_stop,
            "terminal_gap": opts.terminal_gap,
            "h0": opts.h0,
            "kappa": opts.kappa,
            "T": horizon.T,
            "Tbar": Tbar,
            "stiffness_budget": ell if lam is not None else None,
        },
    )


def gronwall_envelope(v0: float, rate: BlowUpFunction, scale: float, t: float) -> float:
    """Comparison-lemma bound v0 * exp(-scale * a(t)) for V' <= -scale*phi*V."""
    if v0 < 0.0:
        raise DomainError("initial value must be >= 0")
    if scale <= 0.0:
        raise DomainError("decay scale must be positive")
    a = TimeScaleTransform(rate)
    return v0 * math.exp(-scale * a(t))


# --- residual checking -------------------------------------------------------


@dataclass(frozen=True)
class LyapunovEvaluator:
    """Analytic value and derivative of one Lyapunov function along the flow."""

    name: str
    value: Callable[[float, np.ndarray], float]
    vdot: Callable[[float, np.ndarray], float]


@dataclass(frozen=True)
class SignalRef:
    """Reference to a recorded signal used as the drive term of a bound.

    ``transform`` maps (t, raw value) to the quantity entering the
    inequality, for drives like phi3(t) * p(V1(t)). With ``absolute``
    the magnitude is used, matching bounds stated through |w|.
    """

    name: str
    transform: Optional[Callable[[float, float], float]] = None
    absolute: bool = True


@dataclass(frozen=True)
class LyapunovInequality:
    """One dissipation bound to verify along a trajectory.

    Forms:
      gated    V' <= phi * (-a V + b w)      (gain multiplies the whole bracket)
      direct   V' <= -a phi V + b w          (gain multiplies only the decay)
      coupled  V' <= phi * (-a V + sum g_j V_j)
    """

    form: str
    rate: BlowUpFunction
    a: float
    b: float = 0.0
    drive: Optional[SignalRef] = None
    partners: tuple[str, ...] = ()
    gains: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.form not in ("gated", "direct", "coupled"):
            raise DomainError(f"unknown inequality form {self.form!r}")
        if self.form == "coupled" and len(self.partners) != len(self.gains):
            raise DomainError("coupled form needs one gain per partner signal")


@dataclass
class ResidualReport:
    name: str
    times: np.ndarray
    v: np.ndarray
    vdot: np.ndarray
    vdot_fd: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray  # vdot - rhs; <= tolerance means the bound holds
    tolerance: np.ndarray
    satisfied: bool
    max_violation: float


def lyapunov_residual(
    traj: Trajectory,
    V: LyapunovEvaluator,
    ineq: LyapunovInequality,
    abs_tol: float = 1e-6,
    rel_scale: float = 1e-3,
) -> ResidualReport:
    """Check one dissipation inequality at every recorded sample.

    The analytic derivative is compared against the declared right hand
    side; the pass tolerance is abs_tol + rel_scale * phi(t) * V(t),
    which scales with the magnitude of the terms actually being
    subtracted. A finite-difference derivative of the recorded values is
    returned alongside for independent validation (see fd_agrees).
    """
    ts = traj.times
    n = len(ts)
    v = np.empty(n)
    vd = np.empty(n)
    for i in range(n):
        xi = traj.states[i]
        v[i] = V.value(ts[i], xi)
        vd[i] = V.vdot(ts[i], xi)
    phi = np.array([ineq.rate(float(t)) for t in ts])
    if ineq.form == "coupled":
        drive = np.zeros(n)
        for name, g in zip(ineq.partners, ineq.gains):
            drive += g * traj.signal(name)
        rhs = phi * (-ineq.a * v + drive)
    else:
        w = np.zeros(n)
        if ineq.drive is not None:
            raw = traj.signal(ineq.drive.name)
            if ineq.drive.transform is not None:
                w = np.array(
                    [ineq.drive.transform(float(t), float(r)) for t, r in zip(ts, raw)]
                )
            else:
                w = raw.astype(float)
            if ineq.drive.absolute:
                w = np.abs(w)
        if ineq.form == "gated":
            rhs = phi * (-ineq.a * v + ineq.b * w)
        else:
            rhs = -ineq.a * phi * v + ineq.b * w
    residual = vd - rhs
    tolerance = abs_tol + rel_scale * phi * v
    vd_fd = np.gradient(v, ts)
    max_violation = float(np.max(residual - tolerance))
    return ResidualReport(
        name=V.name,
        times=ts,
        v=v,
        vdot=vd,
        vdot_fd=vd_fd,
        rhs=rhs,
        residual=residual,
        tolerance=tolerance,
        satisfied=bool(max_violation <= 0.0),
        max_violation=max_violation,
    )


def fd_agrees(
    report: ResidualReport, rel: float = 1e-3, guard: float = 1e-8
) -> bool:
    """Cross-check the analytic derivative against the finite difference.

    Relative agreement is demanded only where it is meaningful: interior
    samples with |vdot| above the guard and no derivative sign change in
    a two-sample neighborhood (central differences straddle such points
    and their relative error is unbounded there).
    """
    vd = report.vdot
    fd = report.vdot_fd
    n = len(vd)
    if n < 5:
        return True
    ok = True
    sign = np.sign(vd)
    for i in range(2, n - 2):
        if abs(vd[i]) <= guard:
            continue
        if not (sign[i - 2] == sign[i - 1] == sign[i] == sign[i + 1] == sign[i + 2]):
            continue
        if abs(fd[i] - vd[i]) > rel * abs(vd[i]):
            ok = False
            break
    return ok


# --- decay certification ------------------------------------------------------


@dataclass
class CertificateReport:
    verdict: str  # "certified" | "violated"
    signal: str
    c: float
    onset: float
    onset_xi: float
    p0: float
    margins: np.ndarray  # log-domain slack per usable sample
    sample_times: np.ndarray
    first_violation: Optional[float]
    c_cap: float

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "signal": self.signal,
            # an overflowed fit has no representable constant; emit null
            "c": self.c if math.isfinite(self.c) else None,
            "onset": self.onset,
            "onsetXi": self.onset_xi,
            "p0": self.p0,
            "cCap": self.c_cap,
            "firstViolation": self.first_violation,
            "marginMin": float(np.min(self.margins)) if len(self.margins) else None,
        }


def certify_pt_exp(
    traj: Trajectory,
    signal: str,
    rate: BlowUpFunction,
    onset: float = 0.0,
    onset_search: bool = False,
    c_cap: float = 1e12,
    floor: float = 1e-300,
) -> CertificateReport:
    """Fit the tightest envelope c * exp(-(a(t) - a(onset))) over a signal.

    Work happens in the log domain: the fitted log-constant is the
    maximum of log|q(t)| + (a(t) - a(onset)) over samples past the onset
    whose magnitude exceeds the floor (below it the signal has left the
    trustworthy float range and says nothing). The verdict is certified
    when the fitted constant stays at or below c_cap; otherwise the
    report pins the first sample that breaks the capped envelope.

    With onset_search the onset is scanned over ten fractions of the
    final recorded time and the first certified fit is returned,
    accommodating signals that grow during a transient before locking
    onto the envelope.
    """
    quadratic_floor(rate)  # raises NoQuadraticFloor for rates that cannot certify
    if onset_search:
        t_end = float(traj.times[-1])
        best: Optional[CertificateReport] = None
        for frac in np.linspace(0.0, 0.9, 10):
            rep = certify_pt_exp(
                traj, signal, rate, onset=float(frac * t_end), c_cap=c_cap, floor=floor
            )
            if rep.certified:
                return rep
            if best is None or rep.c < best.c:
                best = rep
        return best  # nothing certified; return the least-bad fit
    if not 0.0 <= onset < rate.T:
        raise TimeOutOfHorizon(f"onset {onset!r} outside [0, T)")
    a = TimeScaleTransform(rate)
    a_onset = a(onset)
    ts = traj.times
    q = traj.signal(signal)
    sel = (ts >= onset) & (np.abs(q) > floor)
    t_used = ts[sel]
    log_q = np.log(np.abs(q[sel]))
    decay = np.array([a(float(t)) for t in t_used]) - a_onset
    log_need = log_q + decay
    p0 = quadratic_floor(rate)
    onset_xi = rate.T / (rate.T - onset)
    if len(log_need) == 0:
        return CertificateReport(
            "certified", signal, 0.0, onset, onset_xi, p0,
            np.array([]), t_used, None, c_cap,
        )
    c_log = float(np.max(log_need))
    log_cap = math.log(c_cap)
    if c_log <= log_cap:
        margins = c_log - log_need
        return CertificateReport(
            "certified", signal, math.exp(c_log), onset, onset_xi, p0,
            margins, t_used, None, c_cap,
        )
    margins = log_cap - log_need
    bad = np.nonzero(margins < 0.0)[0]
    first = float(t_used[bad[0]])
    c = math.exp(c_log) if c_log < 700.0 else math.inf
    return CertificateReport(
        "violated", signal, c, onset, onset_xi, p0,
        margins, t_used, first, c_cap,
    )


# --- terminal metrics and CSV -------------------------------------------------


def terminal_metrics(traj: Trajectory) -> dict:
    """Final values, overall and tail maxima for every recorded column."""
    ts = traj.times
    span = ts[-1] - ts[0]
    tail = ts >= ts[-1] - 0.01 * span
    out: dict = {"final_time": float(ts[-1]), "signals": {}}
    for name in traj.column_names()[1:]:
        y = traj.signal(name)
        ay = np.abs(y)
        out["signals"][name] = {
            "final": float(y[-1]),
            "max_abs": float(np.max(ay)),
            "tail_max_abs": float(np.max(ay[tail])),
            "finite": bool(np.all(np.isfinite(y))),
        }
    return out


def trajectory_to_csv(traj: Trajectory) -> str:
    """Render the run as CSV: t, states, inputs, Lyapunov values, envelopes.

    Floats use repr-faithful %.17g so runs are reproducible bit for bit.
    """
    names = traj.column_names()
    cols = [traj.times] + [traj.signal(n) for n in names[1:]]
    lines = [",".join(names)]
    for i in range(len(traj.times)):
        lines.append(",".join(f"{col[i]:.17g}" for col in cols))
    return "\n".join(lines) + "\n"


def read_csv_columns(text: str) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Parse a trajectory CSV back into a time array and named columns."""
    lines = [ln for ln in text.strip().split("\n") if ln]
    if not lines:
        raise DomainError("empty CSV")
    names = lines[0].split(",")
    if names[0] != "t":
        raise DomainError("first CSV column must be t")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.ndim != 2 or data.shape[1] != len(names):
        raise DomainError("CSV rows do not match the header")
    cols = {name: data[:, i] for i, name in enumerate(names)}
    return cols.pop("t"), cols
