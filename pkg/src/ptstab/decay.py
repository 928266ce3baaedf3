"""Decay-rate certificates for interconnected comparison systems.

Once each subsystem Lyapunov derivative has been reduced to the common
form V_i' <= phi * [-a_i V_i + sum_j b_ij V_j], stability of the whole
interconnection reduces to linear algebra on the Metzler matrix

    A = -diag(a) + B,   a_i > 0, b_ij >= 0, b_ii = 0.

The exported decay rate delta is the negated spectral abscissa of A,
together with a positive left weight vector q with q A <= -delta q.
Two independent routes compute it: a regularized power iteration on the
shifted matrix (primary) and a bisection over linear feasibility
problems (cross-check). They are kept separate on purpose; a silent
disagreement between them is treated as a bug, not a tolerance issue.

``check_theorem_conditions`` dispatches an interconnection description
to one of six certified condition sets, T1 through T6, keyed by the
topology and by whether all loops share one blow-up gain. The T labels
are stable identifiers used in reports and over the wire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog

from .blowup import (
    BlowUpFunction,
    XiPolynomial,
    gain_from_json,
    gain_to_json,
    polynomial_from_json,
    polynomial_to_json,
    quadratic_floor,
)
from .errors import (
    ConvergenceFailure,
    DomainError,
    NoQuadraticFloor,
    NotDiagonallyStable,
    NotHurwitz,
    OracleMismatch,
    SpecMismatch,
)

__all__ = [
    "GainMatrix",
    "DecayRateResult",
    "DiagStability2x2",
    "LyapunovCertificate",
    "SystemDecl",
    "CouplingDecl",
    "InterconnectionSpec",
    "HypothesisCheck",
    "TheoremReport",
    "is_hurwitz",
    "spectral_abscissa_metzler",
    "weighted_decay_rate",
    "bisection_feasibility",
    "bisection_decay_rate",
    "diag_stability_2x2",
    "lyapunov_solve",
    "check_theorem_conditions",
]

_EPS_REG = 1e-12  # off-diagonal regularization, keeps the iteration irreducible
_EPS_SHIFT = 1e-12  # strict-inequality margin in the feasibility subproblem


@dataclass(frozen=True)
class GainMatrix:
    """Comparison gains: self rates a_i > 0 and cross gains b_ij >= 0."""

    a: tuple[float, ...]
    b: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.a)
        if n == 0:
            raise DomainError("gain matrix needs at least one subsystem")
        for ai in self.a:
            if not (math.isfinite(ai) and ai > 0.0):
                raise DomainError(f"self rate {ai!r} must be positive")
        if len(self.b) != n or any(len(row) != n for row in self.b):
            raise DomainError("cross-gain matrix must be square, matching a")
        for i, row in enumerate(self.b):
            for j, bij in enumerate(row):
                if i == j and bij != 0.0:
                    raise DomainError("cross-gain diagonal must be zero")
                if not (math.isfinite(bij) and bij >= 0.0):
                    raise DomainError(f"cross gain b[{i}][{j}]={bij!r} must be >= 0")

    @property
    def n(self) -> int:
        return len(self.a)

    def matrix(self) -> np.ndarray:
        """The Metzler matrix -diag(a) + B as a dense array."""
        A = np.array(self.b, dtype=float)
        A[np.diag_indices(self.n)] = -np.asarray(self.a, dtype=float)
        return A

    @classmethod
    def from_json(cls, obj: Mapping) -> "GainMatrix":
        try:
            a = tuple(float(x) for x in obj["a"])
            b = tuple(tuple(float(x) for x in row) for row in obj["b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed gain matrix: {exc}") from exc
        return cls(a, b)

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": [list(row) for row in self.b]}


def is_hurwitz(m: GainMatrix) -> bool:
    """Stability of the comparison matrix, by the cheapest sufficient route.

    n = 1 is always stable (a > 0). For n = 2 the trace/determinant test
    is exact. Larger systems fall back to the Metzler spectral abscissa.
    """
    if m.n == 1:
        return True
    if m.n == 2:
        a1, a2 = m.a
        b1, b2 = m.b[0][1], m.b[1][0]
        return a1 * a2 > b1 * b2  # trace is already negative
    alpha, _ = spectral_abscissa_metzler(m)
    return alpha < 0.0


def spectral_abscissa_metzler(
    m: GainMatrix,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> tuple[float, np.ndarray]:
    """Dominant eigenvalue and left eigenvector of a Metzler matrix.

    Power iteration on B' = (A + eps on the off-diagonal) + s I with
    s = max(a) + 1, which makes B' entrywise positive off the diagonal
    and entrywise nonnegative overall, so the dominant pair is real and
    the left vector strictly positive. The eps regularization is always
    applied; it perturbs the abscissa by at most (n - 1) * eps, far
    below the certificate tolerances, and removes reducibility as a
    failure mode. Convergence is declared when the Rayleigh quotient
    moves by less than tol on three consecutive iterations.
    """
    A = m.matrix()
    n = m.n
    if n == 1:
        return float(A[0, 0]), np.array([1.0])
    s = max(m.a) + 1.0
    B = A + _EPS_REG * (np.ones((n, n)) - np.eye(n))
    B[np.diag_indices(n)] += s
    Bt = B.T
    v = np.full(n, 1.0 / n)
    prev = None
    calm = 0
    for _ in range(max_iter):
        w = Bt @ v
        nrm = np.sum(np.abs(w))
        if nrm == 0.0:
            raise ConvergenceFailure("power iteration collapsed to zero")
        w /= nrm
        rq = float(w @ (Bt @ w) / (w @ w))
        if prev is not None and abs(rq - prev) < tol:
            calm += 1
            if calm >= 3:
                q = w / np.sum(w)
                return rq - s, q
        else:
            calm = 0
        prev = rq
        v = w
    raise ConvergenceFailure(
        f"power iteration did not settle within {max_iter} iterations"
    )


def bisection_feasibility(m: GainMatrix, y: float) -> Optional[np.ndarray]:
    """Search for q > 0 with q (A + (y + margin) I) <= 0, sum q = 1.

    Solved as a pure feasibility linear program. Returns the weight
    vector, or None when no such vector exists. The small margin turns
    the strict decay inequality into a closed one without changing the
    bisection limit beyond its tolerance.
    """
    n = m.n
    A = m.matrix()
    shifted = A + (y + _EPS_SHIFT) * np.eye(n)
    res = linprog(
        c=np.zeros(n),
        A_ub=shifted.T,
        b_ub=np.zeros(n),
        A_eq=np.ones((1, n)),
        b_eq=np.array([1.0]),
        bounds=[(1e-9, 1.0)] * n,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status != 0:
        return None
    q = np.asarray(res.x, dtype=float)
    # The solver works to its own tolerance; a claimed witness must hold
    # against the actual inequalities or it is no witness at all.
    rows = q @ (A + y * np.eye(n))
    if float(np.max(rows)) > 1e-11 * (1.0 + float(np.linalg.norm(A, np.inf))):
        return None
    return q


def bisection_decay_rate(m: GainMatrix, tol: float = 1e-9) -> float:
    """Largest certified decay rate, by bisection on LP feasibility.

    Any feasible rate satisfies y < min(a) because the diagonal rows of
    the shifted matrix must stay nonpositive, so [0, min(a)] brackets
    the limit whenever the matrix is stable at all.
    """
    if bisection_feasibility(m, 0.0) is None:
        raise NotDiagonallyStable("no positive weight certifies decay at rate 0")
    lo, hi = 0.0, min(m.a)
    if bisection_feasibility(m, hi) is not None:
        return hi  # only possible within the margin of the feasibility shift
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bisection_feasibility(m, mid) is not None:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DecayRateResult:
    delta: float
    q: tuple[float, ...]
    slack: float
    bisection_delta: Optional[float]

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "q": list(self.q),
            "slack": self.slack,
            "bisectionDelta": self.bisection_delta,
        }


def weighted_decay_rate(m: GainMatrix, cross_check: bool = True) -> DecayRateResult:
    """Decay certificate (delta, q) with q A <= -delta q, q > 0, sum q = 1.

    delta is the negated spectral abscissa from the power iteration. The
    witness is validated against the original, unregularized matrix; the
    reported slack is the worst violation of the row inequalities and
    must sit at regularization level. With cross_check (the default) the
    independent bisection estimate is computed as well and a mismatch
    beyond 1e-8 raises OracleMismatch rather than returning anything.
    """
    alpha, q = spectral_abscissa_metzler(m)
    if alpha >= 0.0:
        raise NotDiagonallyStable(
            f"comparison matrix is not stable (spectral abscissa {alpha:.3e})"
        )
    delta = -alpha
    A = m.matrix()
    rows = q @ A + delta * q
    slack = max(0.0, float(np.max(rows / q)))
    if slack > 1e-6 * delta:
        raise OracleMismatch(
            f"decay witness violates row inequalities by {slack:.3e}"
        )
    bis: Optional[float] = None
    if cross_check:
        bis = bisection_decay_rate(m)
        if abs(bis - delta) > 1e-8:
            raise OracleMismatch(
                f"disagreement between eigen route ({delta:.12f}) "
                f"and bisection route ({bis:.12f})"
            )
    return DecayRateResult(delta, tuple(float(x) for x in q), slack, bis)


@dataclass(frozen=True)
class DiagStability2x2:
    stable: bool
    gamma: Optional[float]
    P: Optional[tuple[tuple[float, float], tuple[float, float]]]


def diag_stability_2x2(a1: float, a2: float, b1: float, b2: float) -> DiagStability2x2:
    """Diagonal Lyapunov witness for the 2x2 comparison matrix.

    Stability holds exactly when a1 a2 > b1 b2. The witness scaling
    gamma must satisfy gamma^2 b1 + b2 < 2 gamma sqrt(a1 a2); the root
    of the balance, gamma = sqrt(b2 / b1), always works when stable, and
    the interval midpoint sqrt(a1 a2) / b1 is kept as a fallback in case
    rounding lands the primary choice on the boundary.
    """
    for name, v in (("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)):
        if not (math.isfinite(v) and v > 0.0):
            raise DomainError(f"{name}={v!r} must be positive")
    if a1 * a2 <= b1 * b2:
        return DiagStability2x2(False, None, None)
    root = math.sqrt(a1 * a2)
    gamma = math.sqrt(b2 / b1)
    if not gamma**2 * b1 + b2 < 2.0 * gamma * root:
        gamma = root / b1
        if not gamma**2 * b1 + b2 < 2.0 * gamma * root:
            raise OracleMismatch("no witness scaling found despite stability test")
    return DiagStability2x2(True, gamma, ((gamma**2, 0.0), (0.0, 1.0)))


@dataclass(frozen=True)
class LyapunovCertificate:
    P: np.ndarray
    lambda_min_P: float
    lambda_max_P: float
    lambda_min_Q: float
    decay: float
    residual: float

    def to_json(self) -> dict:
        return {
            "P": self.P.tolist(),
            "lambdaMinP": self.lambda_min_P,
            "lambdaMaxP": self.lambda_max_P,
            "lambdaMinQ": self.lambda_min_Q,
            "decay": self.decay,
            "residual": self.residual,
        }


def lyapunov_solve(
    A: Union[GainMatrix, np.ndarray], Q: Optional[np.ndarray] = None
) -> LyapunovCertificate:
    """Solve A' P + P A = -Q for symmetric positive definite P.

    Dense Kronecker assembly, one linear solve, then symmetrization.
    With row-major vec, A' P -> kron(A', I) and P A -> kron(I, A'). The
    residual is checked against 1e-10 * ||Q||_F before anything is
    returned. The certified decay rate for V = x' P x with V' <= -x' Q x
    is lambda_min(Q) / lambda_max(P).
    """
    if isinstance(A, GainMatrix):
        if not is_hurwitz(A):
            raise NotHurwitz("comparison matrix is not stable")
        Amat = A.matrix()
    else:
        Amat = np.asarray(A, dtype=float)
        if Amat.ndim != 2 or Amat.shape[0] != Amat.shape[1]:
            raise DomainError("matrix must be square")
        if np.max(np.real(np.linalg.eigvals(Amat))) >= 0.0:
            raise NotHurwitz("matrix has an eigenvalue with nonnegative real part")
    n = Amat.shape[0]
    if Q is None:
        Qmat = np.eye(n)
    else:
        Qmat = np.asarray(Q, dtype=float)
        if Qmat.shape != (n, n):
            raise DomainError("Q must match the state dimension")
        if not np.allclose(Qmat, Qmat.T, atol=1e-12):
            raise DomainError("Q must be symmetric")
    eye = np.eye(n)
    M = np.kron(Amat.T, eye) + np.kron(eye, Amat.T)
    p = np.linalg.solve(M, -Qmat.reshape(-1))
    P = p.reshape(n, n)
    P = 0.5 * (P + P.T)
    residual = float(np.linalg.norm(Amat.T @ P + P @ Amat + Qmat, "fro"))
    qnorm = float(np.linalg.norm(Qmat, "fro"))
    if residual > 1e-10 * qnorm:
        raise OracleMismatch(
            f"matrix equation residual {residual:.3e} exceeds 1e-10 * ||Q||"
        )
    evals_P = np.linalg.eigvalsh(P)
    lam_min_P = float(evals_P[0])
    lam_max_P = float(evals_P[-1])
    if lam_min_P <= 0.0:
        raise OracleMismatch("solution is not positive definite")
    lam_min_Q = float(np.linalg.eigvalsh(Qmat)[0])
    return LyapunovCertificate(
        P, lam_min_P, lam_max_P, lam_min_Q, lam_min_Q / lam_max_P, residual
    )


# --- interconnection descriptions and condition dispatch --------------------


@dataclass(frozen=True)
class SystemDecl:
    """One subsystem: its blow-up gain and its self-stabilization rate."""

    phi: BlowUpFunction
    a: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise SpecMismatch(f"self rate a={self.a!r} must be positive")


@dataclass(frozen=True)
class CouplingDecl:
    """Cascade coupling: downstream drive p(V1) modulated by a polynomial gain.

    p is a polynomial in the upstream Lyapunov value with p(0) = 0,
    given by its coefficient list (constant first). phi3 is the
    modulation gain as a polynomial in the scale variable.
    """

    p_coeffs: tuple[float, ...]
    phi3: XiPolynomial

    def __post_init__(self) -> None:
        if self.p_coeffs and self.p_coeffs[0] != 0.0:
            raise SpecMismatch("coupling polynomial must vanish at zero")
        if not self.phi3.coeffs_nonnegative:
            raise SpecMismatch("modulation gain must have nonnegative coefficients")


_TOPOLOGIES = ("cascade2", "feedback2", "feedbackN")


@dataclass(frozen=True)
class InterconnectionSpec:
    topology: str
    systems: tuple[SystemDecl, ...]
    b: tuple[tuple[float, ...], ...]
    coupling: Optional[CouplingDecl] = None

    def __post_init__(self) -> None:
        if self.topology not in _TOPOLOGIES:
            raise SpecMismatch(f"unknown topology {self.topology!r}")
        n = len(self.systems)
        if self.topology in ("cascade2", "feedback2") and n != 2:
            raise SpecMismatch(f"topology {self.topology} needs exactly 2 systems")
        if self.topology == "feedbackN" and n < 2:
            raise SpecMismatch("feedbackN needs at least 2 systems")
        if len(self.b) != n or any(len(row) != n for row in self.b):
            raise SpecMismatch("cross-gain matrix shape does not match systems")
        for i, row in enumerate(self.b):
            for j, bij in enumerate(row):
                if i == j and bij != 0.0:
                    raise SpecMismatch("cross-gain diagonal must be zero")
                if not (math.isfinite(bij) and bij >= 0.0):
                    raise SpecMismatch(f"cross gain b[{i}][{j}] must be >= 0")
        if self.topology == "cascade2":
            if self.b[0][1] != 0.0:
                raise SpecMismatch("cascade upstream must not be driven downstream")
        elif self.coupling is not None:
            raise SpecMismatch("polynomial coupling is only meaningful for cascades")
        horizons = {s.phi.T for s in self.systems}
        if len(horizons) != 1:
            raise SpecMismatch("all subsystem gains must share one terminal time")

    @property
    def shared_gain(self) -> bool:
        first = self.systems[0].phi
        return all(s.phi == first for s in self.systems[1:])

    def gain_matrix(self) -> GainMatrix:
        return GainMatrix(tuple(s.a for s in self.systems), self.b)

    @classmethod
    def from_json(cls, obj: Mapping) -> "InterconnectionSpec":
        try:
            topology = str(obj["topology"])
            systems = tuple(
                SystemDecl(gain_from_json(s["phi"]), float(s["a"]))
                for s in obj["systems"]
            )
            b = tuple(tuple(float(x) for x in row) for row in obj["b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecMismatch(f"malformed interconnection: {exc}") from exc
        coupling = None
        if obj.get("coupling") is not None:
            c = obj["coupling"]
            try:
                coupling = CouplingDecl(
                    tuple(float(x) for x in c["p_coeffs"]),
                    polynomial_from_json(c["phi3"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SpecMismatch(f"malformed coupling: {exc}") from exc
        return cls(topology, systems, b, coupling)

    def to_json(self) -> dict:
        out: dict = {
            "topology": self.topology,
            "systems": [
                {"phi": gain_to_json(s.phi), "a": s.a} for s in self.systems
            ],
            "b": [list(row) for row in self.b],
        }
        if self.coupling is not None:
            out["coupling"] = {
                "p_coeffs": list(self.coupling.p_coeffs),
                "phi3": polynomial_to_json(self.coupling.phi3),
            }
        return out


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class TheoremReport:
    theorem_id: str
    hypotheses: tuple[HypothesisCheck, ...]
    certified: bool
    witnesses: dict

    def to_json(self) -> dict:
        return {
            "theoremId": self.theorem_id,
            "hypotheses": [
                {"name": h.name, "passed": h.passed, "detail": h.detail}
                for h in self.hypotheses
            ],
            "certified": self.certified,
            "witnesses": _jsonify(self.witnesses),
        }


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return float(obj)
    return obj


def _floor_check(name: str, phi: BlowUpFunction, witnesses: dict, key: str) -> HypothesisCheck:
    try:
        p0 = quadratic_floor(phi)
    except NoQuadraticFloor as exc:
        return HypothesisCheck(name, False, str(exc))
    witnesses[key] = p0
    return HypothesisCheck(name, True, f"floor constant {p0:g}")


def check_theorem_conditions(spec: InterconnectionSpec) -> TheoremReport:
    """Route an interconnection to its condition set and test every clause.

    Dispatch is purely structural: topology crossed with whether all
    subsystems share one gain. Individual hypothesis failures are
    recorded (certified = False) rather than raised; only malformed
    descriptions raise SpecMismatch, and that happens at construction.
    """
    shared = spec.shared_gain
    if spec.topology == "cascade2":
        return _t1(spec) if shared else _t2(spec)
    if spec.topology == "feedback2":
        return _t3(spec) if shared else _t4(spec)
    return _t5(spec) if shared else _t6(spec)


def _t1(spec: InterconnectionSpec) -> TheoremReport:
    (up, down), b21 = spec.systems, spec.b[1][0]
    checks: list[HypothesisCheck] = [
        HypothesisCheck("shared_rate", True, "both subsystems use one gain")
    ]
    witnesses: dict = {}
    checks.append(_floor_check("quadratic_floor", up.phi, witnesses, "p0"))
    checks.append(
        HypothesisCheck("rates_positive", True, f"a1={up.a:g}, a2={down.a:g}")
    )
    # Weighted sum c1 V1 + c2 V2 with c2 = 1; c1 soaks up the cross gain.
    c2 = 1.0
    c1 = (max(b21, 0.0) + 1.0) / up.a
    kappa = min((c1 * up.a - c2 * b21) / c1, down.a)
    checks.append(
        HypothesisCheck(
            "weighted_margin",
            kappa > 0.0,
            f"c1={c1:g}, c2={c2:g} give margin {kappa:g}",
        )
    )
    witnesses.update({"c1": c1, "c2": c2, "kappa": kappa})
    return TheoremReport("T1", tuple(checks), all(c.passed for c in checks), witnesses)


def _t2(spec: InterconnectionSpec) -> TheoremReport:
    up, down = spec.systems
    checks: list[HypothesisCheck] = [
        HypothesisCheck("distinct_rates", True, "subsystem gains differ")
    ]
    witnesses: dict = {}
    checks.append(_floor_check("upstream_floor", up.phi, witnesses, "p0_upstream"))
    checks.append(_floor_check("downstream_floor", down.phi, witnesses, "p0_downstream"))
    if spec.coupling is None:
        checks.append(
            HypothesisCheck(
                "coupling_declared",
                False,
                "cascade with distinct gains needs an explicit coupling block",
            )
        )
        return TheoremReport("T2", tuple(checks), False, witnesses)
    checks.append(HypothesisCheck("coupling_declared", True, "coupling block present"))
    p = spec.coupling.p_coeffs
    vanishes = (not p) or p[0] == 0.0
    checks.append(
        HypothesisCheck(
            "coupling_vanishes_at_origin", vanishes, f"p(0) = {p[0] if p else 0.0:g}"
        )
    )
    checks.append(
        HypothesisCheck(
            "modulation_polynomial",
            True,
            f"modulation gain has degree {spec.coupling.phi3.degree}",
        )
    )
    checks.append(
        HypothesisCheck("rates_positive", True, f"a1={up.a:g}, a2={down.a:g}")
    )
    witnesses["p_degree"] = max(
        (i for i, c in enumerate(p) if c != 0.0), default=0
    )
    return TheoremReport("T2", tuple(checks), all(c.passed for c in checks), witnesses)


def _t3(spec: InterconnectionSpec) -> TheoremReport:
    (s1, s2) = spec.systems
    b1, b2 = spec.b[0][1], spec.b[1][0]
    checks: list[HypothesisCheck] = [
        HypothesisCheck("shared_rate", True, "both subsystems use one gain")
    ]
    witnesses: dict = {}
    checks.append(_floor_check("quadratic_floor", s1.phi, witnesses, "p0"))
    small_gain = s1.a * s2.a > b1 * b2
    checks.append(
        HypothesisCheck(
            "loop_gain_below_one",
            small_gain,
            f"a1 a2 = {s1.a * s2.a:g} vs b1 b2 = {b1 * b2:g}",
        )
    )
    if small_gain:
        lo = b2 / s1.a
        hi = s2.a / b1 if b1 > 0.0 else math.inf
        if lo > 0.0 and math.isfinite(hi):
            ratio = math.sqrt(lo * hi)
        elif lo > 0.0:
            ratio = 2.0 * lo
        elif math.isfinite(hi):
            ratio = 0.5 * hi
        else:
            ratio = 1.0
        c1, c2 = ratio, 1.0
        kappa = min((s1.a * c1 - b2 * c2) / c1, (s2.a * c2 - b1 * c1) / c2)
        witnesses.update({"c1": c1, "c2": c2, "kappa": kappa})
        checks.append(
            HypothesisCheck("weighted_margin", kappa > 0.0, f"margin {kappa:g}")
        )
    return TheoremReport("T3", tuple(checks), all(c.passed for c in checks), witnesses)


def _t4(spec: InterconnectionSpec) -> TheoremReport:
    (s1, s2) = spec.systems
    b1, b2 = spec.b[0][1], spec.b[1][0]
    checks: list[HypothesisCheck] = [
        HypothesisCheck("distinct_rates", True, "subsystem gains differ")
    ]
    witnesses: dict = {}
    checks.append(_floor_check("floor_1", s1.phi, witnesses, "p0_1"))
    checks.append(_floor_check("floor_2", s2.phi, witnesses, "p0_2"))
    small_gain = s1.a * s2.a > b1 * b2
    checks.append(
        HypothesisCheck(
            "loop_gain_below_one",
            small_gain,
            f"a1 a2 = {s1.a * s2.a:g} vs b1 b2 = {b1 * b2:g}",
        )
    )
    if small_gain:
        if b1 > 0.0 and b2 > 0.0:
            ds = diag_stability_2x2(s1.a, s2.a, b1, b2)
            witnesses["gamma"] = ds.gamma
            witnesses["P"] = ds.P
            checks.append(
                HypothesisCheck(
                    "diagonal_witness", ds.stable, f"scaling gamma = {ds.gamma:g}"
                )
            )
        else:
            # One-directional coupling: any scaling beats the single term.
            root = math.sqrt(s1.a * s2.a)
            gamma = (b2 + 1.0) / (2.0 * root) if b1 == 0.0 else root / (2.0 * b1)
            witnesses["gamma"] = gamma
            witnesses["P"] = ((gamma**2, 0.0), (0.0, 1.0))
            checks.append(
                HypothesisCheck(
                    "diagonal_witness", True, f"degenerate coupling, gamma = {gamma:g}"
                )
            )
        try:
            rate = weighted_decay_rate(spec.gain_matrix())
            witnesses["delta"] = rate.delta
            witnesses["q"] = list(rate.q)
            checks.append(
                HypothesisCheck("weighted_decay", True, f"delta = {rate.delta:.6g}")
            )
        except NotDiagonallyStable as exc:
            checks.append(HypothesisCheck("weighted_decay", False, str(exc)))
    return TheoremReport("T4", tuple(checks), all(c.passed for c in checks), witnesses)


def _t5(spec: InterconnectionSpec) -> TheoremReport:
    checks: list[HypothesisCheck] = [
        HypothesisCheck("shared_rate", True, "all subsystems use one gain")
    ]
    witnesses: dict = {}
    checks.append(
        _floor_check("quadratic_floor", spec.systems[0].phi, witnesses, "p0")
    )
    m = spec.gain_matrix()
    hurwitz = is_hurwitz(m)
    checks.append(
        HypothesisCheck("comparison_matrix_stable", hurwitz, f"n = {m.n}")
    )
    if hurwitz:
        cert = lyapunov_solve(m)
        witnesses["P"] = cert.P
        witnesses["lambda_min_P"] = cert.lambda_min_P
        witnesses["decay"] = cert.decay
        checks.append(
            HypothesisCheck(
                "quadratic_certificate",
                True,
                f"decay {cert.decay:.6g}, residual {cert.residual:.2e}",
            )
        )
    return TheoremReport("T5", tuple(checks), all(c.passed for c in checks), witnesses)


def _t6(spec: InterconnectionSpec) -> TheoremReport:
    checks: list[HypothesisCheck] = [
        HypothesisCheck("distinct_rates", True, "subsystem gains differ")
    ]
    witnesses: dict = {}
    for i, s in enumerate(spec.systems):
        checks.append(_floor_check(f"floor_{i + 1}", s.phi, witnesses, f"p0_{i + 1}"))
    try:
        rate = weighted_decay_rate(spec.gain_matrix())
        witnesses["delta"] = rate.delta
        witnesses["q"] = list(rate.q)
        checks.append(
            HypothesisCheck("weighted_decay", True, f"delta = {rate.delta:.6g}")
        )
    except NotDiagonallyStable as exc:
        checks.append(HypothesisCheck("weighted_decay", False, str(exc)))
    return TheoremReport("T6", tuple(checks), all(c.passed for c in checks), witnesses)
