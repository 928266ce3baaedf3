"""Gain functions that blow up at a terminal time.

Everything in this module is built around the scale variable

    xi(t) = T / (T - t),

which maps the horizon [0, T) onto [1, inf). Time-varying gains are
represented as polynomials in xi with nonnegative integer exponents,
optionally shifted by a constant offset. That restriction buys exact
closed forms for derivatives and running integrals, which the rest of
the toolkit leans on: no quadrature is performed outside of tests.

Conventions used throughout:

* ``XiPolynomial`` is a plain polynomial value type. It carries its own
  terminal time ``T`` so it can be evaluated either in ``xi`` or in
  ``t``.
* ``BlowUpFunction`` wraps a polynomial plus offset and enforces the
  structural requirements of a gain that actually blows up: positive
  coefficients, a nonnegative offset, and at least one term of exponent
  one or higher.
* Running integrals ``a(t) = integral of phi from 0 to t`` are
  materialized as ``TimeScaleTransform`` objects with exact evaluation
  and inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from scipy.optimize import brentq

from .errors import (
    DomainError,
    InvalidBlowUp,
    NoQuadraticFloor,
    NotCertifiable,
    TimeOutOfHorizon,
)

__all__ = [
    "XiPolynomial",
    "BlowUpFunction",
    "TimeScaleTransform",
    "ExpEnvelope",
    "GainAxiomReport",
    "IntegralBound",
    "xi_of",
    "derivative",
    "time_scale_transform",
    "quadratic_floor",
    "product_limit_envelope",
    "inverse_square_integral_bound",
    "check_gain_axioms",
    "gain_from_json",
    "gain_to_json",
    "polynomial_from_json",
    "polynomial_to_json",
]


def xi_of(t: float, T: float) -> float:
    """Map horizon time ``t`` in [0, T) to the scale variable ``xi`` in [1, inf)."""
    if not 0.0 <= t < T:
        raise TimeOutOfHorizon(f"t={t!r} outside [0, {T})")
    return T / (T - t)


def _canonical_terms(terms: Iterable[tuple[int, float]]) -> tuple[tuple[int, float], ...]:
    acc: dict[int, float] = {}
    for k, c in terms:
        if not isinstance(k, int) or isinstance(k, bool):
            raise DomainError(f"exponent {k!r} is not an integer")
        if k < 0:
            raise DomainError(f"exponent {k} is negative")
        c = float(c)
        if not math.isfinite(c):
            raise DomainError(f"coefficient for exponent {k} is not finite")
        acc[k] = acc.get(k, 0.0) + c
    return tuple(sorted((k, c) for k, c in acc.items() if c != 0.0))


@dataclass(frozen=True)
class XiPolynomial:
    """Polynomial in the scale variable xi with integer exponents >= 0.

    ``terms`` is kept canonical: sorted by exponent, duplicates merged,
    zero coefficients dropped. Coefficients may have either sign here;
    operations that need nonnegativity (envelopes, integral bounds)
    check for it explicitly.
    """

    terms: tuple[tuple[int, float], ...]
    T: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise DomainError(f"terminal time T={self.T!r} must be finite and positive")
        object.__setattr__(self, "terms", _canonical_terms(self.terms))

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, float], T: float) -> "XiPolynomial":
        return cls(tuple(coeffs.items()), T)

    @property
    def degree(self) -> int:
        return self.terms[-1][0] if self.terms else 0

    def coeff(self, k: int) -> float:
        for kk, c in self.terms:
            if kk == k:
                return c
        return 0.0

    @property
    def coeffs_nonnegative(self) -> bool:
        return all(c >= 0.0 for _, c in self.terms)

    def eval_xi(self, xi: float) -> float:
        if xi < 1.0:
            raise DomainError(f"xi={xi!r} below 1")
        return sum(c * xi**k for k, c in self.terms)

    def __call__(self, t: float) -> float:
        return self.eval_xi(xi_of(t, self.T))

    def scaled(self, factor: float) -> "XiPolynomial":
        return XiPolynomial(tuple((k, factor * c) for k, c in self.terms), self.T)


@dataclass(frozen=True)
class BlowUpFunction:
    """A gain ``phi(t) = offset + sum_k c_k * xi(t)**k`` that diverges at T.

    Construction enforces, once and for all, the properties the rest of
    the toolkit assumes: strictly positive polynomial coefficients, a
    nonnegative offset, and at least one exponent >= 1 so the value
    actually diverges as t -> T. Any constant (exponent zero) terms are
    folded into the offset so the representation is canonical.
    """

    poly: XiPolynomial
    offset: float = 0.0

    def __post_init__(self) -> None:
        offset = float(self.offset)
        folded = self.poly.coeff(0)
        if folded != 0.0:
            offset += folded
            object.__setattr__(
                self,
                "poly",
                XiPolynomial(tuple((k, c) for k, c in self.poly.terms if k != 0), self.poly.T),
            )
        if not math.isfinite(offset) or offset < 0.0:
            raise InvalidBlowUp(f"offset {offset!r} must be finite and >= 0")
        object.__setattr__(self, "offset", offset)
        if not self.poly.terms:
            raise InvalidBlowUp("gain has no growing term, it cannot blow up")
        for k, c in self.poly.terms:
            if c <= 0.0:
                raise InvalidBlowUp(f"coefficient {c!r} at exponent {k} must be positive")

    @property
    def T(self) -> float:
        return self.poly.T

    @property
    def phi0(self) -> float:
        """Value at t = 0, which is also the infimum over the horizon."""
        return self.offset + sum(c for _, c in self.poly.terms)

    def eval_xi(self, xi: float) -> float:
        return self.offset + self.poly.eval_xi(xi)

    def __call__(self, t: float) -> float:
        return self.eval_xi(xi_of(t, self.T))

    def halved(self) -> "BlowUpFunction":
        return BlowUpFunction(self.poly.scaled(0.5), 0.5 * self.offset)


def derivative(f: BlowUpFunction) -> XiPolynomial:
    """Exact time derivative of a gain, again a polynomial in xi.

    Term by term, d/dt xi**k = (k / T) * xi**(k + 1), and the offset
    contributes nothing.
    """
    T = f.T
    return XiPolynomial(tuple((k + 1, k * c / T) for k, c in f.poly.terms), T)


def _integral_pieces(
    terms: tuple[tuple[int, float], ...], offset: float, T: float
) -> tuple[float, float, tuple[tuple[int, float], ...]]:
    """Closed-form pieces of a(t) = integral of the gain from 0 to t.

    Returns (linear, log_coeff, power_terms) such that
    a(t) = linear * t + log_coeff * ln(xi) + sum c_j * (xi**j - 1).
    """
    linear = offset
    log_coeff = 0.0
    powers: list[tuple[int, float]] = []
    for k, c in terms:
        if k == 0:
            linear += c
        elif k == 1:
            log_coeff += c * T
        else:
            powers.append((k - 1, c * T / (k - 1)))
    return linear, log_coeff, tuple(powers)


@dataclass(frozen=True)
class TimeScaleTransform:
    """The running integral a(t) of a gain, in exact closed form.

    a is a strictly increasing bijection from [0, T) onto [0, inf); it
    is the time-scale change under which the gain becomes a unit rate.
    ``inverse`` recovers t from a target integral value, via the exact
    formulas when the source is a single pure power with no offset and
    via bracketed root finding otherwise.
    """

    source: BlowUpFunction
    linear: float = field(init=False)
    log_coeff: float = field(init=False)
    power_terms: tuple[tuple[int, float], ...] = field(init=False)

    def __post_init__(self) -> None:
        linear, log_coeff, powers = _integral_pieces(
            self.source.poly.terms, self.source.offset, self.source.T
        )
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "log_coeff", log_coeff)
        object.__setattr__(self, "power_terms", powers)

    @property
    def T(self) -> float:
        return self.source.T

    def __call__(self, t: float) -> float:
        xi = xi_of(t, self.T)
        out = self.linear * t
        if self.log_coeff:
            out += self.log_coeff * math.log(xi)
        for j, c in self.power_terms:
            out += c * (xi**j - 1.0)
        return out

    def inverse(self, tau: float, rtol: float = 1e-12) -> float:
        if tau < 0.0:
            raise DomainError(f"integral value tau={tau!r} must be >= 0")
        if tau == 0.0:
            return 0.0
        T = self.T
        f = self.source
        if f.offset == 0.0 and len(f.poly.terms) == 1:
            k, c = f.poly.terms[0]
            if k == 1:
                return T * (1.0 - math.exp(-tau / (c * T)))
            return T * (1.0 - (c * T / ((k - 1) * tau + c * T)) ** (1.0 / (k - 1)))
        # General case: bracket against T, then solve a(t) = tau.
        hi = 0.5 * T
        while self(hi) < tau:
            hi = T - 0.5 * (T - hi)
            if T - hi < 1e-15 * T:
                break
        t = brentq(lambda s: self(s) - tau, 0.0, hi, xtol=rtol * T, rtol=4 * 2.3e-16)
        return float(t)


def time_scale_transform(f: BlowUpFunction) -> TimeScaleTransform:
    return TimeScaleTransform(f)


def quadratic_floor(f: BlowUpFunction) -> float:
    """Largest p0 certified by coefficient mass: phi(t) >= p0 * xi(t)**2.

    Uses xi**k >= xi**2 for every k >= 2 on xi >= 1, so p0 is simply the
    sum of coefficients at exponents two and above. Offset and linear
    terms are ignored (conservative). Raises NoQuadraticFloor when no
    such term exists.
    """
    p0 = sum(c for k, c in f.poly.terms if k >= 2)
    if p0 <= 0.0:
        raise NoQuadraticFloor(
            "gain has no term of exponent >= 2, no quadratic floor exists"
        )
    return p0


@dataclass(frozen=True)
class ExpEnvelope:
    """Decay envelope ``c * exp(-(a(t) - a(onset)))`` driven by a gain.

    The rate must admit a quadratic floor p0 > 0; this is what makes the
    envelope collapse faster than any polynomial in xi grows, and both
    p0 and the onset in xi coordinates are stored for downstream bounds.
    """

    c: float
    onset: float
    rate: BlowUpFunction
    p0: float = field(init=False)
    onset_xi: float = field(init=False)
    _transform: TimeScaleTransform = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise DomainError(f"envelope constant c={self.c!r} must be positive")
        if not 0.0 <= self.onset < self.rate.T:
            raise DomainError(f"onset {self.onset!r} outside [0, T)")
        object.__setattr__(self, "p0", quadratic_floor(self.rate))
        object.__setattr__(self, "onset_xi", self.rate.T / (self.rate.T - self.onset))
        object.__setattr__(self, "_transform", TimeScaleTransform(self.rate))

    def __call__(self, t: float) -> float:
        if t < self.onset:
            raise TimeOutOfHorizon(f"t={t!r} before envelope onset {self.onset!r}")
        decay = self._transform(t) - self._transform(self.onset)
        try:
            return self.c * math.exp(-decay)
        except OverflowError:  # decay < 0 cannot happen; guard anyway
            raise


def product_limit_envelope(
    p2: XiPolynomial,
    env: ExpEnvelope,
    grid: int = 10_000,
    xi_max: float = 1e6,
) -> ExpEnvelope:
    """Envelope for the product of a polynomial signal bound and an envelope.

    Splitting the decay of ``env`` in half absorbs the polynomial factor:
    p2(xi) * exp(-d(t)) = [p2(xi) * exp(-d(t)/2)] * exp(-d(t)/2), and the
    bracket eventually drops below one because d grows at least like
    p0 * T * xi. The returned envelope has the rate halved and its onset
    moved to the first grid time after which the bracket stays <= 1,
    certified on a geometric xi grid (conservative: the scan requires the
    bound to hold at every later grid point, not just the first crossing).
    """
    if not p2.coeffs_nonnegative:
        raise DomainError("product bound requires nonnegative envelope coefficients")
    T = env.rate.T
    ratio = (xi_max / env.onset_xi) ** (1.0 / (grid - 1))
    xis = [env.onset_xi * ratio**i for i in range(grid)]
    a = env._transform
    a_onset = a(env.onset)
    ok_from = None
    # Reverse scan: find the earliest index from which the bracket never
    # exceeds 1 again on the grid.
    all_ok = True
    for i in range(grid - 1, -1, -1):
        xi = xis[i]
        t = T * (1.0 - 1.0 / xi)
        bracket = p2.eval_xi(xi) * math.exp(-0.5 * (a(t) - a_onset))
        if bracket <= 1.0 and all_ok:
            ok_from = i
        else:
            all_ok = False
    if ok_from is None:
        raise NotCertifiable(
            "product bound never settles below 1 on the certification grid"
        )
    onset_new = T * (1.0 - 1.0 / xis[ok_from])
    onset_new = max(onset_new, env.onset)
    c_new = env.c * math.exp(-0.5 * (a(onset_new) - a_onset))
    return ExpEnvelope(c_new, onset_new, env.rate.halved())


@dataclass(frozen=True)
class IntegralBound:
    """Exact value and closed-form upper bound of an inverse-square integral."""

    exact: float
    upper: float


def inverse_square_integral_bound(p2: XiPolynomial, xi: float) -> IntegralBound:
    """Integral of p2(rho) / rho**2 over rho in [1, xi], with a loose bound.

    The exact antiderivative is elementary for every power. The upper
    bound replaces each piece by a crude polynomial majorant (constant
    and linear pieces are bounded by multiples of xi) and is the form
    used when chaining envelope integrals into growth certificates. For
    nonnegative coefficients the bound always dominates the exact value.
    """
    if xi < 1.0:
        raise DomainError(f"xi={xi!r} below 1")
    if not p2.coeffs_nonnegative:
        raise DomainError("integral bound requires nonnegative coefficients")
    exact = 0.0
    upper = 0.0
    for k, c in p2.terms:
        if k == 0:
            exact += c * (1.0 - 1.0 / xi)
            upper += c
        elif k == 1:
            exact += c * math.log(xi)
            upper += c * xi
        elif k == 2:
            exact += c * (xi - 1.0)
            upper += c * xi
        else:
            exact += c / (k - 1) * (xi ** (k - 1) - 1.0)
            upper += c / (k - 1) * xi ** (k - 1)
    return IntegralBound(exact, upper)


@dataclass(frozen=True)
class GainAxiomReport:
    """Grid-checked indicators for the structural gain properties.

    The divergence indicators are deliberately crude (value growth by a
    factor of 1e6 over the grid, running integral beyond 1e3). Gains
    built through BlowUpFunction satisfy the real properties by
    construction; this report exists to flag raw polynomials that do
    not, such as bounded or constant rates.
    """

    positive: bool
    monotone: bool
    finite: bool
    diverges: bool
    integral_diverges: bool

    @property
    def all_ok(self) -> bool:
        return (
            self.positive
            and self.monotone
            and self.finite
            and self.diverges
            and self.integral_diverges
        )


def check_gain_axioms(
    f: Union[BlowUpFunction, XiPolynomial],
    grid: int = 2048,
    xi_max: float = 1e6,
) -> GainAxiomReport:
    """Evaluate the gain axioms on a geometric grid accumulating at T."""
    if isinstance(f, BlowUpFunction):
        terms, offset, T = f.poly.terms, f.offset, f.T
        value_xi = f.eval_xi
    else:
        terms, offset, T = f.terms, 0.0, f.T
        value_xi = f.eval_xi
    linear, log_coeff, powers = _integral_pieces(terms, offset, T)

    def integral_at(xi: float, t: float) -> float:
        out = linear * t
        if log_coeff:
            out += log_coeff * math.log(xi)
        for j, c in powers:
            out += c * (xi**j - 1.0)
        return out

    ratio = xi_max ** (1.0 / (grid - 1))
    values = []
    for i in range(grid):
        xi = ratio**i
        values.append(value_xi(xi))
    phi0 = values[0]
    finite = all(math.isfinite(v) for v in values)
    positive = all(v > 0.0 for v in values)
    monotone = all(b >= a for a, b in zip(values, values[1:]))
    diverges = values[-1] > 1e6 * phi0
    t_last = T * (1.0 - 1.0 / xi_max)
    integral_diverges = integral_at(xi_max, t_last) > 1e3
    return GainAxiomReport(positive, monotone, finite, diverges, integral_diverges)


# --- JSON wire format -------------------------------------------------------
#
# {"T": 5.05, "offset": 6.0, "terms": [{"k": 2, "c": 1.0}]}
#
# The same shape serves both full gains and plain envelope polynomials;
# for the latter the offset is folded into an exponent-zero term.


def gain_from_json(obj: Mapping) -> BlowUpFunction:
    try:
        T = float(obj["T"])
        offset = float(obj.get("offset", 0.0))
        terms = tuple((int(item["k"]), float(item["c"])) for item in obj.get("terms", ()))
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed gain object: {exc}") from exc
    return BlowUpFunction(XiPolynomial(terms, T), offset)


def gain_to_json(f: BlowUpFunction) -> dict:
    return {
        "T": f.T,
        "offset": f.offset,
        "terms": [{"k": k, "c": c} for k, c in f.poly.terms],
    }


def polynomial_from_json(obj: Mapping) -> XiPolynomial:
    try:
        T = float(obj["T"])
        offset = float(obj.get("offset", 0.0))
        terms = [(int(item["k"]), float(item["c"])) for item in obj.get("terms", ())]
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed polynomial object: {exc}") from exc
    if offset:
        terms.append((0, offset))
    return XiPolynomial(tuple(terms), T)


def polynomial_to_json(p: XiPolynomial) -> dict:
    return {"T": p.T, "offset": 0.0, "terms": [{"k": k, "c": c} for k, c in p.terms]}
