"""Rosinski measures on finitely many rays, validity and properness checks, and
the map to the spectral form (sigma, Q_u).

A measure is a list of rays; each ray carries a unit direction and a radial
profile.  Profiles are

* ``Atom(r0, w)``: point mass ``w`` at radius ``r0``;
* ``Pareto(r0, rho, c)``: density ``c rho r^(-rho-1)`` on ``(r0, inf)``;
* ``Grid(rs, density, weights)``: a discretized radial density.  Integrals
  over a grid are weighted node sums; by default the weights come from the
  trapezoid rule on ``rs``, but transforms may attach their own quadrature
  weights.

On the spectral side a fourth profile, ``PowerLaw``, appears as the image of
a Pareto profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
from scipy import special

from .errors import DomainError, InvalidMeasureError, NotProperError
from .quadrature import DEFAULT_TOL, QuadTol, quad_log, quad_logexp

MAX_DIM = 8
_UNIT_TOL = 1e-12


# ---------------------------------------------------------------------------
# radial profiles


@dataclass(frozen=True)
class Atom:
    r0: float
    w: float
    kind = "atom"

    def __post_init__(self):
        if not (self.r0 > 0 and math.isfinite(self.r0)):
            raise DomainError(f"atom radius must be positive and finite, got {self.r0}")
        if not (self.w > 0 and math.isfinite(self.w)):
            raise DomainError(f"atom weight must be positive and finite, got {self.w}")

    @property
    def mass(self) -> float:
        return self.w

    def nodes(self):
        return np.array([self.r0]), np.array([self.w])

    def moment(self, q: float, lo: float = 0.0, hi: float = math.inf) -> float:
        """int_{lo < r <= hi} r^q dProfile."""
        return self.w * self.r0 ** q if lo < self.r0 <= hi else 0.0

    def integrate(self, g: Callable[[float], float], tol: QuadTol = DEFAULT_TOL) -> float:
        return self.w * g(self.r0)

    def sup(self) -> float:
        return self.r0

    def scaled(self, factor: float) -> "Atom":
        return Atom(self.r0, self.w * factor)

    def to_dict(self) -> dict:
        return {"kind": "atom", "r0": self.r0, "w": self.w}


@dataclass(frozen=True)
class Pareto:
    """Density ``c rho r^(-rho-1)`` on ``(r0, inf)``; total mass ``c r0^-rho``.

    ``r0 = 0`` is allowed and gives the pure power law used for stable laws
    (infinite mass near the origin).
    """

    r0: float
    rho: float
    c: float
    kind = "pareto"

    def __post_init__(self):
        if not (self.r0 >= 0 and math.isfinite(self.r0)):
            raise DomainError(f"pareto r0 must be >= 0 and finite, got {self.r0}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise DomainError(f"pareto rho must be positive, got {self.rho}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError(f"pareto c must be positive, got {self.c}")

    @property
    def mass(self) -> float:
        return math.inf if self.r0 == 0 else self.c * self.r0 ** -self.rho

    def density(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r > self.r0, self.c * self.rho * r ** (-self.rho - 1.0), 0.0)

    def mass_beyond(self, r: float) -> float:
        return self.c * max(r, self.r0) ** -self.rho if max(r, self.r0) > 0 else math.inf

    def moment(self, q: float, lo: float = 0.0, hi: float = math.inf) -> float:
        a = max(lo, self.r0)
        if hi <= a:
            return 0.0
        e = q - self.rho
        if math.isinf(hi) and e >= 0:
            return math.inf
        if a == 0 and e <= 0:
            return math.inf
        if e == 0:
            return self.c * self.rho * (math.log(hi) - math.log(a))
        top = 0.0 if math.isinf(hi) else hi ** e
        bot = 0.0 if a == 0 else a ** e
        return self.c * self.rho * (top - bot) / e

    def integrate(self, g: Callable[[float], float], tol: QuadTol = DEFAULT_TOL,
                  points: Sequence[float] = ()) -> float:
        def f(r):
            val = g(r)
            return 0.0 if val == 0.0 else val * self.c * self.rho * r ** (-self.rho - 1.0)

        return quad_log(f, self.r0, math.inf, tol, points=[1.0, *points])

    def integrate_log(self, lg: Callable[[float], float], tol: QuadTol = DEFAULT_TOL,
                      points: Sequence[float] = ()) -> float:
        """int g dProfile with g supplied as v -> log g(e^v), for integrands
        that would overflow in direct form."""
        lcr = math.log(self.c * self.rho)
        return quad_logexp(lambda v: lg(v) + lcr - (self.rho + 1.0) * v,
                           self.r0, math.inf, tol, points=[1.0, *points])

    def sup(self) -> float:
        return math.inf

    def scaled(self, factor: float) -> "Pareto":
        return Pareto(self.r0, self.rho, self.c * factor)

    def to_dict(self) -> dict:
        return {"kind": "pareto", "r0": self.r0, "rho": self.rho, "c": self.c}


@dataclass(frozen=True)
class Grid:
    """Radial density sampled at ascending nodes ``rs``.

    ``weights`` are the quadrature weights used for every integral against the
    profile; when omitted they are trapezoid weights times ``density``.
    """

    rs: tuple
    density: tuple
    weights: Union[tuple, None] = None
    kind = "grid"

    def __post_init__(self):
        rs = tuple(float(x) for x in self.rs)
        dens = tuple(float(x) for x in self.density)
        object.__setattr__(self, "rs", rs)
        object.__setattr__(self, "density", dens)
        if len(rs) == 0 or len(rs) != len(dens):
            raise DomainError("grid needs matching, non-empty rs and density")
        r = np.asarray(rs)
        if not np.all(np.isfinite(r)) or r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise DomainError("grid radii must be positive, finite and strictly ascending")
        d = np.asarray(dens)
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise DomainError("grid density must be finite and non-negative")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            object.__setattr__(self, "weights", w)
            wa = np.asarray(w)
            if len(w) != len(rs) or not np.all(np.isfinite(wa)) or np.any(wa < 0):
                raise DomainError("grid weights must be finite, non-negative, one per node")
        elif len(rs) < 2:
            raise DomainError("a grid without weights needs at least two nodes")

    @cached_property
    def _nodes(self):
        r = np.asarray(self.rs)
        if self.weights is not None:
            return r, np.asarray(self.weights)
        h = np.diff(r)
        tw = np.zeros_like(r)
        tw[:-1] += h / 2
        tw[1:] += h / 2
        return r, tw * np.asarray(self.density)

    def nodes(self):
        return self._nodes

    @property
    def mass(self) -> float:
        return float(self._nodes[1].sum())

    def moment(self, q: float, lo: float = 0.0, hi: float = math.inf) -> float:
        r, w = self._nodes
        sel = (r > lo) & (r <= hi)
        return float(np.sum(w[sel] * r[sel] ** q))

    def integrate(self, g: Callable[[float], float], tol: QuadTol = DEFAULT_TOL) -> float:
        r, w = self._nodes
        return float(sum(wi * g(ri) for ri, wi in zip(r, w) if wi > 0))

    def sup(self) -> float:
        return self.rs[-1]

    def scaled(self, factor: float) -> "Grid":
        w = None if self.weights is None else tuple(x * factor for x in self.weights)
        return Grid(self.rs, tuple(x * factor for x in self.density), w)

    def to_dict(self) -> dict:
        out = {"kind": "grid", "rs": list(self.rs), "density": list(self.density)}
        if self.weights is not None:
            out["weights"] = list(self.weights)
        return out


@dataclass(frozen=True)
class PowerLaw:
    """Density ``coef s^(expo-1)`` on ``(0, upper]``: the spectral image of a
    Pareto profile."""

    upper: float
    expo: float
    coef: float
    kind = "power"

    def __post_init__(self):
        if not (self.upper > 0 and self.expo > 0 and self.coef > 0):
            raise DomainError("power-law profile needs positive upper, expo and coef")

    @property
    def mass(self) -> float:
        return self.coef * self.upper ** self.expo / self.expo

    def laplace(self, t: float) -> float:
        """int e^(-t s) coef s^(expo-1) ds over (0, upper]."""
        if t == 0:
            return self.mass
        x = t * self.upper
        return self.coef * t ** -self.expo * math.exp(special.gammaln(self.expo)) * special.gammainc(self.expo, x)

    def scaled(self, factor: float) -> "PowerLaw":
        return PowerLaw(self.upper, self.expo, self.coef * factor)

    def to_dict(self) -> dict:
        return {"kind": "power", "upper": self.upper, "expo": self.expo, "coef": self.coef}


RadialProfile = Union[Atom, Pareto, Grid]
_PROFILE_KINDS = {"atom": Atom, "pareto": Pareto, "grid": Grid, "power": PowerLaw}


def profile_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _PROFILE_KINDS:
        raise DomainError(f"unknown profile kind {kind!r}")
    if kind == "grid":
        return Grid(tuple(d["rs"]), tuple(d["density"]),
                    tuple(d["weights"]) if d.get("weights") is not None else None)
    return _PROFILE_KINDS[kind](**{k: float(v) for k, v in d.items()})


# ---------------------------------------------------------------------------
# measures and parameters


def _unit(direction, dim=None) -> tuple:
    u = tuple(float(x) for x in np.atleast_1d(direction))
    if dim is not None and len(u) != dim:
        raise DomainError(f"direction {u} does not have dimension {dim}")
    if abs(math.sqrt(sum(x * x for x in u)) - 1.0) > _UNIT_TOL:
        raise DomainError(f"direction {u} is not a unit vector")
    return u


@dataclass(frozen=True)
class Ray:
    direction: tuple
    profile: RadialProfile

    def __post_init__(self):
        object.__setattr__(self, "direction", _unit(self.direction))
        if not isinstance(self.profile, (Atom, Pareto, Grid)):
            raise DomainError(f"unsupported radial profile {self.profile!r}")

    def to_dict(self) -> dict:
        return {"direction": list(self.direction), "profile": self.profile.to_dict()}


@dataclass(frozen=True)
class RosinskiMeasure:
    dim: int
    rays: tuple = ()

    def __post_init__(self):
        if not (isinstance(self.dim, (int, np.integer)) and 1 <= self.dim <= MAX_DIM):
            raise DomainError(f"dimension must be an integer in [1, {MAX_DIM}], got {self.dim}")
        rays = tuple(r if isinstance(r, Ray) else Ray(*r) for r in self.rays)
        for r in rays:
            if len(r.direction) != self.dim:
                raise DomainError(f"ray direction {r.direction} has wrong dimension")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "rays", rays)

    @classmethod
    def atom(cls, x, w: float = 1.0) -> "RosinskiMeasure":
        """Point mass ``w`` at the non-zero point ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r = float(np.linalg.norm(x))
        if r == 0:
            raise DomainError("R must not charge the origin")
        return cls(len(x), (Ray(tuple(x / r), Atom(r, w)),))

    @classmethod
    def zero(cls, dim: int = 1) -> "RosinskiMeasure":
        return cls(dim, ())

    def __add__(self, other: "RosinskiMeasure") -> "RosinskiMeasure":
        if self.dim != other.dim:
            raise DomainError("cannot add measures of different dimension")
        return RosinskiMeasure(self.dim, self.rays + other.rays)

    @property
    def is_zero(self) -> bool:
        return len(self.rays) == 0

    def directions(self) -> np.ndarray:
        return np.array([r.direction for r in self.rays]).reshape(len(self.rays), self.dim)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "rays": [r.to_dict() for r in self.rays]}

    @classmethod
    def from_dict(cls, d: dict) -> "RosinskiMeasure":
        dim = d["dim"]
        if not isinstance(dim, int):
            raise DomainError("measure dim must be an integer")
        rays = tuple(Ray(_unit(r["direction"], dim), profile_from_dict(r["profile"]))
                     for r in d.get("rays", []))
        return cls(dim, rays)


@dataclass(frozen=True)
class TSParams:
    """Parameters of TS^p_alpha(R, b).  Construction checks validity."""

    alpha: float
    p: float
    b: tuple
    R: RosinskiMeasure
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "p", float(self.p))
        b = tuple(float(x) for x in np.atleast_1d(self.b)) if self.b is not None else ()
        if np.ndim(self.b) == 0 and self.b is not None:
            b = b * self.R.dim  # a scalar shift applies to every coordinate
        if len(b) == 0:
            b = (0.0,) * self.R.dim
        if len(b) != self.R.dim:
            raise DomainError(f"shift has length {len(b)}, measure has dimension {self.R.dim}")
        object.__setattr__(self, "b", b)
        if not self.p > 0 or not math.isfinite(self.p):
            raise DomainError(f"p must be positive, got {self.p}")
        if self.check:
            rep = validate(self.alpha, self.R)
            if not rep.valid:
                raise InvalidMeasureError(
                    f"R does not generate a Levy measure: {', '.join(rep.violations)}",
                    rep.violations)

    @property
    def dim(self) -> int:
        return self.R.dim

    def replace(self, **kw) -> "TSParams":
        d = {"alpha": self.alpha, "p": self.p, "b": self.b, "R": self.R}
        d.update(kw)
        return TSParams(**d)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "p": self.p, "b": list(self.b),
                "measure": self.R.to_dict()}

    @classmethod
    def from_dict(cls, d: dict, check: bool = True) -> "TSParams":
        return cls(float(d["alpha"]), float(d["p"]), d.get("b"),
                   RosinskiMeasure.from_dict(d["measure"]), check=check)


# ---------------------------------------------------------------------------
# validity


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple
    integrals: dict

    def __bool__(self):
        return self.valid


def _far_name(alpha: float) -> str:
    if alpha > 0:
        return "tail-alpha-integral"
    if alpha == 0:
        return "tail-log-integral"
    return "tail-mass-integral"


def _far_integral(alpha: float, prof) -> float:
    """int_{r>1} of r^alpha, 1 + log r or 1 (by the sign of alpha)."""
    if alpha > 0:
        return prof.moment(alpha, lo=1.0)
    if alpha < 0:
        return prof.moment(0.0, lo=1.0)
    if isinstance(prof, Pareto):
        # int_a^inf (1 + log r) c rho r^(-rho-1) dr, a = max(1, r0)
        a = max(1.0, prof.r0)
        return prof.c * a ** -prof.rho * (1.0 + math.log(a) + 1.0 / prof.rho)
    r, w = prof.nodes()
    sel = r > 1
    return float(np.sum(w[sel] * (1.0 + np.log(r[sel]))))


def validate(alpha: float, R: RosinskiMeasure) -> ValidationReport:
    """Check that R generates a Levy measure for index ``alpha``.

    The near part int_{r<=1} r^2 dR and the far part int_{r>1} h dR with
    h = r^alpha (alpha in (0,2)), 1 + log r (alpha = 0) or 1 (alpha < 0) are
    computed per ray, in closed form for atoms and Pareto profiles and as
    node sums for grids.  Divergent integrals are reported by name.
    """
    violations = []
    if not alpha < 2:
        violations.append("alpha-range")
        return ValidationReport(False, tuple(violations), {})
    near = far = 0.0
    for ray in R.rays:
        near += ray.profile.moment(2.0, hi=1.0)
        far += _far_integral(alpha, ray.profile)
    if not math.isfinite(near):
        violations.append("near-origin-square-integral")
    if not math.isfinite(far):
        violations.append(_far_name(alpha))
    return ValidationReport(not violations, tuple(violations),
                            {"near-origin-square-integral": near, _far_name(alpha): far})


def alpha_moment(alpha: float, R: RosinskiMeasure) -> float:
    """int |x|^alpha R(dx), possibly infinite."""
    return float(sum(ray.profile.moment(alpha) for ray in R.rays))


def is_proper(alpha: float, R: RosinskiMeasure) -> bool:
    """True iff int |x|^alpha R(dx) < inf."""
    rep = validate(alpha, R)
    if not rep.valid:
        raise InvalidMeasureError("R does not generate a Levy measure", rep.violations)
    return math.isfinite(alpha_moment(alpha, R))


# ---------------------------------------------------------------------------
# spectral form


@dataclass(frozen=True)
class SpectralForm:
    """Polar data of a proper law: sigma weights per ray and probability
    measures Q_u (as profiles on the s-axis) with q(r^p, u) = int e^(-r^p s) Q_u(ds)."""

    alpha: float
    p: float
    sigma: tuple  # ((direction, weight), ...)
    Qu: tuple  # one profile per sigma entry, each of unit mass

    def laplace(self, t: float, u) -> float:
        """Laplace transform of Q_u at t."""
        u = np.asarray(u, dtype=float)
        num = den = 0.0
        found = False
        for (d, wt), q in zip(self.sigma, self.Qu):
            if np.max(np.abs(np.asarray(d) - u)) < 1e-12:
                found = True
                num += wt * _profile_laplace(q, t)
                den += wt
        if not found:
            raise DomainError(f"direction {tuple(u)} is not charged by sigma")
        return num / den if den > 0 else 0.0


def _profile_laplace(q, t: float) -> float:
    if isinstance(q, PowerLaw):
        return q.laplace(t)
    r, w = q.nodes()
    return float(np.sum(w * np.exp(-t * r)))


def to_spectral(params: TSParams) -> SpectralForm:
    """sigma(D) = int 1_D(x/|x|) |x|^alpha R(dx); Q_u the pushforward of
    |x|^alpha R(dx) under r -> r^-p, normalized per ray."""
    alpha, p = params.alpha, params.p
    if not is_proper(alpha, params.R):
        raise NotProperError("int |x|^alpha R(dx) diverges")
    sigma, qs = [], []
    for ray in params.R.rays:
        prof = ray.profile
        wt = prof.moment(alpha)
        if isinstance(prof, Pareto):
            # r = s^(-1/p): c rho r^(-rho-1) r^alpha dr = (c rho / p) s^((rho-alpha)/p - 1) ds
            q = PowerLaw(prof.r0 ** -p, (prof.rho - alpha) / p, prof.c * prof.rho / p / wt)
        elif isinstance(prof, Atom):
            q = Atom(prof.r0 ** -p, 1.0)
        else:
            r, w = prof.nodes()
            keep = w > 0
            s = r[keep][::-1] ** -p
            m = (w[keep] * r[keep] ** alpha)[::-1] / wt
            q = Grid(tuple(s), tuple(m), tuple(m))
        sigma.append((ray.direction, wt))
        qs.append(q)
    return SpectralForm(alpha, p, tuple(sigma), tuple(qs))


def from_spectral(s: SpectralForm, alpha: float, p: float) -> RosinskiMeasure:
    """Inverse map: R(A) = int 1_A(x/|x|^(1+1/p)) |x|^(alpha/p) Q(dx)."""
    if not s.sigma:
        return RosinskiMeasure(1, ())
    dim = len(s.sigma[0][0])
    rays = []
    for (d, wt), q in zip(s.sigma, s.Qu):
        if isinstance(q, Atom):
            prof = Atom(q.r0 ** (-1.0 / p), wt * q.w * q.r0 ** (alpha / p))
        elif isinstance(q, PowerLaw):
            rho = p * q.expo + alpha
            prof = Pareto(q.upper ** (-1.0 / p), rho, p * wt * q.coef / rho)
        else:
            sv, m = q.nodes()
            keep = m > 0
            r = sv[keep][::-1] ** (-1.0 / p)
            w = (wt * m[keep] * sv[keep] ** (alpha / p))[::-1]
            prof = Atom(float(r[0]), float(w[0])) if len(r) == 1 else Grid(tuple(r), tuple(w), tuple(w))
        rays.append(Ray(d, prof))
    return RosinskiMeasure(dim, tuple(rays))


def tempering_function(s: SpectralForm, r: float, u) -> float:
    """q(r^p, u) = int e^(-r^p s) Q_u(ds)."""
    if not r > 0:
        raise DomainError("tempering_function needs r > 0")
    return s.laplace(r ** s.p, u)
