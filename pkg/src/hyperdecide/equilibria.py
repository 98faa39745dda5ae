"""Equilibrium location, the reduced consensus equation, normal form data.

Instances with a shared 2-interaction ratio admit consensus equilibria: the
state c*ones is stationary exactly when the scalar balance

    gap(c) = -(1 + alpha) c + pi (psi(c) + alpha psi(c)^2)

vanishes. Positive roots of the gap are bracketed on a log-dense grid and
bisected; the fold level (smallest effort at which a positive root pair
exists) comes from the tangency condition on the same scalar function.
General equilibria are found by damped Newton from a deterministic seed set
and classified by the spectrum of the Jacobian.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NewtonDivergence, SingularJacobian
from .hypergraph import Hypergraph2
from .nonlinearity import SigmoidFamily, tanh_family
from .dynamics import SystemInstance, jacobian, vector_field
from .spectra import general_eigenvalues, perron_pair

__all__ = [
    "ScalarReduced",
    "Equilibrium",
    "SeedSpec",
    "consensus_gap",
    "consensus_roots",
    "pi1_star",
    "newton_find",
    "find_all",
    "classify",
    "normal_form_coeffs",
    "equilibria_csv",
    "write_equilibria_csv",
]

RESIDUAL_TOL = 1e-10
_RESIDUAL_FLOOR = 1e-13
_STEP_FLOOR = 1e-9
_STABLE_TOL = 1e-8
_CONSENSUS_TOL = 1e-8
_DEDUP_TOL = 1e-6
_ROOT_EPS_MAX = 50.0


@dataclass(frozen=True)
class ScalarReduced:
    """Parameters of the scalar consensus balance."""

    alpha: float
    pi: float

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if not self.pi > 0.0:
            raise ValueError("effort level must be positive")


@dataclass(frozen=True)
class Equilibrium:
    """A verified stationary state.

    classification is 'stable' when the largest real part of the Jacobian
    spectrum is below -1e-8, 'unstable' above +1e-8, 'marginal' between.
    is_consensus flags states within 1e-8 of the consensus line.
    """

    state: np.ndarray
    pi: float
    residual: float
    classification: str
    max_real_eig: float
    is_consensus: bool

    def __post_init__(self):
        if not self.residual < RESIDUAL_TOL:
            raise ValueError(f"residual {self.residual!r} out of tolerance")

    @property
    def norm_inf(self) -> float:
        return float(np.abs(self.state).max())


def consensus_gap(r: ScalarReduced, eps, psi: Optional[SigmoidFamily] = None):
    """Value of the scalar consensus balance at eps (scalar or array)."""
    psi = psi or tanh_family()
    p = psi.eval(np.asarray(eps, dtype=float))
    return -(1.0 + r.alpha) * np.asarray(eps, dtype=float) + r.pi * (p + r.alpha * p * p)


def _bisect(fn, lo, hi, flo, tol=1e-12, itmax=200):
    for _ in range(itmax):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if flo * fm <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def consensus_roots(r: ScalarReduced, psi: Optional[SigmoidFamily] = None) -> list[float]:
    """Strictly positive roots of the consensus balance on (0, 50].

    Sign changes are bracketed on a log-dense grid and refined by bisection
    to 1e-12. Returns 0, 1 or 2 roots; a tangency squeezed between grid
    nodes reports none. Negative roots are never searched here: for
    alpha > 0 the balance is not odd, and the negative side is reached by
    Newton runs from negative seeds instead.
    """
    psi = psi or tanh_family()
    grid = np.geomspace(1e-8, _ROOT_EPS_MAX, 4096)
    vals = np.asarray(consensus_gap(r, grid, psi), dtype=float)
    roots = []
    fn = lambda e: float(consensus_gap(r, e, psi))
    for i in range(grid.size - 1):
        a, b = float(vals[i]), float(vals[i + 1])
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0.0:
            roots.append(_bisect(fn, float(grid[i]), float(grid[i + 1]), a))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    out = []
    for root in roots:
        if not any(abs(root - r0) < 1e-10 for r0 in out):
            out.append(root)
    return out


def pi1_star(alpha: float, psi: Optional[SigmoidFamily] = None) -> tuple[float, float]:
    """Fold level of the consensus balance and the state where it happens.

    For alpha = 0 the fold degenerates into the origin crossing: (1, 0).
    Otherwise the tangency state solves h(e)/e = h'(e) with
    h(e) = psi(e) + alpha psi(e)^2, found by bisection to 1e-12, and the
    fold level is (1 + alpha) e / h(e). Always lands in [1, 1 + alpha].
    """
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    if alpha == 0.0:
        return 1.0, 0.0
    psi = psi or tanh_family()

    def h(e):
        p = float(psi.eval(np.asarray(e, dtype=float)))
        return p + alpha * p * p

    def h_prime(e):
        p = float(psi.eval(np.asarray(e, dtype=float)))
        dp = float(psi.deriv(np.asarray(e, dtype=float)))
        return dp * (1.0 + 2.0 * alpha * p)

    def tangency(e):
        return h(e) - e * h_prime(e)

    lo = 1e-8
    flo = tangency(lo)
    if flo >= 0.0:
        raise ValueError("tangency bracket failed near the origin")
    hi = 1.0
    for _ in range(80):
        if tangency(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise ValueError("tangency bracket failed at large states")
    eps_star = _bisect(tangency, lo, hi, flo)
    level = (1.0 + alpha) * eps_star / h(eps_star)
    return float(level), float(eps_star)


def _newton_raw(s: SystemInstance, x0, tol=RESIDUAL_TOL, itmax=100):
    """Damped Newton on the field. Polishes below ``tol`` until the full
    Newton step itself is negligible: along near-singular directions the
    residual underestimates the distance to the solution by orders of
    magnitude, so a residual floor alone would accept states a visible
    distance away."""
    x = np.asarray(x0, dtype=float).copy()
    fx = vector_field(s, x)
    res = float(np.abs(fx).max())
    step_inf = np.inf
    for _ in range(itmax):
        if res < _RESIDUAL_FLOOR and step_inf < _STEP_FLOOR:
            return x, res
        if np.abs(x).max() > 1e12 or not np.isfinite(res):
            raise NewtonDivergence(f"iterates blew up (residual {res:.3e})")
        try:
            step = np.linalg.solve(jacobian(s, x), -fx)
        except np.linalg.LinAlgError as exc:
            if res < tol:
                return x, res
            raise SingularJacobian(str(exc)) from exc
        step_inf = float(np.abs(step).max())
        lam = 1.0
        improved = False
        for _ in range(30):
            x_new = x + lam * step
            if np.array_equal(x_new, x):
                break
            f_new = vector_field(s, x_new)
            r_new = float(np.abs(f_new).max())
            if r_new < res:
                x, fx, res = x_new, f_new, r_new
                improved = True
                break
            lam *= 0.5
        if not improved:
            if res < tol:
                return x, res
            raise NewtonDivergence(
                f"line search stalled at residual {res:.3e}")
    if res < tol:
        return x, res
    raise NewtonDivergence(f"no convergence in {itmax} iterations (residual {res:.3e})")


def classify(s: SystemInstance, x, residual: Optional[float] = None) -> Equilibrium:
    """Wrap a stationary state with its spectral classification."""
    x = np.asarray(x, dtype=float)
    if residual is None:
        residual = float(np.abs(vector_field(s, x)).max())
    spec = general_eigenvalues(jacobian(s, x))
    top = float(spec.reals.max())
    if top < -_STABLE_TOL:
        label = "stable"
    elif top > _STABLE_TOL:
        label = "unstable"
    else:
        label = "marginal"
    centered = x - x.mean()
    state = x.copy()
    state.setflags(write=False)
    return Equilibrium(
        state=state,
        pi=s.pi,
        residual=residual,
        classification=label,
        max_real_eig=top,
        is_consensus=bool(np.abs(centered).max() <= _CONSENSUS_TOL),
    )


def newton_find(s: SystemInstance, x0, itmax: int = 100) -> Equilibrium:
    """Damped Newton from ``x0``, classified on success."""
    x, res = _newton_raw(s, x0, itmax=itmax)
    return classify(s, x, res)


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic seed set for the global equilibrium search.

    The backbone is a consensus grid: c * ones for c in +-linspace(0, pi+1,
    consensus_points). When the instance has a shared ratio, lifts of the
    scalar consensus roots are added so branches are caught right at their
    fold. random_count uniform seeds (seeded rng) cover off-line states.
    """

    consensus_points: int = 11
    random_count: int = 6
    rng_seed: int = 0
    scalar_root_seeds: bool = True
    extra: tuple = field(default_factory=tuple)


def _enumerate_seeds(s: SystemInstance, spec: SeedSpec) -> list[np.ndarray]:
    n = s.graph.n
    ones = np.ones(n)
    seeds = []
    for c in np.linspace(0.0, s.pi + 1.0, spec.consensus_points):
        seeds.append(c * ones)
        if c > 0.0:
            seeds.append(-c * ones)
    if spec.scalar_root_seeds and s.graph.alpha is not None:
        reduced = ScalarReduced(alpha=s.graph.alpha, pi=s.pi)
        for root in consensus_roots(reduced, s.psi):
            seeds.append(root * ones)
            if s.graph.alpha == 0.0:
                seeds.append(-root * ones)
    for x in spec.extra:
        seeds.append(np.asarray(x, dtype=float))
    rng = np.random.default_rng(spec.rng_seed)
    bound = s.pi + 1.0
    for _ in range(spec.random_count):
        seeds.append(rng.uniform(-bound, bound, n))
    return seeds


def find_all(s: SystemInstance, seeds: Optional[SeedSpec] = None) -> list[Equilibrium]:
    """Newton from every seed, deduplicated (sup distance 1e-6) and sorted
    by sup norm. Seeds that diverge are dropped silently; reordering the
    seed set cannot change the result beyond its guaranteed sorting."""
    spec = seeds or SeedSpec()
    found: list[np.ndarray] = []
    residuals: list[float] = []
    for x0 in _enumerate_seeds(s, spec):
        try:
            x, res = _newton_raw(s, x0)
        except (NewtonDivergence, SingularJacobian):
            continue
        if any(np.abs(x - y).max() < _DEDUP_TOL for y in found):
            continue
        found.append(x)
        residuals.append(res)
    order = sorted(range(len(found)),
                   key=lambda i: (float(np.abs(found[i]).max()), tuple(found[i])))
    return [classify(s, found[i], residuals[i]) for i in order]


def normal_form_coeffs(g: Hypergraph2, psi: Optional[SigmoidFamily] = None) -> tuple[float, float]:
    """Cubic and quadratic coefficients of the reduced dynamics at the
    origin crossing.

    The quadratic one has the closed form pi1 * sum_i w_i / deg_i *
    (v' B_i v) over the positive eigenpair (v, w). The cubic one is the
    third derivative (over 6) of the reduced scalar map
    y -> w @ D^{-1} (pi1 * nonlinearity)(y v), estimated with a 4th-order
    centered stencil. Expected signs: cubic < 0, quadratic > 0 whenever the
    2-interactions are nonzero.
    """
    psi = psi or tanh_family()
    lam, v, w = perron_pair(g)
    level = 1.0 / lam
    quad = float(level * np.sum((w / g.degrees) * ((g.b @ v) @ v)))

    wd = w / g.degrees

    def reduced(y: float) -> float:
        p = psi.eval(y * v)
        return float(level * wd @ (g.a2 @ p + (g.b @ p) @ p))

    h = 0.05
    coeff = np.array([1.0 / 8.0, -1.0, 13.0 / 8.0, -13.0 / 8.0, 1.0, -1.0 / 8.0])
    offsets = np.array([-3.0, -2.0, -1.0, 1.0, 2.0, 3.0])
    third = float(sum(c * reduced(o * h) for c, o in zip(coeff, offsets)) / h ** 3)
    return third / 6.0, quad


def equilibria_csv(eqs: Sequence[Equilibrium]) -> str:
    if not eqs:
        return "pi,eq_index,classification,max_real_eig,is_consensus\n"
    n = eqs[0].state.size
    buf = io.StringIO()
    buf.write("pi,eq_index,classification,max_real_eig,is_consensus,"
              + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
    for idx, eq in enumerate(eqs):
        buf.write(format(eq.pi, ".17g") + f",{idx},{eq.classification},"
                  + format(eq.max_real_eig, ".17g") + ","
                  + ("1" if eq.is_consensus else "0") + ","
                  + ",".join(format(float(v), ".17g") for v in eq.state) + "\n")
    return buf.getvalue()


def write_equilibria_csv(eqs: Sequence[Equilibrium], path) -> None:
    with open(path, "w") as fh:
        fh.write(equilibria_csv(eqs))
