"""Canonical field configurations and the associated physics numbers.

Heaviside-Lorentz units with epsilon_0 = 1 and c = 1 throughout.  The
electric stress convention is fixed by the pointwise trace identity
T^{00} = T^{11} + T^{22} + T^{33} for a pure field, which pins
T^{ab} = |E|^2 delta^{ab} / 2 - E^a E^b.

Each scenario carries its preferred quadrature: a Cartesian box for
compact or rapidly decaying fields, a radially adapted product rule
(linear inside the shell radius, log-spaced Simpson outside) for the
1/r^4 Coulomb tails.  ``adapted_slice_patch`` places the same rule in
coordinates adapted to a group element, so discontinuity surfaces of
transformed fields stay aligned with radial cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exterior import Signature
from .fields import SymTensorField, boost_emt_analytic
from .poincare import PoincareElement, invert, standard_boost
from .quadrature import (
    HyperplanePatch,
    map_rule_affine,
    spherical_rule,
)

__all__ = [
    "ScenarioSpec",
    "ScenarioResult",
    "SCENARIO_NAMES",
    "build",
    "tolman_weak_ep",
    "kinetic_stress_sums",
    "coulomb_pair_energy",
    "virial_check",
    "trouton_noble_demo",
]

SCENARIO_NAMES = (
    "gaussian_dust",
    "coulomb_shell",
    "completed_shell",
    "uniform_field_box",
    "moving_dust",
)

# relative nudge separating the radial segments at a shell surface, so the
# discontinuity sits between Simpson endpoints rather than on one
_EDGE_NUDGE = 1e-12


@dataclass
class ScenarioSpec:
    """Scenario metadata plus its preferred slice quadrature."""

    name: str
    params: dict
    kind: str  # "radial" or "cartesian"
    stationary: bool
    conserved: bool
    box_half_widths: Optional[np.ndarray] = None
    shell_radius: Optional[float] = None
    outer_radius: Optional[float] = None
    analytic: dict = field(default_factory=dict)

    def _radial_segments(self, scale: float, outer: Optional[float] = None):
        R = self.shell_radius
        r_out = outer if outer is not None else self.outer_radius
        n_in = 2 * max(1, round(12 * scale))
        n_out = 2 * max(1, round(48 * scale))
        return [
            (1e-9 * R, R * (1.0 - _EDGE_NUDGE), n_in, "linear"),
            (R * (1.0 + _EDGE_NUDGE), r_out, n_out, "log"),
        ]

    def slice_patch(
        self,
        sig: Signature,
        t: float = 0.0,
        scale: float = 1.0,
        outer: Optional[float] = None,
    ) -> HyperplanePatch:
        """Constant-time patch carrying the scenario's preferred rule."""
        return self.adapted_slice_patch(None, sig, t=t, scale=scale, outer=outer)

    def adapted_slice_patch(
        self,
        g: Optional[PoincareElement],
        sig: Signature,
        t: float = 0.0,
        scale: float = 1.0,
        outer: Optional[float] = None,
    ) -> HyperplanePatch:
        """Patch on x^0 = t with nodes adapted to the g-image of the scenario.

        Nodes are generated in the comoving spatial coordinates
        u = spatial(g^{-1}(t, x)), where the transformed field keeps its
        original shape, then mapped back to slice coordinates.  ``g = None``
        or the identity reproduces the plain centered rule.
        """
        n = sig.n
        if n != 4:
            raise ValueError("scenario quadrature is four-dimensional")
        if g is None:
            S = np.eye(3)
            shift = np.zeros(3)
        else:
            ginv = invert(g)
            S = ginv.A[1:, 1:]
            point0 = np.zeros(n)
            point0[0] = t
            shift = (ginv.apply(point0))[1:]
            if abs(np.linalg.det(S)) < 1e-12:
                raise ValueError("slice is degenerate in adapted coordinates")
        if self.kind == "radial":
            n_ang = max(4, round(48 * scale))
            nodes_u, weights_u = spherical_rule(
                self._radial_segments(scale, outer), n_ang, n_ang
            )
        elif self.kind == "cartesian":
            hw = self.box_half_widths
            N = max(2, round(48 * scale))
            axes = []
            cell = 1.0
            for L in hw:
                step = 2.0 * L / N
                axes.append(-L + (np.arange(N) + 0.5) * step)
                cell *= step
            mesh = np.meshgrid(*axes, indexing="ij")
            nodes_u = np.stack([m.ravel() for m in mesh], axis=-1)
            weights_u = np.full(nodes_u.shape[0], cell)
        else:
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        nodes, weights = map_rule_affine(nodes_u, weights_u, S, shift)
        base = HyperplanePatch.time_slice(sig, t=t, half_widths=1.0, grid=(2,))
        return base.with_rule(nodes, weights)


@dataclass
class ScenarioResult:
    """Container the CLI serialises: momentum, stress integrals, extras."""

    name: str
    P: np.ndarray
    stress: dict
    extras: dict
    grid: str


def run_scenario(
    name: str,
    params: Optional[dict] = None,
    sig: Optional[Signature] = None,
    scale: float = 1.0,
) -> ScenarioResult:
    """Build a scenario, integrate it on its preferred slice rule, and
    collect the scenario-specific scalars (weak-field passive mass and the
    pointwise mass-integrand identity residual for stationary systems)."""
    from .quadrature import four_momentum, laue_integrals

    sig = sig or Signature.mostly_minus(4)
    T, spec = build(name, **(params or {}))
    patch = spec.slice_patch(sig, scale=scale)
    P = four_momentum(T, patch)
    stress = {}
    extras = {}
    if spec.stationary:
        stress = laue_integrals(T, patch)
        L_int, passive_mass, residual = tolman_weak_ep(T, -1.0, patch)
        extras["passive_mass"] = passive_mass
        extras["tolman_integrand_residual"] = residual
    return ScenarioResult(
        spec.name, P, stress, extras, f"{spec.kind}:scale={scale:g}"
    )


def _smoothstep_c2(t):
    """Quintic blend, 0 -> 1 on [0, 1] with vanishing first and second
    derivatives at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 + t * (-15.0 + 6.0 * t))


def _shell_stress(points, q, R, r_out, completed, mollify=0.0):
    points = np.asarray(points, float)
    x = points[..., 1:]
    r2 = np.sum(x * x, axis=-1)
    r = np.sqrt(r2)
    # floor keeps 1/r^4 finite at the origin, where the weight is zero anyway
    r_safe = np.maximum(r, 1e-60 * R)
    out = np.zeros(points.shape[:-1] + (4, 4))
    coef = (q / (4.0 * math.pi)) ** 2
    e2 = coef / r_safe**4  # |E|^2
    dirs = x / r_safe[..., None]
    if mollify > 0.0:
        # C^2 blend of width mollify across the surface, for derivative
        # probes only; integral checks use the sharp profile
        w = _smoothstep_c2((r - (R - 0.5 * mollify)) / mollify)
    else:
        w = (r > R).astype(float)
    half_e2 = w * 0.5 * e2
    out[..., 0, 0] = half_e2
    for a in range(3):
        for b in range(a, 3):
            ee = -w * e2 * (dirs[..., a] * dirs[..., b])
            out[..., 1 + a, 1 + b] = ee
            out[..., 1 + b, 1 + a] = ee
        out[..., 1 + a, 1 + a] += half_e2
    if completed:
        # interior isotropic tension balancing the exterior stress integrals
        p = q**2 / (32.0 * math.pi**2 * R**4)
        for a in range(3):
            out[..., 1 + a, 1 + a] -= (1.0 - w) * p
    return out


def build(name: str, **params):
    """Return (T, spec) for a named scenario; unknown names are rejected."""
    if name == "gaussian_dust":
        rho0 = float(params.pop("rho0", 1.0))
        sigma = float(params.pop("sigma", 1.0))
        _reject_unknown(name, params)
        if rho0 <= 0 or sigma <= 0:
            raise ValueError("gaussian_dust needs positive rho0 and sigma")

        def func(points):
            points = np.asarray(points, float)
            r2 = np.sum(points[..., 1:] ** 2, axis=-1)
            out = np.zeros(points.shape[:-1] + (4, 4))
            out[..., 0, 0] = rho0 * np.exp(-r2 / sigma**2)
            return out

        T = SymTensorField(func, stationary=True, support_radius=None)
        spec = ScenarioSpec(
            name,
            {"rho0": rho0, "sigma": sigma},
            kind="cartesian",
            stationary=True,
            conserved=True,
            box_half_widths=np.full(3, 8.0 * sigma),
            analytic={"P0": rho0 * math.pi**1.5 * sigma**3},
        )
        return T, spec

    if name in ("coulomb_shell", "completed_shell"):
        q = float(params.pop("q", 1.0))
        R = float(params.pop("R", 1.0))
        r_out = float(params.pop("r_out", 1e3 * R))
        mollify = params.pop("mollify", 0.0)
        mollify = 0.05 * R if mollify is True else float(mollify)
        _reject_unknown(name, params)
        if q == 0 or R <= 0 or r_out <= R:
            raise ValueError("shell needs q != 0, R > 0, r_out > R")
        if mollify < 0 or mollify >= R:
            raise ValueError("mollifier width must be in [0, R)")
        completed = name == "completed_shell"

        def func(points, q=q, R=R, r_out=r_out, completed=completed, m=mollify):
            return _shell_stress(points, q, R, r_out, completed, m)

        T = SymTensorField(func, stationary=True, support_radius=None)
        P0 = q**2 / (8.0 * math.pi) * (1.0 / R - 1.0 / r_out)
        spec = ScenarioSpec(
            name,
            {"q": q, "R": R, "r_out": r_out},
            kind="radial",
            stationary=True,
            conserved=completed,
            shell_radius=R,
            outer_radius=r_out,
            analytic={
                "P0": P0,
                "stress_11": 0.0 if completed else P0 / 3.0,
            },
        )
        return T, spec

    if name == "uniform_field_box":
        E0 = float(params.pop("E0", 1.0))
        tilt = float(params.pop("tilt", math.pi / 4.0))
        box = np.asarray(params.pop("box", (1.0, 1.0, 1.0)), float)
        _reject_unknown(name, params)
        if E0 <= 0 or (box <= 0).any():
            raise ValueError("uniform_field_box needs positive E0 and box sides")
        E = E0 * np.array([math.cos(tilt), math.sin(tilt), 0.0])
        const = 0.5 * float(E @ E) * np.eye(3) - np.outer(E, E)
        block = np.zeros((4, 4))
        block[0, 0] = 0.5 * float(E @ E)
        block[1:, 1:] = const
        half = box / 2.0

        def func(points):
            points = np.asarray(points, float)
            inside = np.all(np.abs(points[..., 1:]) <= half, axis=-1)
            return inside[..., None, None] * block

        T = SymTensorField(func, stationary=True, support_radius=float(np.max(half)) * 2)
        V = float(np.prod(box))
        spec = ScenarioSpec(
            name,
            {"E0": E0, "tilt": tilt, "box": tuple(box)},
            kind="cartesian",
            stationary=True,
            conserved=False,
            box_half_widths=half,
            analytic={
                "P0": 0.5 * float(E @ E) * V,
                "stress_12": -E[0] * E[1] * V,
            },
        )
        return T, spec

    if name == "moving_dust":
        rho0 = float(params.pop("rho0", 1.0))
        sigma = float(params.pop("sigma", 1.0))
        v = float(params.pop("v", 0.4))
        _reject_unknown(name, params)
        if abs(v) >= 1.0:
            raise ValueError("|v| must be < 1")
        gamma = 1.0 / math.sqrt(1.0 - v * v)
        u4 = gamma * np.array([1.0, v, 0.0, 0.0])

        def func(points):
            points = np.asarray(points, float)
            center = v * points[..., 0]
            dx = points[..., 1] - center
            r2 = dx**2 + points[..., 2] ** 2 + points[..., 3] ** 2
            rho = rho0 * np.exp(-r2 / sigma**2)
            return rho[..., None, None] * np.outer(u4, u4)

        T = SymTensorField(func, stationary=False)
        spec = ScenarioSpec(
            name,
            {"rho0": rho0, "sigma": sigma, "v": v},
            kind="cartesian",
            stationary=False,
            conserved=False,
            box_half_widths=np.full(3, 8.0 * sigma),
        )
        return T, spec

    raise ValueError(f"unknown scenario {name!r}; known: {SCENARIO_NAMES}")


def _reject_unknown(name, params):
    if params:
        raise ValueError(f"unknown parameters for {name}: {sorted(params)}")


def tolman_weak_ep(T: SymTensorField, phi_value: float, patch: HyperplanePatch):
    """Static weak-field coupling integral and the passive mass it implies.

    Returns (L_int, passive_mass, integrand_identity_residual) where the
    residual checks pointwise that the energy-plus-stress-trace combination
    equals twice the trace-reversed tensor contracted with the slice normal.
    """
    from .quadrature import evaluate_tiled, pairwise_sum

    if phi_value == 0:
        raise ValueError("potential value must be nonzero to define a mass")
    nodes, weights = patch.nodes_weights()
    pts = patch.points(nodes)
    Tv = evaluate_tiled(T, pts)
    combo = Tv[..., 0, 0] + Tv[..., 1, 1] + Tv[..., 2, 2] + Tv[..., 3, 3]
    eta = patch.sig.matrix
    trace = np.einsum("ab,...ab->...", eta, Tv)
    n_vec = patch.normal
    trace_reversed = Tv - 0.5 * trace[..., None, None] * np.linalg.inv(eta)
    projected = 2.0 * np.einsum("...ab,a,b->...", trace_reversed, eta @ n_vec, eta @ n_vec)
    residual = float(np.max(np.abs(combo - projected)))
    factor = patch.orientation * patch.frame_phase() * (1.0 if patch.normal_square() > 0 else -1.0)
    L_int = phi_value * pairwise_sum(combo * weights) * factor
    return L_int, L_int / phi_value, residual


def kinetic_stress_sums(particles):
    """Leading-order slow-motion sums: total energy and motion-axis stress.

    Each particle contributes rest mass plus kinetic energy to the energy
    integral and twice its kinetic energy to the stress integral along its
    motion.
    """
    E_tot = 0.0
    stress = 0.0
    for m, v in particles:
        if m <= 0:
            raise ValueError("masses must be positive")
        if abs(v) >= 1.0:
            raise ValueError("|v| must be < 1")
        e_kin = 0.5 * m * v * v
        E_tot += m + e_kin
        stress += 2.0 * e_kin
    return E_tot, stress


def coulomb_pair_energy(charges) -> float:
    """Regularised interaction energy sum_{a<b} q_a q_b / (4 pi |x_a - x_b|)."""
    charges = [(float(q), np.asarray(x, float)) for q, x in charges]
    total = 0.0
    for i in range(len(charges)):
        for j in range(i + 1, len(charges)):
            d = np.linalg.norm(charges[i][1] - charges[j][1])
            if d == 0.0:
                raise ValueError("coincident charges have no finite pair energy")
            total += charges[i][0] * charges[j][0] / (4.0 * math.pi * d)
    return total


def virial_check(
    q1: float, q2: float, d: float, m1: float = 1.0, m2: float = 1.0
) -> float:
    """Relative residual of 2 E_kin + U = 0 on a circular two-body orbit.

    Kinetic energy comes from the centripetal condition against the mutual
    attraction of the charges at separation d; the identity is exact for
    inverse-square attraction, so the residual is roundoff.  A repulsive
    pair admits no circular orbit and is rejected.
    """
    if d <= 0 or m1 <= 0 or m2 <= 0:
        raise ValueError("need positive separation and masses")
    if q1 * q2 >= 0:
        raise ValueError("no circular orbit for a non-attractive pair")
    force = abs(q1 * q2) / (4.0 * math.pi * d * d)
    mu = m1 * m2 / (m1 + m2)
    omega2 = force / (mu * d)
    r1 = m2 * d / (m1 + m2)
    r2 = m1 * d / (m1 + m2)
    e_kin = 0.5 * omega2 * (m1 * r1**2 + m2 * r2**2)
    U = coulomb_pair_energy([(q1, np.zeros(3)), (q2, np.array([d, 0.0, 0.0]))])
    return abs(2.0 * e_kin + U) / abs(U)


def trouton_noble_demo(
    tilt: float, E0: float, box, beta: float, sig: Optional[Signature] = None
):
    """Transverse momentum picked up by a boosted tilted-field box.

    Returns the directly integrated transverse components of the boosted
    momentum together with the constant-integrand closed form
    -beta E^1 E^2 V (and 0 for the third axis).
    """
    from .quadrature import four_momentum

    sig = sig or Signature.mostly_minus(4)
    if abs(beta) >= 1:
        raise ValueError("|beta| must be < 1")
    T, spec = build("uniform_field_box", E0=E0, tilt=tilt, box=box)
    boosted = boost_emt_analytic(T, beta)
    patch = spec.adapted_slice_patch(standard_boost(1, beta), sig)
    P_bar = four_momentum(boosted, patch)
    E = E0 * np.array([math.cos(tilt), math.sin(tilt), 0.0])
    V = float(np.prod(np.asarray(box, float)))
    closed_form = np.array([-beta * E[0] * E[1] * V, 0.0])
    return {
        "transverse_direct": P_bar[2:],
        "transverse_closed_form": closed_form,
        "stress_12": -E[0] * E[1] * V,
    }
