"""Affine Minkowski space and the inhomogeneous isometry group.

Group elements are pairs (a, A) acting as x -> A x + a in a fixed reference
chart whose origin o is declared by the caller wherever it matters (the
splitting into translations and a linear complement is origin-dependent, so
it is never implicit).  The Lie algebra is V + Lambda^2 V: a pair (P, M)
with M stored over increasing index pairs and acting on vectors through the
metric, (x ^ y) v = x eta(y, v) - y eta(x, v).

All metric-dependent operations take an explicit :class:`Signature`
(mostly-minus by default at call sites).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exterior import Signature, multi_indices

__all__ = [
    "PoincareElement",
    "PoinLieElement",
    "AffineChartMap",
    "identity",
    "compose",
    "invert",
    "linear_part",
    "is_isometry",
    "standard_boost",
    "rotation",
    "translation",
    "chart_transition",
    "active_in_chart",
    "wedge_vectors",
    "bivector_to_matrix",
    "matrix_to_bivector",
    "lie_bracket",
    "pairing",
    "ad",
    "ad_transpose",
    "coad",
    "fundamental_field",
    "poincare_exp",
    "rebase_element",
    "rebase_lie",
]


@dataclass(frozen=True)
class PoincareElement:
    """Affine map x -> A x + a relative to a declared chart and origin."""

    a: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or a.shape != (A.shape[0],):
            raise ValueError(f"bad shapes: a {a.shape}, A {A.shape}")
        if abs(np.linalg.det(A)) < 1e-14:
            raise ValueError("linear part is singular")
        a.flags.writeable = False
        A.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "A", A)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """A x + a, batched over the leading axes of x."""
        x = np.asarray(x, dtype=float)
        return x @ self.A.T + self.a


@dataclass(frozen=True)
class AffineChartMap:
    """Transition data between two affine charts: x -> A x + a (passive)."""

    a: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        A = np.asarray(self.A, dtype=float)
        if abs(np.linalg.det(A)) < 1e-14:
            raise ValueError("chart transition is not invertible")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "A", A)

    def inverse(self) -> "AffineChartMap":
        Ainv = np.linalg.inv(self.A)
        return AffineChartMap(-Ainv @ self.a, Ainv)


@dataclass(frozen=True)
class PoinLieElement:
    """Algebra element (P, M): P in V, M in Lambda^2 V over increasing pairs."""

    P: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        M = np.asarray(self.M, dtype=float)
        n = P.shape[0]
        if M.shape != (math.comb(n, 2),):
            raise ValueError(
                f"expected {math.comb(n, 2)} bivector components for n={n}, got {M.shape}"
            )
        P.flags.writeable = False
        M.flags.writeable = False
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "M", M)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @classmethod
    def zero(cls, n: int) -> "PoinLieElement":
        return cls(np.zeros(n), np.zeros(math.comb(n, 2)))

    def components(self) -> np.ndarray:
        """Concatenated (P, M) coefficient vector."""
        return np.concatenate([self.P, self.M])


def identity(n: int) -> PoincareElement:
    return PoincareElement(np.zeros(n), np.eye(n))


def compose(g: PoincareElement, h: PoincareElement) -> PoincareElement:
    """(a, A)(b, B) = (a + A b, A B)."""
    if g.n != h.n:
        raise ValueError("dimension mismatch")
    return PoincareElement(g.a + g.A @ h.a, g.A @ h.A)


def invert(g: PoincareElement) -> PoincareElement:
    """(a, A)^{-1} = (-A^{-1} a, A^{-1})."""
    Ainv = np.linalg.inv(g.A)
    return PoincareElement(-Ainv @ g.a, Ainv)


def linear_part(g: PoincareElement) -> np.ndarray:
    return g.A


def is_isometry(g: PoincareElement, sig: Signature, tol: float = 1e-10) -> bool:
    """True iff the linear part preserves the inner product, A^T eta A = eta."""
    eta = sig.matrix
    return bool(np.max(np.abs(g.A.T @ eta @ g.A - eta)) < tol)


def standard_boost(axis: int, beta: float, n: int = 4) -> PoincareElement:
    """Boost mixing the time direction with spatial ``axis`` at velocity beta."""
    if not 1 <= axis <= n - 1:
        raise ValueError(f"spatial axis must be in [1, {n - 1}], got {axis}")
    if abs(beta) >= 1.0:
        raise ValueError(f"|beta| must be < 1, got {beta}")
    gamma = 1.0 / math.sqrt(1.0 - beta * beta)
    A = np.eye(n)
    A[0, 0] = A[axis, axis] = gamma
    A[0, axis] = A[axis, 0] = beta * gamma
    return PoincareElement(np.zeros(n), A)


def rotation(i: int, j: int, angle: float, n: int = 4) -> PoincareElement:
    """Rotation by ``angle`` in the spatial (i, j) plane, i < j."""
    if not 1 <= i < j <= n - 1:
        raise ValueError(f"need spatial plane 1 <= i < j <= {n - 1}, got ({i}, {j})")
    A = np.eye(n)
    c, s = math.cos(angle), math.sin(angle)
    A[i, i] = A[j, j] = c
    A[i, j] = -s
    A[j, i] = s
    return PoincareElement(np.zeros(n), A)


def translation(a: np.ndarray) -> PoincareElement:
    a = np.asarray(a, dtype=float)
    return PoincareElement(a, np.eye(a.shape[0]))


def chart_transition(B: AffineChartMap, coords: np.ndarray) -> np.ndarray:
    """Passive re-expression of the same point in another affine chart."""
    coords = np.asarray(coords, dtype=float)
    return coords @ B.A.T + B.a


def active_in_chart(g: PoincareElement, coords: np.ndarray) -> np.ndarray:
    """Image of a point under the affine automorphism, in one fixed chart."""
    return g.apply(coords)


# --- Lambda^2 V machinery ---


def wedge_vectors(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bivector components of x ^ y over increasing pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    full = np.outer(x, y) - np.outer(y, x)
    return np.array([full[i, j] for (i, j) in multi_indices(n, 2)])


def _bivector_full(M: np.ndarray, n: int) -> np.ndarray:
    """Antisymmetric n x n array from increasing-pair components."""
    full = np.zeros((n, n))
    for k, (i, j) in enumerate(multi_indices(n, 2)):
        full[i, j] = M[k]
        full[j, i] = -M[k]
    return full


def bivector_to_matrix(M: np.ndarray, sig: Signature) -> np.ndarray:
    """Endomorphism matrix of the action (x ^ y) v = x eta(y, v) - y eta(x, v)."""
    return _bivector_full(np.asarray(M, float), sig.n) @ sig.matrix


def matrix_to_bivector(E: np.ndarray, sig: Signature, tol: float = 1e-10) -> np.ndarray:
    """Inverse of :func:`bivector_to_matrix`; E must be eta-antisymmetric."""
    eta = sig.matrix
    if np.max(np.abs(E.T @ eta + eta @ E)) > tol:
        raise ValueError("matrix is not eta-antisymmetric")
    full = E @ np.linalg.inv(eta)
    return np.array([full[i, j] for (i, j) in multi_indices(sig.n, 2)])


def _transform_bivector(A: np.ndarray, M: np.ndarray, n: int) -> np.ndarray:
    """(A (x) A) M on increasing-pair components."""
    full = A @ _bivector_full(M, n) @ A.T
    return np.array([full[i, j] for (i, j) in multi_indices(n, 2)])


def lie_bracket(
    xi: PoinLieElement, zeta: PoinLieElement, sig: Signature
) -> PoinLieElement:
    """[(x, X), (y, Y)] = (X y - Y x, X Y - Y X) with X, Y acting via eta."""
    if xi.n != zeta.n:
        raise ValueError("dimension mismatch")
    EX = bivector_to_matrix(xi.M, sig)
    EY = bivector_to_matrix(zeta.M, sig)
    P = EX @ zeta.P - EY @ xi.P
    return PoinLieElement(P, matrix_to_bivector(EX @ EY - EY @ EX, sig))


def pairing(xi: PoinLieElement, zeta: PoinLieElement, sig: Signature) -> float:
    """<(x, X), (y, Y)> = eta(x, y) + (1/2)(eta (x) eta)(X, Y).

    Nondegenerate and symmetric; on pure wedges the second term is
    eta(u, w) eta(v, z) - eta(u, z) eta(v, w).
    """
    if xi.n != zeta.n:
        raise ValueError("dimension mismatch")
    eta = sig.matrix
    trans = float(xi.P @ eta @ zeta.P)
    factors = np.array(
        [sig.diag[i] * sig.diag[j] for (i, j) in multi_indices(sig.n, 2)], dtype=float
    )
    return trans + float(np.dot(xi.M, factors * zeta.M))


def _require_isometry(g: PoincareElement, sig: Signature):
    if not is_isometry(g, sig):
        raise ValueError("adjoint-type maps require an isometry linear part")


def ad(g: PoincareElement, xi: PoinLieElement, sig: Signature) -> PoinLieElement:
    """Ad_(a,A)(P, M) = (A P - [(A(x)A)M] a, (A(x)A)M)."""
    _require_isometry(g, sig)
    M2 = _transform_bivector(g.A, xi.M, g.n)
    P2 = g.A @ xi.P - bivector_to_matrix(M2, sig) @ g.a
    return PoinLieElement(P2, M2)


def ad_transpose(
    g: PoincareElement, xi: PoinLieElement, sig: Signature
) -> PoinLieElement:
    """Transpose of Ad with respect to :func:`pairing`."""
    _require_isometry(g, sig)
    Ainv = np.linalg.inv(g.A)
    P2 = Ainv @ xi.P
    M2 = _transform_bivector(Ainv, xi.M, g.n) + wedge_vectors(Ainv @ g.a, P2)
    return PoinLieElement(P2, M2)


def coad(g: PoincareElement, xi: PoinLieElement, sig: Signature) -> PoinLieElement:
    """Ad*_(a,A)(P, M) = (A P, (A(x)A)M - a ^ (A P)); inverse-transpose of Ad."""
    _require_isometry(g, sig)
    P2 = g.A @ xi.P
    M2 = _transform_bivector(g.A, xi.M, g.n) - wedge_vectors(g.a, P2)
    return PoinLieElement(P2, M2)


def fundamental_field(xi: PoinLieElement, origin: np.ndarray, sig: Signature):
    """Vector field x -> P + M (x - o) generated by the algebra element.

    Returns a batched callback mapping points of shape (..., n) to vectors
    of the same shape.  Linear in xi; the fields of a bracket satisfy the
    sign-flipped commutator relation of a left action.
    """
    origin = np.asarray(origin, dtype=float)
    E = bivector_to_matrix(xi.M, sig)
    P = xi.P

    def eval_field(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return P + (points - origin) @ E.T

    return eval_field


def poincare_exp(xi: PoinLieElement, sig: Signature) -> PoincareElement:
    """Group element exp(xi) via the (n+1)-dimensional homogeneous matrix."""
    n = xi.n
    H = np.zeros((n + 1, n + 1))
    H[:n, :n] = bivector_to_matrix(xi.M, sig)
    H[:n, n] = xi.P
    G = scipy.linalg.expm(H)
    return PoincareElement(G[:n, n], G[:n, :n])


def rebase_element(g: PoincareElement, shift: np.ndarray) -> PoincareElement:
    """Re-express the same affine map relative to origin o' = o + shift."""
    shift = np.asarray(shift, dtype=float)
    return PoincareElement(g.a + g.A @ shift - shift, g.A)


def rebase_lie(xi: PoinLieElement, shift: np.ndarray, sig: Signature) -> PoinLieElement:
    """Re-express the same affine vector field relative to o' = o + shift."""
    shift = np.asarray(shift, dtype=float)
    return PoinLieElement(xi.P + bivector_to_matrix(xi.M, sig) @ shift, xi.M)
