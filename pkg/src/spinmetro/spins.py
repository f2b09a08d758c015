"""Collective spin-j space of N qubits and the SU(2) interferometer rotations.

Conventions, fixed once for the whole package:

* basis is |j, mu> with mu ascending, i.e. |j, -j> first;
* magnetic labels are kept as doubled integers internally so half-integer
  bookkeeping never drifts through floating point;
* rotations are exp(-i*theta*J_n); the phase shifter is the z rotation and
  the symmetric beam splitter is the x rotation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import dagger, expm_generator, max_abs

#: above this j the direct closed-form evaluation of the rotation matrix
#: elements starts losing digits; callers get a warning instead of silence
WIGNER_D_ACCURACY_LIMIT_J = 50.0


class ReducedAccuracyWarning(UserWarning):
    pass


_NAMED_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


@dataclass(frozen=True)
class SpinAxis:
    """Unit direction on the generalised Bloch sphere.

    Construction normalises the given 3-vector and rejects zero or
    non-finite input, so ``|n| = 1`` holds within 1e-12 by construction.
    """

    vector: tuple[float, float, float]

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise ValueError("axis must be a finite 3-vector")
        norm = float(np.linalg.norm(v))
        if norm < 1e-12:
            raise ValueError("axis vector must be nonzero")
        object.__setattr__(self, "vector", tuple(float(c) for c in v / norm))

    @classmethod
    def from_spec(cls, spec) -> "SpinAxis":
        """Accept an axis name ('x'|'y'|'z'), 'nx,ny,nz' string, 3-sequence, or SpinAxis."""
        if isinstance(spec, SpinAxis):
            return spec
        if isinstance(spec, str):
            key = spec.strip().lower()
            if key in _NAMED_AXES:
                return cls(_NAMED_AXES[key])
            return cls(tuple(float(p) for p in key.split(",")))
        return cls(tuple(spec))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=float)


@dataclass(frozen=True)
class SpinSpace:
    """The permutationally symmetric (N+1)-dimensional subspace of N qubits."""

    n_particles: int

    def __post_init__(self):
        n = self.n_particles
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
            raise ValueError(f"n_particles must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_particles", int(n))

    @property
    def j(self) -> float:
        return self.n_particles / 2.0

    @property
    def dim(self) -> int:
        return self.n_particles + 1

    @property
    def two_mu(self) -> np.ndarray:
        """Doubled magnetic labels 2*mu, ascending; exact integers."""
        n = self.n_particles
        return np.arange(-n, n + 1, 2)

    @property
    def mu(self) -> np.ndarray:
        return self.two_mu / 2.0

    def index_of(self, mu: float) -> int:
        """Basis index of the label mu; rejects labels outside this space."""
        two = 2.0 * mu
        k = int(round(two))
        if abs(two - k) > 1e-9:
            raise ValueError(f"mu={mu} is not a half-integer")
        if (k + self.n_particles) % 2 != 0 or abs(k) > self.n_particles:
            raise ValueError(
                f"mu={mu} is not a valid label for N={self.n_particles}"
            )
        return (k + self.n_particles) // 2


@lru_cache(maxsize=64)
def _spin_triple(n_particles: int):
    space = SpinSpace(n_particles)
    j = space.j
    mu = space.mu
    dim = space.dim
    ladder = np.sqrt(j * (j + 1) - mu[:-1] * (mu[:-1] + 1))
    jp = np.zeros((dim, dim), dtype=complex)
    jp[np.arange(1, dim), np.arange(dim - 1)] = ladder
    jm = dagger(jp)
    jx = (jp + jm) / 2.0
    jy = (jp - jm) / 2.0j
    jz = np.diag(mu.astype(complex))
    for m in (jx, jy, jz):
        m.setflags(write=False)
    return jx, jy, jz


def op_jx(space: SpinSpace) -> np.ndarray:
    return _spin_triple(space.n_particles)[0]


def op_jy(space: SpinSpace) -> np.ndarray:
    return _spin_triple(space.n_particles)[1]


def op_jz(space: SpinSpace) -> np.ndarray:
    return _spin_triple(space.n_particles)[2]


def op_j(space: SpinSpace, axis) -> np.ndarray:
    """Collective spin component n.J = nx*Jx + ny*Jy + nz*Jz (Hermitian)."""
    nx, ny, nz = SpinAxis.from_spec(axis).vector
    jx, jy, jz = _spin_triple(space.n_particles)
    return nx * jx + ny * jy + nz * jz


def op_ladder_plus(space: SpinSpace) -> np.ndarray:
    """Raising operator J_+ = Jx + i*Jy, acting as sqrt(j(j+1)-mu(mu+1))."""
    jx, jy, _ = _spin_triple(space.n_particles)
    return jx + 1j * jy


def casimir(space: SpinSpace) -> float:
    """(N/2)(N/2+1); verifies Jx^2+Jy^2+Jz^2 equals that multiple of the identity."""
    jx, jy, jz = _spin_triple(space.n_particles)
    value = space.j * (space.j + 1.0)
    defect = max_abs(jx @ jx + jy @ jy + jz @ jz - value * np.eye(space.dim))
    if defect > 1e-10:
        raise AssertionError(
            f"Casimir identity violated by {defect:.3e} for N={space.n_particles}"
        )
    return value


def _as_doubled(x: float, name: str) -> int:
    two = 2.0 * x
    k = int(round(two))
    if abs(two - k) > 1e-9:
        raise ValueError(f"{name}={x} is not half-integer")
    return k


def _parity(k: int) -> float:
    return -1.0 if k % 2 else 1.0


def _jacobi(n: int, a: int, b: int, x: float) -> float:
    """Jacobi polynomial P_n^{(a,b)}(x) by the three-term recurrence."""
    if n == 0:
        return 1.0
    p_prev = 1.0
    p = 0.5 * (a - b + (a + b + 2.0) * x)
    for k in range(2, n + 1):
        c1 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2.0)
        c2 = (2.0 * k + a + b - 1.0) * (
            (2.0 * k + a + b) * (2.0 * k + a + b - 2.0) * x + a * a - b * b
        )
        c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + a + b)
        p, p_prev = (c2 * p - c3 * p_prev) / c1, p
    return p


def wigner_d(j: float, mu: float, nu: float, theta: float) -> float:
    """Rotation matrix element d^j_{mu,nu}(theta) = <j,mu| e^{-i theta Jy} |j,nu>.

    Direct evaluation of the closed form: a log-space factorial prefactor,
    powers of sin(theta/2) and cos(theta/2), and a Jacobi polynomial by its
    three-term recurrence.  The three symmetry relations

        d^j_{mu,nu}(theta) = (-1)^{nu-mu} d^j_{nu,mu}(theta)
                           = (-1)^{mu-nu} d^j_{-mu,-nu}(theta),
        d^j_{mu,nu}(-theta) = (-1)^{mu-nu} d^j_{mu,nu}(theta)

    map any label pair onto the corner nu >= |mu| where every exponent is
    non-negative, which also removes the theta = 0, pi singularities of the
    raw formula.
    """
    two_j = _as_doubled(j, "j")
    two_mu = _as_doubled(mu, "mu")
    two_nu = _as_doubled(nu, "nu")
    if two_j < 0:
        raise ValueError(f"j={j} must be non-negative")
    if abs(two_mu) > two_j or abs(two_nu) > two_j:
        raise ValueError(f"labels mu={mu}, nu={nu} out of range for j={j}")
    if (two_j - two_mu) % 2 or (two_j - two_nu) % 2:
        raise ValueError(f"mu={mu} and nu={nu} must differ from j={j} by integers")
    if two_j > 2 * WIGNER_D_ACCURACY_LIMIT_J:
        warnings.warn(
            f"wigner_d at j={j} > {WIGNER_D_ACCURACY_LIMIT_J:g}: "
            "the direct closed form is evaluated with reduced accuracy",
            ReducedAccuracyWarning,
            stacklevel=2,
        )

    sign = 1.0
    a, b = two_mu, two_nu
    if abs(b) < abs(a):
        a, b = b, a
        sign *= _parity((b - a) // 2)
    if b < 0:
        sign *= _parity((a - b) // 2)
        a, b = -a, -b

    n = (two_j - b) // 2
    alpha = (b - a) // 2
    beta = (b + a) // 2
    log_pref = 0.5 * (
        math.lgamma((two_j - b) // 2 + 1)
        + math.lgamma((two_j + b) // 2 + 1)
        - math.lgamma((two_j - a) // 2 + 1)
        - math.lgamma((two_j + a) // 2 + 1)
    )
    half = 0.5 * theta
    return (
        sign
        * math.exp(log_pref)
        * math.sin(half) ** alpha
        * math.cos(half) ** beta
        * _jacobi(n, alpha, beta, math.cos(theta))
    )


def wigner_d_matrix(j: float, theta: float) -> np.ndarray:
    """Full (2j+1)x(2j+1) matrix of d^j_{mu,nu}(theta), labels ascending."""
    two_j = _as_doubled(j, "j")
    labels = [k / 2.0 for k in range(-two_j, two_j + 1, 2)]
    out = np.empty((len(labels), len(labels)))
    for r, mu in enumerate(labels):
        for c, nu in enumerate(labels):
            out[r, c] = wigner_d(j, mu, nu, theta)
    return out


def rotation(space: SpinSpace, axis, theta: float) -> np.ndarray:
    """Collective rotation exp(-i*theta*J_n) about the given Bloch axis."""
    return expm_generator(op_j(space, axis), theta)


def phase_shifter(space: SpinSpace, theta: float) -> np.ndarray:
    """exp(-i*theta*Jz): relative phase between the two modes."""
    return rotation(space, "z", theta)


def beam_splitter(space: SpinSpace, theta: float) -> np.ndarray:
    """exp(-i*theta*Jx): symmetric beam splitter / Ramsey pulse; theta=pi/2 is 50-50."""
    return rotation(space, "x", theta)


def mach_zehnder(space: SpinSpace, theta: float) -> np.ndarray:
    """Balanced interferometer as the explicit three-factor product.

    Built as exp(+i pi/2 Jx) exp(-i theta Jz) exp(-i pi/2 Jx), i.e. with the
    two beam splitters rotating by opposite angles; the product equals the y
    rotation exp(-i theta Jy).
    """
    bs_out = beam_splitter(space, -math.pi / 2)
    bs_in = beam_splitter(space, math.pi / 2)
    return bs_out @ phase_shifter(space, theta) @ bs_in
