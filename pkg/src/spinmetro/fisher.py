"""Probability models, classical and quantum Fisher information, SLD, bounds.

A probability model is the map theta -> {P(eps|theta)} induced by a probe
state, a rotation generator J_n, and a POVM:

    P(eps|theta) = Tr[E(eps) rho(theta)],    rho(theta) = U rho0 U^dag,
    U = exp(-i*theta*J_n).

Derivatives of the probabilities are analytic, through
d rho/d theta = -i [J_n, rho(theta)]; finite differences appear only in
`qfi_family` where the spectral data itself is differentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import dagger, eig_hermitian, max_abs, max_eig_sym3
from .spins import SpinAxis, SpinSpace, op_j, op_jx, op_jy, op_jz
from .states import MixedState, PureState, State, expectation, variance

#: probabilities at or below this are treated as vanishing
P_FLOOR = 1e-12
#: derivative magnitude separating truly flat outcomes from l'Hopital ones
D_FLOOR = 1e-9


class EigenvalueCrossingError(RuntimeError):
    """Spectral family is not smooth at the requested point and step."""


@dataclass(frozen=True)
class Povm:
    """Positive-operator valued measure: labelled PSD elements summing to 1."""

    labels: tuple
    elements: tuple

    def __post_init__(self):
        if len(self.labels) != len(self.elements) or not self.elements:
            raise ValueError("POVM needs one label per element")
        mats = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        dim = mats[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for e in mats:
            if e.shape != (dim, dim):
                raise ValueError("POVM elements must share one square shape")
            if max_abs(e - dagger(e)) > 1e-10:
                raise ValueError("POVM element is not Hermitian")
            if float(np.min(np.linalg.eigvalsh(e))) < -1e-10:
                raise ValueError("POVM element is not positive semidefinite")
            total += e
        defect = max_abs(total - np.eye(dim))
        if defect > 1e-10:
            raise ValueError(f"POVM does not resolve the identity: defect {defect:.3e}")
        object.__setattr__(self, "elements", mats)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


def povm_number_counting(space: SpinSpace) -> Povm:
    """Particle-number measurement: the N+1 Dicke projectors |j,mu><j,mu|."""
    labels = tuple(float(m) for m in space.mu)
    elements = []
    for idx in range(space.dim):
        e = np.zeros((space.dim, space.dim), dtype=complex)
        e[idx, idx] = 1.0
        elements.append(e)
    return Povm(labels=labels, elements=tuple(elements))


def povm_probe_projection(probe: PureState) -> Povm:
    """Two-element POVM: projector on the probe and on its orthogonal complement."""
    p0 = probe.density_matrix()
    return Povm(labels=("probe", "orthogonal"),
                elements=(p0, np.eye(probe.space.dim) - p0))


class ProbabilityModel:
    """theta -> outcome probability table for (probe, axis, POVM).

    Evaluation runs in the eigenbasis of the generator: with
    J_n = V diag(lam) V^dag, rho~ = V^dag rho0 V and E~ = V^dag E V,

        P(eps|theta) = sum_{kl} E~(eps)_{lk} rho~_{kl} e^{-i theta (lam_k - lam_l)},

    so whole theta grids are vectorised over the phase factors.  Instances
    are immutable after construction and safe to share between threads.
    """

    def __init__(self, probe: State, axis, povm: Povm):
        axis = SpinAxis.from_spec(axis)
        if povm.dim != probe.space.dim:
            raise ValueError("POVM dimension does not match the probe's space")
        self.probe = probe
        self.axis = axis
        self.povm = povm
        self.space = probe.space
        self.generator = op_j(probe.space, axis)
        dec = eig_hermitian(self.generator)
        v = dec.eigenvectors
        self._spectrum = dec
        rho_t = dagger(v) @ probe.density_matrix() @ v
        lam = dec.eigenvalues
        self._gaps = (lam[:, None] - lam[None, :]).ravel()
        coeffs = []
        for e in povm.elements:
            e_t = dagger(v) @ e @ v
            coeffs.append((e_t.T * rho_t).ravel())
        self._coeffs = np.array(coeffs)  # (n_outcomes, dim*dim)

    @property
    def outcome_labels(self) -> tuple:
        return self.povm.labels

    @property
    def n_outcomes(self) -> int:
        return len(self.povm)

    def probability_table(self, thetas) -> np.ndarray:
        """(len(thetas), n_outcomes) table; tiny negative round-off clamped to 0."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        phases = np.exp(-1j * thetas[:, None] * self._gaps[None, :])
        table = (phases @ self._coeffs.T).real
        sums = table.sum(axis=1)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > 1e-10:
            raise RuntimeError(f"probabilities do not normalise: defect {worst:.3e}")
        if float(table.min()) < -1e-12:
            raise RuntimeError(f"probability below -1e-12: {float(table.min()):.3e}")
        return np.clip(table, 0.0, None)

    def probabilities(self, theta: float) -> np.ndarray:
        return self.probability_table([theta])[0]

    def derivative_table(self, thetas) -> np.ndarray:
        """dP/dtheta rows; analytic, equals Tr[E (-i)[J_n, rho(theta)]]."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        phases = np.exp(-1j * thetas[:, None] * self._gaps[None, :])
        phases = phases * (-1j * self._gaps)[None, :]
        return (phases @ self._coeffs.T).real

    def derivatives(self, theta: float) -> np.ndarray:
        return self.derivative_table([theta])[0]


def probabilities(model: ProbabilityModel, theta: float) -> np.ndarray:
    """Outcome probabilities at theta, aligned with model.outcome_labels."""
    return model.probabilities(theta)


def probability_derivative(model: ProbabilityModel, theta: float) -> np.ndarray:
    """Analytic dP/dtheta per outcome; the entries sum to zero."""
    return model.derivatives(theta)


@dataclass(frozen=True)
class FisherReport:
    """F(theta) with its per-outcome contributions and handling flags."""

    theta: float
    fi: float
    labels: tuple
    contributions: np.ndarray
    derivative_method: str = "analytic-commutator"
    flagged: tuple = ()

    def __post_init__(self):
        if abs(self.fi - float(np.sum(self.contributions))) > 1e-10 * max(1.0, abs(self.fi)):
            raise AssertionError("FI does not match the sum of its contributions")


def fisher_information(
    model: ProbabilityModel,
    theta: float,
    p_floor: float = P_FLOOR,
    d_floor: float = D_FLOOR,
    limit_step: float = 1e-4,
) -> FisherReport:
    """Classical Fisher information F(theta) = sum_eps (dP/dtheta)^2 / P.

    Outcomes with P <= p_floor and |dP| <= d_floor are excluded (and flagged);
    outcomes with P <= p_floor but |dP| > d_floor get the one-sided limit
    2 * d2P/dtheta2 (de l'Hopital at a zero of P), with the second derivative
    by central finite difference of step `limit_step`.
    """
    p = model.probabilities(theta)
    dp = model.derivatives(theta)
    contributions = np.zeros_like(p)
    flagged = []
    limit_rows = None
    for e in range(model.n_outcomes):
        if p[e] > p_floor:
            contributions[e] = dp[e] ** 2 / p[e]
        elif abs(dp[e]) <= d_floor:
            flagged.append((model.outcome_labels[e], "excluded"))
        else:
            if limit_rows is None:
                limit_rows = model.probability_table(
                    [theta - limit_step, theta, theta + limit_step]
                )
            second = (
                limit_rows[2][e] - 2.0 * limit_rows[1][e] + limit_rows[0][e]
            ) / limit_step**2
            contributions[e] = 2.0 * second
            flagged.append((model.outcome_labels[e], "limit"))
    return FisherReport(
        theta=float(theta),
        fi=float(np.sum(contributions)),
        labels=model.outcome_labels,
        contributions=contributions,
        flagged=tuple(flagged),
    )


def qfi_pure(probe: PureState, axis) -> float:
    """Quantum Fisher information of a pure probe: 4 (Delta J_n)^2."""
    h = op_j(probe.space, axis)
    return 4.0 * variance(probe, h)


def qfi_unitary(rho: np.ndarray, h: np.ndarray, p_floor: float = P_FLOOR) -> float:
    """QFI of a density matrix under exp(-i*theta*H), from its spectrum.

    2 sum_{k,k'} (p_k - p_k')^2 / (p_k + p_k') |<k|H|k'>|^2 restricted to
    p_k + p_k' > p_floor.
    """
    dec = eig_hermitian(rho)
    h_t = dagger(dec.eigenvectors) @ h @ dec.eigenvectors
    return _qfi_spectral(dec.eigenvalues, h_t, p_floor)


def _qfi_spectral(p: np.ndarray, h_eigbasis: np.ndarray, p_floor: float) -> float:
    num = (p[:, None] - p[None, :]) ** 2
    den = p[:, None] + p[None, :]
    weight = np.zeros_like(num)
    mask = den > p_floor
    weight[mask] = num[mask] / den[mask]
    return float(2.0 * np.sum(weight * np.abs(h_eigbasis) ** 2))


def qfi_mixed(probe: MixedState, axis, p_floor: float = P_FLOOR) -> float:
    """QFI of a mixed probe under exp(-i*theta*J_n).

    Rank-1 states (largest eigenvalue above 1 - 1e-12) take the pure-state
    formula on the dominant eigenvector, avoiding 0/0 in the spectral sum.
    """
    h = op_j(probe.space, axis)
    dec = probe.spectrum
    if dec.eigenvalues[-1] > 1.0 - 1e-12:
        top = dec.eigenvectors[:, -1]
        psi = PureState(probe.space, top / np.linalg.norm(top))
        return qfi_pure(psi, axis)
    h_t = dagger(dec.eigenvectors) @ h @ dec.eigenvectors
    return _qfi_spectral(dec.eigenvalues, h_t, p_floor)


def qfi(probe: State, axis, p_floor: float = P_FLOOR) -> float:
    """QFI of a pure or mixed probe for the rotation family about `axis`."""
    if isinstance(probe, PureState):
        return qfi_pure(probe, axis)
    return qfi_mixed(probe, axis, p_floor=p_floor)


def sld(probe: State, axis, p_floor: float = P_FLOOR) -> np.ndarray:
    """Symmetric logarithmic derivative L0 of the rotation family at theta=0.

    In the probe eigenbasis, L0_{kk'} = 2i (p_k - p_k')/(p_k + p_k') <k|H|k'>
    on p_k + p_k' > p_floor and zero elsewhere; L0 solves
    {rho, L0} = 2i [rho, H] on the supported block, Tr[rho L0] = 0, and
    Tr[rho L0^2] equals the QFI.
    """
    if isinstance(probe, PureState):
        probe = MixedState(probe.space, probe.density_matrix())
    h = op_j(probe.space, axis)
    dec = probe.spectrum
    p = dec.eigenvalues
    v = dec.eigenvectors
    h_t = dagger(v) @ h @ v
    num = p[:, None] - p[None, :]
    den = p[:, None] + p[None, :]
    factor = np.zeros_like(num)
    mask = den > p_floor
    factor[mask] = num[mask] / den[mask]
    l_t = 2.0j * factor * h_t
    return v @ l_t @ dagger(v)


def _degenerate_blocks(p: np.ndarray, rel_tol: float = 1e-9) -> list[np.ndarray]:
    """Group ascending eigenvalues into blocks degenerate within rel_tol."""
    scale = max(1.0, float(np.max(np.abs(p))))
    blocks = []
    start = 0
    for i in range(1, len(p) + 1):
        if i == len(p) or p[i] - p[i - 1] > rel_tol * scale:
            blocks.append(np.arange(start, i))
            start = i
    return blocks


def _align_to(reference: np.ndarray, vectors: np.ndarray, blocks) -> np.ndarray:
    """Rotate eigenvector columns inside each degenerate block onto `reference`.

    Per block this is an orthogonal Procrustes fit (for 1-dim blocks it
    reduces to phase alignment), which fixes the gauge freedom of the
    decomposition before spectral data can be finite-differenced.
    """
    out = vectors.copy()
    for block in blocks:
        m = dagger(vectors[:, block]) @ reference[:, block]
        u, s, wh = np.linalg.svd(m)
        if float(np.min(s)) < 0.5:
            raise EigenvalueCrossingError(
                "eigenvector branches cannot be matched across the step; "
                "the spectrum crosses or the step is too large"
            )
        out[:, block] = vectors[:, block] @ (u @ wh)
    return out


def qfi_family(family, theta: float, step: float = 1e-5, p_floor: float = P_FLOOR) -> float:
    """QFI of a generic smooth state family theta -> MixedState.

    Evaluates sum_k (dp_k)^2/p_k + 2 sum_{kk'} (p_k-p_k')^2/(p_k+p_k')
    |<dk|k'>|^2 with dp_k and |dk> by central differences of the spectral
    data at theta +/- step, eigenvectors gauge-aligned to the central basis
    first.  Raises EigenvalueCrossingError when branches cannot be matched.
    """
    lo, mid, hi = family(theta - step), family(theta), family(theta + step)
    for s in (lo, mid, hi):
        if not isinstance(s, MixedState):
            raise TypeError("qfi_family expects the family to yield MixedState values")
    p0 = mid.spectrum.eigenvalues
    v0 = mid.spectrum.eigenvectors
    blocks = _degenerate_blocks(p0)
    v_lo = _align_to(v0, lo.spectrum.eigenvectors, blocks)
    v_hi = _align_to(v0, hi.spectrum.eigenvectors, blocks)
    dp = (hi.spectrum.eigenvalues - lo.spectrum.eigenvalues) / (2.0 * step)
    dv = (v_hi - v_lo) / (2.0 * step)

    term1 = 0.0
    for k in range(len(p0)):
        if p0[k] > p_floor:
            term1 += dp[k] ** 2 / p0[k]

    overlap = dagger(dv) @ v0  # overlap[k, k'] = <d theta k | k'>
    num = (p0[:, None] - p0[None, :]) ** 2
    den = p0[:, None] + p0[None, :]
    weight = np.zeros_like(num)
    mask = den > p_floor
    weight[mask] = num[mask] / den[mask]
    term2 = float(2.0 * np.sum(weight * np.abs(overlap) ** 2))
    return float(term1 + term2)


def bound_shot_noise(n: int, m: int = 1, h_range: float = 1.0) -> float:
    """Best phase sensitivity of separable probes: 1/(sqrt(N m) |h_max-h_min|)."""
    _check_bound_args(n, m, h_range)
    return 1.0 / (math.sqrt(n * m) * h_range)


def bound_heisenberg(n: int, m: int = 1, h_range: float = 1.0) -> float:
    """Ultimate phase sensitivity: 1/(N sqrt(m) |h_max-h_min|)."""
    _check_bound_args(n, m, h_range)
    return 1.0 / (n * math.sqrt(m) * h_range)


def _check_bound_args(n, m, h_range):
    if n < 1 or m < 1:
        raise ValueError("n and m must both be >= 1")
    if not h_range > 0:
        raise ValueError("h_range must be positive")


def povm_diagonal_coefficients(povm: Povm, observable: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Coefficients c_eps with M = sum_eps c_eps E(eps); rejects other observables."""
    observable = np.asarray(observable, dtype=complex)
    coeffs = np.empty(len(povm))
    for i, e in enumerate(povm.elements):
        tr = float(np.trace(e).real)
        if tr <= 0:
            raise ValueError("POVM element with non-positive trace")
        coeffs[i] = float(np.trace(observable @ e).real) / tr
    recon = sum(c * e for c, e in zip(coeffs, povm.elements))
    defect = max_abs(observable - recon)
    if defect > tol:
        raise ValueError(
            f"observable is not diagonal in the POVM basis (defect {defect:.3e})"
        )
    return coeffs


def fisher_lower_bound_moment(
    model: ProbabilityModel, theta: float, observable: np.ndarray
) -> float:
    """Moment lower bound |d<M>/dtheta|^2 / (Delta M)^2 <= F(theta).

    For a unitary family this equals |<[M, H]>|^2/(Delta M)^2 by the
    Ehrenfest theorem.  The observable must be diagonal in the POVM basis of
    the model; a vanishing variance leaves the bound undefined.
    """
    c = povm_diagonal_coefficients(model.povm, observable)
    p = model.probabilities(theta)
    dp = model.derivatives(theta)
    mean = float(c @ p)
    var = float((c - mean) ** 2 @ p)
    if var < P_FLOOR:
        raise ValueError("zero variance of the observable: moment bound undefined")
    slope = float(c @ dp)
    return slope**2 / var


def optimal_axis(probe: State, p_floor: float = P_FLOOR) -> tuple[SpinAxis, float]:
    """Rotation axis maximising the QFI, and the maximal value 4*lambda_max.

    Builds the 3x3 matrix n^T C n = F_Q/4: the symmetrised covariance of
    (Jx, Jy, Jz) for pure states, its spectrally weighted counterpart for
    mixed states.
    """
    space = probe.space
    ops = (op_jx(space), op_jy(space), op_jz(space))
    if isinstance(probe, MixedState) and probe.spectrum.eigenvalues[-1] <= 1.0 - 1e-12:
        dec = probe.spectrum
        p = dec.eigenvalues
        v = dec.eigenvectors
        tilde = [dagger(v) @ o @ v for o in ops]
        num = (p[:, None] - p[None, :]) ** 2
        den = p[:, None] + p[None, :]
        weight = np.zeros_like(num)
        mask = den > p_floor
        weight[mask] = num[mask] / den[mask]
        gamma = np.empty((3, 3), dtype=complex)
        for i in range(3):
            for jx in range(3):
                gamma[i, jx] = 0.5 * np.einsum(
                    "kl,lk,kl->", weight, tilde[i], tilde[jx]
                )
        c = 0.5 * (gamma + gamma.T).real
    else:
        if isinstance(probe, MixedState):
            top = probe.spectrum.eigenvectors[:, -1]
            probe = PureState(space, top / np.linalg.norm(top))
        c = np.empty((3, 3))
        means = [expectation(probe, o).real for o in ops]
        for i in range(3):
            for jx in range(3):
                sym = expectation(probe, ops[i] @ ops[jx] + ops[jx] @ ops[i]).real / 2.0
                c[i, jx] = sym - means[i] * means[jx]
        c = 0.5 * (c + c.T)
    lam, n_max = max_eig_sym3(c)
    return SpinAxis(tuple(n_max)), 4.0 * lam
