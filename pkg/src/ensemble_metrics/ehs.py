"""Ensemble distance and fidelity optimized over system ⊗ pointer embeddings.

Both measures reduce to convex programs over a pair of joint tables on the
shared support: minimize ``(1/2) sum_e ‖P_e rho_e - Q_e sigma_e‖_1`` with the
rows of P and the columns of Q marginal-constrained (distance), or maximize
``sum_e sqrt(P_e Q_e) F(rho_e, sigma_e)`` (fidelity).  The pointer register
never needs to be materialized.

The distance objective is ``max`` over Hermitian contractions U_e of the
bilinear form ``(1/2) sum_e Tr(U_e (P_e rho_e - Q_e sigma_e))``, so the
solver runs a primal-dual hybrid gradient iteration (Chambolle-Pock):
alternate a projection of the dual blocks onto the operator-norm ball with
a projection of the tables onto their marginal polytopes.  Any feasible
dual iterate yields a lower bound on the optimum (a linear objective is
minimized over the marginal polytopes row by row / column by column), so
termination is certificate-driven: the solver stops once the best primal
value is within ``tol`` of the best dual bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ensembles import Ensemble, average_state, unify_support
from .errors import NotPure
from .kantorovich import kantorovich_distance, transportation_lp
from .linalg import fidelity, herm_eig, mat_sqrt_psd, trace_distance

_PURITY_TOL = 1e-8


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by the iterative solvers.

    ``tol`` is the certificate gap at which the distance solver stops;
    ``restarts`` counts the random initializations of the fidelity solver
    (the product and warm-start initializations always run).
    """

    tol: float = 1e-4
    max_iter: int = 5000
    restarts: int = 8
    seed: int = 0


def _as_options(opts: SolverOptions | None) -> SolverOptions:
    return SolverOptions() if opts is None else opts


@dataclass(frozen=True, eq=False)
class JointPair:
    """The two joint tables: rows of ``p_table`` sum to P, columns of
    ``q_table`` sum to Q."""

    p_table: np.ndarray
    q_table: np.ndarray


@dataclass(frozen=True, eq=False)
class SolveReport:
    value: float
    joint_pair: JointPair
    iterations: int
    bracket: tuple[float, float]
    converged: bool


def project_rows_to_simplex(x: np.ndarray, masses: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of ``x`` onto ``{y >= 0, sum y = mass}``.

    Sort-and-threshold; rows with zero mass project to zero.
    """
    m, n = x.shape
    out = np.zeros_like(x)
    pos = masses > 0.0
    if not np.any(pos):
        return out
    xs = x[pos]
    u = -np.sort(-xs, axis=1)
    css = np.cumsum(u, axis=1) - masses[pos, None]
    k = np.arange(1, n + 1)
    cond = u - css / k > 0.0
    idx = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(len(xs)), idx] / (idx + 1.0)
    out[pos] = np.maximum(xs - tau[:, None], 0.0)
    return out


def _pairwise_fidelity(omega) -> np.ndarray:
    n = len(omega)
    w = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = fidelity(omega[i], omega[j])
    return w


class _DistanceObjective:
    """Value, subgradient and dual bound of the table-pair distance objective."""

    def __init__(self, omega, p: np.ndarray, q: np.ndarray):
        n = len(omega)
        stack = np.stack(omega)
        self.n = n
        self.p = p
        self.q = q
        self.rho = np.repeat(stack, n, axis=0)  # block e=(i,j): rho_i
        self.sigma = np.tile(stack, (n, 1, 1))  # block e=(i,j): sigma_j
        fro2 = np.real(np.einsum("kij,kji->k", stack, stack))
        self.step_norm = 0.5 * float(np.sqrt(2.0 * fro2.max()))  # ‖K‖ bound

    def blocks(self, ptab: np.ndarray, qtab: np.ndarray) -> np.ndarray:
        return ptab.reshape(-1, 1, 1) * self.rho - qtab.reshape(-1, 1, 1) * self.sigma

    def value(self, ptab: np.ndarray, qtab: np.ndarray) -> float:
        w = np.linalg.eigvalsh(self.blocks(ptab, qtab))
        return 0.5 * float(np.abs(w).sum())

    def __call__(self, ptab: np.ndarray, qtab: np.ndarray):
        w, v = np.linalg.eigh(self.blocks(ptab, qtab))
        value = 0.5 * float(np.abs(w).sum())
        sgn = (v * np.sign(w)[:, None, :]) @ v.conj().swapaxes(-1, -2)
        gp, gq = self.contract(sgn)
        return value, gp, gq

    def contract(self, dual: np.ndarray):
        """Pair the dual blocks with the state stacks: the coefficients of the
        tables in the bilinear form, also the (sub)gradient direction."""
        gp = 0.5 * np.real(np.einsum("eij,eji->e", dual, self.rho)).reshape(self.n, self.n)
        gq = -0.5 * np.real(np.einsum("eij,eji->e", dual, self.sigma)).reshape(self.n, self.n)
        return gp, gq

    def dual_bound(self, gp: np.ndarray, gq: np.ndarray) -> float:
        """Lower bound on the optimum from any contraction-feasible dual.

        With the dual blocks frozen the objective is linear with coefficients
        ``gp``/``gq``; its exact minimum over the feasible set is
        ``sum_i p_i min_j gp[i,j] + sum_j q_j min_i gq[i,j]``.
        """
        return float(self.p @ np.min(gp, axis=1) + self.q @ np.min(gq, axis=0))


def _proj_contractions(y: np.ndarray) -> np.ndarray:
    """Clip the eigenvalues of each Hermitian block to [-1, 1]."""
    y = 0.5 * (y + y.conj().swapaxes(-1, -2))
    w, v = np.linalg.eigh(y)
    np.clip(w, -1.0, 1.0, out=w)
    return (v * w[:, None, :]) @ v.conj().swapaxes(-1, -2)


def _solve_distance(obj: _DistanceObjective, starts, opts: SolverOptions, lower: float):
    """Primal-dual iteration on the table pair and the dual contraction blocks."""
    vals = [obj.value(pt, qt) for pt, qt in starts]
    k0 = int(np.argmin(vals))
    best_val = vals[k0]
    best = (starts[k0][0].copy(), starts[k0][1].copy())
    ptab, qtab = best[0].copy(), best[1].copy()
    pbar, qbar = ptab, qtab
    w, v = np.linalg.eigh(obj.blocks(ptab, qtab))
    y = (v * np.sign(w)[:, None, :]) @ v.conj().swapaxes(-1, -2)
    dual_best = max(lower, 0.0)
    step = 1.0 / obj.step_norm
    iterations = 0
    converged = False
    while iterations < opts.max_iter:
        iterations += 1
        y = _proj_contractions(y + (0.5 * step) * obj.blocks(pbar, qbar))
        gp, gq = obj.contract(y)
        pnew = project_rows_to_simplex(ptab - step * gp, obj.p)
        qnew = project_rows_to_simplex((qtab - step * gq).T, obj.q).T
        pbar, qbar = 2.0 * pnew - ptab, 2.0 * qnew - qtab
        ptab, qtab = pnew, qnew
        if iterations % 5 == 0 or iterations == opts.max_iter:
            val = obj.value(ptab, qtab)
            if val < best_val:
                best_val, best = val, (ptab.copy(), qtab.copy())
            dual_best = max(dual_best, obj.dual_bound(gp, gq))
            if best_val - dual_best <= opts.tol:
                converged = True
                break
    return best_val, best, iterations, converged


def ehs_distance(a: Ensemble, b: Ensemble, opts: SolverOptions | None = None) -> SolveReport:
    """Minimal trace distance between pointer embeddings of two ensembles.

    Solves ``(1/2) min sum ‖P(rho,sigma) rho - Q(rho,sigma) sigma‖_1`` over
    table pairs whose P-rows sum to P(rho) and Q-columns sum to Q(sigma).
    The value always lies between the trace distance of the ensemble
    averages (bracket lower bound) and the coupling distance (upper bound,
    also the warm start).  ``converged`` is False only when the iteration
    budget ran out before the certificate gap closed to ``tol``.
    """
    opts = _as_options(opts)
    sp = unify_support(a, b)
    lower = trace_distance(average_state(a), average_state(b))
    dk, coupling = kantorovich_distance(a, b)
    obj = _DistanceObjective(sp.omega, sp.p, sp.q)
    warm = (coupling.table.copy(), coupling.table.copy())
    product = (np.outer(sp.p, sp.q), np.outer(sp.p, sp.q))
    val, (ptab, qtab), iters, converged = _solve_distance(obj, [warm, product], opts, lower)
    value = float(min(max(val, 0.0), 1.0))
    return SolveReport(value, JointPair(ptab, qtab), iters, (lower, dk), converged)


def _bca(p: np.ndarray, q: np.ndarray, w: np.ndarray, opts: SolverOptions):
    """Block coordinate ascent for ``max sum sqrt(P_e Q_e) w_e``.

    For fixed Q the optimal P-row is proportional to ``Q w²`` (Cauchy-Schwarz)
    and symmetrically for Q-columns, so each half-sweep is an exact block
    maximum and the objective never decreases.
    """
    n = len(p)
    lp = transportation_lp(p, q, w, "max")
    fk = lp.value
    w2 = w * w
    rng = np.random.default_rng(opts.seed)

    def random_tables():
        pt = project_rows_to_simplex(rng.random((n, n)), p)
        qt = project_rows_to_simplex(rng.random((n, n)).T, q).T
        return pt, qt

    starts = [
        (lp.coupling.table.copy(), lp.coupling.table.copy()),
        (np.outer(p, q), np.outer(p, q)),
    ]
    starts += [random_tables() for _ in range(opts.restarts)]

    def value_of(pt, qt):
        return float(np.sum(np.sqrt(pt * qt) * w))

    best_val = -np.inf
    best = None
    total_sweeps = 0
    converged = False
    for pt, qt in starts:
        val = value_of(pt, qt)
        for _ in range(2000):
            total_sweeps += 1
            num = qt * w2
            rs = num.sum(axis=1)
            pt = np.where(
                (rs > 0.0)[:, None], p[:, None] * num / np.where(rs > 0.0, rs, 1.0)[:, None],
                p[:, None] / n,
            )
            num = pt * w2
            cs = num.sum(axis=0)
            qt = np.where(
                (cs > 0.0)[None, :], q[None, :] * num / np.where(cs > 0.0, cs, 1.0)[None, :],
                q[None, :] / n,
            )
            new_val = value_of(pt, qt)
            if new_val - val < 1e-10:
                val = max(val, new_val)
                converged = True
                break
            val = new_val
        if val > best_val:
            best_val, best = val, (pt, qt)
    return best_val, best, total_sweeps, converged, fk


def ehs_fidelity(a: Ensemble, b: Ensemble, opts: SolverOptions | None = None) -> SolveReport:
    """Maximal fidelity between pointer embeddings of two ensembles.

    Maximizes ``sum sqrt(P(rho,sigma) Q(rho,sigma)) F(rho,sigma)`` under the
    same marginal constraints as :func:`ehs_distance`.  The value lies
    between the coupling fidelity (lower bound, also the warm start) and the
    fidelity of the ensemble averages (upper bound).
    """
    opts = _as_options(opts)
    sp = unify_support(a, b)
    upper = fidelity(average_state(a), average_state(b))
    w = _pairwise_fidelity(sp.omega)
    val, (pt, qt), sweeps, converged, fk = _bca(sp.p, sp.q, w, opts)
    value = float(min(max(val, 0.0), 1.0))
    return SolveReport(value, JointPair(pt, qt), sweeps, (fk, upper), converged)


def ehs_bures(a: Ensemble, b: Ensemble, opts: SolverOptions | None = None) -> tuple[float, float]:
    """Bures length and angle derived from one fidelity solve:
    ``sqrt(1 - F)`` and ``arccos F``."""
    f = ehs_fidelity(a, b, opts).value
    f = min(max(f, 0.0), 1.0)
    return float(np.sqrt(1.0 - f)), float(np.arccos(f))


def uhlmann_pure_ensembles(rho: np.ndarray, sigma: np.ndarray):
    """Pure-state decompositions of two density matrices whose term-by-term
    overlap realizes the fidelity.

    Both states are purified with a shared reference register, the two
    purifications are aligned by the polar unitary of ``sqrt(rho) sqrt(sigma)``
    (the optimal overlap), and reading the reference register in its basis
    decomposes each state into pure components.  Returns the two ensembles
    and ``sum_i a_i b_i |<psi_i|phi_i>|``, which equals ``F(rho, sigma)`` up
    to roundoff.  Rank-deficient inputs simply produce zero-weight terms,
    which are dropped.
    """
    from .ensembles import make_ensemble, pure_state

    sr = mat_sqrt_psd(rho)
    ss = mat_sqrt_psd(sigma)
    u, _, vh = np.linalg.svd(sr @ ss)
    cols_p = sr @ (u @ vh)  # column i = alpha_i |psi_i>
    cols_q = ss
    overlap = float(np.sum(np.abs(np.einsum("ki,ki->i", cols_p.conj(), cols_q))))
    wp = np.linalg.norm(cols_p, axis=0) ** 2
    wq = np.linalg.norm(cols_q, axis=0) ** 2
    ens_p = make_ensemble(
        [(wp[i], pure_state(cols_p[:, i])) for i in range(len(wp)) if wp[i] > 0.0]
    )
    ens_q = make_ensemble(
        [(wq[i], pure_state(cols_q[:, i])) for i in range(len(wq)) if wq[i] > 0.0]
    )
    return ens_p, ens_q, overlap


def pure_ensemble_fidelity(a: Ensemble, b: Ensemble, opts: SolverOptions | None = None) -> float:
    """Pointer-embedding fidelity specialized to pure-state ensembles.

    The pairwise fidelity is the plain overlap ``|<psi|phi>|``.  Raises
    NotPure when any state has purity ``Tr rho²`` below ``1 - 1e-8``.
    """
    opts = _as_options(opts)
    sp = unify_support(a, b)
    vecs = []
    for mat in sp.omega:
        purity = float(np.real(np.trace(mat @ mat)))
        if purity < 1.0 - _PURITY_TOL:
            raise NotPure(f"state purity {purity} below {1 - _PURITY_TOL}")
        dec = herm_eig(mat)
        vecs.append(dec.eigenvectors[:, 0])
    n = len(vecs)
    w = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = abs(np.vdot(vecs[i], vecs[j]))
    val, _, _, _, _ = _bca(sp.p, sp.q, w, opts)
    return float(min(max(val, 0.0), 1.0))


def distance_objective(a: Ensemble, b: Ensemble) -> Callable:
    """Handle returning ``(value, grad_p, grad_q)`` of the distance objective
    at a table pair; used for derivative cross-checks."""
    sp = unify_support(a, b)
    obj = _DistanceObjective(sp.omega, sp.p, sp.q)

    def evaluate(ptab: np.ndarray, qtab: np.ndarray):
        return obj(np.asarray(ptab, float), np.asarray(qtab, float))

    return evaluate


def fidelity_objective(a: Ensemble, b: Ensemble) -> Callable:
    """Handle returning ``(value, grad_p, grad_q)`` of the fidelity objective
    at an interior table pair."""
    sp = unify_support(a, b)
    w = _pairwise_fidelity(sp.omega)

    def evaluate(ptab: np.ndarray, qtab: np.ndarray):
        ptab = np.asarray(ptab, float)
        qtab = np.asarray(qtab, float)
        value = float(np.sum(np.sqrt(ptab * qtab) * w))
        with np.errstate(divide="ignore", invalid="ignore"):
            gp = np.where(ptab > 0.0, 0.5 * np.sqrt(qtab / np.where(ptab > 0, ptab, 1)) * w, 0.0)
            gq = np.where(qtab > 0.0, 0.5 * np.sqrt(ptab / np.where(qtab > 0, qtab, 1)) * w, 0.0)
        return value, gp, gq

    return evaluate
