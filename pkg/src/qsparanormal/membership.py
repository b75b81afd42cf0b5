"""Deciding class membership of a concrete matrix.

Two independent engines cover the power families:

* :func:`check_direct` minimizes the per-vector residual over the unit
  sphere (multi-start projected gradient plus dense random sampling).
* :func:`check_pencil` scans the smallest eigenvalue of the pencil
  ``Q(mu) = A - (1+n) mu^n B + n mu^(1+n) C`` over a logarithmic grid of
  ``mu`` and refines around the worst grid points.

``Member`` is always a tolerance-qualified claim backed by the search that
was performed; ``NonMember`` always comes with a witness that can be
re-evaluated independently.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from .classes import ClassId, Family, ResidualForm, star_class_a_terms
from .errors import UnsupportedClass
from .linalg import DEFAULT_TOL, adjoint, as_matrix, hermitian_part, is_psd, operator_norm, spectral_radius


class Status(str, Enum):
    MEMBER = "Member"
    NON_MEMBER = "NonMember"
    INCONCLUSIVE = "Inconclusive"


class Engine(str, Enum):
    DIRECT = "Direct"
    PENCIL = "Pencil"
    EXACT_SHIFT = "ExactShift"
    PSD_CHECK = "PsdCheck"
    NORM = "Norm"


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for both membership engines.

    ``samples`` random unit vectors are drawn when the search dimension is
    at most ``sample_max_dim``.  ``mu_grid`` points are spread
    logarithmically over the bracket of diagonal ratios ``B_ii / C_ii``
    widened by ``mu_expand`` on both sides.
    """

    restarts: int = 64
    max_iters: int = 500
    seed: int = 0
    armijo: float = 1e-4
    step_init: float = 1.0
    step_shrink: float = 0.5
    max_backtracks: int = 40
    nonmonotone: int = 10
    min_step: float = 1e-12
    max_step: float = 1e12
    gtol: float = 1e-9
    model_safety: float = 10.0
    settle_fraction: float = 0.1
    stall_window: int = 25
    stall_tol: float = 1e-13
    samples: int = 10_000
    sample_max_dim: int = 16
    polish_iters: int = 60
    mu_grid: int = 201
    mu_expand: float = 1e3
    mu_refine: int = 3
    mu_refine_points: int = 33
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.mu_grid < 2 or not self.mu_expand > 0:
            raise ValueError("mu grid needs at least two points and a positive expansion")


@dataclass
class MembershipVerdict:
    cls: ClassId
    status: Status
    margin: float
    engine: Engine
    witness: np.ndarray | None = None
    mu: float | None = None
    scale: float = 0.0
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def is_member(self) -> bool:
        return self.status is Status.MEMBER

    @property
    def is_non_member(self) -> bool:
        return self.status is Status.NON_MEMBER

    def to_json(self) -> dict:
        w = None
        if self.witness is not None:
            w = [[float(z.real), float(z.imag)] for z in np.asarray(self.witness).reshape(-1)]
        return {
            "class": str(self.cls),
            "name": self.cls.name,
            "status": self.status.value,
            "margin": float(self.margin),
            "witness": w,
            "mu": None if self.mu is None else float(self.mu),
            "engine": self.engine.value,
            "scale": float(self.scale),
            "seed": self.seed,
            "details": self.details,
        }


# -- direct engine ----------------------------------------------------------


def _random_unit(rng, count, dim):
    Z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


@lru_cache(maxsize=64)
def _sample_points(seed, count, dim):
    out = _random_unit(np.random.default_rng([seed, 1]), count, dim)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=64)
def _restart_starts(seed, restarts, dim):
    # one independent stream per restart, so results do not depend on order
    out = np.array([_random_unit(np.random.default_rng([seed, 0, r]), 1, dim)[0] for r in range(restarts)])
    out.flags.writeable = False
    return out


def _tangent(X, G):
    inner = np.real(np.sum(np.conj(X) * G, axis=1))
    return G - inner[:, None] * X


def _descend(form, X, cfg, scale, stop_below=None):
    """Batched Riemannian gradient descent on the unit sphere.

    Steps are Barzilai-Borwein lengths safeguarded by a nonmonotone
    Armijo backtracking search (reference value: the worst of the last
    ``nonmonotone`` iterates), done independently for each row.  A row is
    converged when its tangent gradient drops below ``gtol``, when the line
    search cannot make progress, when its value has stopped moving over a
    window of ``stall_window`` iterations, or when the quadratic model built
    from the current step length (inflated by ``model_safety``) cannot drive
    it below ``-settle_fraction * tol``.

    Returns the final points, their normalized values, a per-row converged
    flag and the number of iterations run.
    """
    X = X.copy()
    f, G = form.value_and_grad(X)
    f, G = f / scale, G / scale
    Gt = _tangent(X, G)
    R = X.shape[0]
    t = np.full(R, cfg.step_init)
    hist = np.repeat(f[:, None], cfg.nonmonotone, axis=1)
    active = np.ones(R, dtype=bool)
    converged = np.zeros(R, dtype=bool)
    checkpoint = f.copy()
    it = 0
    floor = -cfg.settle_fraction * cfg.tol
    for it in range(1, cfg.max_iters + 1):
        gn2 = np.sum(np.abs(Gt) ** 2, axis=1)
        # settled: even a generous local quadratic model cannot reach the threshold
        predicted = f - cfg.model_safety * 0.5 * t * gn2
        done = active & ((gn2 <= cfg.gtol**2) | (predicted >= floor))
        converged |= done
        active &= ~done
        if not active.any():
            break
        idx = np.flatnonzero(active)
        ref = hist[idx].max(axis=1)
        step = t[idx].copy()
        accepted = np.zeros(idx.size, dtype=bool)
        Xa = np.empty_like(X[idx])
        fa = np.empty(idx.size)
        Ga = np.empty_like(G[idx])
        pend = np.arange(idx.size)
        for _ in range(cfg.max_backtracks):
            rows = idx[pend]
            Xn = X[rows] - step[pend, None] * Gt[rows]
            Xn /= np.linalg.norm(Xn, axis=1, keepdims=True)
            fn, Gn = form.value_and_grad(Xn)
            fn, Gn = fn / scale, Gn / scale
            ok = fn <= ref[pend] - cfg.armijo * step[pend] * gn2[rows]
            good = pend[ok]
            Xa[good], fa[good], Ga[good] = Xn[ok], fn[ok], Gn[ok]
            accepted[good] = True
            pend = pend[~ok]
            if pend.size == 0:
                break
            step[pend] *= cfg.step_shrink
        stuck = idx[~accepted]
        converged[stuck] = True
        active[stuck] = False

        acc = idx[accepted]
        if acc.size:
            Xn, fn, Gn = Xa[accepted], fa[accepted], Ga[accepted]
            Gtn = _tangent(Xn, Gn)
            s_vec = Xn - X[acc]
            y_vec = Gtn - _tangent(Xn, Gt[acc])
            ss = np.sum(np.abs(s_vec) ** 2, axis=1)
            sy = np.real(np.sum(np.conj(s_vec) * y_vec, axis=1))
            bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 2.0 * step[accepted])
            t[acc] = np.clip(bb, cfg.min_step, cfg.max_step)
            X[acc], f[acc], G[acc], Gt[acc] = Xn, fn, Gn, Gtn
            hist[acc] = np.roll(hist[acc], 1, axis=1)
            hist[acc, 0] = fn
        if it % cfg.stall_window == 0:
            stalled = active & (checkpoint - f < cfg.stall_tol)
            converged |= stalled
            active &= ~stalled
            checkpoint = f.copy()
        if stop_below is not None and f.min() < stop_below:
            break
    return X, f, converged, it


def _structured_starts(form, tol):
    """Deterministic starts built from the quadratic forms.

    Violations often sit in narrow basins, e.g. vectors that ``T^k`` maps
    into ``ker T^(1+n)`` while ``T*`` does not annihilate them.  Eigenvectors
    of the individual forms (and of ``B`` compressed to ``ker A``) land in
    such basins directly.
    """
    if form.n is None:
        _, U = np.linalg.eigh(form.quadratic)
        return U.T
    A, B, C = form.A, form.B, form.C
    cols = [np.linalg.eigh(M)[1] for M in (A, B, C, A - B)]
    w, U = np.linalg.eigh(A)
    K = U[:, w <= tol * max(abs(w).max(), 0.0)]
    if 0 < K.shape[1] < form.dim:
        _, W = np.linalg.eigh(adjoint(K) @ B @ K)
        cols.append(K @ W)
    return np.hstack(cols).T


def check_direct(T, cls: ClassId, cfg: SearchConfig | None = None, support=None) -> MembershipVerdict:
    """Minimize the definitional residual of ``cls`` over the unit sphere.

    ``support`` (orthonormal columns) restricts the search to a subspace,
    which is how interior-only checks of truncated infinite operators are
    expressed.
    """
    cfg = cfg or SearchConfig()
    if not cls.per_vector:
        raise UnsupportedClass(f"{cls} has no per-vector inequality; use check_normaloid")
    form = ResidualForm(cls, T, support, cfg.tol)
    d, scale = form.dim, form.scale
    meta = {"restarts": cfg.restarts, "max_iters": cfg.max_iters, "dim": d}
    if d == 0 or scale == 0.0:
        meta["trivial"] = True
        return MembershipVerdict(cls, Status.MEMBER, 0.0, Engine.DIRECT, scale=scale, seed=cfg.seed, details=meta)
    thr = -cfg.tol

    n_samples = cfg.samples if d <= cfg.sample_max_dim else 0
    S = np.vstack(
        [
            np.eye(d, dtype=complex),
            _structured_starts(form, cfg.tol),
            _sample_points(cfg.seed, n_samples, d),
        ]
    )
    fs = form.values(S) / scale
    meta["samples"] = int(S.shape[0])
    order = np.argsort(fs)

    if fs[order[0]] < thr:
        # refuted by sampling; polish the best sample into a deeper witness
        polish = SearchConfig(**{**asdict(cfg), "max_iters": cfg.polish_iters})
        Xp, fp, _, _ = _descend(form, S[order[:1]], polish, scale)
        z, fz = (Xp[0], fp[0]) if fp[0] <= fs[order[0]] else (S[order[0]], fs[order[0]])
        meta["found_by"] = "sampling"
        return _non_member(cls, form, z, fz, scale, cfg, meta)

    starts = np.vstack([_restart_starts(cfg.seed, cfg.restarts, d), S[order[: min(8, S.shape[0])]]])
    X, f, converged, iters = _descend(form, starts, cfg, scale, stop_below=thr)
    meta["iterations"] = iters
    meta["converged"] = int(converged.sum())
    meta["starts"] = int(starts.shape[0])
    best = int(np.argmin(f))
    if f[best] < thr:
        meta["found_by"] = "descent"
        return _non_member(cls, form, X[best], f[best], scale, cfg, meta)
    margin = min(float(f[best]), float(fs[order[0]])) * scale
    status = Status.MEMBER if converged.all() else Status.INCONCLUSIVE
    return MembershipVerdict(cls, status, margin, Engine.DIRECT, scale=scale, seed=cfg.seed, details=meta)


def _non_member(cls, form, z, fz, scale, cfg, meta):
    x = form.support @ z
    x = x / np.linalg.norm(x)
    return MembershipVerdict(
        cls, Status.NON_MEMBER, float(fz) * scale, Engine.DIRECT, witness=x, scale=scale, seed=cfg.seed, details=meta
    )


# -- pencil engine ----------------------------------------------------------


def _mu_bracket(A, B, C, cfg, n):
    dB, dC = np.real(np.diag(B)), np.real(np.diag(C))
    if dC.size == 0:
        return 1.0 / cfg.mu_expand, cfg.mu_expand
    mask = (dC > cfg.tol * dC.max()) & (dB > 0)
    if mask.any():
        ratios = dB[mask] / dC[mask]
        lo, hi = ratios.min(), ratios.max()
    else:
        nB, nC = operator_norm(B), operator_norm(C)
        lo = hi = nB / nC if nB > 0 and nC > 0 else 1.0
    return lo / cfg.mu_expand, hi * cfg.mu_expand


def check_pencil(
    T, n: int, k: int, cfg: SearchConfig | None = None, support=None, family: Family = Family.QUASI_STAR_PARANORMAL
) -> MembershipVerdict:
    """Scan ``lambda_min(Q(mu))`` over a log grid of ``mu``.

    This engine never reports ``Inconclusive``: a clean scan is reported as
    ``Member`` with the grid recorded in ``details``.  For ``n = 0`` the
    pencil does not depend on ``mu`` and a single PSD check of ``A - B`` is
    made.
    """
    cfg = cfg or SearchConfig()
    family = Family(family)
    if family not in (Family.QUASI_STAR_PARANORMAL, Family.QUASI_PARANORMAL, Family.QUASI_HYPONORMAL):
        raise UnsupportedClass(f"no pencil criterion for {family.value}")
    cls = ClassId.qh(k) if family is Family.QUASI_HYPONORMAL else ClassId(family, n, k)
    n = cls.exponent
    form = ResidualForm(cls, T, support, cfg.tol)
    A, B, C, V = form.A, form.B, form.C, form.support
    nA, nB, nC = (operator_norm(M) for M in (A, B, C))
    meta: dict = {"dim": form.dim}

    if n == 0:
        scale = nA + nB
        if form.dim == 0 or scale == 0.0:
            return MembershipVerdict(cls, Status.MEMBER, 0.0, Engine.PENCIL, scale=scale, details=meta)
        w, U = np.linalg.eigh(A - B)
        lam = float(w[0])
        if lam < -cfg.tol * scale:
            return MembershipVerdict(
                cls, Status.NON_MEMBER, lam, Engine.PENCIL, witness=V @ U[:, 0], scale=scale, details=meta
            )
        return MembershipVerdict(cls, Status.MEMBER, lam, Engine.PENCIL, scale=scale, details=meta)

    if form.dim == 0 or (nA + nB + nC) == 0.0:
        return MembershipVerdict(cls, Status.MEMBER, 0.0, Engine.PENCIL, details=meta)

    def scale_at(mu):
        return nA + (1 + n) * mu**n * nB + n * mu ** (1 + n) * nC

    def eig_at(mus):
        mus = np.asarray(mus, dtype=float)
        Q = A[None] - ((1 + n) * mus**n)[:, None, None] * B[None] + (n * mus ** (1 + n))[:, None, None] * C[None]
        Q = 0.5 * (Q + np.conj(np.swapaxes(Q, 1, 2)))
        w, U = np.linalg.eigh(Q)
        return w[:, 0], U[:, :, 0]

    lo, hi = _mu_bracket(A, B, C, cfg, n)
    grid = np.geomspace(lo, hi, cfg.mu_grid)
    lam, vecs = eig_at(grid)
    meta.update({"mu_lo": float(lo), "mu_hi": float(hi), "mu_points": int(cfg.mu_grid)})

    # refine around the worst grid points (normalized by the local scale)
    rel = lam / scale_at(grid)
    fine, hints = [], []
    for i in np.argsort(rel)[: cfg.mu_refine]:
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, grid.size - 1)]
        fine.append(np.geomspace(a, b, cfg.mu_refine_points))
        v = vecs[i]
        av, cv = np.real(np.vdot(v, A @ v)), np.real(np.vdot(v, C @ v))
        if av > 0 and cv > 0:
            # the mu that is optimal for this particular vector
            hints.append((av / cv) ** (1 / (1 + n)))
    extra = np.concatenate(fine + [np.array(hints)])
    l2, v2 = eig_at(extra)
    mus = np.concatenate([grid, extra])
    lams = np.concatenate([lam, l2])
    vs = np.concatenate([vecs, v2])

    thr = -cfg.tol * scale_at(mus)
    bad = np.flatnonzero(lams < thr)
    meta["mu_evaluated"] = int(mus.size)
    if bad.size:
        j = bad[np.argmin(lams[bad])]
        return MembershipVerdict(
            cls,
            Status.NON_MEMBER,
            float(lams[j]),
            Engine.PENCIL,
            witness=V @ vs[j],
            mu=float(mus[j]),
            scale=float(scale_at(mus[j])),
            details=meta,
        )
    j = int(np.argmin(lams))
    return MembershipVerdict(
        cls, Status.MEMBER, float(lams[j]), Engine.PENCIL, mu=float(mus[j]), scale=float(scale_at(mus[j])), details=meta
    )


# -- single-shot checks -------------------------------------------------------


def check_quasi_star_class_a(T, k: int, tol: float = DEFAULT_TOL, support=None) -> MembershipVerdict:
    """PSD check of ``T*^k (|T^2| - |T*|^2) T^k``."""
    T = as_matrix(T, square=True)
    cls = ClassId.qsa(k)
    lhs, rhs = star_class_a_terms(T, k, tol)
    V = np.eye(T.shape[0], dtype=complex) if support is None else as_matrix(support)
    lhs, rhs = adjoint(V) @ lhs @ V, adjoint(V) @ rhs @ V
    scale = operator_norm(lhs) + operator_norm(rhs)
    if V.shape[1] == 0 or scale == 0.0:
        return MembershipVerdict(cls, Status.MEMBER, 0.0, Engine.PSD_CHECK, scale=scale)
    # both terms are Hermitian; symmetrize so cancellation roundoff is not read as skewness
    v = is_psd(hermitian_part(lhs - rhs), tol, scale=scale)
    if v.is_psd:
        return MembershipVerdict(cls, Status.MEMBER, v.min_eigenvalue, Engine.PSD_CHECK, scale=scale)
    return MembershipVerdict(
        cls, Status.NON_MEMBER, v.min_eigenvalue, Engine.PSD_CHECK, witness=V @ v.witness, scale=scale
    )


def check_normaloid(T, tol: float = DEFAULT_TOL) -> MembershipVerdict:
    """``|T| = r(T)`` up to ``tol * |T|``; margin is ``r(T) - |T|``."""
    T = as_matrix(T, square=True)
    norm, rad = operator_norm(T), spectral_radius(T)
    status = Status.MEMBER if norm - rad <= tol * norm else Status.NON_MEMBER
    return MembershipVerdict(
        ClassId.normaloid(),
        status,
        rad - norm,
        Engine.NORM,
        scale=norm,
        details={"norm": norm, "spectral_radius": rad},
    )


# -- sweeps -------------------------------------------------------------------


def combine(direct: MembershipVerdict, other: MembershipVerdict) -> MembershipVerdict:
    """Merge a direct verdict with a pencil or PSD verdict for the same class.

    Agreement keeps the direct verdict.  A definite disagreement is
    flagged ``Inconclusive`` with both margins.  When the direct search is
    inconclusive, a refutation by the other engine stands.
    """
    both = {"direct": direct.to_json(), other.engine.value.lower(): other.to_json()}
    if direct.status is other.status:
        return replace(direct, details={**direct.details, "engines": both})
    if direct.status is Status.INCONCLUSIVE and other.status is Status.NON_MEMBER:
        return replace(other, cls=direct.cls, details={**other.details, "engines": both})
    return MembershipVerdict(
        direct.cls,
        Status.INCONCLUSIVE,
        min(direct.margin, other.margin),
        direct.engine,
        scale=direct.scale,
        seed=direct.seed,
        details={"disagreement": True, "engines": both},
    )


def check(T, cls: ClassId, cfg: SearchConfig | None = None, support=None) -> MembershipVerdict:
    """Run every engine that applies to ``cls`` and combine them."""
    cfg = cfg or SearchConfig()
    if cls.family is Family.NORMALOID:
        return check_normaloid(T, cfg.tol)
    direct = check_direct(T, cls, cfg, support)
    if cls.family is Family.QUASI_STAR_CLASS_A:
        other = check_quasi_star_class_a(T, cls.k, cfg.tol, support)
    else:
        other = check_pencil(T, cls.exponent, cls.k, cfg, support, family=cls.family)
    return combine(direct, other)


@dataclass
class Classification:
    """Result of :func:`classify`: one combined verdict per class, in sweep order."""

    verdicts: list[MembershipVerdict]

    def __getitem__(self, cls) -> MembershipVerdict:
        if isinstance(cls, str):
            cls = ClassId.parse(cls)
        for v in self.verdicts:
            if v.cls == cls:
                return v
        raise KeyError(str(cls))

    def to_json(self) -> list[dict]:
        return [v.to_json() for v in self.verdicts]


def classify(T, n_range=range(0, 3), k_range=range(0, 4), cfg: SearchConfig | None = None) -> Classification:
    """Sweep the power families over ``n_range x k_range`` plus k-quasi-*-class A and normaloid."""
    n_range, k_range = list(n_range), list(k_range)
    if not n_range or not k_range:
        raise ValueError("n and k ranges must be nonempty")
    cfg = cfg or SearchConfig()
    out = []
    for fam in (Family.QUASI_STAR_PARANORMAL, Family.QUASI_PARANORMAL):
        for n in n_range:
            for k in k_range:
                out.append(check(T, ClassId(fam, n, k), cfg))
    for k in k_range:
        out.append(check(T, ClassId.qsa(k), cfg))
    out.append(check_normaloid(T, cfg.tol))
    return Classification(out)
