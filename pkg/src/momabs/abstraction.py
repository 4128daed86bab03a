"""Hierarchical abstraction synthesis for LTI systems.

Builds simulation-function certificates with their interfaces, the
geometric abstraction (projection / injection maps plus the link matrices
that witness the M-relation), and the final reduced abstract model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    StateSpaceModel,
    as_matrix,
    _square,
    eigenvalues,
    numerical_rank,
    pseudo_inverse,
    solve_lyapunov,
    solve_sylvester,
)

RESIDUAL_TOL = 1e-9
DEFAULT_LAMBDA_FRACTION = 0.9


@dataclass(frozen=True)
class SimulationCertificate:
    """Witness (p, l_hat, w, lam, k, r_hat) of an approximate simulation.

    p and l_hat solve the embedding equations p f = a p + b l_hat, h = c p;
    w and lam certify (a + b k)^T w + w (a + b k) <= -2 lam w with w >= c^T c.
    """

    p: np.ndarray
    l_hat: np.ndarray
    w: np.ndarray
    lam: float
    k: np.ndarray
    r_hat: np.ndarray

    def w_sqrt(self) -> np.ndarray:
        vals, vecs = np.linalg.eigh(self.w)
        return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


@dataclass(frozen=True)
class AbstractionDesign:
    """Output of the geometric abstraction construction.

    Satisfies m_map p = I, p m_map + d e = I, im(d) in ker(c),
    a p = p f - b l_hat, h = c p, g = [m_map b | m_map a d], and the
    link equations m_map a = f m_map + g n_map, g gamma = m_map b,
    c = h m_map.
    """

    p: np.ndarray
    d: np.ndarray
    e: np.ndarray
    m_map: np.ndarray
    f: np.ndarray
    l_hat: np.ndarray
    h: np.ndarray
    g: np.ndarray
    n_map: np.ndarray
    gamma: np.ndarray

    @property
    def order(self) -> int:
        return self.f.shape[0]

    @property
    def abstract_input_dim(self) -> int:
        return self.g.shape[1]

    def abstract_model(self) -> StateSpaceModel:
        return StateSpaceModel(a=self.f, b=self.g, c=self.h)


@dataclass(frozen=True)
class StabilizedLink:
    """Link v = n_map x + gamma u + k_hat (xi - m_map x) into the abstraction."""

    n_map: np.ndarray
    gamma: np.ndarray
    k_hat: np.ndarray


@dataclass(frozen=True)
class MRelationReport:
    accepted: bool
    n_map: np.ndarray | None
    gamma: np.ndarray | None
    residuals: dict


def solve_embedding(
    sys: StateSpaceModel, abstract: StateSpaceModel, l_hat=None
) -> tuple[np.ndarray, np.ndarray]:
    """Solve p f = a p + b l_hat together with h = c p.

    When l_hat is given, p is the unique Sylvester solution and the output
    constraint is verified.  Otherwise (p, l_hat) are solved jointly as a
    stacked linear system (minimum norm if underdetermined).
    """
    a, b, c = sys.a, sys.b, sys.c
    f, h = abstract.a, abstract.c
    n, m, n_hat = sys.n, sys.m, abstract.n
    if l_hat is not None:
        l_hat = as_matrix(l_hat, "l_hat")
        p = solve_sylvester(a, f, -(b @ l_hat))
    else:
        # unknowns: vec(p) then vec(l_hat), column-major
        eye_n = np.eye(n)
        eye_nh = np.eye(n_hat)
        top = np.hstack(
            [np.kron(f.T, eye_n) - np.kron(eye_nh, a), -np.kron(eye_nh, b)]
        )
        bottom = np.hstack([np.kron(eye_nh, c), np.zeros((h.size, m * n_hat))])
        lhs = np.vstack([top, bottom])
        rhs = np.concatenate([np.zeros(n * n_hat), h.reshape(-1, order="F")])
        sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        p = sol[: n * n_hat].reshape((n, n_hat), order="F")
        l_hat = sol[n * n_hat :].reshape((m, n_hat), order="F")
        if np.linalg.norm(p @ f - a @ p - b @ l_hat) > RESIDUAL_TOL * max(
            1.0, np.linalg.norm(p)
        ):
            raise ValueError("embedding equations have no solution for this abstraction")
    if np.linalg.norm(c @ p - h) > RESIDUAL_TOL * max(1.0, np.linalg.norm(h)):
        raise ValueError("output constraint h = c p is violated; no certificate exists")
    return p, l_hat


def synth_certificate(
    sys: StateSpaceModel,
    abstract: StateSpaceModel,
    k,
    lambda_frac: float = DEFAULT_LAMBDA_FRACTION,
    r_hat="ones",
    l_hat=None,
) -> SimulationCertificate:
    """Construct a simulation-function certificate for ``abstract`` by ``sys``.

    lam is lambda_frac times the spectral abscissa margin of a + b k; w is a
    scaled shifted-Lyapunov solution, scaled so that w >= c^T c.
    r_hat may be a matrix, "ones", or "optimize".
    """
    if not 0 < lambda_frac < 1:
        raise ValueError("lambda_frac must lie in (0, 1)")
    k = as_matrix(k, "k")
    a_cl = sys.a + sys.b @ k
    spec = eigenvalues(a_cl)
    if spec.max_real_part >= 0:
        raise ValueError("k is not stabilizing")
    p, l_hat = solve_embedding(sys, abstract, l_hat)
    lam = lambda_frac * abs(spec.max_real_part)
    ctc = sys.c.T @ sys.c
    eps = 1e-6 * np.linalg.norm(ctc + np.eye(sys.n), 2)
    w0 = solve_lyapunov(a_cl + lam * np.eye(sys.n), ctc + eps * np.eye(sys.n))
    # smallest alpha with alpha w0 >= c^T c: top generalized eigenvalue of (ctc, w0)
    chol = np.linalg.cholesky(w0)
    inv_chol = np.linalg.inv(chol)
    gen_max = float(np.linalg.eigvalsh(inv_chol @ ctc @ inv_chol.T).max())
    w = max(1.0, gen_max) * w0
    if isinstance(r_hat, str):
        if r_hat == "ones":
            r_hat = np.ones((sys.m, abstract.m))
        elif r_hat == "optimize":
            r_hat = optimize_r_hat(p, sys.b, abstract.b)
        else:
            raise ValueError(f"unknown r_hat mode {r_hat!r}")
    else:
        r_hat = as_matrix(r_hat, "r_hat")
    cert = SimulationCertificate(p=p, l_hat=l_hat, w=w, lam=lam, k=k, r_hat=r_hat)
    _verify_certificate(cert, sys, abstract)
    return cert


def _verify_certificate(
    cert: SimulationCertificate, sys: StateSpaceModel, abstract: StateSpaceModel
) -> None:
    a_cl = sys.a + sys.b @ cert.k
    resid = np.linalg.norm(cert.p @ abstract.a - sys.a @ cert.p - sys.b @ cert.l_hat)
    if resid > RESIDUAL_TOL * max(1.0, np.linalg.norm(cert.p)):
        raise ValueError(f"embedding residual {resid:.3e} exceeds tolerance")
    gap = np.linalg.eigvalsh(cert.w - sys.c.T @ sys.c).min()
    if gap < -RESIDUAL_TOL:
        raise ValueError("w does not dominate c^T c")
    lmi = a_cl.T @ cert.w + cert.w @ a_cl + 2 * cert.lam * cert.w
    if np.linalg.eigvalsh(lmi).max() > RESIDUAL_TOL * max(1.0, np.linalg.norm(cert.w)):
        raise ValueError("decay inequality for w fails")


def simulation_fn_value(cert: SimulationCertificate, xi, x) -> float:
    """Value sqrt((p xi - x)^T w (p xi - x)); bounds ||h xi - c x||."""
    e = cert.p @ np.asarray(xi, float).reshape(-1) - np.asarray(x, float).reshape(-1)
    return float(np.sqrt(max(e @ cert.w @ e, 0.0)))


def interface_eval(cert: SimulationCertificate, v, xi, x) -> np.ndarray:
    """Concrete input u = r_hat v + l_hat xi + k (x - p xi)."""
    v = np.asarray(v, float).reshape(-1)
    xi = np.asarray(xi, float).reshape(-1)
    x = np.asarray(x, float).reshape(-1)
    return cert.r_hat @ v + cert.l_hat @ xi + cert.k @ (x - cert.p @ xi)


def gamma_gain(cert: SimulationCertificate, b, g) -> float:
    """Slope of the linear class-K gain: ||w^{1/2} (b r_hat - p g)||_2 / lam.

    With gamma(r) = gain * r, the simulation function strictly decreases
    whenever gamma(||v||) < V.
    """
    b = as_matrix(b, "b")
    g = as_matrix(g, "g")
    mat = cert.w_sqrt() @ (b @ cert.r_hat - cert.p @ g)
    return float(np.linalg.norm(mat, 2) / cert.lam)


def simulation_fn_derivative(
    cert: SimulationCertificate,
    sys: StateSpaceModel,
    abstract: StateSpaceModel,
    v,
    xi,
    x,
) -> float:
    """Directional derivative of V along the interconnected vector field."""
    v = np.asarray(v, float).reshape(-1)
    xi = np.asarray(xi, float).reshape(-1)
    x = np.asarray(x, float).reshape(-1)
    e = cert.p @ xi - x
    val = simulation_fn_value(cert, xi, x)
    if val == 0.0:
        raise ValueError("derivative is undefined at V = 0")
    u = interface_eval(cert, v, xi, x)
    e_dot = cert.p @ (abstract.a @ xi + abstract.b @ v) - (sys.a @ x + sys.b @ u)
    return float(e @ cert.w @ e_dot / val)


def optimize_r_hat(p, b, g) -> np.ndarray:
    """Frobenius-norm minimizer r_hat = pinv(b) p g of ||b r_hat - p g||."""
    p = as_matrix(p, "p")
    b = as_matrix(b, "b")
    g = as_matrix(g, "g")
    if numerical_rank(b) < b.shape[1]:
        import warnings

        warnings.warn("b is rank deficient; using a truncated pseudo-inverse")
    return pseudo_inverse(b) @ p @ g


def design_abstraction(sys: StateSpaceModel, p) -> AbstractionDesign:
    """Geometric abstraction from an injective p with im(a p) in im(p) + im(b)
    and im(p) + ker(c) = R^n.

    The injection d is chosen greedily from an orthonormal ker(c) basis so
    that [p d] is invertible; [m_map; e] is its inverse; (f, l_hat) solve
    [p, -b] [f; l_hat] = a p; the link matrices are n_map = [-l_hat m_map; e]
    and gamma = [I; 0].
    """
    p = as_matrix(p, "p")
    a, b, c = sys.a, sys.b, sys.c
    n, m = sys.n, sys.m
    n_hat = p.shape[1]
    if p.shape[0] != n:
        raise ValueError(f"p must have {n} rows")
    if numerical_rank(p) < n_hat:
        raise ValueError("p is not injective (rank deficient)")
    pb = np.hstack([p, b])
    if numerical_rank(np.hstack([pb, a @ p])) > numerical_rank(pb):
        raise ValueError("im(a p) is not contained in im(p) + im(b)")
    kerc = _kernel_basis(c)
    if numerical_rank(np.hstack([p, kerc])) < n:
        raise ValueError("im(p) + ker(c) does not span the state space")
    d = _greedy_complement(p, kerc, n - n_hat)
    stacked = np.hstack([p, d])
    if np.linalg.cond(stacked) > 1e12:
        raise ValueError("[p d] is numerically singular; im(p) + im(d) != R^n")
    inv = np.linalg.inv(stacked)
    m_map, e = inv[:n_hat], inv[n_hat:]
    # a p = p f - b l_hat, solved per column for [f; l_hat]
    fl, *_ = np.linalg.lstsq(np.hstack([p, -b]), a @ p, rcond=None)
    f, l_hat = fl[:n_hat], fl[n_hat:]
    resid = np.linalg.norm(p @ f - b @ l_hat - a @ p)
    if resid > RESIDUAL_TOL * max(1.0, np.linalg.norm(a @ p)):
        raise ValueError(f"embedding residual {resid:.3e}: geometric condition fails numerically")
    h = c @ p
    g = np.hstack([m_map @ b, m_map @ a @ d])
    n_map = np.vstack([-l_hat @ m_map, e])
    gamma = np.vstack([np.eye(m), np.zeros((n - n_hat, m))])
    design = AbstractionDesign(
        p=p, d=d, e=e, m_map=m_map, f=f, l_hat=l_hat, h=h, g=g, n_map=n_map, gamma=gamma
    )
    check_design(design, sys)
    return design


def _kernel_basis(c: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ker(c) with a deterministic sign convention."""
    _, svals, vt = np.linalg.svd(c)
    rank = int(np.sum(svals > max(c.shape) * svals[0] * 1e-12)) if svals.size else 0
    basis = vt[rank:].T
    if basis.shape[1] == 0:
        raise ValueError("c has trivial kernel; no injection candidates")
    for j in range(basis.shape[1]):
        i = int(np.argmax(np.abs(basis[:, j])))
        if basis[i, j] < 0:
            basis[:, j] = -basis[:, j]
    return basis


def _greedy_complement(p: np.ndarray, basis: np.ndarray, count: int) -> np.ndarray:
    """Pick ``count`` basis columns maximizing, at each step, the component
    orthogonal to the span of [p | selected]; ties break on column index."""
    if count > basis.shape[1]:
        raise ValueError("ker(c) is too small to complement im(p)")
    if count == 0:
        return np.zeros((p.shape[0], 0))
    selected: list[int] = []
    current = p
    for _ in range(count):
        q, _ = np.linalg.qr(current)
        resid = basis - q @ (q.T @ basis)
        scores = np.linalg.norm(resid, axis=0)
        scores[selected] = -1.0
        best = int(np.argmax(scores))
        if scores[best] <= 1e-10:
            raise ValueError("kernel basis cannot complete im(p) to R^n")
        selected.append(best)
        current = np.hstack([current, basis[:, [best]]])
    return basis[:, selected]


def check_design(design: AbstractionDesign, sys: StateSpaceModel, tol: float = RESIDUAL_TOL) -> dict:
    """Verify every defining identity of a design; returns the residual table."""
    a, b, c = sys.a, sys.b, sys.c
    n, n_hat = sys.n, design.order
    res = {
        "m_map p - I": np.linalg.norm(design.m_map @ design.p - np.eye(n_hat)),
        "p m_map + d e - I": np.linalg.norm(
            design.p @ design.m_map + design.d @ design.e - np.eye(n)
        ),
        "c d": np.linalg.norm(c @ design.d),
        "a p - p f + b l_hat": np.linalg.norm(
            a @ design.p - design.p @ design.f + b @ design.l_hat
        ),
        "h - c p": np.linalg.norm(design.h - c @ design.p),
        "m_map a - f m_map - g n_map": np.linalg.norm(
            design.m_map @ a - design.f @ design.m_map - design.g @ design.n_map
        ),
        "g gamma - m_map b": np.linalg.norm(design.g @ design.gamma - design.m_map @ b),
        "c - h m_map": np.linalg.norm(c - design.h @ design.m_map),
    }
    scale = max(1.0, np.linalg.norm(a), np.linalg.norm(design.l_hat))
    bad = {k: v for k, v in res.items() if v > tol * scale}
    if bad:
        raise ValueError(f"design invariants violated: {bad}")
    return res


def check_m_relation(
    sys: StateSpaceModel, abstract: StateSpaceModel, m_map, tol: float = 1e-8
) -> MRelationReport:
    """Test whether ``abstract`` mirrors every motion of ``sys`` through m_map.

    Attempts least-squares witnesses n_map, gamma for
    g n_map = m_map a - f m_map and g gamma = m_map b, and checks c = h m_map.
    Refutation is reported, not raised.
    """
    m_map = as_matrix(m_map, "m_map")
    if m_map.shape != (abstract.n, sys.n):
        raise ValueError(f"m_map must be {abstract.n}x{sys.n}, got {m_map.shape}")
    f, g, h = abstract.a, abstract.b, abstract.c
    rhs_n = m_map @ sys.a - f @ m_map
    n_map, *_ = np.linalg.lstsq(g, rhs_n, rcond=None)
    gamma, *_ = np.linalg.lstsq(g, m_map @ sys.b, rcond=None)
    residuals = {
        "state": float(np.linalg.norm(g @ n_map - rhs_n)),
        "input": float(np.linalg.norm(g @ gamma - m_map @ sys.b)),
        "output": float(np.linalg.norm(sys.c - h @ m_map)),
    }
    accepted = all(v <= tol for v in residuals.values())
    return MRelationReport(
        accepted=accepted,
        n_map=n_map if accepted else None,
        gamma=gamma if accepted else None,
        residuals=residuals,
    )


def final_abstraction(design: AbstractionDesign, sys: StateSpaceModel) -> StateSpaceModel:
    """Reduced abstract model (f, m_map b, c p) driven directly by the plant input."""
    return StateSpaceModel(a=design.f, b=design.m_map @ sys.b, c=sys.c @ design.p)
