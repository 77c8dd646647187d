"""Ground spaces, low-lying spectra, and charge-sector decompositions.

Three independent routes to the ground space are provided and cross-checked
by the test battery:

* dense diagonalization of the full Hamiltonian (small spaces);
* the image of the commuting-projector product applied to seed vectors,
  with toroidal winding representatives to reach every flux sector;
* a counting argument: the trace of the ground projector counts flat
  configurations weighted by the gauge average, giving |G|^2 on a torus
  and |G|^(mn - 1 - #interior) on a free m x n patch.

Mid-size spectra come from block subspace iteration on sigma*I - H with
Rayleigh-Ritz extraction; the routine refuses to return unconverged data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import Operator, QuantumDouble, TermOp

__all__ = [
    "EigenBasis",
    "ground_dimension_count",
    "ground_space",
    "spectrum_lowest",
    "subspace_iteration",
    "sector_dimensions",
    "rayleigh",
]

KERNEL_TOL = 1e-8
DENSE_EIG_LIMIT = 8192


@dataclass
class EigenBasis:
    """Orthonormal columns spanning an (approximate) invariant subspace."""

    vectors: np.ndarray  # (dim, k)
    values: np.ndarray  # (k,)
    residuals: np.ndarray  # (k,) column-wise ||H v - lambda v||
    method: str
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def ground_dimension_count(group, region) -> int:
    """Ground-space dimension from the trace of the ground projector.

    tr prod_v A_v prod_f B_f picks out the gauge patterns with no net edge
    shift (only the identity on a free patch, the |G| constants on a torus)
    against the count of flat configurations (q^(V-1) free, q^(V+1) torus,
    by the potential parametrization and, on the torus, two winding degrees
    of freedom)."""
    q = group.size
    nv = region.m * region.n
    if region.is_torus:
        return q * q ** (nv + 1) // q**nv
    n_interior = len(region.interior_vertices())
    return q ** (nv - 1) // q**n_interior


def rayleigh(op: Operator, psi: np.ndarray) -> tuple[float, float]:
    """(<psi|H|psi>, ||(H - <H>) psi||) for a normalized vector."""
    hpsi = op.apply(psi)
    val = np.vdot(psi, hpsi)
    res = np.linalg.norm(hpsi - val * psi)
    return float(val.real), float(res)


def _dense_eigh(op: Operator) -> tuple[np.ndarray, np.ndarray]:
    dim = op.space.dim
    if dim > DENSE_EIG_LIMIT:
        raise ValueError(f"dense diagonalization capped at {DENSE_EIG_LIMIT}, got {dim}")
    mat = op.to_dense(max_dim=DENSE_EIG_LIMIT)
    return np.linalg.eigh(mat)


def _winding_seed_configs(model: QuantumDouble):
    """One flat configuration per flux sector of a torus."""
    region, group = model.region, model.group
    seeds = []
    for a in range(group.size):
        for b in range(group.size):
            digits = [0] * region.num_edges
            for j in range(region.n):
                digits[region.edge_id(("h", 0, j))] = a
            for i in range(region.m):
                digits[region.edge_id(("v", i, 0))] = b
            seeds.append(digits)
    return seeds


def _projector_ground_basis(
    model: QuantumDouble, rng: np.random.Generator, tol: float
) -> EigenBasis:
    space = model.space
    expected = ground_dimension_count(model.group, model.region)
    n_seeds = expected + max(4, expected // 8)
    budget = space.dim * n_seeds * 16
    if budget > 4_000_000_000:
        raise MemoryError(
            f"projector ground basis would need about {budget / 1e9:.1f} GB"
        )
    cols = [space.random_vectors(rng, n_seeds)]
    if model.region.is_torus:
        winding = np.zeros((space.dim, model.group.size ** 2), dtype=complex)
        for k, digs in enumerate(_winding_seed_configs(model)):
            winding[space.basis_index(digs), k] = 1.0
        cols.append(winding)
    y = np.concatenate(cols, axis=1)
    for p in model.ground_projector_factors():
        y = p.apply(y)
    u, s, _ = np.linalg.svd(y, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1.0)))
    vectors = u[:, :rank]
    h = model.hamiltonian()
    hv = h.apply(vectors)
    residuals = np.linalg.norm(hv, axis=0)
    return EigenBasis(
        vectors=vectors,
        values=np.zeros(rank),
        residuals=residuals,
        method="projector",
        meta={"expected_dimension": expected, "singular_values": s[: rank + 3]},
    )


def ground_space(
    model: QuantumDouble,
    method: str = "auto",
    rng: np.random.Generator | None = None,
    tol: float = KERNEL_TOL,
) -> EigenBasis:
    """Orthonormal basis of the kernel of the Hamiltonian."""
    rng = rng if rng is not None else np.random.default_rng(7)
    if method == "auto":
        method = "dense" if model.space.dim <= DENSE_EIG_LIMIT else "projector"
    if method == "dense":
        vals, vecs = _dense_eigh(model.hamiltonian())
        keep = vals < tol
        basis = vecs[:, keep]
        return EigenBasis(
            vectors=basis,
            values=vals[keep],
            residuals=np.abs(vals[keep]),
            method="dense",
            meta={"low_spectrum": vals[: min(16, len(vals))]},
        )
    if method == "projector":
        return _projector_ground_basis(model, rng, tol)
    if method == "iterative":
        expected = ground_dimension_count(model.group, model.region)
        basis = subspace_iteration(model.hamiltonian(), expected + 2, rng, tol=tol)
        keep = basis.values < tol
        return EigenBasis(
            basis.vectors[:, keep],
            basis.values[keep],
            basis.residuals[keep],
            "iterative",
            meta=basis.meta,
        )
    raise ValueError(f"unknown ground space method {method!r}")


def _operator_norm_bound(op: TermOp) -> float:
    # every term factors as scalar x unit-modulus diagonals x permutation
    return float(sum(abs(t.coeff) for t in op.terms))


def subspace_iteration(
    op: TermOp,
    k: int,
    rng: np.random.Generator,
    tol: float = 1e-9,
    max_iter: int = 2000,
    sigma: float | None = None,
) -> EigenBasis:
    """Lowest k eigenpairs of a nonnegative operator by block iteration.

    Iterates the block through sigma*I - H (sigma an upper spectral bound),
    orthonormalizes, and extracts Ritz pairs until the eigen-residuals of
    the k wanted pairs drop below tol * sigma.  Raises if that never
    happens; unconverged output is never returned.
    """
    space = op.space
    if sigma is None:
        sigma = _operator_norm_bound(op) + 1.0
    block = min(k + 4, space.dim)
    q, _ = np.linalg.qr(space.random_vectors(rng, block))
    last = None
    for it in range(max_iter):
        hq = op.apply(q)
        y = sigma * q - hq
        q, _ = np.linalg.qr(y)
        if it % 5 == 4 or it == max_iter - 1:
            hq = op.apply(q)
            t = q.conj().T @ hq
            t = 0.5 * (t + t.conj().T)
            vals, rots = np.linalg.eigh(t)
            q = q @ rots
            hq = hq @ rots
            resid = np.linalg.norm(hq - q * vals[None, :], axis=0)
            if np.all(resid[:k] < tol * sigma):
                return EigenBasis(
                    vectors=q[:, :k],
                    values=vals[:k],
                    residuals=resid[:k],
                    method="iterative",
                    meta={"iterations": it + 1, "sigma": sigma},
                )
            last = (vals[:k], resid[:k])
    raise RuntimeError(
        f"subspace iteration did not converge in {max_iter} iterations; "
        f"last values {last[0] if last else None}, residuals {last[1] if last else None}"
    )


def spectrum_lowest(
    model: QuantumDouble,
    k: int,
    boundary: str = "none",
    rng: np.random.Generator | None = None,
    tol: float = 1e-9,
) -> EigenBasis:
    """The k lowest eigenvalues of the Hamiltonian, with residuals."""
    rng = rng if rng is not None else np.random.default_rng(7)
    h = model.hamiltonian(boundary=boundary)
    if model.space.dim <= DENSE_EIG_LIMIT:
        vals, vecs = _dense_eigh(h)
        k = min(k, len(vals))
        basis = vecs[:, :k]
        hv = h.apply(basis)
        resid = np.linalg.norm(hv - basis * vals[None, :k], axis=0)
        return EigenBasis(basis, vals[:k], resid, "dense")
    return subspace_iteration(h, k, rng, tol=tol)


def sector_dimensions(
    model: QuantumDouble, basis: np.ndarray, validate: bool = True
) -> dict[tuple[int, int], int]:
    """Dimension of each (charge, flux) sector inside span(basis).

    Computes tr(K* P_{chi,c} K) for the orthonormal columns K; when
    `validate`, additionally checks the compressed projector has eigenvalues
    0/1 and that the sector dimensions resolve the whole span.
    """
    q = model.group.size
    out: dict[tuple[int, int], int] = {}
    total = 0
    for chi in range(q):
        charge = model.total_charge_projector(chi)
        kc = charge.apply(basis)
        for c in range(q):
            flux = model.total_flux_projector(c)
            m = basis.conj().T @ flux.apply(kc)
            tr = float(np.trace(m).real)
            d = int(round(tr))
            if abs(tr - d) > 1e-6:
                raise RuntimeError(f"sector trace {tr} for {(chi, c)} is not integral")
            if validate and d:
                evs = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
                if not np.all((np.abs(evs) < 1e-7) | (np.abs(evs - 1) < 1e-7)):
                    raise RuntimeError(
                        f"sector projector for {(chi, c)} is not 0/1 on the span"
                    )
            out[(chi, c)] = d
            total += d
    if validate and total != basis.shape[1]:
        raise RuntimeError(
            f"sector dimensions add to {total}, expected {basis.shape[1]}"
        )
    return out
