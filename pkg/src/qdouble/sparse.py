"""Sparse configuration-basis vectors for huge edge Hilbert spaces.

A vector is stored as a matrix of edge digits (one row per basis
configuration with nonzero amplitude) plus the amplitudes.  Stars,
plaquettes, and ribbon operators map single configurations to a handful of
configurations, so states like the frustration-free seed vector or a
ribbon-excited vector keep a support of a few thousand rows even when the
ambient dimension is astronomically large.  Every operator of the term
engine can be applied exactly in this representation; amplitudes only pick
up unit-modulus character values and the term coefficients.
"""

from __future__ import annotations

import numpy as np

from .groups import Group
from .operators import (
    Operator,
    ProductOp,
    ScaledOp,
    SumOp,
    Term,
    TermOp,
    _elem_pow,
)

__all__ = ["SparseState", "sparse_apply"]

PRUNE_TOL = 1e-14


def _eval_form(group: Group, digits: np.ndarray, form: tuple) -> np.ndarray:
    """Packed group value of a holonomy form on each row."""
    mul = group.mul_table()
    acc = np.zeros(digits.shape[0], dtype=np.uint8)
    for edge, c in form:
        d = digits[:, edge]
        if c != 1:
            lut = np.array(
                [_elem_pow(group, g, c) for g in range(group.size)], dtype=np.uint8
            )
            d = lut[d]
        acc = mul[acc, d]
    return acc


class SparseState:
    """A sparse vector over group-valued edge configurations."""

    def __init__(self, group: Group, num_edges: int, digits, amps, merged=False):
        self.group = group
        self.num_edges = num_edges
        self.digits = np.asarray(digits, dtype=np.uint8).reshape(-1, num_edges)
        self.amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        if self.digits.shape[0] != self.amps.shape[0]:
            raise ValueError("row/amplitude count mismatch")
        if not merged:
            self._merge()

    @classmethod
    def basis_state(cls, group: Group, num_edges: int, digits=None) -> "SparseState":
        if digits is None:
            digits = np.zeros((1, num_edges), dtype=np.uint8)
        return cls(group, num_edges, [digits], [1.0], merged=True)

    def _merge(self):
        if self.digits.shape[0] == 0:
            return
        rows, inverse = np.unique(self.digits, axis=0, return_inverse=True)
        amps = np.zeros(rows.shape[0], dtype=np.complex128)
        np.add.at(amps, inverse.ravel(), self.amps)
        keep = np.abs(amps) > PRUNE_TOL * max(1.0, np.abs(amps).max(initial=0.0))
        self.digits = rows[keep]
        self.amps = amps[keep]

    # ---- linear structure ----

    @property
    def n_configs(self) -> int:
        return self.digits.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "SparseState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return SparseState(self.group, self.num_edges, self.digits, self.amps / n, merged=True)

    def scaled(self, a: complex) -> "SparseState":
        return SparseState(self.group, self.num_edges, self.digits, a * self.amps, merged=True)

    def add(self, other: "SparseState") -> "SparseState":
        if other.num_edges != self.num_edges or other.group is not self.group:
            raise ValueError("states live on different spaces")
        return SparseState(
            self.group,
            self.num_edges,
            np.concatenate([self.digits, other.digits], axis=0),
            np.concatenate([self.amps, other.amps]),
        )

    def dot(self, other: "SparseState") -> complex:
        """<self|other> by matching configurations."""
        lookup = {row.tobytes(): i for i, row in enumerate(self.digits)}
        acc = 0.0 + 0.0j
        for j, row in enumerate(other.digits):
            i = lookup.get(row.tobytes())
            if i is not None:
                acc += np.conj(self.amps[i]) * other.amps[j]
        return complex(acc)

    # ---- operator application ----

    def _apply_term(self, term: Term) -> tuple[np.ndarray, np.ndarray]:
        group = self.group
        amps = np.full(self.n_configs, term.coeff, dtype=np.complex128)
        amps *= self.amps
        keep = np.ones(self.n_configs, dtype=bool)
        for form, chi_idx in term.phases:
            vals = group.char_values(group.character_from_index(chi_idx))
            amps = amps * vals[_eval_form(group, self.digits, form)]
        for form, target in term.indicators:
            keep &= _eval_form(group, self.digits, form) == target
        digits = self.digits[keep].copy()
        amps = amps[keep]
        mul = group.mul_table()
        for edge, g in term.shift:
            digits[:, edge] = mul[digits[:, edge], g]
        return digits, amps

    def apply_terms(self, terms) -> "SparseState":
        rows = [np.zeros((0, self.num_edges), dtype=np.uint8)]
        amps = [np.zeros(0, dtype=np.complex128)]
        for term in terms:
            if term.coeff == 0:
                continue
            d, a = self._apply_term(term)
            rows.append(d)
            amps.append(a)
        return SparseState(
            self.group, self.num_edges, np.concatenate(rows, axis=0), np.concatenate(amps)
        )

    def apply(self, op: Operator) -> "SparseState":
        return sparse_apply(op, self)

    def expect(self, op: Operator) -> complex:
        return self.dot(self.apply(op))

    # ---- interop ----

    def to_dense(self, space) -> np.ndarray:
        space.require_dense("sparse state densification")
        v = np.zeros(space.dim, dtype=np.complex128)
        for row, a in zip(self.digits, self.amps):
            v[space.basis_index(row)] += a
        return v

    @classmethod
    def from_dense(cls, space, psi: np.ndarray, tol: float = 1e-14) -> "SparseState":
        idx = np.nonzero(np.abs(psi) > tol)[0]
        digits = np.array([space.config_of(int(i)) for i in idx], dtype=np.uint8)
        return cls(space.group, space.num_edges, digits.reshape(-1, space.num_edges), psi[idx])


def sparse_apply(op: Operator, state: SparseState) -> SparseState:
    """Apply any operator tree to a sparse state, staying sparse throughout."""
    if isinstance(op, TermOp):
        return state.apply_terms(op.terms)
    if isinstance(op, SumOp):
        out = sparse_apply(op.parts[0], state)
        for p in op.parts[1:]:
            out = out.add(sparse_apply(p, state))
        return out
    if isinstance(op, ProductOp):
        out = state
        for f in reversed(op.factors):
            out = sparse_apply(f, out)
        return out
    if isinstance(op, ScaledOp):
        return sparse_apply(op.op, state).scaled(op.scalar)
    raise TypeError(f"cannot apply {type(op).__name__} sparsely")
