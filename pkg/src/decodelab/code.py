"""Planar surface-code geometry, Pauli operators, syndromes, and logical verdicts.

The distance-L code lives on a (2L-1) x (2L-1) grid. Cells with r+c even hold
data qubits; cells with r odd / c even hold vertex (X-type) stabilizers and
cells with r even / c odd hold face (Z-type) stabilizers. Syndrome bit order
is all X-stabilizers in row-major grid order followed by all Z-stabilizers in
row-major grid order.

Pauli operators are stored as two qubit-index bitmasks (X part, Z part);
Y means both bits set. Phases are dropped throughout: only commutation
classes matter for decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PAULI_CHARS = ("I", "X", "Y", "Z")


class SyndromeMismatchError(Exception):
    """A recovery operator failed to reproduce the syndrome it was asked to clear."""


@dataclass(frozen=True)
class PauliOperator:
    """Phase-free n-qubit Pauli, encoded as X/Z bitmasks over qubit indices."""

    xmask: int = 0
    zmask: int = 0

    @classmethod
    def from_map(cls, paulis: dict[int, str]) -> "PauliOperator":
        xm = zm = 0
        for q, p in paulis.items():
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            bit = 1 << q
            if p == "X":
                xm |= bit
            elif p == "Z":
                zm |= bit
            elif p == "Y":
                xm |= bit
                zm |= bit
            elif p != "I":
                raise ValueError(f"unknown Pauli {p!r} on qubit {q}")
        return cls(xm, zm)

    @classmethod
    def single(cls, qubit: int, pauli: str) -> "PauliOperator":
        return cls.from_map({qubit: pauli})

    def to_map(self) -> dict[int, str]:
        out = {}
        both = self.xmask | self.zmask
        q = 0
        while both >> q:
            bit = 1 << q
            if both & bit:
                x, z = bool(self.xmask & bit), bool(self.zmask & bit)
                out[q] = "Y" if (x and z) else ("X" if x else "Z")
            q += 1
        return out

    def weight(self) -> int:
        return (self.xmask | self.zmask).bit_count()

    def is_identity(self) -> bool:
        return self.xmask == 0 and self.zmask == 0

    def max_qubit(self) -> int:
        """Largest touched qubit index, or -1 for the identity."""
        both = self.xmask | self.zmask
        return both.bit_length() - 1


def compose(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Componentwise Pauli product with phases discarded (an involution)."""
    return PauliOperator(a.xmask ^ b.xmask, a.zmask ^ b.zmask)


def _grid_neighbors(r: int, c: int, side: int) -> list[tuple[int, int]]:
    cand = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
    return [(rr, cc) for rr, cc in cand if 0 <= rr < side and 0 <= cc < side]


@dataclass(frozen=True)
class CodeLayout:
    """Immutable distance-L surface-code geometry; safe to share across workers."""

    distance: int
    grid_side: int
    data_qubits: tuple[tuple[int, int], ...]
    x_stabilizers: tuple[tuple[int, int], ...]
    z_stabilizers: tuple[tuple[int, int], ...]
    x_supports: tuple[tuple[int, ...], ...]
    z_supports: tuple[tuple[int, ...], ...]
    logical_x_support: tuple[int, ...]
    logical_z_support: tuple[int, ...]
    # Bitmask mirrors of the supports, used on every hot path.
    x_support_masks: tuple[int, ...] = field(repr=False)
    z_support_masks: tuple[int, ...] = field(repr=False)
    logical_x_mask: int = field(repr=False)
    logical_z_mask: int = field(repr=False)
    qubit_index: dict[tuple[int, int], int] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.data_qubits)

    @property
    def m(self) -> int:
        return len(self.x_stabilizers) + len(self.z_stabilizers)

    @property
    def total_cells(self) -> int:
        return self.grid_side * self.grid_side

    def stabilizer_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """(Hx, Hz) 0/1 support matrices: Hx flags Z components, Hz flags X components."""
        hx = np.zeros((len(self.x_stabilizers), self.n), dtype=np.uint8)
        hz = np.zeros((len(self.z_stabilizers), self.n), dtype=np.uint8)
        for i, sup in enumerate(self.x_supports):
            hx[i, list(sup)] = 1
        for i, sup in enumerate(self.z_supports):
            hz[i, list(sup)] = 1
        return hx, hz

    def check_mask(self, op: PauliOperator) -> None:
        if op.max_qubit() >= self.n:
            raise ValueError(
                f"operator touches qubit {op.max_qubit()}, layout has {self.n} qubits"
            )


def build_layout(distance: int) -> CodeLayout:
    """Construct the distance-L layout. Deterministic; rejects distance < 2."""
    if distance < 2:
        raise ValueError(f"distance must be >= 2, got {distance}")
    side = 2 * distance - 1

    data = [(r, c) for r in range(side) for c in range(side) if (r + c) % 2 == 0]
    qidx = {rc: i for i, rc in enumerate(data)}

    xstabs = [(r, c) for r in range(side) for c in range(side) if r % 2 == 1 and c % 2 == 0]
    zstabs = [(r, c) for r in range(side) for c in range(side) if r % 2 == 0 and c % 2 == 1]

    def support(rc):
        return tuple(qidx[n] for n in _grid_neighbors(*rc, side) if n in qidx)

    xsup = tuple(support(rc) for rc in xstabs)
    zsup = tuple(support(rc) for rc in zstabs)

    def mask(indices):
        m = 0
        for q in indices:
            m |= 1 << q
        return m

    # Representative logicals: X along row 0, Z along column 0. Any homology
    # representative works; this fixed pair keeps tests deterministic.
    log_x = tuple(qidx[(0, c)] for c in range(0, side, 2))
    log_z = tuple(qidx[(r, 0)] for r in range(0, side, 2))

    return CodeLayout(
        distance=distance,
        grid_side=side,
        data_qubits=tuple(data),
        x_stabilizers=tuple(xstabs),
        z_stabilizers=tuple(zstabs),
        x_supports=xsup,
        z_supports=zsup,
        logical_x_support=log_x,
        logical_z_support=log_z,
        x_support_masks=tuple(mask(s) for s in xsup),
        z_support_masks=tuple(mask(s) for s in zsup),
        logical_x_mask=mask(log_x),
        logical_z_mask=mask(log_z),
        qubit_index=qidx,
    )


def extract_syndrome(layout: CodeLayout, error: PauliOperator) -> np.ndarray:
    """Length-m 0/1 vector: X-stabilizer flips first, then Z-stabilizer flips.

    X-stabilizers flag Z/Y components, Z-stabilizers flag X/Y components;
    one perfect measurement round (code-capacity model).
    """
    layout.check_mask(error)
    m = layout.m
    s = np.zeros(m, dtype=np.uint8)
    zm, xm = error.zmask, error.xmask
    for i, sup in enumerate(layout.x_support_masks):
        s[i] = (zm & sup).bit_count() & 1
    off = len(layout.x_support_masks)
    for i, sup in enumerate(layout.z_support_masks):
        s[off + i] = (xm & sup).bit_count() & 1
    return s


def syndrome_defects(layout: CodeLayout, s: np.ndarray) -> tuple[list[int], list[int]]:
    """Indices of flipped X-stabilizers and flipped Z-stabilizers (segment-local)."""
    if len(s) != layout.m:
        raise ValueError(f"syndrome length {len(s)} != m = {layout.m}")
    half = len(layout.x_stabilizers)
    xd = [i for i in range(half) if s[i]]
    zd = [i for i in range(half, layout.m) if s[i]]
    return xd, [i - half for i in zd]


def logical_parities(layout: CodeLayout, op: PauliOperator) -> tuple[int, int]:
    """(a, b): a = X part vs logical-Z overlap parity, b = Z part vs logical-X."""
    a = (op.xmask & layout.logical_z_mask).bit_count() & 1
    b = (op.zmask & layout.logical_x_mask).bit_count() & 1
    return a, b


def logical_outcome(layout: CodeLayout, error: PauliOperator, recovery: PauliOperator) -> str:
    """Classify recovery*error as I, X, Y or Z on the encoded qubit.

    Raises SyndromeMismatchError when the residual has a nonzero syndrome,
    i.e. the recovery did not reproduce the error's syndrome -- a broken
    decoder, not a logical error.
    """
    residual = compose(recovery, error)
    syn = extract_syndrome(layout, residual)
    if syn.any():
        raise SyndromeMismatchError(
            f"residual has {int(syn.sum())} nonzero syndrome bits; "
            "recovery does not match the error syndrome"
        )
    a, b = logical_parities(layout, residual)
    if a and b:
        return "Y"
    if a:
        return "X"
    if b:
        return "Z"
    return "I"
