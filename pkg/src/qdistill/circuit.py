"""Circuit IR, parametric-layer template registry, binding, and ideal simulation.

A circuit is an ordered gate list over ``n_qubits``.  Gate angles are either
literal floats or :class:`Param` references (affine in one parameter slot so
that transpilation can carry symbolic angles through rewrites).  Gates apply
left to right: the earliest op in the list acts first on the state, i.e. it
is the rightmost factor of the circuit unitary.

Templates are data driven.  The shipped catalog covers the layer
architectures used throughout this package (c1, c2, c6, c9, c12, c15); more
can be registered from a config file without code changes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import qmath
from .gates import ARITY, PARAMETERIZED, GateKind, gate_matrix


@dataclass(frozen=True)
class Param:
    """Affine reference to a free parameter slot: angle = scale*theta + offset."""

    slot: int
    scale: float = 1.0
    offset: float = 0.0

    def value(self, values) -> float:
        return self.scale * float(values[self.slot]) + self.offset


@dataclass(frozen=True)
class Op:
    kind: GateKind
    qubits: tuple
    angle: float | Param | None = None


class Circuit:
    """Immutable ordered gate list over n qubits with symbolic parameters."""

    def __init__(self, n_qubits: int, ops=()):
        if n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        self.n_qubits = int(n_qubits)
        self.ops = tuple(ops)
        slots = set()
        for op in self.ops:
            if any(q < 0 or q >= n_qubits for q in op.qubits):
                raise ValueError(f"qubit index out of range in {op}")
            if len(op.qubits) != ARITY[op.kind]:
                raise ValueError(f"wrong qubit count for {op.kind}")
            if len(op.qubits) == 2 and op.qubits[0] == op.qubits[1]:
                raise ValueError(f"two-qubit op on identical qubits: {op}")
            if op.kind in PARAMETERIZED:
                if op.angle is None:
                    raise ValueError(f"{op.kind} needs an angle or slot")
                if isinstance(op.angle, Param):
                    slots.add(op.angle.slot)
            elif op.angle is not None:
                raise ValueError(f"{op.kind} takes no angle")
        if slots and sorted(slots) != list(range(max(slots) + 1)):
            raise ValueError(f"parameter slots have gaps: {sorted(slots)}")
        self.n_params = (max(slots) + 1) if slots else 0

    @property
    def is_bound(self) -> bool:
        return self.n_params == 0

    def __len__(self):
        return len(self.ops)

    def __repr__(self):
        return f"Circuit(n_qubits={self.n_qubits}, ops={len(self.ops)}, n_params={self.n_params})"


def bind(circuit: Circuit, values) -> Circuit:
    """Replace all parameter slots by literals; the input circuit is unchanged."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size != circuit.n_params:
        raise ValueError(
            f"expected {circuit.n_params} parameter values, got {values.size}")
    ops = [Op(op.kind, op.qubits, op.angle.value(values))
           if isinstance(op.angle, Param) else op
           for op in circuit.ops]
    return Circuit(circuit.n_qubits, ops)


# ---------------------------------------------------------------------------
# Simulation.  States are tensors of shape batch + (2,)*n with qubit q on
# axis (ndim-1-q) so that qubit 0 is the least-significant index bit.

def _axis(n: int, q: int, batch_ndim: int) -> int:
    return batch_ndim + (n - 1 - q)


def _apply_1q(tensor, m, q, n, batch_ndim):
    ax = _axis(n, q, batch_ndim)
    out = np.tensordot(m, tensor, axes=([1], [ax]))
    return np.moveaxis(out, 0, ax)


def _apply_2q(tensor, m4, control, target, n, batch_ndim):
    mt = m4.reshape(2, 2, 2, 2)  # (c', t', c, t)
    axc, axt = _axis(n, control, batch_ndim), _axis(n, target, batch_ndim)
    out = np.tensordot(mt, tensor, axes=([2, 3], [axc, axt]))
    return np.moveaxis(out, [0, 1], [axc, axt])


def _op_matrix(op: Op) -> np.ndarray:
    angle = op.angle
    if isinstance(angle, Param):
        raise ValueError(f"circuit is not fully bound: {op}")
    return gate_matrix(op.kind, angle)


def apply_ops(ops, tensor, n_qubits, batch_ndim=0):
    """Apply bound ops in order to a state tensor (leading axes are batch)."""
    for op in ops:
        m = _op_matrix(op)
        if len(op.qubits) == 1:
            tensor = _apply_1q(tensor, m, op.qubits[0], n_qubits, batch_ndim)
        else:
            tensor = _apply_2q(tensor, m, op.qubits[0], op.qubits[1],
                               n_qubits, batch_ndim)
    return tensor


def simulate(circuit: Circuit, state) -> np.ndarray:
    """Apply the circuit gate-by-gate to a state vector (O(gates * 2^n))."""
    state = qmath.as_state(state)
    n = circuit.n_qubits
    if state.size != 2 ** n:
        raise ValueError(f"state dim {state.size} != 2^{n}")
    tensor = state.reshape((2,) * n)
    tensor = apply_ops(circuit.ops, tensor, n)
    return tensor.reshape(-1)


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(2 ** n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Full 2^n x 2^n unitary; earliest gate is the rightmost matrix factor."""
    n = circuit.n_qubits
    dim = 2 ** n
    # evolve all basis states at once: tensor of shape (2,)*n + (dim,) where
    # the trailing axis indexes the input basis state (matrix column).
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for op in circuit.ops:
        m = _op_matrix(op)
        if len(op.qubits) == 1:
            u = _apply_1q(u, m, op.qubits[0], n, 0)
        else:
            u = _apply_2q(u, m, op.qubits[0], op.qubits[1], n, 0)
    return u.reshape(dim, dim)


def expectation_z(circuit: Circuit, state, qubit: int) -> float:
    """Pauli-Z expectation of one qubit after running the circuit."""
    if not 0 <= qubit < circuit.n_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    out = simulate(circuit, state)
    return z_expectations(out, circuit.n_qubits)[qubit]


def z_expectations(states, n_qubits: int) -> np.ndarray:
    """Per-qubit <Z> for states of shape (..., 2^n); returns (..., n)."""
    states = np.asarray(states)
    batch = states.shape[:-1]
    probs = np.abs(states) ** 2
    probs = probs.reshape(batch + (2,) * n_qubits)
    out = np.empty(batch + (n_qubits,))
    for q in range(n_qubits):
        ax = len(batch) + (n_qubits - 1 - q)
        marg = probs.sum(axis=tuple(a for a in range(len(batch), probs.ndim)
                                    if a != ax))
        out[..., q] = marg[..., 0] - marg[..., 1]
    return out


# ---------------------------------------------------------------------------
# Template registry ("cX" catalog)

def _place_all(n):
    return [(q,) for q in range(n)]


def _place_inner(n):
    return [(q,) for q in range(1, n - 1)]


def _place_chain(n):
    # descending chain: control above target
    return [(i, i - 1) for i in range(n - 1, 0, -1)]


def _place_ring(n):
    return [((i + 1) % n, i) for i in range(n - 1, -1, -1)]


def _place_pairs(n):
    return [(2 * i + 1, 2 * i) for i in range(n // 2)]


def _place_bridge(n):
    return [(2 * i + 2, 2 * i + 1) for i in range((n - 1) // 2)]


def _place_all_to_all(n):
    return [(c, t) for c in range(n - 1, -1, -1)
            for t in range(n - 1, -1, -1) if t != c]


_PLACEMENTS = {
    "all": _place_all,
    "inner": _place_inner,
    "chain": _place_chain,
    "ring": _place_ring,
    "pairs": _place_pairs,
    "bridge": _place_bridge,
    "all_to_all": _place_all_to_all,
}


@dataclass(frozen=True)
class TemplateSpec:
    """Data-driven description of one parametric-layer architecture."""

    id: str
    pattern: tuple  # of (GateKind, placement-name)

    def expand_layer(self, n_qubits: int):
        """Yield (kind, qubits, parameterized) for one layer."""
        for kind, placement in self.pattern:
            for qubits in _PLACEMENTS[placement](n_qubits):
                yield kind, qubits, kind in PARAMETERIZED

    def params_per_layer(self, n_qubits: int) -> int:
        return sum(1 for _, _, p in self.expand_layer(n_qubits) if p)


TEMPLATES: dict[str, TemplateSpec] = {}


def register_template(tid: str, pattern) -> TemplateSpec:
    spec = TemplateSpec(tid, tuple(pattern))
    for _, placement in spec.pattern:
        if placement not in _PLACEMENTS:
            raise ValueError(f"unknown placement {placement!r}")
    TEMPLATES[tid] = spec
    return spec


def build_template(tid: str, n_qubits: int, layers: int) -> Circuit:
    """Build ``layers`` repetitions of a registered layer pattern."""
    if tid not in TEMPLATES:
        raise ValueError(f"unknown template {tid!r}; registered: {sorted(TEMPLATES)}")
    if n_qubits < 2:
        raise ValueError("n_qubits must be >= 2")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    spec = TEMPLATES[tid]
    ops = []
    slot = 0
    for _ in range(layers):
        for kind, qubits, parameterized in spec.expand_layer(n_qubits):
            if parameterized:
                ops.append(Op(kind, qubits, Param(slot)))
                slot += 1
            else:
                ops.append(Op(kind, qubits))
    return Circuit(n_qubits, ops)


_K = GateKind

DEFAULT_TEMPLATE_CONFIG = """\
# Shipped parametric-layer catalog.  One template per line:
#   template <id> : KIND@placement KIND@placement ...
# Placements: all, inner, chain, ring, pairs, bridge, all_to_all
template c1  : RX@all RZ@all
template c2  : RX@all RZ@all CX@chain
template c6  : RX@all RZ@all CRX@all_to_all RX@all RZ@all
template c9  : H@all CZ@chain RX@all
template c12 : RY@all RZ@all CZ@pairs RY@inner RZ@inner CZ@bridge
template c15 : RY@all CX@ring
"""


def load_template_config(text: str) -> None:
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("template "):
            raise ValueError(f"template config line {lineno}: expected 'template'")
        head, body = line[len("template "):].split(":", 1)
        pattern = []
        for item in body.split():
            kind_s, placement = item.split("@")
            pattern.append((GateKind(kind_s), placement))
        register_template(head.strip(), pattern)


load_template_config(DEFAULT_TEMPLATE_CONFIG)


# ---------------------------------------------------------------------------
# Line-oriented text serialization: `GATE q0[,q1] [angle|@slot[*scale][+offset]]`

def op_to_text(op: Op) -> str:
    parts = [op.kind.value, ",".join(str(q) for q in op.qubits)]
    if isinstance(op.angle, Param):
        token = f"@{op.angle.slot}"
        if op.angle.scale != 1.0:
            token += f"*{op.angle.scale!r}"
        if op.angle.offset != 0.0:
            sign = "+" if op.angle.offset >= 0 else "-"
            token += sign + repr(abs(op.angle.offset))
        parts.append(token)
    elif op.angle is not None:
        parts.append(repr(float(op.angle)))
    return " ".join(parts)


def to_text(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.n_qubits}"]
    lines += [op_to_text(op) for op in circuit.ops]
    return "\n".join(lines) + "\n"


_NUM = r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
_SLOT_TOKEN = re.compile(
    rf"@(?P<slot>\d+)(?:\*(?P<scale>{_NUM}))?(?:(?P<sign>[-+])(?P<offset>{_NUM}))?")


def _parse_angle_token(token: str):
    if token.startswith("@"):
        m = _SLOT_TOKEN.fullmatch(token)
        if not m:
            raise ValueError(f"bad parameter token {token!r}")
        offset = float(m.group("offset")) if m.group("offset") else 0.0
        if m.group("sign") == "-":
            offset = -offset
        return Param(int(m.group("slot")),
                     float(m.group("scale")) if m.group("scale") else 1.0,
                     offset)
    return float(token)


def from_text(text: str) -> Circuit:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("qubits "):
        raise ValueError("circuit text must start with 'qubits N'")
    n = int(lines[0].split()[1])
    ops = []
    for ln in lines[1:]:
        parts = ln.split()
        kind = GateKind(parts[0])
        qubits = tuple(int(q) for q in parts[1].split(","))
        angle = _parse_angle_token(parts[2]) if len(parts) > 2 else None
        ops.append(Op(kind, qubits, angle))
    return Circuit(n, ops)
