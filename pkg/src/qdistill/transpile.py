"""Lowering of circuits to a basis gate set, plus depth/gate-count metrics.

Depth is the number of moments under greedy ASAP layering: a gate enters the
earliest moment in which all of its qubits are free.  No commutation-aware
scheduling and no routing (all-to-all coupling is assumed).

``lower`` preserves free parameters symbolically: rewrite rules are affine in
the source angle, so a slot reference passes through as ``slot*scale+offset``.
The optional ``merge_1q`` pass collapses runs of adjacent literal single-qubit
gates into a minimal native Euler sequence (and coalesces same-axis rotations,
which also works on symbolic angles).  It is applied after lowering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gates
from .circuit import Circuit, Op, Param
from .gates import ARITY, PARAMETERIZED, GateKind, gate_matrix, get_basis

_TOL = 1e-12


@dataclass(frozen=True)
class CompileReport:
    basis: str
    depth: int
    total_gates: int
    gates_1q: int
    gates_2q: int


def metrics(circuit: Circuit, basis: str = "") -> CompileReport:
    frontier = [0] * circuit.n_qubits
    g1 = g2 = 0
    for op in circuit.ops:
        moment = max(frontier[q] for q in op.qubits) + 1
        for q in op.qubits:
            frontier[q] = moment
        if len(op.qubits) == 1:
            g1 += 1
        else:
            g2 += 1
    depth = max(frontier) if frontier else 0
    return CompileReport(basis, depth, g1 + g2, g1, g2)


def _rule_angle(rg: gates.RuleGate, angle):
    if rg.kind not in PARAMETERIZED:
        return None
    if isinstance(angle, Param):
        return Param(angle.slot, rg.scale * angle.scale,
                     rg.scale * angle.offset + rg.offset)
    a = 0.0 if angle is None else float(angle)
    return rg.scale * a + rg.offset


def _expand_op(kind, qubits, angle, basis, depth=0):
    if depth > 8:
        raise ValueError(f"decomposition of {kind} does not terminate")
    if kind in basis:
        return [Op(kind, qubits, angle)]
    rule = gates.get_rule(kind, basis.name)
    if rule is None:
        raise ValueError(
            f"no decomposition rule for gate {kind} into basis {basis.name}")
    out = []
    for rg in rule:
        if len(qubits) == 1:
            sub_qubits = qubits
        elif len(rg.roles) == 1:
            sub_qubits = (qubits[0],) if rg.roles[0] == "c" else (qubits[1],)
        else:
            sub_qubits = tuple(qubits[0] if r == "c" else qubits[1]
                               for r in rg.roles)
        out.extend(_expand_op(rg.kind, sub_qubits, _rule_angle(rg, angle),
                              basis, depth + 1))
    return out


def lower(circuit: Circuit, basis, merge_1q: bool = False) -> Circuit:
    """Rewrite all gates into basis gates, preserving unitary up to phase."""
    basis = get_basis(basis)
    ops = []
    for op in circuit.ops:
        ops.extend(_expand_op(op.kind, op.qubits, op.angle, basis))
    if merge_1q:
        ops = _merge_1q_runs(ops, circuit.n_qubits, basis)
    return Circuit(circuit.n_qubits, ops)


# ---------------------------------------------------------------------------
# Single-qubit run merging

_AXIS_OF = {GateKind.RX: "x", GateKind.RY: "y", GateKind.RZ: "z"}


def _zyz_angles(u: np.ndarray):
    """(theta, phi, lam) with u ~ RZ(phi) RY(theta) RZ(lam) up to phase."""
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    su = u / np.sqrt(det)
    theta = 2.0 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    if abs(su[0, 0]) < 1e-9:
        return theta, 2.0 * np.angle(su[1, 0]), 0.0
    if abs(su[1, 0]) < 1e-9:
        return theta, 2.0 * np.angle(su[1, 1]), 0.0
    ang_sum = 2.0 * np.angle(su[1, 1])
    ang_dif = 2.0 * np.angle(su[1, 0])
    return theta, (ang_sum + ang_dif) / 2.0, (ang_sum - ang_dif) / 2.0


def _is_zero_angle(a: float) -> bool:
    return abs(math.remainder(a, 2.0 * math.pi)) < 1e-9


def _euler_native(u: np.ndarray, basis) -> list[Op] | None:
    """Minimal native 1q sequence for a literal 2x2 unitary (qubit filled later)."""
    theta, phi, lam = _zyz_angles(u)
    half = math.pi / 2
    rz_ok = GateKind.RZ in basis

    def rz(a):
        return [] if _is_zero_angle(a) else [Op(GateKind.RZ, (0,), a)]

    if abs(math.sin(theta / 2.0)) < 1e-9 and rz_ok:
        return rz(phi + lam)
    if GateKind.RX in basis and rz_ok:
        # ZXZ: RZ(phi+pi/2) RX(theta) RZ(lam-pi/2)
        return rz(lam - half) + [Op(GateKind.RX, (0,), theta)] + rz(phi + half)
    if GateKind.SX in basis and rz_ok:
        if abs(theta - half) < 1e-9:
            return rz(lam - half) + [Op(GateKind.SX, (0,))] + rz(phi + half)
        return (rz(lam) + [Op(GateKind.SX, (0,))] + rz(theta + math.pi)
                + [Op(GateKind.SX, (0,))] + rz(phi + math.pi))
    return None


def _coalesce_rotations(run: list[Op]) -> list[Op]:
    """Merge adjacent same-axis rotations; supports symbolic angles."""
    out: list[Op] = []
    for op in run:
        if op.kind is GateKind.ID:
            continue
        prev = out[-1] if out else None
        if (prev is not None and op.kind is prev.kind
                and op.kind in _AXIS_OF):
            a, b = prev.angle, op.angle
            merged = None
            if isinstance(a, Param) and isinstance(b, Param):
                if a.slot == b.slot:
                    merged = Param(a.slot, a.scale + b.scale, a.offset + b.offset)
            elif isinstance(a, Param):
                merged = Param(a.slot, a.scale, a.offset + float(b))
            elif isinstance(b, Param):
                merged = Param(b.slot, b.scale, b.offset + float(a))
            else:
                merged = float(a) + float(b)
            if merged is not None:
                out.pop()
                if not (isinstance(merged, float) and _is_zero_angle(merged)):
                    out.append(Op(op.kind, op.qubits, merged))
                continue
        if isinstance(op.angle, float) and op.kind in _AXIS_OF and _is_zero_angle(op.angle):
            continue
        out.append(op)
    return out


def _resynthesize_run(run: list[Op], basis) -> list[Op]:
    run = _coalesce_rotations(run)
    if not run:
        return []
    qubit = run[0].qubits[0]
    out: list[Op] = []
    segment: list[Op] = []

    def flush_segment():
        nonlocal segment
        if not segment:
            return
        if len(segment) >= 2:
            u = np.eye(2, dtype=complex)
            for op in segment:
                u = gate_matrix(op.kind, op.angle) @ u
            native = _euler_native(u, basis)
            if native is not None and len(native) <= len(segment):
                segment = [Op(op.kind, (qubit,), op.angle) for op in native]
        out.extend(segment)
        segment = []

    for op in run:
        if isinstance(op.angle, Param):
            flush_segment()
            out.append(op)
        else:
            segment.append(op)
    flush_segment()
    return out


def _merge_1q_runs(ops, n_qubits: int, basis):
    buffers: dict[int, list[Op]] = {q: [] for q in range(n_qubits)}
    out: list[Op] = []

    def flush(q):
        if buffers[q]:
            out.extend(_resynthesize_run(buffers[q], basis))
            buffers[q] = []

    for op in ops:
        if len(op.qubits) == 1:
            buffers[op.qubits[0]].append(op)
        else:
            for q in op.qubits:
                flush(q)
            out.append(op)
    for q in range(n_qubits):
        flush(q)
    return out


# ---------------------------------------------------------------------------
# Overhead analysis table

def _generic_binding(n_params: int) -> np.ndarray:
    # fixed angles, no special values, so Euler merging sees generic rotations
    return 0.31 + 0.137 * np.arange(n_params)


def overhead_table(template_ids, basis_list, n_qubits: int,
                   merge_1q: bool = True) -> list[dict]:
    """One row per (template, basis): depth and gate counts of a single layer.

    Templates are bound at fixed generic angles before lowering so that the
    merge pass can fully resynthesize single-qubit runs, mirroring what a
    production compiler does to concrete circuits.
    """
    from .circuit import bind, build_template

    rows = []
    for tid in template_ids:
        tpl = build_template(tid, n_qubits, 1)
        bound = bind(tpl, _generic_binding(tpl.n_params))
        for basis_name in basis_list:
            lowered = lower(bound, basis_name, merge_1q=merge_1q)
            rep = metrics(lowered, str(basis_name))
            rows.append({"template": tid, "basis": str(basis_name),
                         "depth": rep.depth, "total": rep.total_gates,
                         "g1q": rep.gates_1q, "g2q": rep.gates_2q})
    return rows


def overhead_csv(rows, provenance: str = "") -> str:
    lines = []
    if provenance:
        lines.append(f"# {provenance}")
    lines.append("template,basis,depth,total,g1q,g2q")
    for r in rows:
        lines.append(f"{r['template']},{r['basis']},{r['depth']},"
                     f"{r['total']},{r['g1q']},{r['g2q']}")
    return "\n".join(lines) + "\n"
