"""Approximate unitary synthesis by generalized simulated annealing.

The distillation core: a student circuit's parameters are optimized so that
its unitary mimics a frozen teacher unitary under the Hilbert-Schmidt
distance d = 1 - |Tr(U^dag V)| / N.  The modulus in the cost makes it real,
bounded in [0, 1], and invariant under global phase; d = 0 exactly when the
student matches the teacher up to phase.

The global optimizer is a from-scratch generalized simulated annealing
(GSA) chain: heavy-tailed Tsallis visiting moves, the generalized Metropolis
acceptance rule, a power-law temperature schedule, and full restarts when the
temperature collapses.  The shipped defaults are initial_temp 5230.0,
restart_temp_ratio 2e-5, visit 2.62, accept -5.0.  An optional Nelder-Mead
polish runs from the best point afterwards; its evaluations are capped so the
total stays within budget + 200.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .circuit import Circuit, Param, bind, build_template, unitary_of
from .gates import PARAMETERIZED, GateKind, gate_matrix
from .qmath import as_matrix, hs_trace_overlap, is_unitary

TAIL_LIMIT = 1e8
_EYE2 = np.eye(2, dtype=complex)
_CONTROLLED_KINDS = frozenset({GateKind.CRX, GateKind.CRY, GateKind.CRZ})
_MIN_VISIT_BOUND = 1e-10
POLISH_ALLOWANCE = 200


def hs_distance(u, v) -> float:
    """Normalized Hilbert-Schmidt distance, 1 - |Tr(U^dag V)|/N."""
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if not (is_unitary(u) and is_unitary(v)):
        raise ValueError("hs_distance expects unitary matrices")
    return 1.0 - abs(hs_trace_overlap(u, v)) / u.shape[0]


@dataclass
class SynthesisProblem:
    teacher_unitary: np.ndarray
    student: Circuit
    bounds: np.ndarray = None   # (n_params, 2), default [-pi, pi]
    budget: int = 1000
    state_prep: bool = False    # match only the action on |0...0>, not all of U

    def __post_init__(self):
        self.teacher_unitary = as_matrix(self.teacher_unitary)
        dim = 2 ** self.student.n_qubits
        if self.teacher_unitary.shape != (dim, dim):
            raise ValueError(
                f"teacher is {self.teacher_unitary.shape}, student acts on "
                f"{self.student.n_qubits} qubits (dim {dim})")
        if not is_unitary(self.teacher_unitary):
            raise ValueError("teacher matrix is not unitary")
        n = self.student.n_params
        if self.bounds is None:
            self.bounds = np.tile([-math.pi, math.pi], (n, 1))
        else:
            self.bounds = np.asarray(self.bounds, float).reshape(n, 2)
        if np.any(self.bounds[:, 0] >= self.bounds[:, 1]) and n:
            raise ValueError("each bound must satisfy lower < upper")
        if self.budget < 1:
            raise ValueError("budget must be positive")


@dataclass
class AnnealConfig:
    initial_temp: float = 5230.0
    restart_temp_ratio: float = 2e-5
    visit: float = 2.62
    accept: float = -5.0
    seed: int = 0
    local_polish: bool = True
    converge_threshold: float = 0.05
    anneal_fraction: float = 0.6   # share of the budget before polish kicks in
    polish_method: str = "nelder-mead"

    def __post_init__(self):
        if self.polish_method.lower() not in ("nelder-mead", "powell", "lbfgs",
                                              "grad-lbfgs", "rotation-solve"):
            raise ValueError("polish_method must be nelder-mead, powell, "
                             "lbfgs, grad-lbfgs, or rotation-solve")
        if not 0 < self.restart_temp_ratio < 1:
            raise ValueError("restart_temp_ratio must lie in (0, 1)")
        if not 1 < self.visit <= 3:
            raise ValueError("visit must lie in (1, 3]")
        if self.accept >= 0:
            raise ValueError("accept must be negative")
        if not 0 < self.anneal_fraction <= 1:
            raise ValueError("anneal_fraction must lie in (0, 1]")


@dataclass
class SynthesisResult:
    theta_star: np.ndarray
    distance: float
    evaluations: int
    trace_of_best: complex
    converged: bool
    seed: int = 0
    improvements: list = field(default_factory=list)  # (evaluation, distance)


class _CompiledCircuit:
    """Fast dense-unitary evaluator for a fixed circuit structure.

    Consecutive single-qubit gates fuse into one kron-built matrix and
    parameter-free segments are precomputed, so each evaluation costs a
    handful of dim x dim matmuls instead of one tensor contraction per gate.
    """

    def __init__(self, circuit: Circuit):
        self.n = circuit.n_qubits
        self.dim = 2 ** self.n
        self.segments = []   # ('const', M) or ('1q', per-qubit op lists) or ('2q', ...)
        run_1q = None

        def flush_1q():
            nonlocal run_1q
            if run_1q is not None:
                if any(any(isinstance(a, Param) for _, a in ops)
                       for ops in run_1q):
                    self.segments.append(("1q", run_1q))
                else:
                    self._push_const(self._kron_1q(run_1q, None))
                run_1q = None

        for op in circuit.ops:
            if len(op.qubits) == 1:
                if run_1q is None:
                    run_1q = [[] for _ in range(self.n)]
                run_1q[op.qubits[0]].append((op.kind, op.angle))
            else:
                flush_1q()
                embed = self._embedding(op.qubits)
                if isinstance(op.angle, Param):
                    self.segments.append(("2q", op.kind, op.angle, embed))
                else:
                    self._push_const(self._embed_2q(
                        gate_matrix(op.kind, op.angle), embed))
        flush_1q()

    def _push_const(self, m):
        if self.segments and self.segments[-1][0] == "const":
            self.segments[-1] = ("const", m @ self.segments[-1][1])
        else:
            self.segments.append(("const", m))

    @staticmethod
    def _kron(a, b):
        # broadcasting kron; much cheaper than np.kron for small factors
        ra, ca = a.shape
        rb, cb = b.shape
        return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb,
                                                                   ca * cb)

    def _kron_1q(self, per_qubit, theta):
        m = None
        for q in range(self.n - 1, -1, -1):
            g = _EYE2
            for kind, angle in per_qubit[q]:
                if isinstance(angle, Param):
                    angle = angle.value(theta)
                g = gate_matrix(kind, angle) @ g
            m = g if m is None else self._kron(m, g)
        return m

    def _embedding(self, qubits):
        c, t = qubits
        b = np.arange(self.dim)
        local_in = (((b >> c) & 1) << 1) | ((b >> t) & 1)
        stripped = b & ~((1 << c) | (1 << t))
        out = np.arange(4)
        rows = (stripped[:, None] | ((out[None, :] >> 1) << c)
                | ((out[None, :] & 1) << t))
        return rows, local_in

    def _embed_2q(self, g, embed):
        rows, local_in = embed
        full = np.zeros((self.dim, self.dim), dtype=complex)
        cols = np.repeat(np.arange(self.dim), 4)
        full[rows.ravel(), cols] = g[:, local_in].T.ravel()
        return full

    def unitary(self, theta):
        u = np.eye(self.dim, dtype=complex)
        for seg in self.segments:
            if seg[0] == "const":
                u = seg[1] @ u
            elif seg[0] == "1q":
                u = self._kron_1q(seg[1], theta) @ u
            else:
                _, kind, param, embed = seg
                g = gate_matrix(kind, param.value(theta))
                u = self._embed_2q(g, embed) @ u
        return u


_GEN_PAULI = {
    GateKind.RX: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.RY: np.array([[0, -1j], [1j, 0]]),
    GateKind.RZ: np.diag([1, -1]).astype(complex),
}
_GEN_PAULI[GateKind.CRX] = _GEN_PAULI[GateKind.RX]
_GEN_PAULI[GateKind.CRY] = _GEN_PAULI[GateKind.RY]
_GEN_PAULI[GateKind.CRZ] = _GEN_PAULI[GateKind.RZ]
_P1 = np.diag([0, 1]).astype(complex)


class _AdjointCost:
    """Objective value and exact gradient by reverse-mode accumulation.

    Every parameterized gate in the catalog is exp(-i a/2 G) for an embedded
    generator G (a Pauli, or a projector-controlled Pauli), so dU/da =
    -i/2 G U and one forward plus one backward sweep of dim x dim products
    yields the full gradient for roughly the price of two evaluations.
    """

    def __init__(self, student: Circuit, teacher_unitary, state_prep=False):
        n = student.n_qubits
        self.dim = 2 ** n
        self.n_params = student.n_params
        self.state_prep = state_prep
        self.udag = np.asarray(teacher_unitary, complex).conj().T
        self.steps = []   # ("const", M) or ("var", gen, gen@gen, Param)
        for op in student.ops:
            if isinstance(op.angle, Param):
                gen = self._generator(op.kind, op.qubits, n)
                self.steps.append(("var", gen, gen @ gen, op.angle))
            else:
                self.steps.append(
                    ("const", unitary_of(Circuit(n, [op])), None, None))

    @staticmethod
    def _generator(kind, qubits, n):
        factors = [_EYE2] * n
        if kind in _CONTROLLED_KINDS:
            c, t = qubits
            factors[c] = _P1
            factors[t] = _GEN_PAULI[kind]
        else:
            factors[qubits[0]] = _GEN_PAULI[kind]
        m = np.array([[1.0 + 0j]])
        for q in range(n - 1, -1, -1):
            m = np.kron(m, factors[q])
        return m

    def _matrices(self, theta):
        eye = np.eye(self.dim, dtype=complex)
        mats = []
        for tag, gen, proj, param in self.steps:
            if tag == "const":
                mats.append(gen)
            else:
                a = param.value(theta)
                mats.append(eye + (math.cos(a / 2) - 1.0) * proj
                            - 1j * math.sin(a / 2) * gen)
        return mats

    def value_and_grad(self, theta):
        mats = self._matrices(theta)
        grad = np.zeros(self.n_params)
        if self.state_prep:
            v = np.zeros(self.dim, dtype=complex)
            v[0] = 1.0
            fwd = []
            for g in mats:
                v = g @ v
                fwd.append(v)
            wd = self.udag[0]   # <psi_target|
            t_val = wd @ v
            scale = 1.0
        else:
            acc = np.eye(self.dim, dtype=complex)
            fwd = []
            for g in mats:
                acc = g @ acc
                fwd.append(acc)
            wd = self.udag
            t_val = np.einsum("ij,ji->", wd, acc)
            scale = 1.0 / self.dim
        mag = abs(t_val)
        if mag < 1e-300:
            return 1.0, grad
        phase = np.conj(t_val) / mag
        for k in range(len(mats) - 1, -1, -1):
            tag, gen, _, param = self.steps[k]
            if tag == "var":
                if self.state_prep:
                    dt = -0.5j * (wd @ (gen @ fwd[k]))
                else:
                    dt = -0.5j * np.einsum("ij,ji->", wd @ gen, fwd[k])
                grad[param.slot] += -param.scale * scale * np.real(phase * dt)
            wd = wd @ mats[k]
        return 1.0 - scale * mag, grad


class _CostTracker:
    """Counts evaluations and keeps the best-ever point and improvement trace."""

    def __init__(self, fun, max_evals):
        self._fun = fun
        self.max_evals = max_evals
        self.nfev = 0
        self.best_x = None
        self.best_e = math.inf
        self.improvements = []

    @property
    def exhausted(self):
        return self.nfev >= self.max_evals

    def record(self, x, e, charge=1):
        self.nfev += charge
        if e < self.best_e:
            self.best_e = e
            self.best_x = np.array(x, float, copy=True)
            self.improvements.append((self.nfev, float(e)))

    def __call__(self, x):
        if self.nfev >= self.max_evals:
            # budget exhausted: report a flat landscape so callers terminate
            return self.best_e
        e = self._fun(x)
        self.record(x, e)
        return e


class _VisitingDistribution:
    """Tsallis heavy-tailed step generator for GSA, parameterized by visit."""

    def __init__(self, lower, upper, visit, rng):
        self.lower = lower
        self.upper = upper
        self.span = upper - lower
        self.visit = visit
        self.rng = rng
        qv = visit
        factor2 = math.exp((4.0 - qv) * math.log(qv - 1.0))
        factor3 = math.exp((2.0 - qv) * math.log(2.0) / (qv - 1.0))
        self.factor4_p = math.sqrt(math.pi) * factor2 / (factor3 * (3.0 - qv))
        factor5 = 1.0 / (qv - 1.0) - 0.5
        d1 = 2.0 - factor5
        self.factor6 = (math.pi * (1.0 - factor5)
                        / math.sin(math.pi * (1.0 - factor5))
                        / math.exp(math.lgamma(d1)))

    def _sample(self, temperature, size):
        qv = self.visit
        x = self.rng.normal(size=size)
        y = self.rng.normal(size=size)
        factor1 = math.exp(math.log(temperature) / (qv - 1.0))
        factor4 = self.factor4_p * factor1
        x *= math.exp(-(qv - 1.0) * math.log(self.factor6 / factor4)
                      / (3.0 - qv))
        den = np.exp((qv - 1.0) * np.log(np.fabs(y)) / (3.0 - qv))
        return x / den

    def _wrap(self, values, lower, span):
        a = values - lower
        b = np.fmod(a, span) + span
        wrapped = np.fmod(b, span) + lower
        bump = np.fabs(wrapped - lower) < _MIN_VISIT_BOUND
        return np.where(bump, wrapped + _MIN_VISIT_BOUND, wrapped)

    def visiting(self, x, step, temperature):
        dim = x.size
        if step < dim:
            # first half of the chain moves every coordinate at once
            visits = self._sample(temperature, dim)
            upper_sample, lower_sample = self.rng.uniform(size=2)
            visits = np.where(visits > TAIL_LIMIT, TAIL_LIMIT * upper_sample,
                              visits)
            visits = np.where(visits < -TAIL_LIMIT, -TAIL_LIMIT * lower_sample,
                              visits)
            return self._wrap(visits + x, self.lower, self.span)
        # second half perturbs a single coordinate
        out = np.copy(x)
        index = step - dim
        visit = float(self._sample(temperature, 1)[0])
        if visit > TAIL_LIMIT:
            visit = TAIL_LIMIT * float(self.rng.uniform())
        elif visit < -TAIL_LIMIT:
            visit = -TAIL_LIMIT * float(self.rng.uniform())
        out[index] = self._wrap(np.array([visit + x[index]]),
                                self.lower[index:index + 1],
                                self.span[index:index + 1])[0]
        return out


def _anneal(cost, bounds, config, rng, anneal_evals):
    """One GSA run; returns when the evaluation cap is hit or chains end."""
    lower, upper = bounds[:, 0], bounds[:, 1]
    dim = lower.size
    visitor = _VisitingDistribution(lower, upper, config.visit, rng)
    qa = config.accept
    t1 = math.exp((config.visit - 1.0) * math.log(2.0)) - 1.0
    restart_temp = config.initial_temp * config.restart_temp_ratio
    not_improved_max = 1000

    def fresh_state():
        x = rng.uniform(lower, upper)
        return x, cost(x)

    x_cur, e_cur = fresh_state()
    not_improved = 0
    while cost.nfev < anneal_evals:
        for step in range(1000):
            s = float(step) + 2.0
            t2 = math.exp((config.visit - 1.0) * math.log(s)) - 1.0
            temperature = config.initial_temp * t1 / t2
            if temperature < restart_temp:
                break
            if cost.nfev >= anneal_evals:
                return
            temperature_step = temperature / (step + 1.0)
            not_improved += 1
            for j in range(2 * dim):
                x_visit = visitor.visiting(x_cur, j, temperature)
                e = cost(x_visit)
                if e < e_cur:
                    x_cur, e_cur = x_visit, e
                    if e <= cost.best_e:
                        not_improved = 0
                else:
                    pqv_temp = 1.0 - ((1.0 - qa) * (e - e_cur)
                                      / temperature_step)
                    if pqv_temp > 0.0:
                        pqv = math.exp(math.log(pqv_temp) / (1.0 - qa))
                        if rng.uniform() <= pqv:
                            x_cur, e_cur = x_visit, e
                if cost.nfev >= anneal_evals:
                    return
            if not_improved >= not_improved_max and e_cur > cost.best_e:
                # chain stalled: restart the walk from the best-ever point
                x_cur = np.copy(cost.best_x)
                e_cur = cost.best_e
                not_improved = 0
        else:
            return
        # temperature collapsed: full restart from a fresh random point
        if cost.nfev >= anneal_evals:
            return
        x_cur, e_cur = fresh_state()
        not_improved = 0


_METHOD_NAMES = {"nelder-mead": "Nelder-Mead", "powell": "Powell",
                 "lbfgs": "L-BFGS-B"}


def _wrap_angle(a: float) -> float:
    return math.remainder(a, 2.0 * math.pi)


def _rotation_solve(cost, bounds, slot_kinds, rng):
    """Cyclic exact line search over rotation angles.

    With every parameter driving exactly one rotation gate, the squared trace
    overlap is a low-order trigonometric polynomial of each angle: period 2pi
    with 3 coefficients for plain rotations, period 4pi with 5 for controlled
    ones.  Each coordinate is probed at 2 (resp. 4) extra points, the
    polynomial is reconstructed exactly, and the coordinate jumps straight to
    its constrained maximizer.  Restarts from random points spend any budget
    left after convergence.
    """
    n = bounds.shape[0]
    grid = np.linspace(-math.pi, math.pi, 721)

    def overlap_sq(d):
        return (1.0 - d) ** 2

    x = np.array(cost.best_x, float, copy=True)
    d_cur = cost.best_e
    while not cost.exhausted:
        improved = False
        for j in range(n):
            if cost.exhausted:
                break
            a0 = x[j]
            y0 = overlap_sq(d_cur)
            if slot_kinds[j] in _CONTROLLED_KINDS:
                # 5-point reconstruction over the 4pi period
                offsets = [4.0 * math.pi * k / 5.0 for k in range(1, 5)]
                ys = [y0]
                for off in offsets:
                    x[j] = a0 + off
                    ys.append(overlap_sq(cost(x)))
                angles = np.array([a0] + [a0 + off for off in offsets])
                design = np.column_stack([
                    np.ones(5), np.cos(angles), np.sin(angles),
                    np.cos(angles / 2.0), np.sin(angles / 2.0)])
                coef = np.linalg.solve(design, np.array(ys))
                vals = (coef[0] + coef[1] * np.cos(grid)
                        + coef[2] * np.sin(grid)
                        + coef[3] * np.cos(grid / 2.0)
                        + coef[4] * np.sin(grid / 2.0))
                a_star = float(grid[np.argmax(vals)])
            else:
                x[j] = a0 + math.pi
                y1 = overlap_sq(cost(x))
                x[j] = a0 + math.pi / 2.0
                y2 = overlap_sq(cost(x))
                alpha = 0.5 * (y0 + y1)
                u, v = y0 - alpha, y2 - alpha
                beta = u * math.cos(a0) - v * math.sin(a0)
                gamma = u * math.sin(a0) + v * math.cos(a0)
                if beta == 0.0 and gamma == 0.0:
                    x[j] = a0
                    continue
                a_star = _wrap_angle(math.atan2(gamma, beta))
            x[j] = a_star
            d_new = cost(x)
            if d_new <= d_cur:
                if d_new < d_cur - 1e-14:
                    improved = True
                d_cur = d_new
            else:   # reconstruction says no gain is possible here
                x[j] = a0
        if not improved:
            if cost.max_evals - cost.nfev > 10 * n:
                x = rng.uniform(bounds[:, 0], bounds[:, 1])
                d_cur = cost(x)
            else:
                return


def _slot_kinds(circuit: Circuit):
    """Gate kind per parameter slot, or None if slots are shared or scaled."""
    kinds = {}
    for op in circuit.ops:
        if isinstance(op.angle, Param):
            p = op.angle
            if p.slot in kinds or abs(p.scale) != 1.0:
                return None
            kinds[p.slot] = op.kind
    return [kinds[s] for s in range(circuit.n_params)]


def _grad_polish(cost, bounds, bound_pairs, rng, fg):
    """Multi-start exact-gradient L-BFGS; each call costs two evaluations."""
    n = bounds.shape[0]

    def counted(x):
        if cost.exhausted:
            return cost.best_e, np.zeros(n)
        f, g = fg(x)
        cost.record(x, f, charge=2)
        return f, g

    # enough calls to converge one basin of this size before restarting
    chunk_cap = max(1000, 20 * n)
    start = cost.best_x
    while not cost.exhausted:
        remaining = min((cost.max_evals - cost.nfev) // 2, chunk_cap)
        if remaining < 2:
            return
        before = cost.best_e
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            minimize(counted, start, jac=True, method="L-BFGS-B",
                     bounds=bound_pairs,
                     options={"maxfun": remaining, "ftol": 1e-14,
                              "gtol": 1e-10})
        if cost.best_e < before - 1e-12:
            start = cost.best_x
        elif cost.max_evals - cost.nfev > 50 * n:
            start = rng.uniform(bounds[:, 0], bounds[:, 1])
        else:
            return


def _polish(cost, bounds, method, rng, slot_kinds=None, fg=None):
    """Local searches until the budget runs out, tracking the global best.

    The first search starts from the best annealed point; after a search
    converges the next one restarts there (fresh simplex/direction set) or,
    once that stops paying off, from a new random point in the box.  The
    lbfgs method estimates gradients by finite differences, as the stock
    dual-annealing local-search phase does; grad-lbfgs uses the exact
    reverse-mode gradient and charges two evaluations per call.
    """
    if method.lower() == "rotation-solve":
        if slot_kinds is None:
            raise ValueError("rotation-solve polish needs each parameter to "
                             "drive exactly one unscaled rotation")
        _rotation_solve(cost, bounds, slot_kinds, rng)
        return
    bound_pairs = [tuple(b) for b in bounds]
    if method.lower() == "grad-lbfgs":
        _grad_polish(cost, bounds, bound_pairs, rng, fg)
        return
    scipy_name = _METHOD_NAMES[method.lower()]
    n = bounds.shape[0]
    start = cost.best_x
    # cap each search so a large budget funds several basin probes
    chunk_cap = max(5000, 625 * n)
    while not cost.exhausted:
        remaining = min(cost.max_evals - cost.nfev, chunk_cap)
        before = cost.best_e
        if scipy_name == "Nelder-Mead":
            opts = {"maxfev": remaining, "adaptive": True,
                    "xatol": 1e-10, "fatol": 1e-12}
        elif scipy_name == "Powell":
            opts = {"maxfev": remaining, "xtol": 1e-10, "ftol": 1e-12}
        else:
            # each L-BFGS-B evaluation spends n+1 calls on the 2-point gradient
            opts = {"maxfun": max(1, remaining // (n + 1)),
                    "ftol": 1e-14, "gtol": 1e-10}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # optimizers warn when truncated
            minimize(cost, start, method=scipy_name, bounds=bound_pairs,
                     options=opts)
        if cost.best_e < before - 1e-12:
            start = cost.best_x
        elif cost.max_evals - cost.nfev > 50 * n:
            # stuck in this basin with budget to spare: try a fresh one
            start = rng.uniform(bounds[:, 0], bounds[:, 1])
        else:
            return


def synthesize(problem: SynthesisProblem,
               config: AnnealConfig | None = None) -> SynthesisResult:
    """Minimize the student-teacher Hilbert-Schmidt distance over theta."""
    config = config or AnnealConfig()
    student = problem.student
    n = student.n_params
    dim = problem.teacher_unitary.shape[0]
    u_dag = problem.teacher_unitary.conj()
    compiled = _CompiledCircuit(student)

    if problem.state_prep:
        target_conj = u_dag[:, 0]

        def distance_of(theta):
            return 1.0 - abs(np.dot(target_conj, compiled.unitary(theta)[:, 0]))
    else:
        def distance_of(theta):
            return 1.0 - abs(np.sum(u_dag * compiled.unitary(theta))) / dim

    def overlap_of(theta):
        v = compiled.unitary(theta)
        if problem.state_prep:
            return complex(np.dot(u_dag[:, 0], v[:, 0]))
        return hs_trace_overlap(problem.teacher_unitary, v)

    if n == 0:
        d = distance_of(np.empty(0))
        return SynthesisResult(np.empty(0), d, 1, overlap_of(np.empty(0)),
                               d <= config.converge_threshold,
                               seed=config.seed, improvements=[(1, d)])

    if problem.budget < 10 * n:
        warnings.warn(
            f"budget {problem.budget} is below the recommended 10x"
            f" parameter count ({10 * n})", stacklevel=2)

    cost = _CostTracker(distance_of, problem.budget + POLISH_ALLOWANCE)
    rng = np.random.default_rng(config.seed)
    if config.local_polish:
        anneal_evals = max(1, int(problem.budget * config.anneal_fraction))
    else:
        anneal_evals = problem.budget
    _anneal(cost, problem.bounds, config, rng, anneal_evals)

    if config.local_polish and not cost.exhausted:
        fg = None
        if config.polish_method.lower() == "grad-lbfgs":
            fg = _AdjointCost(student, problem.teacher_unitary,
                              problem.state_prep).value_and_grad
        _polish(cost, problem.bounds, config.polish_method, rng,
                slot_kinds=_slot_kinds(student), fg=fg)

    return SynthesisResult(
        theta_star=cost.best_x,
        distance=float(cost.best_e),
        evaluations=cost.nfev,
        trace_of_best=overlap_of(cost.best_x),
        converged=cost.best_e <= config.converge_threshold,
        seed=config.seed,
        improvements=cost.improvements,
    )


def synthesize_multi(problem: SynthesisProblem, config: AnnealConfig,
                     seeds, jobs: int = 1) -> SynthesisResult:
    """Independent chains over seeds; best distance wins, seed breaks ties."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    configs = [dataclasses.replace(config, seed=s) for s in seeds]
    if jobs > 1 and len(seeds) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(synthesize, [problem] * len(seeds),
                                    configs))
    else:
        results = [synthesize(problem, c) for c in configs]
    return min(results, key=lambda r: (r.distance, r.seed))


def distill(teacher_model, student_template, config: AnnealConfig | None = None,
            budget: int = 1000, seeds=None, jobs: int = 1):
    """Synthesize a student PQC against a frozen teacher; returns (model, record).

    The teacher's circuit parameters are frozen and its unitary becomes the
    synthesis target.  The returned student model shares the teacher's
    encoding scheme, scaler, and dense head; only the PQC differs.
    """
    from . import qnn

    config = config or AnnealConfig()
    template_id, layers = student_template
    n = teacher_model.n_qubits
    student = build_template(template_id, n, layers)
    teacher_u = unitary_of(bind(teacher_model.pqc, teacher_model.theta))
    problem = SynthesisProblem(teacher_u, student, budget=budget)
    if seeds is None:
        result = synthesize(problem, config)
    else:
        result = synthesize_multi(problem, config, seeds, jobs=jobs)

    model = qnn.HybridModel(
        teacher_model.scheme, student, result.theta_star,
        teacher_model.W.copy(), teacher_model.b.copy(),
        scaler=teacher_model.scaler, template_id=template_id, layers=layers,
        seed=result.seed)
    record = {
        "teacher_template": teacher_model.template_id,
        "teacher_layers": teacher_model.layers,
        "student_template": template_id,
        "student_layers": layers,
        "seed": result.seed,
        "budget": budget,
        "distance": result.distance,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "improvements": [[int(i), float(d)] for i, d in result.improvements],
    }
    return model, record
