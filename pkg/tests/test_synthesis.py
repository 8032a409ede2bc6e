import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdistill import circuit as circ, synthesis as syn
from qdistill.circuit import Circuit, Op
from qdistill.gates import GateKind as K


def random_unitary(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def template_unitary(tid, n, layers, seed):
    tpl = circ.build_template(tid, n, layers)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-math.pi, math.pi, tpl.n_params)
    return circ.unitary_of(circ.bind(tpl, theta)), tpl, theta


def test_distance_oracles():
    assert syn.hs_distance(np.eye(2), np.eye(2)) == pytest.approx(0.0)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    assert syn.hs_distance(np.eye(2), x) == pytest.approx(1.0)
    # global phase is invisible
    assert syn.hs_distance(np.eye(4), 1j * np.eye(4)) == pytest.approx(0.0)


def test_distance_input_validation():
    with pytest.raises(ValueError):
        syn.hs_distance(np.eye(2), np.eye(4))
    with pytest.raises(ValueError):
        syn.hs_distance(2 * np.eye(2), np.eye(2))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_distance_symmetry_and_range(seed):
    u = random_unitary(4, seed)
    v = random_unitary(4, seed + 1)
    d = syn.hs_distance(u, v)
    assert 0.0 <= d <= 1.0 + 1e-12
    assert d == pytest.approx(syn.hs_distance(v, u), abs=1e-12)
    w = random_unitary(4, seed + 2)
    assert syn.hs_distance(w @ u, w @ v) == pytest.approx(d, abs=1e-9)


@pytest.mark.parametrize("tid,layers", [("c1", 1), ("c2", 2), ("c6", 1),
                                        ("c9", 2), ("c12", 1), ("c15", 3)])
def test_compiled_circuit_matches_reference(tid, layers):
    tpl = circ.build_template(tid, 3, layers)
    compiled = syn._CompiledCircuit(tpl)
    rng = np.random.default_rng(11)
    for _ in range(5):
        theta = rng.uniform(-math.pi, math.pi, tpl.n_params)
        want = circ.unitary_of(circ.bind(tpl, theta))
        assert np.allclose(compiled.unitary(theta), want, atol=1e-10)


@pytest.mark.parametrize("state_prep", [False, True])
@pytest.mark.parametrize("tid", ["c2", "c6", "c15"])
def test_adjoint_gradient_matches_finite_differences(tid, state_prep):
    u, tpl, _ = template_unitary(tid, 3, 1, seed=2)
    adj = syn._AdjointCost(tpl, u, state_prep=state_prep)
    rng = np.random.default_rng(5)
    x = rng.uniform(-math.pi, math.pi, tpl.n_params)
    f, g = adj.value_and_grad(x)
    eps = 1e-6
    for j in range(0, tpl.n_params, 3):
        xp, xm = x.copy(), x.copy()
        xp[j] += eps
        xm[j] -= eps
        fd = (adj.value_and_grad(xp)[0] - adj.value_and_grad(xm)[0]) / (2 * eps)
        assert g[j] == pytest.approx(fd, abs=1e-7)


def test_problem_validation():
    tpl = circ.build_template("c2", 2, 1)
    with pytest.raises(ValueError):
        syn.SynthesisProblem(np.eye(8), tpl)        # dim mismatch
    with pytest.raises(ValueError):
        syn.SynthesisProblem(2 * np.eye(4), tpl)    # not unitary
    with pytest.raises(ValueError):
        syn.SynthesisProblem(np.eye(4), tpl, budget=0)


def test_config_validation():
    with pytest.raises(ValueError):
        syn.AnnealConfig(polish_method="newton")
    with pytest.raises(ValueError):
        syn.AnnealConfig(visit=3.5)
    with pytest.raises(ValueError):
        syn.AnnealConfig(accept=1.0)
    with pytest.raises(ValueError):
        syn.AnnealConfig(anneal_fraction=0.0)


def test_zero_parameter_student():
    c = Circuit(1, [Op(K.X, (0,))])
    u = circ.unitary_of(c)
    res = syn.synthesize(syn.SynthesisProblem(u, c))
    assert res.distance == pytest.approx(0.0)
    assert res.evaluations == 1
    assert res.converged


def test_budget_respected():
    u, tpl, _ = template_unitary("c2", 2, 1, seed=0)
    prob = syn.SynthesisProblem(u, tpl, budget=200)
    res = syn.synthesize(prob, syn.AnnealConfig(seed=1))
    assert res.evaluations <= 200 + syn.POLISH_ALLOWANCE + 1


def test_small_budget_warns():
    u, tpl, _ = template_unitary("c2", 3, 2, seed=0)
    with pytest.warns(UserWarning):
        syn.synthesize(syn.SynthesisProblem(u, tpl, budget=20),
                       syn.AnnealConfig(seed=0))


def test_synthesis_deterministic_per_seed():
    u, tpl, _ = template_unitary("c2", 2, 1, seed=3)
    prob = syn.SynthesisProblem(u, tpl, budget=400)
    a = syn.synthesize(prob, syn.AnnealConfig(seed=7))
    b = syn.synthesize(prob, syn.AnnealConfig(seed=7))
    assert a.distance == b.distance
    assert np.array_equal(a.theta_star, b.theta_star)
    assert a.evaluations == b.evaluations


def test_self_synthesis_recovers_target():
    # same template and layer count: the optimum is an exact match
    u, tpl, _ = template_unitary("c2", 2, 1, seed=42)
    prob = syn.SynthesisProblem(u, tpl, budget=1000)
    best = min((syn.synthesize(prob, syn.AnnealConfig(seed=s))
                for s in range(3)), key=lambda r: r.distance)
    assert best.distance <= 1e-3
    assert best.converged


@pytest.mark.parametrize("method", ["powell", "lbfgs", "grad-lbfgs",
                                    "rotation-solve"])
def test_polish_methods_run_and_improve(method):
    u, tpl, _ = template_unitary("c2", 2, 1, seed=9)
    prob = syn.SynthesisProblem(u, tpl, budget=800)
    cfg = syn.AnnealConfig(seed=0, polish_method=method, anneal_fraction=0.2)
    res = syn.synthesize(prob, cfg)
    assert res.distance <= 0.05


def test_state_prep_mode_easier_than_full_unitary():
    u, _, _ = template_unitary("c2", 3, 6, seed=1)
    student = circ.build_template("c2", 3, 2)
    cfg = syn.AnnealConfig(seed=0, polish_method="grad-lbfgs",
                           anneal_fraction=0.1)
    full = syn.synthesize(syn.SynthesisProblem(u, student, budget=2000), cfg)
    state = syn.synthesize(
        syn.SynthesisProblem(u, student, budget=2000, state_prep=True), cfg)
    assert state.distance <= full.distance + 1e-9
    # trace_of_best in state mode is the overlap amplitude
    assert abs(state.trace_of_best) == pytest.approx(1.0 - state.distance,
                                                     abs=1e-9)


def test_improvements_are_monotone():
    u, tpl, _ = template_unitary("c15", 2, 2, seed=4)
    res = syn.synthesize(syn.SynthesisProblem(u, tpl, budget=500),
                         syn.AnnealConfig(seed=2))
    dists = [d for _, d in res.improvements]
    assert dists == sorted(dists, reverse=True)
    evs = [e for e, _ in res.improvements]
    assert evs == sorted(evs)


def test_synthesize_multi_picks_best_and_breaks_ties():
    u, tpl, _ = template_unitary("c2", 2, 1, seed=6)
    prob = syn.SynthesisProblem(u, tpl, budget=300)
    cfg = syn.AnnealConfig(seed=0)
    res = syn.synthesize_multi(prob, cfg, seeds=[0, 1, 2])
    singles = [syn.synthesize(prob, dataclasses.replace(cfg, seed=s))
               for s in [0, 1, 2]]
    best = min(singles, key=lambda r: (r.distance, r.seed))
    assert res.distance == best.distance
    assert res.seed == best.seed
    with pytest.raises(ValueError):
        syn.synthesize_multi(prob, cfg, seeds=[])


def test_distill_returns_student_and_record():
    from qdistill import data, encoding, qnn
    ds = data.load_iris(seed=0)
    scheme = encoding.EncodingScheme("1:1", 4)
    scaler = encoding.fit_scaler(ds.train_features)
    teacher = qnn.init_model("c2", 1, scheme, seed=42, scaler=scaler)
    student, record = syn.distill(teacher, ("c2", 1), budget=500,
                                  seeds=[0, 1])
    assert student.template_id == "c2"
    assert student.layers == 1
    assert record["teacher_template"] == "c2"
    assert record["budget"] == 500
    assert np.array_equal(student.W, teacher.W)
    assert record["distance"] <= 0.05
