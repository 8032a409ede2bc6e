"""State-preparation fidelity versus problem size at a fixed budget.

Each instance draws a random six-layer c2 circuit and asks a four-layer c2
student to reproduce its action on |0...0> within a 1000-evaluation budget.
Small registers are prepared almost perfectly; past four qubits the fixed
budget and fixed ansatz capacity both run out.
"""

import math

import numpy as np

from qdistill.circuit import bind, build_template, unitary_of
from qdistill.synthesis import AnnealConfig, SynthesisProblem, synthesize

config = AnnealConfig(polish_method="rotation-solve", anneal_fraction=0.05)

print("qubits  mean_fid  min_fid")
for n in range(2, 7):
    teacher_tpl = build_template("c2", n, 6)
    student_tpl = build_template("c2", n, 4)
    fids = []
    for inst in range(20):
        rng = np.random.default_rng(5000 + 1000 * n + inst)
        theta = rng.uniform(-math.pi, math.pi, teacher_tpl.n_params)
        target = unitary_of(bind(teacher_tpl, theta))
        problem = SynthesisProblem(target, student_tpl, budget=1000,
                                   state_prep=True)
        result = synthesize(problem, config)
        fids.append(min(1.0, abs(result.trace_of_best) ** 2))
    fids = np.array(fids)
    print(f"{n:>6}  {fids.mean():>8.3f}  {fids.min():>7.3f}")
