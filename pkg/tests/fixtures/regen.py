"""Regenerate the golden problem-file corpus in canonical form.

Run from the repository root: ``python tests/fixtures/regen.py``.
Each fixture is written through the canonical emitter so the CLI
round-trip test can require byte identity.
"""

import json
import os

import numpy as np
import scipy.io as sio

from pencilph.problems import ProblemFile, emit_problem, _shape_of

HERE = os.path.dirname(os.path.abspath(__file__))


def matrices(**kwargs):
    return {name: _shape_of(value, name)[1] for name, value in kwargs.items()}


FIXTURES = {
    # pencils
    "pencil_unstable_jordan": ProblemFile("pencil", matrices(
        E=[[1, 0], [0, 1]], A=[[0, -1], [0, 0]])),
    "pencil_sim_growth": ProblemFile("pencil", matrices(
        E=[[1, 0], [0, 1]], A=[[0, -1], [0, 0]], x0=[[1], [1]])),
    "pencil_stable_skew": ProblemFile("pencil", matrices(
        E=[[1, 0], [0, 1]], A=[[0, 1], [-1, 0]])),
    "pencil_index1_asymptotic": ProblemFile("pencil", matrices(
        E=[[1, 0], [0, 0]], A=[[-1, 0], [0, 1]])),
    "pencil_singular": ProblemFile("pencil", matrices(
        E=[[1, 0], [0, 0]], A=[[0, 1], [0, 0]])),
    "pencil_nilpotent_index2": ProblemFile("pencil", matrices(
        E=[[0, 1], [0, 0]], A=[[1, 0], [0, 1]])),
    "pencil_ode_diag": ProblemFile("pencil", matrices(
        E=[[1, 0], [0, 1]], A=[[-1, 0], [0, -2]])),
    "pencil_mixed3": ProblemFile("pencil", matrices(
        E=[[1, 0, 0], [0, 1, 0], [0, 0, 0]],
        A=[[-1, 1, 0], [0, -2, 0], [0, 0, 1]])),
    # descriptor systems
    "descriptor_scalar_chain": ProblemFile("descriptor", matrices(
        E=[[1]], A=[[1]], B=[[1]])),
    "descriptor_split": ProblemFile("descriptor", matrices(
        E=[[1, 0], [0, 1]], A=[[1, 0], [0, -1]], B=[[1], [0]])),
    "descriptor_stable_no_input": ProblemFile("descriptor", matrices(
        E=[[1]], A=[[-1]], B=[[0]])),
    "descriptor_uncontrollable": ProblemFile("descriptor", matrices(
        E=[[1, 0], [0, 1]], A=[[1, 0], [0, -1]], B=[[0], [1]])),
    "descriptor_index1": ProblemFile("descriptor", matrices(
        E=[[1, 0, 0], [0, 1, 0], [0, 0, 0]],
        A=[[1, 0, 0], [0, -2, 0], [0, 0, 1]],
        B=[[1], [1], [0]])),
    "descriptor_jordan_axis": ProblemFile("descriptor", matrices(
        E=[[1, 0], [0, 1]], A=[[0, -1], [0, 0]], B=[[1], [0]])),
    # dissipative-Hamiltonian factor sets
    "dh_headline": ProblemFile("dh", matrices(
        E=[[1, 0], [0, 1]], J=[[0, -1], [1, 0]],
        R=[[0, 0], [0, 0]], Q=[[0, 0], [0, 1]], x0=[[1], [1]])),
    "dh_stable_identity": ProblemFile("dh", matrices(
        E=[[1, 0], [0, 1]], J=[[0, 0], [0, 0]],
        R=[[1, 0], [0, 1]], Q=[[1, 0], [0, 1]])),
    "dh_index1": ProblemFile("dh", matrices(
        E=[[1, 0], [0, 0]], J=[[0, 0], [0, 0]],
        R=[[1, 0], [0, 1]], Q=[[1, 0], [0, 1]])),
    "dh_invalid_skew": ProblemFile("dh", matrices(
        E=[[1, 0], [0, 1]], J=[[0, 1], [1, 0]],
        R=[[1, 0], [0, 1]], Q=[[1, 0], [0, 1]])),
    # port-Hamiltonian descriptor data (scalar chain recast)
    "ph_scalar_chain": ProblemFile("ph", matrices(
        E=[[1]], J=[[0]], R=[[0.5]], Q=[[-2]], B=[[1]],
        P=[[0]], S=[[1]], N=[[0]])),
    "ph_invalid_feedthrough": ProblemFile("ph", matrices(
        E=[[1]], J=[[0]], R=[[0.5]], Q=[[-2]], B=[[1]],
        P=[[0]], S=[[-1]], N=[[0]])),
    # geometric structure pairs
    "geometry_headline": ProblemFile("geometry", matrices(
        L1=[[1, 0], [0, 1]], L2=[[0, 0], [0, 1]],
        D1=[[1, 0], [0, 1]], D2=[[0, -1], [1, 0]])),
    "geometry_stable_graph": ProblemFile("geometry", matrices(
        L1=[[1, 0], [0, 1]], L2=[[1, 0], [0, 1]],
        D1=[[1, 0], [0, 1]], D2=[[-1, 0], [0, -1]])),
    "geometry_index1": ProblemFile("geometry", matrices(
        L1=[[1, 0], [0, 0]], L2=[[0, 0], [0, 1]],
        D1=[[1, 0], [0, 1]], D2=[[-1, 0], [0, -1]])),
    "geometry_invalid": ProblemFile("geometry", matrices(
        L1=[[1, 0], [0, 1]], L2=[[0, 1], [0, 0]],
        D1=[[1, 0], [0, 1]], D2=[[-1, 0], [0, -1]])),
}


def main():
    for name, problem in FIXTURES.items():
        path = os.path.join(HERE, name + ".json")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(emit_problem(problem))
    # matrix-market bundle twin of the headline pencil
    bundle = os.path.join(HERE, "bundle_headline")
    os.makedirs(bundle, exist_ok=True)
    sio.mmwrite(os.path.join(bundle, "E"), np.eye(2))
    sio.mmwrite(os.path.join(bundle, "A"), np.array([[0.0, -1.0], [0.0, 0.0]]))
    with open(os.path.join(bundle, "manifest.json"), "w", encoding="utf-8") as handle:
        json.dump({"kind": "pencil"}, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {len(FIXTURES)} fixtures plus 1 bundle to {HERE}")


if __name__ == "__main__":
    main()
