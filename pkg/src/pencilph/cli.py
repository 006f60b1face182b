"""Command-line front end: dispatch analyses and emit JSON reports.

Usage: ``pencilph <command> <path> [path ...] [flags]`` with commands
``analyze``, ``recast-dh``, ``stabilize``, ``recast-ph``, ``geometry`` and
``simulate``.  Reports are deterministic canonical JSON carrying verdicts,
certificate matrices, every residual, the tolerances used and the package
version.  Exit codes: 0 definite success, 2 definite negative verdict,
3 inconclusive, 1 error, 64 usage error.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (CertificateMismatch, CompositionDefect, DegenerateLagrangian,
                     IllConditionedError, ImagJordanBlock, IndexTooHigh,
                     InvalidInput, NotControllable, NotDissipative, NotNonnegative,
                     NotStable, ParseError, PencilPHError, SingularPencil,
                     UsageError)
from .pencil import DescriptorSystem, MatrixPencil, index_of, spectrum
from .problems import (ProblemFile, atomic_write_text, canonical_json,
                       parse_problem)
from .stability import check_stability
from . import dh as dh_mod
from . import geometry as geo_mod
from . import oracle as oracle_mod
from . import stabilize as stab_mod

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64

COMMANDS = ("analyze", "recast-dh", "stabilize", "recast-ph", "geometry", "simulate")

# domain errors that represent a definite negative answer, not a failure
_NEGATIVE_ERRORS = (SingularPencil, NotStable, NotControllable, ImagJordanBlock,
                    IndexTooHigh, DegenerateLagrangian, NotDissipative,
                    NotNonnegative, CompositionDefect, CertificateMismatch,
                    InvalidInput)


def _mat(m):
    out = []
    for row in np.atleast_2d(np.asarray(m, dtype=float)):
        out.append([int(v) if float(v).is_integer() and abs(v) < 2 ** 53 else float(v)
                    for v in row])
    return out


def _spectrum_entries(points):
    return [
        {
            "real": float(sp.eigenvalue.real),
            "imag": float(sp.eigenvalue.imag),
            "algebraic": sp.algebraic,
            "geometric": sp.geometric,
            "semi_simple": sp.semi_simple,
        }
        for sp in points
    ]


def _cmd_analyze(problem: ProblemFile, tol, flags):
    kind = problem.kind
    if kind == "pencil":
        p = MatrixPencil(problem.matrix("E"), problem.matrix("A"))
        verdict = check_stability(p, tol)
        report = {
            "classification": verdict.classification,
            "reason": verdict.reason,
            "regular": verdict.classification != "singular",
            "spectrum": _spectrum_entries(verdict.spectrum_report),
        }
        if verdict.classification != "singular":
            report["index"] = index_of(p, tol)
        code = EXIT_OK if verdict.is_stable else EXIT_NEGATIVE
        return report, {}, code
    if kind == "dh":
        e, j, r, q = (problem.matrix(nm) for nm in ("E", "J", "R", "Q"))
        rep = dh_mod.validate_dh(e, j, r, q, tol)
        report = {
            "valid_dh": rep.valid,
            "kernel_condition_holds": rep.kernel_condition_holds,
        }
        residuals = {
            "j_skew_defect": rep.j_skew_defect,
            "r_sym_defect": rep.r_sym_defect,
            "r_psd_defect": rep.r_psd_defect,
            "qte_sym_defect": rep.qte_sym_defect,
            "qte_psd_defect": rep.qte_psd_defect,
            "kernel_condition_defect": rep.kernel_condition_defect,
        }
        if not rep.valid:
            return report, residuals, EXIT_NEGATIVE
        stab = dh_mod.dh_stability_check(e, j, r, q, tol)
        report.update({
            "regular": stab.regular,
            "stable": stab.stable,
            "via_clause": stab.via_clause,
            "q_invertible": stab.q_invertible,
        })
        if stab.stable == "not_guaranteed":
            if flags.no_fallback:
                return report, residuals, EXIT_INCONCLUSIVE
            verdict = check_stability(MatrixPencil(e, (j - r) @ q), tol)
            report["spectral_fallback"] = verdict.classification
            report["spectrum"] = _spectrum_entries(verdict.spectrum_report)
            code = EXIT_OK if verdict.is_stable else EXIT_NEGATIVE
            return report, residuals, code
        code = EXIT_OK if stab.stable == "yes" else EXIT_NEGATIVE
        return report, residuals, code
    if kind == "descriptor":
        d = DescriptorSystem(problem.matrix("E"), problem.matrix("A"),
                             problem.matrix("B"))
        ref = stab_mod.refined_decomposition(d, tol)
        stabilizable = stab_mod.is_behaviorally_stabilizable(d, tol)
        report = {
            "behaviorally_stabilizable": stabilizable,
            "n_antistable": ref.n1,
            "n_stable": ref.n2,
            "nilpotent_blocks": list(ref.alpha),
        }
        return report, {"refined_residual": ref.residual}, \
            EXIT_OK if stabilizable else EXIT_NEGATIVE
    if kind == "ph":
        mats = {nm: problem.matrix(nm) for nm in ("E", "J", "R", "Q", "B", "P", "S", "N")}
        blk_r = np.block([[mats["R"], mats["P"]], [mats["P"].T, mats["S"]]])
        blk_j = np.block([[mats["J"], mats["B"]], [-mats["B"].T, mats["N"]]])
        qte = mats["Q"].T @ mats["E"]
        sym_r = 0.5 * (blk_r + blk_r.T)
        psd_defect = float(max(0.0, -np.linalg.eigvalsh(sym_r)[0]))
        skew_defect = float(np.linalg.norm(blk_j + blk_j.T))
        qte_defect = float(np.linalg.norm(qte - qte.T))
        scale = 1.0 + float(sum(np.linalg.norm(m) for m in mats.values()))
        thr = max(tol.atol, tol.rtol * scale)
        valid = psd_defect <= thr and skew_defect <= thr and qte_defect <= thr
        report = {"valid_ph": valid}
        residuals = {"block_psd_defect": psd_defect,
                     "block_skew_defect": skew_defect,
                     "qte_sym_defect": qte_defect}
        return report, residuals, EXIT_OK if valid else EXIT_NEGATIVE
    if kind == "geometry":
        rep = geo_mod.validate_structures(
            (problem.matrix("L1"), problem.matrix("L2")),
            (problem.matrix("D1"), problem.matrix("D2")), tol)
        report = {
            "lagrangian_ok": rep.lagrangian_ok,
            "lagrangian_dim": rep.lagrangian_dim,
            "nonnegative": rep.nonnegative,
            "dissipative_ok": rep.dissipative_ok,
            "dissipative_dim": rep.dissipative_dim,
            "dirac": rep.dirac,
        }
        residuals = {
            "lagrangian_sym_defect": rep.lagrangian_sym_defect,
            "nonnegative_defect": rep.nonnegative_defect,
            "dissipative_defect": rep.dissipative_defect,
        }
        ok = rep.lagrangian_ok and rep.dissipative_ok
        return report, residuals, EXIT_OK if ok else EXIT_NEGATIVE
    raise UsageError(f"analyze does not support kind {kind!r}")


def _cmd_recast_dh(problem: ProblemFile, tol, flags):
    if problem.kind != "pencil":
        raise UsageError("recast-dh requires a problem of kind 'pencil'")
    p = MatrixPencil(problem.matrix("E"), problem.matrix("A"))
    fact = dh_mod.recast_dh(p, tol)
    report = {
        "mode": fact.mode,
        "system_space_dim": fact.system_space.dim,
        "J": _mat(fact.j),
        "R": _mat(fact.r),
        "Q": _mat(fact.q),
    }
    residuals = dict(fact.residuals)
    if index_of(p, tol) <= 1:
        glob = dh_mod.recast_dh_index1(p, tol)
        report["global"] = {"J": _mat(glob.j), "R": _mat(glob.r), "Q": _mat(glob.q)}
        residuals.update({f"global_{k}": v for k, v in glob.residuals.items()})
    return report, residuals, EXIT_OK


def _cmd_stabilize(problem: ProblemFile, tol, flags):
    if problem.kind != "descriptor":
        raise UsageError("stabilize requires a problem of kind 'descriptor'")
    d = DescriptorSystem(problem.matrix("E"), problem.matrix("A"), problem.matrix("B"))
    cert = stab_mod.build_certificates(d, tol)
    report = {
        "X1": _mat(cert.x1),
        "X2": _mat(cert.x2),
        "P1": _mat(cert.p1),
        "P2": _mat(cert.p2),
        "K": _mat(cert.k_gain),
        "system_space_dim": cert.system_space.dim,
    }
    return report, dict(cert.residuals), EXIT_OK


def _cmd_recast_ph(problem: ProblemFile, tol, flags):
    if problem.kind != "descriptor":
        raise UsageError("recast-ph requires a problem of kind 'descriptor'")
    d = DescriptorSystem(problem.matrix("E"), problem.matrix("A"), problem.matrix("B"))
    cert = stab_mod.build_certificates(d, tol)
    ph = stab_mod.recast_ph(d, cert, tol)
    closed = stab_mod.zero_output_interconnection(ph, d)
    report = {
        "J": _mat(ph.j), "R": _mat(ph.r), "Q": _mat(ph.q),
        "B": _mat(ph.b), "P": _mat(ph.p), "S": _mat(ph.s_ff), "N": _mat(ph.n_ff),
        "X1": _mat(cert.x1), "X2": _mat(cert.x2),
        "P1": _mat(cert.p1), "K": _mat(cert.k_gain),
        "zero_output_A": _mat(closed.a),
    }
    return report, dict(ph.residuals), EXIT_OK


def _cmd_geometry(problem: ProblemFile, tol, flags):
    if problem.kind != "geometry":
        raise UsageError("geometry requires a problem of kind 'geometry'")
    l_pair = (problem.matrix("L1"), problem.matrix("L2"))
    d_pair = (problem.matrix("D1"), problem.matrix("D2"))
    rep = geo_mod.validate_structures(l_pair, d_pair, tol)
    report = {"lagrangian_ok": rep.lagrangian_ok, "dissipative_ok": rep.dissipative_ok,
              "nonnegative": rep.nonnegative, "dirac": rep.dirac}
    residuals = {"lagrangian_sym_defect": rep.lagrangian_sym_defect,
                 "dissipative_defect": rep.dissipative_defect}
    if not (rep.lagrangian_ok and rep.dissipative_ok):
        return report, residuals, EXIT_NEGATIVE
    lag = geo_mod.lagrangian_structure(*l_pair, tol)
    dis = geo_mod.dissipative_structure(*d_pair, tol)
    pencil = geo_mod.compose_dl(dis, lag, tol)
    report["composed_E"] = _mat(pencil.e)
    report["composed_A"] = _mat(pencil.a)
    if rep.nonnegative:
        geo = geo_mod.geometric_stability_check(dis, lag, tol)
        report["geometric"] = {"regular": geo.regular, "stable": geo.stable,
                               "conditions": {k: (v if isinstance(v, bool) else int(v))
                                              for k, v in geo.conditions.items()}}
        if geo.stable == "yes":
            return report, residuals, EXIT_OK
        if flags.no_fallback:
            return report, residuals, EXIT_INCONCLUSIVE
    verdict = check_stability(pencil, tol)
    report["spectral_fallback"] = verdict.classification
    return report, residuals, EXIT_OK if verdict.is_stable else EXIT_NEGATIVE


def _cmd_simulate(problem: ProblemFile, tol, flags):
    if problem.kind == "pencil":
        p = MatrixPencil(problem.matrix("E"), problem.matrix("A"))
    elif problem.kind == "dh":
        e = problem.matrix("E")
        a = (problem.matrix("J") - problem.matrix("R")) @ problem.matrix("Q")
        p = MatrixPencil(e, a)
    else:
        raise UsageError("simulate requires kind 'pencil' or 'dh'")
    if "x0" in problem.matrices:
        x0 = problem.matrix("x0").reshape(-1)
    else:
        from .pencil import system_space
        space = system_space(p, tol)
        if space.dim == 0:
            x0 = np.zeros(p.n)
        else:
            x0 = space.basis[:, 0]
    traj = oracle_mod.simulate(p, x0, flags.horizon, flags.samples, tol)
    norms = np.linalg.norm(traj.states, axis=1)
    report = {
        "x0": _mat(x0),
        "horizon": flags.horizon,
        "samples": flags.samples,
        "sup_norm": float(norms.max()),
        "final_norm": float(norms[-1]),
        "times": [float(t) for t in traj.times],
        "states": _mat(traj.states),
    }
    if problem.kind == "dh":
        decay = oracle_mod.check_energy_decay(traj, problem.matrix("E"),
                                              problem.matrix("Q"), tol)
        report["energy_monotone"] = decay["monotone"]
        report["energy_max_increase"] = decay["max_increase"]
    return report, {}, EXIT_OK


_DISPATCH = {
    "analyze": _cmd_analyze,
    "recast-dh": _cmd_recast_dh,
    "stabilize": _cmd_stabilize,
    "recast-ph": _cmd_recast_ph,
    "geometry": _cmd_geometry,
    "simulate": _cmd_simulate,
}


def run_command(command: str, problem: ProblemFile, flags) -> tuple:
    """Execute one command on a parsed problem; returns (report dict, exit code)."""
    tol = problem.tolerances or ToleranceConfig(atol=flags.atol, rtol=flags.rtol)
    base = {
        "command": command,
        "kind": problem.kind,
        "version": __version__,
        "tolerances": {"atol": tol.atol, "rtol": tol.rtol},
        "metadata": problem.metadata,
    }
    try:
        report, residuals, code = _DISPATCH[command](problem, tol, flags)
    except UsageError:
        raise
    except _NEGATIVE_ERRORS as exc:
        base.update({"verdicts": {"refused": type(exc).__name__},
                     "residuals": {}, "error": str(exc), "exit_code": EXIT_NEGATIVE})
        return base, EXIT_NEGATIVE
    except (IllConditionedError, PencilPHError) as exc:
        base.update({"verdicts": {}, "residuals": {}, "error": str(exc),
                     "exit_code": EXIT_ERROR})
        return base, EXIT_ERROR
    base.update({"verdicts": report, "residuals": residuals, "exit_code": code})
    return base, code


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pencilph",
        description="Analyze pencils and descriptor systems, certify stability, "
                    "and recast them in dissipative/port-Hamiltonian form.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("paths", nargs="+", help="problem file(s) or bundle dir(s)")
    parser.add_argument("--format", choices=("json", "matrix-market-bundle"),
                        default="json")
    parser.add_argument("--atol", type=float, default=None)
    parser.add_argument("--rtol", type=float, default=DEFAULT_TOL.rtol)
    parser.add_argument("--horizon", type=float, default=10.0)
    parser.add_argument("--samples", type=int, default=201)
    parser.add_argument("--no-fallback", action="store_true",
                        help="report inconclusive instead of running the spectral test")
    parser.add_argument("--out", default=None,
                        help="directory for per-file reports (atomic writes)")
    parser.add_argument("--workers", type=int, default=1,
                        help="process multiple problem files in parallel")
    return parser


def _severity(code):
    return {EXIT_OK: 0, EXIT_INCONCLUSIVE: 1, EXIT_NEGATIVE: 2,
            EXIT_ERROR: 3, EXIT_USAGE: 4}[code]


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.atol is None:
        env = os.environ.get("PENCILPH_TOLERANCE")
        args.atol = float(env) if env else DEFAULT_TOL.atol

    def process(path):
        try:
            problem = parse_problem(path, args.format)
            report, code = run_command(args.command, problem, args)
        except UsageError as exc:
            return path, {"error": str(exc), "exit_code": EXIT_USAGE}, EXIT_USAGE
        except ParseError as exc:
            return path, {"error": str(exc), "exit_code": EXIT_ERROR}, EXIT_ERROR
        return path, report, code

    if args.workers > 1 and len(args.paths) > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(process, args.paths))
    else:
        results = [process(path) for path in args.paths]

    worst = EXIT_OK
    for path, report, code in results:
        text = canonical_json(report)
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            stem = os.path.splitext(os.path.basename(path.rstrip("/")))[0]
            atomic_write_text(os.path.join(args.out, stem + ".report.json"), text)
        else:
            sys.stdout.write(text)
        if _severity(code) > _severity(worst):
            worst = code
    return worst


if __name__ == "__main__":
    sys.exit(main())
