"""Command-line interface.

Subcommands mirror the library surface: ``canonical`` and ``report`` work
on state files, ``certificate`` builds the dual certificate, the
``adversarial`` families emit CSV rows, ``round-gap`` rounds the spectral
gap, ``protocol`` runs Monte-Carlo protocol experiments, and ``grouprep``
sweeps perturbed representations.

Conventions: output is byte-identical for identical inputs, flags, and
seed (sorted JSON keys, fixed float formatting, no timestamps).  Exit
code 0 on success, 2 on input validation failure (machine-readable error
JSON on stderr), 1 on internal numerical failure.  With ``CI_STRICT=1``
every randomized subcommand requires an explicit ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import adversarial, certificate, grouprep, matcore, protocol, states, uhlmann
from .errors import (
    BadParamsError,
    ConsistencyError,
    IllConditionedError,
    NoConvergenceError,
    UhlmannError,
)
from .states import DensityMatrix

SCHEMA_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if x is None:
        return "null"
    return json.dumps(x)


def _emit_json(payload: dict, out_path: str | None) -> None:
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    text = "{" + ",".join(f'"{k}":{_fmt(payload[k])}' for k in sorted(payload)) + "}\n"
    _write(text, out_path)


def _emit_csv(header: list, rows: list, out_path: str | None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write("\n".join(lines) + "\n", out_path)


def _write(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_instance(args) -> uhlmann.UhlmannInstance:
    c = states.read_state(args.c)
    d = states.read_state(args.d)
    return uhlmann.UhlmannInstance.from_states(c, d)


def _require_seed(args) -> int:
    if os.environ.get("CI_STRICT") == "1" and args.seed is None:
        raise BadParamsError("CI_STRICT=1 requires an explicit --seed on randomized subcommands")
    return 0 if args.seed is None else args.seed


def _check_tol(tol: float) -> float:
    if not 0.0 < tol <= 1e-3:
        raise BadParamsError("tol must lie in (0, 1e-3]")
    return tol


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_canonical(args) -> int:
    inst = _load_instance(args)
    w = uhlmann.canonical_w(inst, rank_tol=args.tol)
    if args.out:
        matcore.write_matrix(args.out, w)
    else:
        sys.stdout.write(matcore.matrix_json_text(w))
    return 0


def _cmd_report(args) -> int:
    inst = _load_instance(args)
    empirical = None
    if args.probe_trials:
        seed = _require_seed(args)
        probe = certificate.primal_probe(inst, args.epsilon, args.probe_trials, seed)
        empirical = probe.best_residual
    rep = uhlmann.rigidity_report(inst, args.epsilon, empirical_primal=empirical)
    _emit_json(rep.to_dict(), args.out)
    return 0


def _cmd_certificate(args) -> int:
    inst = _load_instance(args)
    eta = uhlmann.spectral_gap_eta(inst)
    kappa = uhlmann.obliqueness_kappa(inst)
    alpha = args.alpha if args.alpha is not None else -kappa / eta
    cert = certificate.build_certificate(inst, args.epsilon, alpha)
    payload = cert.to_dict()
    payload["dual_bound"] = certificate.dual_bound(inst, args.epsilon)
    if args.probe_trials:
        seed = _require_seed(args)
        probe = certificate.primal_probe(inst, args.epsilon, args.probe_trials, seed)
        payload["primal_best"] = probe.best_residual
    else:
        payload["primal_best"] = None
    _emit_json(payload, args.out)
    return 0


_ADV_HEADER = ["family", "d", "fidelity", "eta", "kappa", "epsilon", "residual", "bound", "tight"]


def _cmd_adversarial(args) -> int:
    rows = []
    if args.family == "eta":
        fam = adversarial.build_eta_family(args.d, args.eta, args.tau)
        rows.append(
            [
                "eta",
                fam.d,
                fam.instance.fidelity(),
                fam.eta,
                1.0,
                fam.epsilon,
                fam.residual,
                fam.bound,
                abs(fam.residual - fam.bound) <= 1e-6,
            ]
        )
    elif args.family == "kappa":
        rho = _kappa_rho(args.d, args.lam)
        vec = _kappa_vec(args.d, args.weight)
        fam = adversarial.build_kappa_family(args.d, rho, vec, args.epsilon)
        bound = certificate.dual_bound(fam.instance, fam.epsilon)
        rows.append(
            [
                "kappa",
                fam.d,
                fam.fidelity,
                fam.eta,
                fam.kappa,
                fam.epsilon,
                fam.residual,
                bound,
                abs(fam.residual - bound) <= 1e-6,
            ]
        )
    elif args.family == "boost":
        rho = _kappa_rho(args.d, args.lam)
        vec = _kappa_vec(args.d, args.weight)
        base = adversarial.build_kappa_family(args.d, rho, vec, args.epsilon)
        boosted = adversarial.build_boosted_kappa(base)
        rows.append(
            [
                "boost",
                args.d + 1,
                boosted.fidelity,
                boosted.eta,
                boosted.kappa,
                base.epsilon,
                float("nan"),
                float("nan"),
                False,
            ]
        )
    else:  # qutrit
        sens = adversarial.qutrit_sensitivity(args.epsilon)
        rows.append(
            [
                "qutrit",
                3,
                sens.perturbed.fidelity(),
                float("nan"),
                float("nan"),
                args.epsilon,
                sens.w_distance,
                sens.state_distance,
                False,
            ]
        )
    _emit_csv(_ADV_HEADER, rows, args.out)
    return 0


def _kappa_rho(d: int, lam: float) -> DensityMatrix:
    diag = np.full(d, lam)
    diag[0] = 1.0 - (d - 1) * lam
    return DensityMatrix(np.diag(diag).astype(complex))


def _kappa_vec(d: int, weight: float) -> np.ndarray:
    vec = np.zeros(d, dtype=complex)
    vec[0] = np.sqrt(weight)
    vec[1] = np.sqrt(1.0 - weight)
    return vec


def _cmd_round_gap(args) -> int:
    inst = _load_instance(args)
    rounded = adversarial.round_spectral_gap(inst, args.eta_target, args.mix_delta)
    if args.out_c:
        states.write_state(args.out_c, rounded.rounded.c)
    if args.out_d:
        states.write_state(args.out_d, rounded.rounded.d)
    _emit_json(
        {
            "eta_target": rounded.eta_target,
            "mix_delta": rounded.mix_delta,
            "beta": rounded.beta,
            "gap": rounded.gap,
            "overlap_c": rounded.overlap_c,
            "overlap_d": rounded.overlap_d,
        },
        args.out,
    )
    return 0


def _cmd_protocol(args) -> int:
    seed = _require_seed(args)
    fam = None
    if args.c and args.d:
        inst = _load_instance(args)
    elif args.prover == "derangement":
        fam = adversarial.build_eta_family(2**args.n, args.eta, args.tau)
        inst = fam.instance
    else:
        inst = protocol.completeness_reference_instance(args.n)
    params = protocol.ProtocolParams.for_instance(inst, args.n, args.r, gamma=args.gamma)
    prover = _build_prover(args.prover, inst, fam, seed)
    p = protocol.accept_probability(inst, prover)
    xi = protocol.input_ensemble_state(inst, np.random.default_rng((seed, 0xC0)))
    rows = []
    accepted = 0
    for t in range(args.trials):
        out = protocol.run_protocol(inst, params, prover, xi, seed=(seed, t), accept_prob=p)
        accepted += out.accepted
        rows.append([t, out.accepted, out.j, out.i_star, out.output_state_fidelity])
    if args.out:
        _emit_csv(["trial", "accepted", "j", "i_star", "output_state_fidelity"], rows, args.out)
    _emit_json(
        {
            "prover": prover.label,
            "n": args.n,
            "r": args.r,
            "m": params.m,
            "gamma": params.gamma,
            "threshold": params.threshold,
            "accept_probability": p,
            "trials": args.trials,
            "acceptance_rate": accepted / args.trials,
            "seed": seed,
        },
        None,
    )
    return 0


def _build_prover(spec_str: str, inst, fam, seed: int) -> protocol.ProverStrategy:
    if spec_str == "honest":
        return protocol.honest_prover(inst)
    if spec_str == "derangement":
        if fam is None:
            raise BadParamsError("derangement prover needs the built-in eta family instance")
        return protocol.derangement_prover(fam.adversary_r)
    if spec_str == "random":
        return protocol.random_prover(inst.dim_b, seed)
    if spec_str.startswith("epsilon:"):
        eps = float(spec_str.split(":", 1)[1])
        return protocol.epsilon_prover(inst, eps, seed)
    raise BadParamsError(f"unknown prover '{spec_str}'")


def _cmd_grouprep(args) -> int:
    seed = _require_seed(args)
    group = _build_group(args.group)
    dim = args.dim if args.dim else (3 if group.order == 6 else group.order)
    rows = []
    for k in range(args.count):
        rng = np.random.default_rng((seed, k))
        rep = grouprep.perturbed_rep(group, dim, args.scale, rng)
        res = grouprep.stability_check(rep)
        rows.append(
            {
                "index": k,
                "defect_epsilon": res.defect_epsilon,
                "stability_distance": res.stability_distance,
                "uhlmann_residual": res.uhlmann_residual,
                "eta": res.eta,
                "kappa": res.kappa,
            }
        )
    lines = []
    for row in rows:
        lines.append("{" + ",".join(f'"{k}":{_fmt(row[k])}' for k in sorted(row)) + "}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _build_group(name: str) -> grouprep.FiniteGroup:
    if name.startswith("z") and name[1:].isdigit():
        return grouprep.FiniteGroup.cyclic(int(name[1:]))
    if name == "s3":
        return grouprep.FiniteGroup.symmetric3()
    if name.endswith(".json"):
        return grouprep.FiniteGroup.from_file(name)
    raise BadParamsError(f"unknown group '{name}' (use z<n>, s3, or a table file)")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uhlmann", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_states(sp, required=True):
        sp.add_argument("--c", required=required, help="state file for |C>")
        sp.add_argument("--d", required=required, help="state file for |D>")

    def add_common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--out", default=None, help="output path (stdout when omitted)")

    sp = sub.add_parser("canonical", help="write the canonical transformation W")
    add_states(sp)
    add_common(sp)
    sp.set_defaults(func=_cmd_canonical)

    sp = sub.add_parser("report", help="rigidity report for a state pair")
    add_states(sp)
    add_common(sp)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.add_argument("--probe-trials", type=int, default=0)
    sp.set_defaults(func=_cmd_report)

    sp = sub.add_parser("certificate", help="dual certificate and bound")
    add_states(sp)
    add_common(sp)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.add_argument("--alpha", type=float, default=None, help="default: -kappa/eta")
    sp.add_argument("--probe-trials", type=int, default=0)
    sp.set_defaults(func=_cmd_certificate)

    sp = sub.add_parser(
        "adversarial",
        help="parameter-dependence families (CSV)",
        description="Emits one CSV row per construction. For the qutrit "
        "family the residual/bound columns carry the transformation gap "
        "||W - W~|| and the state distance || |C> - |C~> ||; the boost "
        "family has no adversary, so those columns are nan.",
    )
    sp.add_argument("family", choices=["eta", "kappa", "boost", "qutrit"])
    add_common(sp)
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--eta", type=float, default=0.4)
    sp.add_argument("--tau", type=float, default=0.5)
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--lam", type=float, default=0.02, help="small eigenvalue of rho")
    sp.add_argument("--weight", type=float, default=0.03, help="sigma weight on the heavy eigenvector")
    sp.set_defaults(func=_cmd_adversarial)

    sp = sub.add_parser("round-gap", help="round the spectral gap of a pair")
    add_states(sp)
    add_common(sp)
    sp.add_argument("--eta-target", type=float, required=True)
    sp.add_argument("--mix-delta", type=float, default=1e-6)
    sp.add_argument("--out-c", default=None)
    sp.add_argument("--out-d", default=None)
    sp.set_defaults(func=_cmd_round_gap)

    sp = sub.add_parser("protocol", help="Monte-Carlo protocol experiments")
    add_states(sp, required=False)
    add_common(sp)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--r", type=int, default=2)
    sp.add_argument("--gamma", type=float, default=None, help="default: honest accept probability")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--prover", default="honest", help="honest|derangement|random|epsilon:<val>")
    sp.add_argument("--eta", type=float, default=0.4, help="eta family knob when no state files")
    sp.add_argument("--tau", type=float, default=0.5, help="tau family knob when no state files")
    sp.set_defaults(func=_cmd_protocol)

    sp = sub.add_parser("grouprep", help="stability sweep over perturbed representations")
    add_common(sp)
    sp.add_argument("--group", default="z4", help="z<n>, s3, or a JSON table file")
    sp.add_argument("--dim", type=int, default=0)
    sp.add_argument("--scale", type=float, default=0.2)
    sp.add_argument("--count", type=int, default=5)
    sp.set_defaults(func=_cmd_grouprep)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if hasattr(args, "tol"):
            _check_tol(args.tol)
        return args.func(args)
    except (
        NoConvergenceError,
        ConsistencyError,
        IllConditionedError,
        np.linalg.LinAlgError,
        FloatingPointError,
    ) as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n"
        )
        return 1
    except (UhlmannError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
