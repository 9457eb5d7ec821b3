"""Command-line interface.

Exit codes: 0 success (or entangled verdict), 3 entanglement not detected,
2 usage or validation error, 1 internal error.  Machine-readable output goes
to stdout (or ``--out``); notes go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__, _rng
from .correlations import (
    correlation_length,
    correlation_tensor,
    random_correlations_exact,
    random_correlations_mc,
    two_copy_operator_spectrum,
)
from .errors import RandcorrError, ValidationError
from .qudit import qudit_bound_check
from .shotsim import SCHEMA, ExperimentConfig, _parse_K, eight_photon_scenario, run_experiment
from .states import named_state, state_from_dict, state_to_dict
from .witness import INFINITE, ConfidenceLevel, detection_probability, witness_decide

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_NOT_DETECTED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would sys.exit(2) itself
        raise UsageError(f"{self.prog}: {message}")


# --- shared option groups ----------------------------------------------------

def _add_state_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("state")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--state", metavar="FILE", help="JSON state file")
    src.add_argument("--named", choices=["ghz", "product", "bell", "haar", "ghz-noise"])
    g.add_argument("--n", type=int, help="number of parties for named states")
    g.add_argument("--dirs", help="comma-separated axis letters for 'product', e.g. z,x,-y")
    g.add_argument("--epsilon", type=float, help="GHZ weight for 'ghz-noise'")
    g.add_argument("--state-seed", type=int, help="seed for 'haar' (defaults to --seed)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads, 0 = auto (fallback: RANDCORR_THREADS)")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")


def _add_confidence(p: argparse.ArgumentParser) -> None:
    p.add_argument("--confidence", type=float, default=0.954)
    p.add_argument("--sided", type=int, choices=[1, 2], default=2,
                   help="normal-multiplier convention (default two-sided: 0.954 -> 2.0)")


def _state_description(args: argparse.Namespace) -> dict:
    if args.state:
        try:
            data = json.loads(Path(args.state).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read state file {args.state!r}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"state file {args.state!r} is not valid JSON: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ValidationError("state file must hold a JSON object")
        return data
    if not args.named:
        raise ValidationError("give either --state FILE or --named NAME")
    desc: dict[str, Any] = {"named": args.named}
    if args.n is not None:
        desc["n"] = args.n
    if args.dirs is not None:
        desc["dirs"] = [d.strip() for d in args.dirs.split(",") if d.strip()]
    if args.epsilon is not None:
        desc["epsilon"] = args.epsilon
    if args.named == "haar":
        seed = args.state_seed if args.state_seed is not None else getattr(args, "seed", None)
        if seed is not None:
            desc["seed"] = seed
    return desc


def _confidence(args: argparse.Namespace) -> ConfidenceLevel:
    return ConfidenceLevel(args.confidence, args.sided)


def _parse_K_arg(text: str) -> float:
    try:
        return _parse_K(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _emit(args: argparse.Namespace, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2)


def _k_json(K: float) -> Any:
    return "inf" if K == INFINITE else int(K)


def _display(v: float) -> float:
    # drop float noise like 0.9999999999999998 and -0.0 in exported tables
    return round(v, 12) + 0.0


# --- subcommands ---------------------------------------------------------------

def cmd_tensor(args: argparse.Namespace) -> int:
    T = correlation_tensor(state_from_dict(_state_description(args)))
    rows = [(label, _display(v)) for label, v in T.records()]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "value"])
        w.writerows(rows)
        _emit(args, buf.getvalue())
    else:
        _emit(args, _dumps({"schema": SCHEMA, "num_parties": T.num_parties,
                            "entries": [[k, v] for k, v in rows]}))
    return EXIT_OK


def cmd_randcorr(args: argparse.Namespace) -> int:
    T = correlation_tensor(state_from_dict(_state_description(args)))
    out: dict[str, Any] = {
        "schema": SCHEMA,
        "num_parties": T.num_parties,
        "correlation_length": correlation_length(T),
        "random_correlations_exact": random_correlations_exact(T),
        "product_value": 3.0**-T.num_parties,
    }
    if args.M is not None:
        est, err = random_correlations_mc(T, args.M, args.seed, args.threads)
        out.update({"M": args.M, "seed": args.seed, "random_correlations_mc": est, "stderr": err})
    _emit(args, _dumps(out))
    return EXIT_OK


def _witness_verdict(desc: dict, M: int, K: float, seed: int, conf: ConfidenceLevel,
                     bound: str, exact: bool, threads: int | None) -> dict:
    config = ExperimentConfig(desc, M, K, seed)
    state = config.load_state()
    N = state.num_parties
    if exact:
        R_hat = random_correlations_exact(correlation_tensor(state))
        bias = 0.0
    else:
        result = run_experiment(config, threads, state)
        R_hat, bias = result.R_MK, result.finite_K_bias
    verdict = witness_decide(min(R_hat, 1.0), N, M, K, conf, bound)
    return {"schema": SCHEMA, **verdict.to_dict(), "seed": seed, "exact": exact,
            "finite_K_bias": bias, "state": desc}


def cmd_witness(args: argparse.Namespace) -> int:
    out = _witness_verdict(_state_description(args), args.M, args.K, args.seed,
                           _confidence(args), args.bound, args.exact, args.threads)
    _emit(args, _dumps(out))
    return EXIT_OK if out["entangled"] else EXIT_NOT_DETECTED


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read config {args.config!r}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {args.config!r} is not valid JSON: {exc.msg}") from exc
        config = ExperimentConfig.from_dict(data)
    else:
        if args.M is None or args.K is None or args.seed is None:
            raise ValidationError("simulate needs --config or all of --M, --K, --seed")
        config = ExperimentConfig(_state_description(args), args.M, args.K, args.seed)
    result = run_experiment(config, args.threads)
    _emit(args, result.to_csv() if args.format == "csv" else result.to_json())
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    sp = two_copy_operator_spectrum(args.n)
    _emit(args, _dumps({
        "schema": SCHEMA,
        "N": args.n,
        "all_eigenvalues": [_display(v) for v in sp.all_eigenvalues],
        "symmetric_eigenvalues": [_display(v) for v in sp.symmetric_eigenvalues],
    }))
    return EXIT_OK


def cmd_detectprob(args: argparse.Namespace) -> int:
    state = state_from_dict(_state_description(args))
    prob = detection_probability(state, _confidence(args), args.samples, args.seed, threads=args.threads)
    _emit(args, _dumps({"schema": SCHEMA, "N": state.num_parties, "confidence": args.confidence,
                        "samples": args.samples, "seed": args.seed, "detection_probability": prob}))
    return EXIT_OK


def cmd_eightphoton(args: argparse.Namespace) -> int:
    rate = eight_photon_scenario(args.K, _confidence(args), args.reps, args.seed, threads=args.threads)
    conf = _confidence(args)
    _emit(args, _dumps({"schema": SCHEMA, "N": 8, "M": 1, "K": _k_json(args.K),
                        "confidence": conf.p, "confidence_sided": conf.sided, "z": conf.z,
                        "repetitions": args.reps, "seed": args.seed, "success_rate": rate}))
    return EXIT_OK


def cmd_quditcheck(args: argparse.Namespace) -> int:
    report = qudit_bound_check(args.n, args.d, args.states, args.seed)
    print(f"note: {report.calibration_note}", file=sys.stderr)
    _emit(args, _dumps(report.to_dict()))
    return EXIT_OK


def parse_values(text: str, param: str) -> list:
    """Comma list; integer ranges may be written ``3..10``."""
    items: list = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if ".." in tok:
            lo, hi = tok.split("..", 1)
            try:
                items.extend(range(int(lo), int(hi) + 1))
            except ValueError as exc:
                raise ValidationError(f"bad range {tok!r}") from exc
            continue
        try:
            if param == "epsilon":
                items.append(float(tok))
            elif param == "K":
                items.append(_parse_K(tok))
            else:
                items.append(int(tok))
        except (ValueError, ValidationError) as exc:
            raise ValidationError(f"bad value {tok!r} for --param {param}") from exc
    if not items:
        raise ValidationError("--values is empty")
    return items


def _cell_state(desc: dict, param: str, value: Any) -> dict:
    desc = dict(desc)
    if param == "N":
        if desc.get("named") == "product":
            first = (desc.get("dirs") or ["z"])[0]
            desc["dirs"] = [first] * int(value)
        elif "named" in desc:
            desc["n"] = int(value)
        else:
            raise ValidationError("--param N needs a named state family")
    elif param == "epsilon":
        if desc.get("named") not in ("ghz", "ghz-noise"):
            raise ValidationError("--param epsilon needs --named ghz or ghz-noise")
        desc["named"] = "ghz-noise"
        desc["epsilon"] = float(value)
    return desc


def cmd_sweep(args: argparse.Namespace) -> int:
    values = parse_values(args.values, args.param)
    if args.reps < 1:
        raise ValidationError("--reps must be >= 1")
    base = _state_description(args)
    conf = _confidence(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.measure == "detectprob":
        w.writerow(["param", "value", "rep", "seed", "N", "confidence", "samples", "detection_probability"])
    else:
        w.writerow(["param", "value", "rep", "seed", "N", "M", "K", "confidence", "R_hat", "threshold", "entangled"])
    for i, value in enumerate(values):
        desc = _cell_state(base, args.param, value)
        M = int(value) if args.param == "M" else args.M
        K = value if args.param == "K" else args.K
        for rep in range(args.reps):
            seed = _rng.derive_seed(args.seed, _rng.REPETITION, i * args.reps + rep)
            if args.measure == "detectprob":
                state = state_from_dict(desc)
                p = detection_probability(state, conf, args.samples, seed, threads=args.threads)
                w.writerow([args.param, value, rep, seed, state.num_parties, conf.p, args.samples, repr(p)])
            else:
                v = _witness_verdict(desc, M, K, seed, conf, args.bound, args.exact, args.threads)
                w.writerow([args.param, value if args.param != "K" else _k_json(value), rep, seed,
                            v["N"], M, _k_json(K), conf.p, repr(v["estimate"]), repr(v["threshold"]),
                            str(v["entangled"]).lower()])
    _emit(args, buf.getvalue())
    return EXIT_OK


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="randcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"randcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tensor", help="full correlation tensor of a state")
    _add_state_options(p)
    _add_common(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("randcorr", help="correlation length and random correlations")
    _add_state_options(p)
    _add_common(p)
    p.add_argument("--M", type=int, help="also estimate by Monte Carlo over M settings")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_randcorr)

    p = sub.add_parser("witness", help="simulate an experiment and apply the witness")
    _add_state_options(p)
    _add_common(p)
    _add_confidence(p)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--K", type=_parse_K_arg, default=INFINITE, help="shots per setting or 'inf'")
    p.add_argument("--bound", choices=["pure", "separable"], default="pure")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="use the exact random correlations as the estimate")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("simulate", help="run a finite-statistics experiment")
    _add_state_options(p)
    _add_common(p)
    p.add_argument("--config", metavar="FILE", help="JSON experiment config")
    p.add_argument("--M", type=int)
    p.add_argument("--K", type=_parse_K_arg)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="spectrum of the two-copy operator")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("detectprob", help="single-setting detection probability")
    _add_state_options(p)
    _add_common(p)
    _add_confidence(p)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_detectprob)

    p = sub.add_parser("eightphoton", help="single-setting GHZ_8 scenario with K shots")
    _add_common(p)
    _add_confidence(p)
    p.add_argument("--K", type=_parse_K_arg, default=1000)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eightphoton)

    p = sub.add_parser("quditcheck", help="brute-force qudit correlation-length bound")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--states", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_quditcheck)

    p = sub.add_parser("sweep", help="CSV sweep over one parameter")
    _add_state_options(p)
    _add_common(p)
    _add_confidence(p)
    p.add_argument("--param", choices=["M", "K", "epsilon", "N"], required=True)
    p.add_argument("--values", required=True, help="comma list, integer ranges as a..b")
    p.add_argument("--measure", choices=["witness", "detectprob"], default="witness")
    p.add_argument("--M", type=int, default=1000)
    p.add_argument("--K", type=_parse_K_arg, default=INFINITE)
    p.add_argument("--bound", choices=["pure", "separable"], default="pure")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads is not None and args.threads < 0:
            raise ValidationError("--threads must be >= 0")
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (RandcorrError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
