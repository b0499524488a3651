"""Command-line front end.

Subcommands: ``validate``, ``classify``, ``equiv``, ``example`` and
``probe {lln,conservativeness,clt,divergence}``. Reports go to stdout (or
``--out``) as JSON with schema ``markov-krieger/1`` and 17 significant
digits per float, or as CSV with ``--format csv``. Diagnostics go to
stderr.

Exit codes: 0 success, 2 invalid input, 3 inconclusive, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .classifier import INCONCLUSIVE_VERDICT, classify
from .cocycles import build_configuration
from .config import SCHEMA, Config, example_config, load_config, build_measure
from .constructor_audit import audit_construction, closed_form_certificates
from .equivalence import equivalence_test
from .errors import AdjacencyMismatch, ConfigError, MarkovKriegerError
from .examples import (
    FAMILIES,
    FULLSHIFT2,
    ConstructorSeeds,
    check_conservativeness_conditions,
    check_nonequivalence_condition,
    check_nonsingularity_condition,
    inductive_construct,
)
from .measure import check_mixing_inequalities
from .simulate import (
    ProbeReport,
    clt_probe,
    conservativeness_probe,
    divergence_probe,
    drift_check,
    endpoint_events,
    lln_probe,
    pair_indicator,
    reports_to_csv,
    reports_to_json,
    state_indicator,
)

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_INTERNAL = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# output


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, "to_dict"):
        return _plain(x.to_dict())
    return x


def _encode(x, indent: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{_encode(str(k))}: {_encode(v, indent + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, list):
        if not x:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in x):
            return "[" + ", ".join(_encode(v) for v in x) + "]"
        return "[\n" + ",\n".join(inner + _encode(v, indent + 1) for v in x) + "\n" + pad + "]"
    if isinstance(x, bool) or x is None:
        return {True: "true", False: "false", None: "null"}[x]
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return f'"{x}"'
        return format(x, ".17g")
    if isinstance(x, int):
        return str(x)
    s = str(x).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{s}"'


def _flat_rows(x, prefix: str = ""):
    if isinstance(x, dict):
        for k, v in x.items():
            yield from _flat_rows(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(x, list):
        for k, v in enumerate(x):
            yield from _flat_rows(v, f"{prefix}[{k}]")
    else:
        yield prefix, x


def _emit(payload, args, probes=None) -> None:
    if args.format == "csv":
        if probes is not None:
            text = reports_to_csv(probes)
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            for k, v in _flat_rows(_plain(payload)):
                w.writerow([k, format(v, ".17g") if isinstance(v, float) else v])
            text = buf.getvalue()
    else:
        body = _plain(payload)
        if isinstance(body, dict) and "schema" not in body:
            body = {"schema": SCHEMA, **body}
        text = _encode(body) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands


def _config(args) -> Config:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    return cfg.with_run(horizon=args.horizon, seed=args.seed, samples=args.samples)


def cmd_validate(args) -> int:
    cfg = _config(args)
    mu = build_measure(cfg)
    C = mu.mixing_constant()
    rep = check_mixing_inequalities(mu, tuple(cfg.run.window))
    _emit({"status": "Pass", "delta": mu.delta, "M": mu.primitivity,
           "mixing_constant": {"value": C.value, "delta_power": mu.delta ** mu.primitivity,
                               "warning": C.warning},
           "mixing_checks": rep.to_dict()}, args)
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = _config(args)
    mu = build_measure(cfg)
    verdict = classify(mu, horizon=cfg.run.horizon)
    _emit(verdict.to_dict(), args)
    if verdict.verdict == INCONCLUSIVE_VERDICT:
        _diag(f"inconclusive: {', '.join(verdict.reasons)}")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_equiv(args) -> int:
    cfg_a = _config(args)
    if not args.other:
        raise ConfigError("--other is required")
    cfg_b = load_config(args.other)
    if cfg_a.sft != cfg_b.sft:
        raise AdjacencyMismatch("the two configs use different adjacency matrices")
    verdict = equivalence_test(build_measure(cfg_a), build_measure(cfg_b), cfg_a.run.horizon)
    _emit(verdict.to_dict(), args)
    return EXIT_INCONCLUSIVE if verdict.status == "Inconclusive" else EXIT_OK


def example_report(family: str, rounds: int, seeds: ConstructorSeeds, q: Fraction) -> dict:
    """Constructor output with its conditions and the independent audit."""
    inp = inductive_construct(rounds, seeds, q)
    audits = audit_construction(inp)
    return {"family": family, "input": inp.to_dict(), "summary": inp.summary(),
            "conditions": {"nonsingularity": check_nonsingularity_condition(inp).to_dict(),
                           "nonequivalence": check_nonequivalence_condition(inp).to_dict(),
                           "conservativeness": check_conservativeness_conditions(inp).to_dict()},
            "certificates": closed_form_certificates(),
            "audit": [a.to_dict() for a in audits],
            "audit_holds": all(a.holds for a in audits)}


def cmd_example(args) -> int:
    seeds = ConstructorSeeds(Fraction(args.p1), *args.seeds, r_scale=Fraction(args.r_scale),
                             r_ratio=Fraction(args.r_ratio))
    q = Fraction(args.q)
    if args.emit_config:
        inp = inductive_construct(args.rounds, seeds, q)
        _emit(example_config(args.family, inp).to_dict(), args)
        return EXIT_OK
    rep = example_report(args.family, args.rounds, seeds, q)
    _emit(rep, args)
    return EXIT_OK if rep["audit_holds"] else EXIT_INTERNAL


def _probe_function(cfg: Config, d: int):
    spec = cfg.run.probe_function
    if spec[0] == "state":
        return state_indicator(d, int(spec[1]))
    if spec[0] == "pair":
        return pair_indicator(d, int(spec[1]), int(spec[2]))
    raise ConfigError(f"unknown probe function {spec!r}")


def cmd_probe(args) -> int:
    cfg = _config(args)
    mu = build_measure(cfg)
    run = cfg.run
    reports: list[ProbeReport] = []
    if args.kind == "lln":
        f = _probe_function(cfg, mu.size)
        for side in ("forward", "reverse"):
            reports.append(lln_probe(mu, f, run.N, run.samples, run.seed, side=side,
                                     sigmas=run.sigmas))
    elif args.kind == "conservativeness":
        f = _probe_function(cfg, mu.size)
        reports.append(conservativeness_probe(mu, f, run.N, run.samples, run.seed,
                                              sigmas=run.sigmas))
    elif args.kind == "clt":
        conf = build_configuration(mu, run.K)
        reports.append(clt_probe(conf, mu, run.K, run.samples, run.seed, threshold=run.ks_threshold,
                                 sigmas=run.sigmas))
        Ks = sorted({max(1, run.K * j // 4) for j in range(1, 5)})
        reports.append(drift_check(conf, mu, Ks, run.samples, run.seed, sigmas=run.sigmas))
    elif args.kind == "divergence":
        spec = run.probe_function
        u0, v0 = (int(spec[1]), int(spec[2])) if spec[0] == "pair" else (0, 0)
        events = endpoint_events(mu, u0, v0, run.N, run.samples, run.seed)
        bound = mu.mixing_constant().value * mu.delta ** 2
        reports.append(divergence_probe(np.ones(run.N), events, seed=run.seed, lower_bound=bound,
                                        sigmas=run.sigmas))
    payload = reports_to_json(reports)
    _emit(payload, args, probes=reports)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--horizon", type=int, help="partial-sum horizon for series tests")
    common.add_argument("--seed", type=int, help="random seed for probes")
    common.add_argument("--samples", type=int, help="number of sampled trajectories")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="markov-krieger", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="Doeblin constant, mixing exponent and bounds")
    sub.add_parser("classify", parents=[common], help="Krieger type verdict")
    e = sub.add_parser("equiv", parents=[common], help="equivalence series of two measures")
    e.add_argument("--other", help="config of the reference measure")
    x = sub.add_parser("example", parents=[common], help="run and audit the inductive constructor")
    x.add_argument("--family", choices=FAMILIES, default=FULLSHIFT2)
    x.add_argument("--rounds", type=int, default=3)
    x.add_argument("--p1", default="7/10")
    x.add_argument("--seeds", type=int, nargs=3, default=(1, 2, 3), metavar=("M0", "N1", "M1"))
    x.add_argument("--r-scale", default="1")
    x.add_argument("--r-ratio", default="1/2")
    x.add_argument("--q", default="2/5")
    x.add_argument("--emit-config", action="store_true", help="print a config instead of the report")
    pr = sub.add_parser("probe", parents=[common], help="Monte Carlo probes")
    pr.add_argument("kind", choices=("lln", "conservativeness", "clt", "divergence"))
    return p


COMMANDS = {"validate": cmd_validate, "classify": cmd_classify, "equiv": cmd_equiv,
            "example": cmd_example, "probe": cmd_probe}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MarkovKriegerError as exc:
        _diag(f"{exc.code}: {exc}")
        _emit({"status": "Error", "error": exc.to_dict()}, args)
        return exc.exit_code
    except (OSError, ValueError, KeyError, TypeError) as exc:
        _diag(f"invalid input: {exc}")
        _emit({"status": "Error", "error": {"code": type(exc).__name__, "message": str(exc)}}, args)
        return EXIT_INVALID
    except (AssertionError, ArithmeticError) as exc:
        _diag(f"internal invariant violated: {exc}")
        _emit({"status": "Error", "error": {"code": "InternalInvariant", "message": str(exc)}}, args)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
