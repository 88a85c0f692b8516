"""Command-line front end.

Exit codes: 0 success, 2 bad configuration or input, 3 invalid model or
failed precondition, 4 resource guard, 5 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from cantorlab import __version__
from cantorlab.covering import LambdaSpec, count, parse_rho
from cantorlab.dimensions import (
    block_interior_scales,
    empirical_box,
    mcmullen_dimensions,
    star_dimensions,
    symmetric_dimensions,
)
from cantorlab.errors import CantorlabError, ConfigError
from cantorlab.geometry import bilip_check, check_dynamics, phi_eval, phi_inverse_eval, pi_point
from cantorlab.models import (
    McMullenModel,
    StarModel,
    box_nonexist_sequence,
    fat_cantor_model,
    model_from_config,
)
from cantorlab.recipes import RECIPES, default_star, run_recipe
from cantorlab.symbolic import Word

PRESETS = {
    "mcmullen": McMullenModel,
    "star": default_star,
    "box-nonexist": box_nonexist_sequence,
    "fat-cantor": fat_cantor_model,
}


def load_model(ref: str):
    """A model from a JSON file, or one of the named presets."""
    path = Path(ref)
    if not path.exists():
        if ref in PRESETS:
            model = PRESETS[ref]()
            return model, model.to_config()
        raise ConfigError(f"model file {ref!r} not found (presets: {', '.join(sorted(PRESETS))})")
    text = path.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{ref}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return model_from_config(cfg), cfg


def _parse_exact(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {what} {text!r} as an exact rational") from exc


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return conv


def _k_list(text: str) -> list[int]:
    try:
        ks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad schedule {text!r}") from exc
    if not ks or any(k <= 0 for k in ks):
        raise argparse.ArgumentTypeError("schedule must be a nonempty list of positive integers")
    return ks


_SHARED_DEFAULTS = {"threads": 1, "format": "json", "out": "-"}


def build_parser() -> argparse.ArgumentParser:
    # Shared flags are accepted before or after the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive(int), default=argparse.SUPPRESS, help="worker processes for counting")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    p = argparse.ArgumentParser(prog="cantorlab", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    mp = sub.add_parser("map", help="evaluate the contractions or coding points")
    msub = mp.add_subparsers(dest="action", required=True)
    ev = msub.add_parser("eval", help="phi_i(x) or its inverse as an enclosure", parents=[common])
    ev.add_argument("--model", required=True)
    ev.add_argument("--branch", type=int, choices=(0, 1), required=True)
    ev.add_argument("--x", required=True, help="exact rational point, e.g. 1/3")
    ev.add_argument("--inverse", action="store_true")
    ev.add_argument("--tol", type=_positive(float), default=1e-12)
    ev.add_argument("--digits", type=_positive(int), default=25)
    sm = msub.add_parser("sample", help="enclosure of the coding point of a word", parents=[common])
    sm.add_argument("--model", required=True)
    sm.add_argument("--coding", required=True, help="word over {0,1}; '1^k' shorthand accepted")
    sm.add_argument("--digits", type=_positive(int), default=25)

    bp = sub.add_parser("bilip", help="check the one-step ratio bounds on all short words", parents=[common])
    bp.add_argument("--model", required=True)
    bp.add_argument("--depth", type=_positive(int), default=12)

    cp = sub.add_parser("count", help="exact size of the stopping-time cover at scale rho", parents=[common])
    cp.add_argument("--model", required=True)
    cp.add_argument("--rho", required=True, help="scale as 2^-K (exact)")
    cp.add_argument("--prefix", default=None, help="localise inside the cylinder of this word")
    cp.add_argument("--method", choices=("auto", "oracle", "classes", "literal"), default="auto")
    cp.add_argument("--classes", action="store_true", help="include the per-class breakdown")

    dp = sub.add_parser("dims", help="dimension report", parents=[common])
    dp.add_argument("--model", required=True)
    dp.add_argument("--mode", choices=("theory", "empirical", "both"), default="theory")
    dp.add_argument("--tol", type=_positive(float), default=1e-8)
    dp.add_argument("--schedule", type=_k_list, default=None, help="comma-separated K values for empirical slopes")
    dp.add_argument("--n-max", type=_positive(int), default=10_000)

    yp = sub.add_parser("dynamics", help="expanding map checks")
    ysub = yp.add_subparsers(dest="action", required=True)
    yc = ysub.add_parser("check", parents=[common])
    yc.add_argument("--model", required=True)
    yc.add_argument("--codings", type=_positive(int), default=1000)
    yc.add_argument("--depth", type=_positive(int), default=20)
    yc.add_argument("--seed", type=int, default=0)
    yc.add_argument("--delta", default=None, help="exact rational; default is the largest admissible power of two")

    wp = sub.add_parser("sweep", help="covering slopes over a range of K", parents=[common])
    wp.add_argument("--model", required=True)
    wp.add_argument("--k-min", type=_positive(int), default=100)
    wp.add_argument("--k-max", type=_positive(int), default=2000)
    wp.add_argument("--k-step", type=_positive(int), default=100)
    wp.add_argument("--block-interior", action="store_true", help="use block-interior scales of a star model")

    rp = sub.add_parser("repro", help="run a named reproduction recipe", parents=[common])
    rp.add_argument("recipe", nargs="?", help="recipe name; omit to list")
    return p


def _config_hash(args: argparse.Namespace, model_cfg) -> str:
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "format", "threads")}
    payload["model_config"] = model_cfg
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _slope_rows(model, ks, threads):
    rep = empirical_box(model, ks, workers=threads)
    return rep, [{"K": K, "slope": repr(s)} for K, s in rep.slopes]


def dispatch(args: argparse.Namespace) -> tuple[dict, list[dict] | None, object]:
    """Run one command; returns (result, csv rows or None, model config)."""
    cmd = args.command
    if cmd == "repro":
        if not args.recipe:
            return {"recipes": {k: v[1] for k, v in sorted(RECIPES.items())}}, None, None
        return run_recipe(args.recipe, threads=args.threads), None, None

    model, cfg = load_model(args.model)
    if cmd == "map" and args.action == "eval":
        x = _parse_exact(args.x, "--x")
        fn = phi_inverse_eval if args.inverse else phi_eval
        enc = fn(model, args.branch, x, tol=args.tol)
        return {"branch": args.branch, "inverse": args.inverse, "x": str(x), "enclosure": enc.as_decimal_strings(args.digits)}, None, cfg
    if cmd == "map" and args.action == "sample":
        w = Word.parse(args.coding)
        enc = pi_point(model, w, len(w))
        return {"coding": str(w), "enclosure": enc.as_decimal_strings(args.digits)}, None, cfg
    if cmd == "bilip":
        rep = bilip_check(model, args.depth)
        return rep.to_json(), None, cfg
    if cmd == "count":
        prefix = Word.parse(args.prefix) if args.prefix is not None else None
        rho = parse_rho(args.rho)
        rep = count(LambdaSpec(model, rho, prefix), method=args.method, workers=args.threads, with_classes=args.classes)
        return rep.to_json(), None, cfg
    if cmd == "dims":
        out: dict = {}
        rows = None
        if args.mode in ("theory", "both"):
            if isinstance(model, StarModel):
                rep = star_dimensions(model, args.tol)
            elif isinstance(model, McMullenModel):
                rep = mcmullen_dimensions(model, args.tol)
            else:
                rep = symmetric_dimensions(model, args.n_max).report
            out["theory"] = rep.to_json()
        if args.mode in ("empirical", "both"):
            ks = args.schedule or [250, 500, 1000, 1500, 2000]
            emp, rows = _slope_rows(model, ks, args.threads)
            out["empirical"] = {"lb_est": repr(emp.lb_est), "ub_est": repr(emp.ub_est), "slopes": rows, "asymptotic": False}
        return out, rows, cfg
    if cmd == "dynamics":
        delta = _parse_exact(args.delta, "--delta") if args.delta else None
        rep = check_dynamics(model, args.codings, args.depth, args.seed, delta=delta)
        return rep.to_json(), None, cfg
    if cmd == "sweep":
        if args.k_min > args.k_max:
            raise ConfigError("--k-min exceeds --k-max")
        if args.block_interior:
            if not isinstance(model, StarModel):
                raise ConfigError("--block-interior needs a star model")
            ks = [K for K, _ in block_interior_scales(model)]
        else:
            ks = list(range(args.k_min, args.k_max + 1, args.k_step))
        emp, rows = _slope_rows(model, ks, args.threads)
        return {"slopes": rows, "lb_est": repr(emp.lb_est), "ub_est": repr(emp.ub_est)}, rows, cfg
    raise ConfigError(f"unknown command {cmd!r}")  # pragma: no cover


def render(args, result: dict, rows, cfg) -> str:
    if args.format == "csv":
        if rows is None:
            raise ConfigError("--format csv is only available for slope series (sweep, dims --mode empirical)")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    doc = {
        "command": args.command,
        "config_hash": _config_hash(args, cfg),
        "result": _drop_timing(result),
        "version": __version__,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _drop_timing(result: dict) -> dict:
    # Wall-clock time is the one non-deterministic field; keep it out of the bytes.
    return {k: v for k, v in result.items() if k != "elapsed_seconds"}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, default in _SHARED_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, default)
    try:
        result, rows, cfg = dispatch(args)
        text = render(args, result, rows, cfg)
    except CantorlabError as exc:
        print(f"cantorlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"cantorlab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 5
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    if "elapsed_seconds" in result:
        print(f"elapsed {result['elapsed_seconds']} s", file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
