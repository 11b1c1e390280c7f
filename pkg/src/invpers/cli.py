"""Command-line pipeline.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid schedule or
configuration, 4 resource ceiling hit, 1 anything else.  Failures print a
JSON object ``{"error": {...}}`` on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import (
    InputError,
    InternalConsistencyError,
    PreconditionError,
    ResourceLimitError,
    StructuralError,
    ValidationError,
)
from .config import FasConfig, HomologyConfig
from .fas import fas_report
from .finite_spaces import level_poset, order_complex
from .metric import TOL_TIE, generate_space, load_space, parse_generator
from .persistence import (
    Barcode,
    bottleneck_distance,
    critical_values,
    interval_decomposition,
    inverse_module,
    vr_module,
)

EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_RESOURCE = 4


# --------------------------------------------------------------------------
# argument parsing


def _space_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV or JSON point cloud / distance matrix")
    src.add_argument("--generate", help="warsaw:<n>, triadic:<n> or cantor:<depth>")
    p.add_argument("--kind", choices=["auto", "points", "matrix"], default="auto")
    p.add_argument("--tol-tie", type=float, default=TOL_TIE)


def _fas_args(p):
    p.add_argument("--schedule", default=None,
                   help="auto[:c] | explicit:<e1,e2,...> | preset (default: preset for warsaw/triadic, auto otherwise)")
    p.add_argument("--strategy", default=None, help="greedy | all | ultrametric | file:<json>")
    p.add_argument("--max-levels", type=int, default=20)
    p.add_argument("--gamma-override", default=None, help="level=value,... replacing the sample gamma")
    p.add_argument("--continuum-gamma", action="store_true",
                   help="with the preset schedules use the continuum gamma values")
    p.add_argument("--seed", type=int, default=0)


def _homology_args(p, with_range=True):
    p.add_argument("--dims", default="1", help="comma list of homology dimensions")
    p.add_argument("--field", type=int, default=2)
    if with_range:
        p.add_argument("--range", default=None, help="n:m level range (default: all levels)")
    p.add_argument("--size-cap", type=int, default=None)


def _output_args(p):
    p.add_argument("--output-dir", default=None, help="write artifacts here instead of stdout")
    p.add_argument("--format", choices=["json", "json+svg"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invpers", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fas = sub.add_parser("fas", help="finite approximative sequences").add_subparsers(dest="action", required=True)
    p = fas.add_parser("build", help="build a FAS and print its report")
    _space_args(p)
    _fas_args(p)
    _output_args(p)

    cx = sub.add_parser("complex", help="per-level finite spaces and order complexes").add_subparsers(
        dest="action", required=True)
    p = cx.add_parser("build", help="simplex counts of every level's order complex")
    _space_args(p)
    _fas_args(p)
    p.add_argument("--levels", default=None, help="n:m level range (default: all levels)")
    p.add_argument("--size-cap", type=int, default=None)
    p.add_argument("--dump", default=None, help="write simplices of the last requested level here")
    _output_args(p)

    ps = sub.add_parser("persist", help="barcodes").add_subparsers(dest="action", required=True)
    p = ps.add_parser("inverse", help="inverse barcode of the FAS")
    _space_args(p)
    _fas_args(p)
    _homology_args(p)
    _output_args(p)
    p = ps.add_parser("vr", help="Vietoris-Rips barcode of the space")
    _space_args(p)
    _homology_args(p, with_range=False)
    p.add_argument("--thresholds", default=None, help="comma list of scales (default: all pairwise distances)")
    p.add_argument("--max-scale", type=float, default=None, help="drop critical values above this")
    _output_args(p)

    p = sub.add_parser("diff", help="bottleneck distance between two barcode files")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--mapping", choices=["scale", "index"], default="scale")

    p = sub.add_parser("run", help="full pipeline")
    _space_args(p)
    _fas_args(p)
    _homology_args(p)
    p.add_argument("--vr", action="store_true", help="also compute the Rips barcode and the bottleneck distance")
    p.add_argument("--max-scale", type=float, default=None)
    _output_args(p)
    return parser


# --------------------------------------------------------------------------
# helpers


def _int_list(text: str, what: str) -> list:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise PreconditionError(f"{what} must be a comma list of integers, got {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise PreconditionError(f"{what} must be non-negative integers")
    return vals


def _range(text: str | None, top: int) -> tuple:
    if text is None:
        return 1, top
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise PreconditionError(f"range must look like n:m, got {text!r}") from None
    if not 1 <= a <= b <= top:
        raise PreconditionError(f"range {a}:{b} outside the built levels 1..{top}")
    return a, b


def load_input(args):
    if args.input:
        try:
            return load_space(args.input, args.kind), None
        except ValidationError as exc:
            raise InputError(f"{args.input}: {exc}") from None
    name, value = parse_generator(args.generate)
    return generate_space(args.generate), (name, value)


def fas_config(args) -> FasConfig:
    return FasConfig(
        schedule=args.schedule,
        strategy=args.strategy,
        max_levels=args.max_levels,
        gamma_override=FasConfig.parse_overrides(args.gamma_override),
        continuum_gamma=args.continuum_gamma,
        seed=args.seed,
        tol_tie=args.tol_tie,
    )


def make_fas(args, space, gen):
    return fas_config(args).build(space, gen)


def config_echo(args) -> dict:
    skip = {"output_dir", "command", "action", "file1", "file2"}
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    echo["command"] = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    echo["version"] = __version__
    return echo


def _real(x: float):
    """JSON has no infinity; unbounded values are written as the string "inf"."""
    return "inf" if x == float("inf") else x


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


class Emitter:
    """Writes named artifacts into ``--output-dir`` or collects them for stdout."""

    def __init__(self, args):
        self.dir = Path(args.output_dir) if getattr(args, "output_dir", None) else None
        self.svg = getattr(args, "format", "json") == "json+svg"
        self.stdout = {}
        if self.dir is not None:
            try:
                self.dir.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise InputError(f"cannot create output directory {self.dir}: {exc}") from None

    def json(self, name: str, obj):
        if self.dir is None:
            self.stdout[name] = obj
        else:
            (self.dir / f"{name}.json").write_text(_dumps(obj))

    def barcode(self, name: str, bc: Barcode, echo: dict):
        self.json(name, {**bc.to_dict(), "config_echo": echo})
        if self.svg and self.dir is not None:
            (self.dir / f"{name}.svg").write_text(bc.to_svg())

    def finish(self):
        if self.stdout:
            obj = next(iter(self.stdout.values())) if len(self.stdout) == 1 else self.stdout
            sys.stdout.write(_dumps(obj))
        else:
            sys.stdout.write(_dumps({"output_dir": str(self.dir)}))


# --------------------------------------------------------------------------
# commands


def homology_config(args, top: int) -> HomologyConfig:
    return HomologyConfig(tuple(_int_list(args.dims, "--dims")), args.field,
                          _range(args.range, top), args.size_cap)


def _inverse_barcodes(args, fas, echo, out):
    cfg = homology_config(args, len(fas))
    result = {}
    for k in cfg.dims:
        bc = interval_decomposition(inverse_module(fas, k, cfg.field_char, cfg.level_range, cfg.size_cap))
        out.barcode(f"barcode_inverse_H{k}", bc, echo)
        result[k] = bc
    return result


def _vr_barcodes(args, space, echo, out):
    dims = _int_list(args.dims, "--dims")
    thresholds = None
    if getattr(args, "thresholds", None):
        try:
            thresholds = [float(t) for t in args.thresholds.split(",") if t.strip()]
        except ValueError:
            raise PreconditionError("--thresholds must be a comma list of numbers") from None
    elif args.max_scale is not None:
        thresholds = [t for t in critical_values(space, args.tol_tie) if t <= args.max_scale + args.tol_tie]
    result = {}
    for k in dims:
        bc = interval_decomposition(vr_module(space, k, args.field, thresholds, args.tol_tie))
        out.barcode(f"barcode_vr_H{k}", bc, echo)
        result[k] = bc
    return result


def _complex_stats(fas, lo, hi, size_cap, dump=None):
    stats = []
    for n in range(lo, hi + 1):
        P = level_poset(fas, n, size_cap)
        K = order_complex(P)
        stats.append({
            "level": n,
            "epsilon": fas.level(n).epsilon,
            "approximation_size": len(fas.level(n).approx),
            "poset_size": len(P),
            "boundary_ties": P.boundary_ties,
            "simplex_counts": K.counts(),
            "euler_characteristic": K.euler_characteristic(),
        })
        if dump is not None and n == hi:
            with open(dump, "w") as fh:
                K.dump(fh)
    return stats


def cmd_fas_build(args):
    space, gen = load_input(args)
    fas = make_fas(args, space, gen)
    out = Emitter(args)
    out.json("fas", {**fas_report(fas), "config_echo": config_echo(args)})
    out.finish()


def cmd_complex_build(args):
    space, gen = load_input(args)
    fas = make_fas(args, space, gen)
    lo, hi = _range(args.levels, len(fas))
    out = Emitter(args)
    out.json("complexes", {"levels": _complex_stats(fas, lo, hi, args.size_cap, args.dump),
                           "config_echo": config_echo(args)})
    out.finish()


def cmd_persist_inverse(args):
    space, gen = load_input(args)
    fas = make_fas(args, space, gen)
    out = Emitter(args)
    _inverse_barcodes(args, fas, config_echo(args), out)
    out.finish()


def cmd_persist_vr(args):
    space, _ = load_input(args)
    out = Emitter(args)
    _vr_barcodes(args, space, config_echo(args), out)
    out.finish()


def _read_barcode(path) -> Barcode:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: not a barcode object")
    try:
        return Barcode.from_dict(data)
    except PreconditionError as exc:
        raise InputError(f"{path}: {exc}") from None


def _matching_json(matching):
    def enc(bar):
        return None if bar is None else [bar[0], _real(bar[1])]
    return [{"left": enc(a), "right": enc(b)} for a, b in matching]


def cmd_diff(args):
    b1, b2 = _read_barcode(args.file1), _read_barcode(args.file2)
    if b1.dimension != b2.dimension:
        raise ValidationError(f"dimension mismatch: H_{b1.dimension} vs H_{b2.dimension}")
    if b1.field_char != b2.field_char:
        raise ValidationError(f"field mismatch: F_{b1.field_char} vs F_{b2.field_char}")
    d, matching = bottleneck_distance(b1, b2, args.mapping, with_matching=True)
    sys.stdout.write(_dumps({"bottleneck": _real(d), "mapping": args.mapping,
                             "dimension": b1.dimension, "matching": _matching_json(matching)}))


def cmd_run(args):
    space, gen = load_input(args)
    fas = make_fas(args, space, gen)
    echo = config_echo(args)
    out = Emitter(args)
    out.json("fas", {**fas_report(fas), "config_echo": echo})
    lo, hi = _range(args.range, len(fas))
    out.json("complexes", {"levels": _complex_stats(fas, lo, hi, args.size_cap), "config_echo": echo})
    inv = _inverse_barcodes(args, fas, echo, out)
    summary = {"inverse": {f"H{k}": bc.to_dict()["bars"] for k, bc in inv.items()}, "config_echo": echo}
    if args.vr:
        vr = _vr_barcodes(args, space, echo, out)
        summary["vr"] = {f"H{k}": bc.to_dict()["bars"] for k, bc in vr.items()}
        summary["bottleneck"] = {f"H{k}": _real(bottleneck_distance(inv[k], vr[k])) for k in inv}
    out.json("summary", summary)
    out.finish()


COMMANDS = {
    ("fas", "build"): cmd_fas_build,
    ("complex", "build"): cmd_complex_build,
    ("persist", "inverse"): cmd_persist_inverse,
    ("persist", "vr"): cmd_persist_vr,
    ("diff", None): cmd_diff,
    ("run", None): cmd_run,
}


def _error(kind: str, exc: Exception, code: int) -> int:
    body = {"type": kind, "message": str(exc), "exit_code": code}
    if getattr(exc, "required_cap", None) is not None:
        body["required_cap"] = exc.required_cap
    sys.stdout.write(_dumps({"error": body}))
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[(args.command, getattr(args, "action", None))]
    try:
        handler(args)
    except (InputError, StructuralError) as exc:
        return _error("input", exc, EXIT_INPUT)
    except ResourceLimitError as exc:
        return _error("resource", exc, EXIT_RESOURCE)
    except (ValidationError, PreconditionError) as exc:
        return _error("config", exc, EXIT_CONFIG)
    except InternalConsistencyError as exc:
        return _error("internal", exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
