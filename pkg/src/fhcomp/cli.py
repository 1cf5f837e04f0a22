"""Command-line entry point: ``fhcomp {codec,plan,sim}``.

Configuration files are TOML.  Outputs are written to a temporary file in
the destination directory and renamed on success, so a failed command never
leaves partial output behind.  Relative output paths, and default output
names when ``--out`` is omitted, resolve against ``$FHCOMP_OUT_DIR`` (the
working directory when unset).

Exit codes: 0 success, 1 usage or configuration error, 2 malformed input
data, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .capacity import Direction, SplitParams, plan_rows
from .codecs import BfpConfig, BlockScalingConfig, Method, MuLawConfig, compress_iq, decompress_iq
from .iq_core import iq_bytes, read_iq
from .simsys import ScenarioConfig, run

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
OUT_DIR_ENV = "FHCOMP_OUT_DIR"

SWEEP_COLUMNS = ("cap", "load", "numerology", "mean_throughput", "median_delay",
                 "fh_requirement", "fh_utilization_mean")
PLAN_COLUMNS = ("option", "capacity_dl_bps", "capacity_ul_bps", "latency_min_s",
                "latency_max_s", "compression_ratio", "reduction_percent")
SATURATION_RATIO = 0.95


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 1."""


class DataError(Exception):
    """Malformed input data; maps to exit code 2."""


# --- files ------------------------------------------------------------------------


def out_path(path: str | None, default_name: str) -> Path:
    base = Path(os.environ.get(OUT_DIR_ENV) or ".")
    target = Path(path) if path else Path(default_name)
    return target if target.is_absolute() else base / target


def write_atomic(path: Path, data: bytes | str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def preset_names() -> list[str]:
    files = resources.files("fhcomp") / "presets"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".toml"))


def load_toml(source: str) -> dict:
    """Read a TOML file, or a packaged preset when ``source`` names one."""
    path = Path(source)
    if not path.exists():
        preset = resources.files("fhcomp") / "presets" / f"{source}.toml"
        if not preset.is_file():
            raise UsageError(f"config {source!r} not found (presets: {', '.join(preset_names())})")
        text = preset.read_text()
    else:
        text = path.read_text()
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"{source}: {exc}") from None


def _check_keys(table: dict, allowed, where: str) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise UsageError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _build(cls, table: dict, where: str):
    _check_keys(table, [f.name for f in dataclasses.fields(cls)], where)
    try:
        return cls(**table)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{where}: {exc}") from None


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


# --- codec ------------------------------------------------------------------------

CODEC_CONFIGS = {Method.BFP: BfpConfig, Method.BLOCK_SCALING: BlockScalingConfig,
                 Method.MU_LAW: MuLawConfig}


def codec_config(method: Method, path: str | None):
    if method is Method.MODULATION:
        if path:
            table = load_toml(path)
            _check_keys(table.get("codec", table), (), "codec config")
        return None
    cls = CODEC_CONFIGS.get(method)
    if cls is None:
        raise UsageError(f"method {method.name.lower()} does not operate on IQ files")
    if not path:
        return cls()
    table = load_toml(path)
    if "codec" in table:
        _check_keys(table, ("codec",), "codec config")
    return _build(cls, table.get("codec", table), "codec config")


def cmd_codec(args) -> int:
    try:
        method = Method.parse(args.method) if args.method else None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.direction == "compress" and method is None:
        raise UsageError("--method is required for compression")
    cfg = codec_config(method, args.config) if method is not None else None
    src = Path(args.input)
    if not src.is_file():
        raise UsageError(f"input file {src} does not exist")
    data = src.read_bytes()

    try:
        if args.direction == "compress":
            samples = read_iq(data)
            out, report = compress_iq(samples, method, cfg)
            suffix = ".fhc"
        else:
            samples, report = decompress_iq(data, cfg)
            out = iq_bytes(samples)
            suffix = ".iq"
    except (ValueError, OverflowError) as exc:
        raise DataError(str(exc)) from None

    dest = out_path(args.out, src.stem + suffix)
    write_atomic(dest, out)
    ratio = report.ratio
    effective = dataclasses.asdict(cfg) if cfg is not None else {}
    print(f"direction        {args.direction}")
    print(f"method           {method.name.lower() if method else 'from blocks'}")
    print(f"config           {json.dumps(effective, sort_keys=True)}")
    print(f"samples          {report.samples}")
    print(f"blocks           {report.blocks}")
    print(f"input bytes      {len(data)}")
    print(f"output bytes     {len(out)}")
    print(f"uncompressed bits {report.uncompressed_bits}")
    print(f"compressed bits  {report.compressed_bits}")
    print(f"ratio            {'n/a' if ratio is None else f'{ratio:.4f}'}")
    print(f"written          {dest}")
    return EXIT_OK


# --- plan -------------------------------------------------------------------------

MODCOMP_KEYS = ("bandwidth", "numerology", "overhead", "layers", "bitwidths")


def plan_from_config(table: dict):
    _check_keys(table, ("dl", "ul", "modcomp"), "plan config")
    params = {}
    for key, direction in (("dl", Direction.DL), ("ul", Direction.UL)):
        if key in table:
            sub = dict(table[key])
            sub.setdefault("direction", direction)
            params[direction] = _build(SplitParams, sub, f"[{key}]")
    modcomp = table.get("modcomp")
    if modcomp is not None:
        _check_keys(modcomp, MODCOMP_KEYS, "[modcomp]")
    if not params and modcomp is None:
        raise UsageError("plan config needs [dl], [ul] or [modcomp]")
    return params.get(Direction.DL), params.get(Direction.UL), modcomp


def cmd_plan(args) -> int:
    dl, ul, modcomp = plan_from_config(load_toml(args.config))
    try:
        rows = plan_rows(dl, ul, modcomp)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if modcomp and not (dl or ul):
        rows = [r for r in rows if "W=" in r.option]
    records = [
        (r.option, r.capacity_dl, r.capacity_ul,
         r.latency.low if r.latency else None, r.latency.high if r.latency else None,
         r.compression_ratio, r.reduction_percent)
        for r in rows
    ]
    text = _csv(PLAN_COLUMNS, [[_cell(v) for v in rec] for rec in records])
    dest = out_path(args.out, "plan.csv")
    write_atomic(dest, text)
    write_atomic(dest.with_name(dest.name + ".config.json"), _config_json(
        {"dl": _params_dict(dl), "ul": _params_dict(ul), "modcomp": modcomp}))

    def gbps(v):
        return "-" if v is None else f"{v / 1e9:10.4f}"

    print(f"{'option':<16}{'DL Gbps':>11}{'UL Gbps':>11}  latency       ratio  reduction")
    for r in rows:
        lat = "-" if r.latency is None else _latency_text(r.latency)
        ratio = "" if r.compression_ratio is None else f"{r.compression_ratio:.4f}"
        red = "" if r.reduction_percent is None else f"{r.reduction_percent:.2f}%"
        print(f"{r.option:<16}{gbps(r.capacity_dl):>11}{gbps(r.capacity_ul):>11}  {lat:<12}{ratio:>8}  {red}")
    print(f"written {dest}")
    return EXIT_OK


def _latency_text(bound) -> str:
    if bound.is_range:
        return f"{bound.low * 1e3:g}-{bound.high * 1e3:g} ms"
    if bound.low >= 1e-3:
        return f"{bound.low * 1e3:g} ms"
    return f"{bound.low * 1e6:g} us"


def _params_dict(p: SplitParams | None):
    if p is None:
        return None
    out = {}
    for f in dataclasses.fields(p):
        value = getattr(p, f.name)
        out[f.name] = value.value if isinstance(value, Direction) else value
    return out


def _config_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


# --- sim --------------------------------------------------------------------------

SWEEP_KEYS = ("caps", "loads", "numerologies")


def scenario_from_config(table: dict, seed: int | None) -> ScenarioConfig:
    if "scenario" in table:
        _check_keys(table, ("scenario",), "scenario config")
        table = table["scenario"]
    if seed is not None:
        table = {**table, "rng_seed": seed}
    try:
        return ScenarioConfig.from_dict(table)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except (TypeError, ValueError) as exc:
        raise UsageError(f"scenario config: {exc}") from None


def sweep_points(base: ScenarioConfig, sweep: dict | None) -> list[ScenarioConfig]:
    if sweep is None:
        return [base]
    _check_keys(sweep, SWEEP_KEYS, "sweep config")
    caps = sweep.get("caps", [base.mod_cap.label])
    loads = sweep.get("loads", [base.offered_load_per_ue])
    mus = sweep.get("numerologies", [base.numerology])
    try:
        return [base.replace(mod_cap=c, offered_load_per_ue=float(l), numerology=int(m))
                for m in mus for l in loads for c in caps]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"sweep config: {exc}") from None


def _run_point(cfg: ScenarioConfig):
    report = run(cfg)
    return report.summary(), report.packet_delays


def cmd_sim(args) -> int:
    base = scenario_from_config(load_toml(args.config), args.seed)
    points = sweep_points(base, load_toml(args.sweep) if args.sweep else None)
    if args.jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_point, points))
    else:
        results = [_run_point(p) for p in points]

    rows, trace = [], []
    print(f"{'cap':>7} {'load Mbps':>9} {'mu':>3} {'thr Mbps':>9} {'delay ms':>9} "
          f"{'FH Gbps':>9} {'FH used':>9}  state")
    for cfg, (summary, delays) in zip(points, results):
        row = (cfg.mod_cap.label, cfg.offered_load_per_ue, cfg.numerology,
               summary["mean_e2e_throughput"], summary["median_e2e_delay"],
               summary["fronthaul_requirement"], summary["fronthaul_utilization_mean"])
        rows.append([_cell(v) for v in row])
        saturated = summary["offered_bytes"] > 0 and summary["delivered_ratio"] < SATURATION_RATIO
        print(f"{row[0]:>7} {row[1] / 1e6:9.1f} {row[2]:3d} {row[3] / 1e6:9.3f} {row[4] * 1e3:9.3f} "
              f"{row[5] / 1e9:9.3f} {row[6] / 1e9:9.3f}  "
              f"{'SATURATED' if saturated else 'ok'} ({summary['delivered_ratio']:.3f} delivered)")
        for d in delays:
            trace.append([cfg.mod_cap.label, _cell(cfg.offered_load_per_ue), str(cfg.numerology), repr(float(d))])

    dest = out_path(args.out, "sweep.csv")
    write_atomic(dest, _csv(SWEEP_COLUMNS, rows))
    write_atomic(dest.with_name(dest.name + ".config.json"), _config_json(
        {"base": base.as_dict(), "points": [p.as_dict() for p in points]}))
    print(f"written {dest}")
    if args.delay_trace:
        tpath = out_path(args.delay_trace, "delays.csv")
        write_atomic(tpath, _csv(("cap", "load", "numerology", "delay_s"), trace))
        print(f"written {tpath}")
    return EXIT_OK


# --- entry point ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fhcomp", description="Fronthaul compression, split dimensioning "
                     "and modulation-cap simulation tools.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("codec", help="compress or decompress an IQ file")
    p.add_argument("--method", help="bfp, blockscale, mulaw or modcomp (required to compress)")
    p.add_argument("--direction", choices=("compress", "decompress"), default="compress")
    p.add_argument("--in", dest="input", required=True, help="input file")
    p.add_argument("--out", help="output file")
    p.add_argument("--config", help="TOML codec parameters")
    p.set_defaults(func=cmd_codec)

    p = sub.add_parser("plan", help="split-option capacity report")
    p.add_argument("--config", required=True, help=f"TOML file or preset ({', '.join(preset_names())})")
    p.add_argument("--out", help="CSV output (default plan.csv)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sim", help="run the multi-cell simulation or a sweep")
    p.add_argument("--config", required=True, help="TOML scenario file or preset")
    p.add_argument("--sweep", help="TOML file with caps, loads and numerologies lists")
    p.add_argument("--out", help="CSV output (default sweep.csv)")
    p.add_argument("--seed", type=int, help="override rng_seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs")
    p.add_argument("--delay-trace", help="also write per-packet delays to this CSV")
    p.set_defaults(func=cmd_sim)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fhcomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"fhcomp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"fhcomp: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
