"""Command-line front end.

Subcommands: ``ami-curve``, ``power-alloc``, ``validate``, ``fading-info``.
Exit codes: 0 success, 1 argument error, 2 numerical failure,
3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ami, awgn_info, power_alloc
from .constellation import Constellation, from_name
from .errors import NumericalError
from .mg_fading import FadingParams, MixtureGamma, from_params, parse_params

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3

AMI_COLUMNS = ["snr_db", "ami_bits", "gap_bits", "asymptote_gap_bits"]


class ArgumentError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


@dataclass
class Fading:
    """A mixture plus, when it came from a named family, its parameters."""

    mg: MixtureGamma
    params: FadingParams | None = None


@dataclass
class RunConfig:
    command: str
    fading: list = field(default_factory=list)
    constellation: list = field(default_factory=lambda: ["qam4"])
    snr_db: list = field(default_factory=list)
    order: int = 30
    trials: int = 100_000
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    method: str = "exact"
    truncation: int | None = None

    def __post_init__(self):
        if not self.snr_db:
            raise ArgumentError("empty SNR grid")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ArgumentError("SNR grid must be strictly increasing")
        if self.order < 1:
            raise ArgumentError("quadrature order must be >= 1")
        if self.format not in ("csv", "json"):
            raise ArgumentError(f"unknown output format {self.format!r}")


def parse_grid(text) -> list[float]:
    """``start:step:stop`` (inclusive), a comma list, or a list of numbers."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0:
            raise ArgumentError(f"bad SNR grid {text!r}; expected start:step:stop with step > 0")
        start, step, stop = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(max(n, 0))]
    return [float(v) for v in text.split(",") if v.strip()]


def load_fading(spec, truncation=None) -> Fading:
    if isinstance(spec, dict):
        return Fading(MixtureGamma.from_dict(spec))
    spec = str(spec).strip()
    if spec.startswith("{"):
        return Fading(MixtureGamma.from_json(spec))
    if spec.endswith(".json"):
        return Fading(MixtureGamma.from_json(Path(spec).read_text()))
    params = parse_params(spec)
    return Fading(from_params(params, truncation), params)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with any of the options below; flags override it")
    p.add_argument("--fading", action="append", help="name:key=val,... | MixtureGamma JSON | file.json")
    p.add_argument("--constellation", action="append", help="qam4|qam16|psk2|... or file.json of [re, im] pairs")
    p.add_argument("--snr-db", dest="snr_db", help="start:step:stop in dB")
    p.add_argument("--order", type=int, help="Gauss-Laguerre order N")
    p.add_argument("--trials", type=int, help="Monte Carlo trials")
    p.add_argument("--seed", type=int)
    p.add_argument("--truncation", type=int, help="series truncation L for eta-mu / kappa-mu")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mgami", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("ami-curve", help="AMI gap and its high-SNR asymptote over an SNR grid")
    _common(p)
    p.add_argument("--method", choices=["exact", "quadrature"],
                   help="exact: cancellation-free gap integral; quadrature: Gauss-Laguerre double sum")
    p = sub.add_parser("power-alloc", help="exact, asymptotic and limiting power allocation")
    _common(p)
    p = sub.add_parser("validate", help="run the numerical cross-checks")
    _common(p)
    p = sub.add_parser("fading-info", help="describe a fading mixture")
    _common(p)
    return parser


_DEFAULT_GRID = {"ami-curve": "0:5:40", "power-alloc": "0:5:40", "validate": "0:10:10", "fading-info": "0"}


def make_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"{args.config}: invalid JSON ({exc})") from exc
    for key in ("fading", "constellation", "snr_db", "order", "trials", "seed", "out", "format", "truncation"):
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    if getattr(args, "method", None):
        values["method"] = args.method
    for key in ("fading", "constellation"):
        if key in values and not isinstance(values[key], list):
            values[key] = [values[key]]
    values["snr_db"] = parse_grid(values.get("snr_db", _DEFAULT_GRID[args.command]))
    unknown = set(values) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise ArgumentError(f"unknown config keys: {sorted(unknown)}")
    if not values.get("fading"):
        raise ArgumentError("at least one --fading is required")
    return RunConfig(command=args.command, **values)


def _constellations(cfg: RunConfig, count: int) -> list[Constellation]:
    names = cfg.constellation
    if len(names) == 1:
        names = names * count
    if len(names) != count:
        raise ArgumentError(f"got {len(names)} constellations for {count} sub-channels")
    return [from_name(n) for n in names]


# --------------------------------------------------------------------------
# output


def _emit(cfg: RunConfig, columns: list[str], rows: list[list], payload=None):
    if cfg.format == "json":
        data = payload if payload is not None else [dict(zip(columns, r)) for r in rows]
        text = json.dumps(data, indent=2, default=_json_default) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(v) for v in r])
        text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else "nan"
    return v


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


# --------------------------------------------------------------------------
# commands


def cmd_ami_curve(cfg: RunConfig):
    fading = load_fading(cfg.fading[0], cfg.truncation)
    cons = _constellations(cfg, 1)[0]
    asym = ami.characterize_asymptote(fading.mg, cons)
    rows = []
    for db in cfg.snr_db:
        snr = 10.0 ** (db / 10.0)
        if cfg.method == "quadrature":
            val = ami.ami_quadrature(fading.mg, cons, snr, cfg.order)
            gap = cons.bits - val
        else:
            gap = ami.ami_gap(fading.mg, cons, snr)
            val = cons.bits - gap
        rows.append([db, val, gap, ami.asymptotic_gap(asym, snr)])
    _emit(cfg, AMI_COLUMNS, rows)
    return EXIT_OK


def _channels(cfg: RunConfig) -> power_alloc.ParallelChannels:
    fadings = [load_fading(f, cfg.truncation) for f in cfg.fading]
    conss = _constellations(cfg, len(fadings))
    return power_alloc.ParallelChannels.build([(f.mg, c) for f, c in zip(fadings, conss)])


def power_columns(k: int) -> list[str]:
    cols = ["snr_db"]
    for method in ("exact", "asymptotic", "limiting"):
        cols += [f"{method}_p{i + 1}" for i in range(k)]
    return cols


def cmd_power_alloc(cfg: RunConfig):
    chs = _channels(cfg)
    limit = power_alloc.limiting_allocate(chs)
    rows, payload = [], []
    for db in cfg.snr_db:
        snr = 10.0 ** (db / 10.0)
        exact = power_alloc.exact_allocate(chs, snr)
        asym = power_alloc.asymptotic_allocate(chs, snr)
        lim = power_alloc.limiting_allocate(chs, snr)
        rows.append([db, *exact.fractions, *asym.fractions, *limit.fractions])
        payload.append({"snr_db": db, "policies": [exact.to_dict(), asym.to_dict(), lim.to_dict()]})
    _emit(cfg, power_columns(chs.count), rows, payload)
    return EXIT_OK


def run_checks(cfg: RunConfig) -> list[dict]:
    checks = []

    def record(name, passed, **detail):
        checks.append({"name": name, "passed": bool(passed), **detail})

    fadings = [load_fading(f, cfg.truncation) for f in cfg.fading]
    conss = _constellations(cfg, len(fadings))
    for fading, cons in zip(fadings, conss):
        tag = f"{fading.mg.family_label}/{cons.label}"
        for db in cfg.snr_db:
            snr = 10.0 ** (db / 10.0)
            mean, se = ami.ami_mc(fading.mg, cons, snr, cfg.trials, cfg.seed)
            quad = ami.ami_quadrature(fading.mg, cons, snr, cfg.order)
            exact = ami.average_mi(fading.mg, cons, snr)
            record(f"quadrature-vs-mc {tag} @{db:g}dB", abs(quad - mean) <= 3 * se + 1e-12,
                   quadrature=quad, mc=mean, std_error=se)
            record(f"exact-vs-mc {tag} @{db:g}dB", abs(exact - mean) <= 3 * se + 1e-12,
                   exact=exact, mc=mean, std_error=se)
        general = ami.characterize_asymptote(fading.mg, cons)
        if fading.params is not None:
            cor = ami.corollary_asymptote(fading.params, cons)
            rel = abs(cor.coeff - general.coeff) / general.coeff
            record(f"corollary-vs-general {tag}",
                   rel < 1e-6 and abs(cor.diversity_order - general.diversity_order) < 1e-12,
                   diversity=general.diversity_order, coeff=general.coeff, rel_diff=rel)
        check = awgn_info.mmse_is_derivative_check(cons, [0.5, 1.0, 2.0])
        record(f"i-mmse {cons.label}", check < 1e-4, max_rel_error=check)
    if len(fadings) >= 2:
        chs = power_alloc.ParallelChannels.build([(f.mg, c) for f, c in zip(fadings, conss)])
        for db in cfg.snr_db:
            snr = 10.0 ** (db / 10.0)
            pol = power_alloc.exact_allocate(chs, snr)
            res = power_alloc.kkt_residuals(chs, pol, snr)
            ok = res["active_rel"] < 1e-6 and res["inactive_excess"] <= 1e-12 * snr
            record(f"kkt-certificate @{db:g}dB", ok, fractions=list(pol.fractions), **res)
    return checks


def cmd_validate(cfg: RunConfig):
    checks = run_checks(cfg)
    passed = all(c["passed"] for c in checks)
    report = {"passed": passed, "checks": checks}
    text = json.dumps(report, indent=2, default=_json_default) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_VALIDATION


def cmd_fading_info(cfg: RunConfig):
    cons = _constellations(cfg, 1)[0]
    out = []
    for spec in cfg.fading:
        fading = load_fading(spec, cfg.truncation)
        mg = fading.mg
        asym = ami.characterize_asymptote(mg, cons)
        out.append({
            "family": mg.family_label,
            "truncation": mg.truncation,
            "terms": [list(t) for t in mg.terms],
            "normalisation_residual": mg.normalisation_residual,
            "mean_residual": mg.mean_residual,
            "diversity_order": asym.diversity_order,
            "coding_gain": asym.coding_gain,
            "coeff_nats": asym.coeff,
            "coeff_fading_part": asym.coeff_fading_part,
            "mellin": asym.mellin.value,
            "constellation": cons.label,
        })
    text = json.dumps(out if len(out) > 1 else out[0], indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "ami-curve": cmd_ami_curve,
    "power-alloc": cmd_power_alloc,
    "validate": cmd_validate,
    "fading-info": cmd_fading_info,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[cfg.command](cfg)
    except NumericalError as exc:
        print(f"mgami: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        print(f"mgami: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
