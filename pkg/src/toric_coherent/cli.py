"""Batch command-line harness.

    toric-coherent table    --lattice-size 3 --cache-dir cache
    toric-coherent channel  --lattice-size 3 --theta-range 0.02,0.1,9,log --out-dir out
    toric-coherent compare  --lattice-size 3 --theta 0.05,0.1 --samples 1000 --seed 7
    toric-coherent oracle-check
    toric-coherent cache verify --cache-dir cache

Exit codes: 0 success, 1 tolerance or verification failure, 2 configuration
error, 3 budget error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from toric_coherent import __version__
from toric_coherent.cache import EnumeratorCache
from toric_coherent.chain_complex import LatticeGeometry
from toric_coherent.channel import RotationAngle, channel_report
from toric_coherent.decoder import (
    averaged_success_exact,
    averaged_success_sampled,
    decode,
    twirl_ratio_leading,
)
from toric_coherent.enumerator import (
    DEFAULT_BUDGET,
    all_syndrome_tables,
    coset_size,
    even_syndromes,
    syndrome_table,
)
from toric_coherent.errors import (
    BudgetExceededError,
    CacheError,
    OracleGuardError,
    PreconditionError,
    ToricError,
)
from toric_coherent.reports import (
    AGGREGATE,
    CHANNEL_COLUMNS,
    COMPARE_COLUMNS,
    channel_rows,
    render_csv,
    render_json,
    write_outputs,
)

log = logging.getLogger("toric_coherent")

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3

ORACLE_TOLERANCE = {2: 1e-12, 3: 1e-10}
ORACLE_THETAS = (0.05, 0.1, 0.2)


class ConfigError(ToricError):
    pass


@dataclass
class RunConfig:
    L: int = 3
    thetas: List[float] = field(default_factory=lambda: [0.1])
    mode: str = "exact-sweep"
    syndrome: Optional[str] = None
    samples: int = 0
    seed: int = 0
    cache_dir: Optional[str] = None
    out_dir: Optional[str] = None
    formats: List[str] = field(default_factory=lambda: ["csv"])
    budget: int = DEFAULT_BUDGET
    allow_large: bool = False
    tolerance: Optional[float] = None
    figures: bool = True
    given: frozenset = frozenset()

    def validate(self) -> None:
        if self.L < 2:
            raise ConfigError("lattice size must be at least 2")
        if not self.thetas:
            raise ConfigError("no rotation angles given")
        for t in self.thetas:
            if not math.isfinite(t) or abs(t) >= math.pi / 2:
                raise ConfigError(f"rotation angle {t} outside (-pi/2, pi/2)")
        if self.mode == "single-syndrome" and not self.syndrome:
            raise ConfigError("single-syndrome mode needs --syndrome")
        if self.mode == "sampled" and self.samples < 1:
            raise ConfigError("sampled mode needs --samples >= 1")
        if self.budget < 1:
            raise ConfigError("budget must be positive")


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def parse_theta_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse angle list {text!r}") from exc


def parse_theta_range(text: str) -> List[float]:
    """``start,stop,count[,lin|log]``, endpoints included."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (3, 4):
        raise ConfigError("--theta-range expects start,stop,count[,lin|log]")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"cannot parse angle range {text!r}") from exc
    spacing = parts[3] if len(parts) == 4 else "lin"
    if count < 1:
        raise ConfigError("angle range count must be >= 1")
    if spacing == "lin":
        values = np.linspace(start, stop, count)
    elif spacing == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log-spaced angle range needs positive endpoints")
        values = np.geomspace(start, stop, count)
    else:
        raise ConfigError(f"unknown spacing {spacing!r}")
    return [float(v) for v in values]


def _common(p: argparse.ArgumentParser) -> None:
    # defaults are None so config-file values can fill the gaps
    p.add_argument("--config", help="JSON file of flag values (flag names, dashes or underscores)")
    p.add_argument("--lattice-size", "-L", type=int)
    p.add_argument("--theta", help="comma-separated rotation angles")
    p.add_argument("--theta-range", help="start,stop,count[,lin|log]")
    p.add_argument("--syndrome", help="syndrome as a hex bitset over vertices")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, help="maximum chains enumerated per class")
    p.add_argument("--cache-dir")
    p.add_argument("--out-dir")
    p.add_argument("--format", choices=["csv", "json", "both"])
    p.add_argument("--allow-large", action="store_true", default=None,
                   help="permit the full L=4 syndrome sweep")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--no-figures", action="store_true", default=None,
                   help="skip the PNG figures written next to the tables")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toric-coherent",
        description="Exact enumeration of coherent X-rotation errors on the toric code.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("table", "populate the enumerator cache"),
        ("channel", "per-syndrome channel quantities over an angle grid"),
        ("compare", "coherent versus twirled decoding success"),
        ("oracle-check", "cross-check against brute-force summation (L <= 3)"),
    ):
        _common(sub.add_parser(name, help=text))
    cache = sub.add_parser("cache", help="inspect or clear the enumerator cache")
    cache.add_argument("action", choices=["verify", "purge"])
    _common(cache)
    return parser


def _config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a flat JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and explicit flags (flags win)."""
    merged = _config_file(args.config) if args.config else {}
    known = {"lattice_size", "theta", "theta_range", "syndrome", "samples", "seed", "budget",
             "cache_dir", "out_dir", "format", "allow_large", "tolerance", "no_figures"}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if getattr(args, "theta", None) is not None or getattr(args, "theta_range", None) is not None:
        # an angle flag on the command line replaces whichever form the file used
        merged.pop("theta", None)
        merged.pop("theta_range", None)
    for key in known:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    cfg = RunConfig()
    cfg.given = frozenset(k for k, v in merged.items() if v is not None)
    if "lattice_size" in merged:
        cfg.L = int(merged["lattice_size"])
    if merged.get("theta_range") is not None and merged.get("theta") is not None:
        raise ConfigError("give either --theta or --theta-range, not both")
    if merged.get("theta_range") is not None:
        cfg.thetas = parse_theta_range(str(merged["theta_range"]))
    elif merged.get("theta") is not None:
        raw = merged["theta"]
        cfg.thetas = [float(t) for t in raw] if isinstance(raw, list) else parse_theta_list(str(raw))
    cfg.syndrome = merged.get("syndrome")
    cfg.samples = int(merged.get("samples") or 0)
    cfg.seed = int(merged.get("seed") or 0)
    cfg.budget = int(merged.get("budget") or DEFAULT_BUDGET)
    cfg.cache_dir = merged.get("cache_dir")
    cfg.out_dir = merged.get("out_dir")
    fmt = merged.get("format") or "csv"
    cfg.formats = ["csv", "json"] if fmt == "both" else [fmt]
    cfg.allow_large = bool(merged.get("allow_large") or False)
    cfg.tolerance = merged.get("tolerance")
    cfg.figures = not bool(merged.get("no_figures") or False)
    if cfg.syndrome:
        cfg.mode = "single-syndrome"
    elif cfg.samples:
        cfg.mode = "sampled"
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cache(cfg: RunConfig) -> Optional[EnumeratorCache]:
    return EnumeratorCache(cfg.cache_dir) if cfg.cache_dir else None


def _tables(cfg: RunConfig, geometry: LatticeGeometry):
    cache = _cache(cfg)
    if cfg.mode == "single-syndrome":
        s = geometry.syndrome_from_hex(cfg.syndrome)
        return [syndrome_table(geometry, s, budget=cfg.budget, cache=cache)], False
    tables = [t for _, t in all_syndrome_tables(
        geometry, budget=cfg.budget, allow_large=cfg.allow_large, cache=cache)]
    return tables, True


def _meta(cfg: RunConfig, command: str) -> dict:
    return {
        "command": command,
        "L": cfg.L,
        "mode": cfg.mode,
        "thetas": cfg.thetas,
        "syndrome": cfg.syndrome,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "version": __version__,
    }


def _emit(cfg: RunConfig, stem: str, rows, columns, meta, plotter=None) -> None:
    if cfg.out_dir is None:
        # no output directory: the first requested format goes to stdout
        if cfg.formats[0] == "json":
            sys.stdout.write(render_json(rows, columns, meta))
        else:
            sys.stdout.write(render_csv(rows, columns))
        return
    out = Path(cfg.out_dir)
    paths = write_outputs(out, stem, rows, columns, cfg.formats, meta)
    if cfg.figures and plotter is not None:
        from toric_coherent import plotting

        paths += getattr(plotting, plotter)(rows, cfg.L, out)
    for p in paths:
        log.info("wrote %s", p)


def cmd_table(cfg: RunConfig) -> int:
    """Enumerate and cache; existing records are checked against the fresh result."""
    geometry = LatticeGeometry(cfg.L)
    cache = _cache(cfg)
    if cfg.mode == "single-syndrome":
        syndromes = [geometry.syndrome_from_hex(cfg.syndrome)]
    else:
        if cfg.L >= 5 or (cfg.L == 4 and not cfg.allow_large):
            raise BudgetExceededError(
                f"full table at L={cfg.L} refused; give --syndrome or --allow-large (L=4)")
        syndromes = list(even_syndromes(geometry))
    written = 0
    enumerators = 0
    chains = 0
    mismatches = []
    for s in syndromes:
        enums = list(syndrome_table(geometry, s, budget=cfg.budget).enumerators)
        enumerators += len(enums)
        chains += sum(e.total for e in enums)
        if cache is None:
            continue
        for e in enums:
            old = cache.get(cfg.L, e.syndrome, e.label)
            if old is not None and old != e:
                mismatches.append(f"S={e.syndrome} class={e.label}")
        written += cache.put(enums)
    summary = {
        "L": cfg.L,
        "syndromes": len(syndromes),
        "enumerators": enumerators,
        "chains": chains,
        "coset_size": coset_size(geometry),
        "written": written,
        "mismatches": mismatches,
    }
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_TOLERANCE if mismatches else EXIT_OK


def cmd_channel(cfg: RunConfig) -> int:
    geometry = LatticeGeometry(cfg.L)
    tables, complete = _tables(cfg, geometry)
    rows = []
    for theta in cfg.thetas:
        report = channel_report(tables, theta, complete=complete)
        report.check()
        rows.extend(channel_rows(report))
    _emit(cfg, f"channel_L{cfg.L}", rows, CHANNEL_COLUMNS, _meta(cfg, "channel"), "plot_channel")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    geometry = LatticeGeometry(cfg.L)
    sampled = cfg.mode == "sampled"
    if sampled:
        tables, complete = [], False
    else:
        tables, complete = _tables(cfg, geometry)
    rows = []
    for theta in cfg.thetas:
        angle = RotationAngle(theta)
        for table in tables:
            row = {"theta": angle.theta, "x": angle.x, "syndrome": table.syndrome.hex()}
            lead = twirl_ratio_leading(table)
            row.update(leading_ratio=str(lead), leading_reference=str(lead.reference),
                       leading_tie=lead.is_tie)
            try:
                out = decode(table, angle)
            except ZeroDivisionError:
                rows.append(row)
                continue
            row.update(chosen=str(out.chosen), success=out.success,
                       twirled_success=out.twirled_success, ratio=out.ratio)
            rows.append(row)
        agg = {"theta": angle.theta, "x": angle.x, "syndrome": AGGREGATE}
        if complete:
            avg = averaged_success_exact(geometry, angle, tables=tables)
            agg.update(averaged_success=avg.coherent, averaged_twirled=avg.twirled)
        if sampled:
            est = averaged_success_sampled(geometry, angle, cfg.samples, cfg.seed,
                                           budget=cfg.budget, cache=_cache(cfg))
            agg.update(sampled_estimate=est.estimate, sampled_stderr=est.stderr,
                       samples=est.count, seed=est.seed)
        rows.append(agg)
    _emit(cfg, f"compare_L{cfg.L}", rows, COMPARE_COLUMNS, _meta(cfg, "compare"), "plot_compare")
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    from toric_coherent.oracle import oracle_compare

    sizes = [cfg.L] if "lattice_size" in cfg.given else [2, 3]
    explicit_theta = "theta" in cfg.given or "theta_range" in cfg.given
    thetas = cfg.thetas if explicit_theta else list(ORACLE_THETAS)
    reports = []
    for L in sizes:
        geometry = LatticeGeometry(L)
        tol = cfg.tolerance if cfg.tolerance is not None else ORACLE_TOLERANCE.get(L, 1e-10)
        for theta in thetas:
            r = oracle_compare(geometry, theta, tol, cache=_cache(cfg), budget=cfg.budget)
            reports.append(r.to_dict())
    passed = all(r["passed"] for r in reports)
    text = json.dumps({"passed": passed, "reports": reports}, sort_keys=True, indent=1) + "\n"
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "oracle_check.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_TOLERANCE


def cmd_cache(cfg: RunConfig, action: str) -> int:
    if not cfg.cache_dir:
        raise ConfigError("cache commands need --cache-dir")
    cache = EnumeratorCache(cfg.cache_dir)
    if action == "purge":
        removed = cache.purge()
        sys.stdout.write(json.dumps({"removed_files": removed}) + "\n")
        return EXIT_OK
    problems = cache.verify(budget=cfg.budget)
    sys.stdout.write(json.dumps({"problems": problems, "ok": not problems}, indent=1) + "\n")
    return EXIT_TOLERANCE if problems else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "table":
            return cmd_table(cfg)
        if args.command == "channel":
            return cmd_channel(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "oracle-check":
            return cmd_oracle_check(cfg)
        return cmd_cache(cfg, args.action)
    except (BudgetExceededError, OracleGuardError) as exc:
        log.error("%s", exc)
        return EXIT_BUDGET
    except (ConfigError, PreconditionError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except CacheError as exc:
        log.error("%s", exc)
        return EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
