"""Command-line front end: modulus, kfunc, bestapprox, verify, report, run."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _toml

from . import __version__
from . import bestapprox as ba
from . import kfunctional as kf
from . import moduli as md
from . import verify as vf
from .funcspace import CatalogError, get
from .quadrature import DEFAULT_RULE, QuadratureRule

log = logging.getLogger("modsmooth")

SCHEMA = "#schema=1"
COMMANDS = ("modulus", "kfunc", "bestapprox", "verify", "report")
SUITES = ("all",) + vf.SUITES
EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ config

def parse_p(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "oo"):
            return math.inf
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"malformed number for p: {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"malformed number for p: {value!r}")
    p = float(value)
    if not p >= 1:
        raise ConfigError("p must be in [1, inf]")
    return p


@dataclass
class RunConfig:
    command: str
    function_names: list = field(default_factory=list)
    k: int = 1
    r: int = 0
    p: float = math.inf
    t_values: list = field(default_factory=list)
    kind: str = "omega"
    max_degree: int = kf.DEFAULT_MAX_DEGREE
    n: int = 1
    sequence: int = 0
    certificate: bool = False
    suite: str = "all"
    quadrature: dict = field(default_factory=dict)
    hgrid_count: int = 40
    output_dir: str = "modsmooth_out"
    cache: bool = False

    def rule(self) -> QuadratureRule:
        q = self.quadrature
        return QuadratureRule(panels=int(q.get("panels", DEFAULT_RULE.panels)),
                              nodes_per_panel=int(q.get("nodes", DEFAULT_RULE.nodes_per_panel)))


_TOP_KEYS = {"command", "f", "functions", "k", "r", "p", "t", "kind", "max_degree", "n", "sequence",
             "certificate", "suite", "output_dir", "cache", "quadrature", "hgrid"}
_SECTION_KEYS = {"quadrature": {"panels", "nodes"}, "hgrid": {"count"}}


def _int(doc, key, default):
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return v


def _check_names(names):
    for name in names:
        try:
            get(name)
        except CatalogError:
            raise ConfigError(f"f: unknown function name {name!r}") from None


def parse_config(text: str) -> RunConfig:
    """Validate a TOML run description; unknown keys are errors."""
    try:
        doc = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    for sec, allowed in _SECTION_KEYS.items():
        if sec in doc:
            if not isinstance(doc[sec], dict):
                raise ConfigError(f"[{sec}] must be a table")
            bad = set(doc[sec]) - allowed
            if bad:
                raise ConfigError(f"unknown keys in [{sec}]: {', '.join(sorted(bad))}")
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}")
    names = doc.get("f", doc.get("functions", []))
    names = [names] if isinstance(names, str) else list(names)
    _check_names(names)
    ts = doc.get("t", [])
    ts = [ts] if isinstance(ts, (int, float)) and not isinstance(ts, bool) else list(ts)
    for t in ts:
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not t > 0:
            raise ConfigError(f"t values must be positive numbers, got {t!r}")
    suite = doc.get("suite", "all")
    if suite not in SUITES:
        raise ConfigError(f"suite must be one of {', '.join(SUITES)}")
    kind = doc.get("kind", "omega")
    if kind not in md.KIND_ALIASES:
        raise ConfigError(f"unknown kind {kind!r}")
    cfg = RunConfig(
        command=command, function_names=names, k=_int(doc, "k", 1), r=_int(doc, "r", 0),
        p=parse_p(doc.get("p", "inf")), t_values=[float(t) for t in ts], kind=kind,
        max_degree=_int(doc, "max_degree", kf.DEFAULT_MAX_DEGREE), n=_int(doc, "n", 1),
        sequence=_int(doc, "sequence", 0), certificate=bool(doc.get("certificate", False)), suite=suite,
        quadrature=dict(doc.get("quadrature", {})), hgrid_count=_int(doc.get("hgrid", {}), "count", 40),
        output_dir=str(doc.get("output_dir", "modsmooth_out")), cache=bool(doc.get("cache", False)),
    )
    if cfg.k < 1 or cfg.r < 0:
        raise ConfigError("k must be >= 1 and r >= 0")
    if command in ("modulus", "kfunc") and not ts:
        raise ConfigError("t: at least one value required")
    if command in ("modulus", "kfunc", "bestapprox") and len(names) != 1:
        raise ConfigError("f: exactly one function name required")
    return cfg


# ------------------------------------------------------------------ persistence

def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(SCHEMA + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {str(a): _jsonable(b) for a, b in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _unjson(v):
    if v in ("inf", "-inf", "nan"):
        return float(v)
    if isinstance(v, dict):
        return {a: _unjson(b) for a, b in v.items()}
    if isinstance(v, list):
        return [_unjson(x) for x in v]
    return v


class Cache:
    """query-hash -> JSON record, one file per key."""

    def __init__(self, root: Path, enabled: bool):
        self.root = root / ".cache"
        self.enabled = enabled
        self._lock = threading.Lock()

    @staticmethod
    def key(query: dict) -> str:
        blob = json.dumps(_jsonable(dict(query, version=__version__)), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def get(self, query: dict):
        if not self.enabled:
            return None
        path = self.root / f"{self.key(query)}.json"
        if not path.exists():
            return None
        return _unjson(json.loads(path.read_text()))

    def put(self, query: dict, record):
        if not self.enabled:
            return
        with self._lock:
            # insertion order kept: it fixes CSV column order downstream
            write_atomic(self.root / f"{self.key(query)}.json", json.dumps(_jsonable(record)))

    def through(self, query: dict, compute):
        hit = self.get(query)
        if hit is not None:
            return hit
        rec = compute()
        self.put(query, rec)
        # same encoding as a cache hit, so fresh and cached runs write the same bytes
        return _unjson(json.loads(json.dumps(_jsonable(rec))))


def worker_count() -> int:
    raw = os.environ.get("MODSMOOTH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"MODSMOOTH_THREADS must be an integer, got {raw!r}") from None


def run_ordered(jobs):
    """Run callables on the worker pool; results come back in submission order."""
    n = worker_count()
    if n == 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda job: job(), jobs))


# ------------------------------------------------------------------ commands

def _emit(out: Path, name: str, text: str, echo=True):
    write_atomic(out / name, text)
    if echo:
        sys.stdout.write(text)


def cmd_modulus(cfg: RunConfig, cache: Cache) -> int:
    f = get(cfg.function_names[0])
    kind = md.KIND_ALIASES[cfg.kind]
    rule = cfg.rule()

    def one(t):
        q = md.ModulusQuery(f, cfg.k, cfg.r, cfg.p, t, rule=rule, hcount=cfg.hgrid_count)
        query = dict(q.key(), command="modulus", kind=kind)

        def compute():
            res = md.compute(kind, q)
            return {"value": res.value, "argmax_h": res.argmax_h}

        return cache.through(query, compute)

    recs = run_ordered([lambda t=t: one(t) for t in cfg.t_values])
    rows = [(kind, f.name, cfg.k, cfg.r, cfg.p, t, rec["value"], rec["argmax_h"])
            for t, rec in zip(cfg.t_values, recs)]
    _emit(Path(cfg.output_dir), "modulus.csv",
          csv_text(["kind", "f", "k", "r", "p", "t", "value", "argmax_h"], rows))
    return EXIT_OK


def cmd_kfunc(cfg: RunConfig, cache: Cache) -> int:
    f = get(cfg.function_names[0])
    query = {"command": "kfunc", "f": f.name, "k": cfg.k, "r": cfg.r, "p": repr(cfg.p),
             "t": [repr(t) for t in cfg.t_values], "max_degree": cfg.max_degree}

    def compute():
        res = kf.k_functional_curve(f, cfg.k, cfg.r, cfg.p, cfg.t_values, cfg.max_degree)
        return [[x.value, x.term_approx, x.term_deriv, x.degree_used] for x in res]

    recs = cache.through(query, compute)
    rows = [(t, *rec) for t, rec in zip(cfg.t_values, recs)]
    _emit(Path(cfg.output_dir), "kfunc.csv",
          csv_text(["t", "value", "term_approx", "term_deriv", "degree_used"], rows))
    return EXIT_OK


def cmd_bestapprox(cfg: RunConfig, cache: Cache) -> int:
    f = get(cfg.function_names[0])
    ns = list(range(1, cfg.sequence + 1)) if cfg.sequence else [cfg.n]

    def compute():
        if cfg.sequence:
            seq = ba.en_sequence(f, cfg.sequence, cfg.p)
            last = ba.best_approx(f, cfg.sequence, cfg.p) if cfg.certificate else None
            return {"errors": [e for _, e in seq], "certificate": last.certificate if last else None}
        a = ba.best_approx(f, cfg.n, cfg.p)
        return {"errors": [a.error], "certificate": a.certificate}

    query = {"command": "bestapprox", "f": f.name, "n": cfg.n, "sequence": cfg.sequence, "p": repr(cfg.p),
             "certificate": cfg.certificate}
    rec = cache.through(query, compute)
    out = Path(cfg.output_dir)
    _emit(out, "bestapprox.csv", csv_text(["n", "p", "error"], [(n, cfg.p, e) for n, e in zip(ns, rec["errors"])]))
    if cfg.certificate and rec["certificate"]:
        _emit(out, "certificate.csv", csv_text(["x", "residual"], rec["certificate"]), echo=False)
    return EXIT_OK


def _safe(label: str) -> str:
    return "".join(c if c.isalnum() or c in "._=-" else "_" for c in label)


def report_to_record(rep: vf.VerificationReport) -> dict:
    return {"theorem_id": rep.theorem_id, "rows": [list(r) for r in rep.rows], "fitted_constant": rep.fitted_constant,
            "cap": rep.cap, "verdict": rep.verdict, "tolerance_note": rep.tolerance_note}


def report_csv(rec: dict) -> str:
    keys = []
    for row in rec["rows"]:
        for k in row[0]:
            if k not in keys:
                keys.append(k)
    rows = [[row[0].get(k, "") for k in keys] + list(row[1:]) for row in rec["rows"]]
    head = f"# theorem={rec['theorem_id']} fitted_constant={_fmt(rec['fitted_constant'])} " \
           f"cap={_fmt(rec['cap'])} verdict={rec['verdict']} note={rec['tolerance_note']}\n"
    text = csv_text(keys + ["lhs", "rhs", "ratio"], rows)
    return text.replace(SCHEMA + "\n", SCHEMA + "\n" + head, 1)


def cmd_verify(cfg: RunConfig, cache: Cache) -> int:
    suites = vf.SUITES if cfg.suite == "all" else (cfg.suite,)
    fns = cfg.function_names or None
    jobs = []
    for s in suites:
        jobs.extend(vf.suite_jobs(s, fns))
    if not jobs:
        raise ConfigError("no verification jobs match the requested functions")

    def wrap(label, job):
        return lambda: cache.through({"command": "verify", "job": label}, lambda: report_to_record(job()))

    recs = run_ordered([wrap(label, job) for label, job in jobs])
    out = Path(cfg.output_dir) / "verify"
    summary = []
    for (label, _), rec in zip(jobs, recs):
        write_atomic(out / f"{_safe(label)}.csv", report_csv(rec))
        summary.append({"job": label, "theorem_id": rec["theorem_id"], "fitted_constant": rec["fitted_constant"],
                        "cap": rec["cap"], "verdict": rec["verdict"]})
    write_atomic(out / "summary.json", json.dumps(_jsonable(summary), indent=1, sort_keys=True) + "\n")
    failed = [s for s in summary if s["verdict"] == "fail"]
    for s in summary:
        print(f"{s['verdict']:>20}  C={_fmt(s['fitted_constant']):<24} cap={_fmt(s['cap']):<6} {s['job']}")
    print(f"{len(summary) - len(failed)}/{len(summary)} checks without failure")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_report(cfg: RunConfig, cache: Cache) -> int:
    path = Path(cfg.output_dir) / "verify" / "summary.json"
    summary = _unjson(json.loads(path.read_text()))
    by_theorem = {}
    for s in summary:
        by_theorem.setdefault(s["theorem_id"], []).append(s)
    lines = ["# Verification report", ""]
    for thm, items in by_theorem.items():
        finite = [s["fitted_constant"] for s in items if isinstance(s["fitted_constant"], float)]
        worst = max(finite) if finite else 0.0
        fails = sum(1 for s in items if s["verdict"] == "fail")
        lines.append(f"## {thm}")
        lines.append(f"{len(items)} checks, {fails} failed, largest fitted constant {worst:.4g} (cap {items[0]['cap']})")
        lines.append("")
        lines.append("| job | fitted constant | verdict |")
        lines.append("|---|---|---|")
        for s in items:
            lines.append(f"| {s['job']} | {s['fitted_constant']:.4g} | {s['verdict']} |")
        lines.append("")
    text = "\n".join(lines)
    _emit(Path(cfg.output_dir), "report.md", text)
    return EXIT_OK


_HANDLERS = {"modulus": cmd_modulus, "kfunc": cmd_kfunc, "bestapprox": cmd_bestapprox, "verify": cmd_verify,
             "report": cmd_report}


def run(cfg: RunConfig) -> int:
    """Execute a validated config; 0 ok, 1 failed verdict, 2 execution error."""
    try:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError(f"output_dir {out} is not writable")
        return _HANDLERS[cfg.command](cfg, Cache(out, cfg.cache))
    except (OSError, ValueError, KeyError, ZeroDivisionError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


# ------------------------------------------------------------------ argparse

def _common(sp, need_t=False):
    sp.add_argument("--f", required=True, help="catalog function name")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--r", type=int, default=0)
    sp.add_argument("--p", default="inf", help="1 <= p <= inf")
    if need_t:
        sp.add_argument("--t", type=float, action="append", required=True, help="repeatable")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modsmooth", description="Weighted moduli of smoothness toolkit")
    ap.add_argument("--out", default="modsmooth_out", help="output directory")
    ap.add_argument("--cache", action="store_true", help="reuse cached results")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("modulus", help="moduli of smoothness")
    _common(sp, need_t=True)
    sp.add_argument("--kind", default="omega", choices=sorted(md.KIND_ALIASES))
    sp.add_argument("--panels", type=int, default=DEFAULT_RULE.panels)
    sp.add_argument("--nodes", type=int, default=DEFAULT_RULE.nodes_per_panel)
    sp.add_argument("--hcount", type=int, default=40)

    sp = sub.add_parser("kfunc", help="K-functional upper bounds")
    _common(sp, need_t=True)
    sp.add_argument("--max-degree", type=int, default=kf.DEFAULT_MAX_DEGREE)

    sp = sub.add_parser("bestapprox", help="degree of best approximation")
    sp.add_argument("--f", required=True)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--p", default="inf")
    sp.add_argument("--sequence", type=int, default=0, metavar="N_MAX")
    sp.add_argument("--certificate", action="store_true", help="write the equioscillation points (p = inf)")

    sp = sub.add_parser("verify", help="run verification suites")
    sp.add_argument("--suite", default="all", choices=SUITES)
    sp.add_argument("--f", action="append", default=[], help="restrict to these functions (repeatable)")

    sub.add_parser("report", help="summarise the last verify run as markdown")

    sp = sub.add_parser("run", help="execute a TOML config file")
    sp.add_argument("config")
    return ap


def config_from_args(a) -> RunConfig:
    if a.command == "run":
        return parse_config(Path(a.config).read_text())
    names = a.f if isinstance(getattr(a, "f", None), list) else ([a.f] if getattr(a, "f", None) else [])
    _check_names(names)
    cfg = RunConfig(command=a.command, function_names=names, output_dir=a.out, cache=a.cache)
    if a.command in ("modulus", "kfunc"):
        cfg.k, cfg.r, cfg.p, cfg.t_values = a.k, a.r, parse_p(a.p), list(a.t)
        if any(not t > 0 for t in cfg.t_values):
            raise ConfigError("t values must be positive")
    if a.command == "modulus":
        cfg.kind = a.kind
        cfg.quadrature = {"panels": a.panels, "nodes": a.nodes}
        cfg.hgrid_count = a.hcount
    elif a.command == "kfunc":
        cfg.max_degree = a.max_degree
    elif a.command == "bestapprox":
        cfg.p, cfg.n, cfg.sequence, cfg.certificate = parse_p(a.p), a.n, a.sequence, a.certificate
    elif a.command == "verify":
        cfg.suite = a.suite
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError, _toml.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.command == "run":
        # flags given before the subcommand do not override the file
        pass
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
