"""Batch front end: config -> fixed points -> moment graph -> strata -> desingularization -> Euler -> basis."""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click

from .cyclequiver import NilpotentRep, coefficient_quiver, dimension_vector, iso_type, stratum_dim
from .cylinder import component_graph, desing_components, fiber, gsub, tower_profile
from .exactalg import Cocharacter, parse_polynomial
from .gkm import (
    EquivariantClass,
    EulerTable,
    EulerUndetermined,
    Filtration,
    basis_solve,
    basis_verify,
    cell_closures,
    populate_euler_table,
    sign_table,
)
from .momentgraph import (
    GraphDocument,
    choose_cocharacter,
    export,
    label_text,
    moment_graph,
    poincare_polynomial,
    poly_text,
    smoothness_report,
)

COMMANDS = ("fixed-points", "moment-graph", "strata", "desing", "euler", "basis", "verify-basis")
FORMATS = ("dot", "tikz", "json")
EXT = {"dot": "dot", "tikz": "tex", "json": "json"}
DEFAULT_SEED = 20240229


class ConfigError(ValueError):
    """Invalid session config; the message starts with the offending field path."""


@dataclass
class SessionConfig:
    n: int
    N: int
    summands: list[tuple[int, int]]
    e: list[int]
    commands: list[str] = field(default_factory=lambda: list(COMMANDS))
    formats: list[str] = field(default_factory=lambda: ["dot", "json"])
    gsub_mode: str = "auto"
    gsub: list[str] = field(default_factory=list)
    cocharacter: list[int] | None = None
    seed: int = DEFAULT_SEED
    euler_policy: str = "equidim"
    euler_table: dict | None = None
    basis: list[list[str]] | None = None

    @property
    def rep(self) -> NilpotentRep:
        return NilpotentRep(self.n, tuple(self.summands), self.N)

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>: config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ConfigError(f"{key}: unknown field")
        for key in ("n", "summands", "e"):
            if key not in data:
                raise ConfigError(f"{key}: required field missing")
        n = _int(data["n"], "n", 1)
        summands = []
        if not isinstance(data["summands"], list):
            raise ConfigError("summands: expected a list of [start, length] pairs")
        for k, s in enumerate(data["summands"]):
            if not (isinstance(s, (list, tuple)) and len(s) == 2):
                raise ConfigError(f"summands[{k}]: expected [start, length]")
            i = _int(s[0], f"summands[{k}][0]", 1)
            if i > n:
                raise ConfigError(f"summands[{k}][0]: start vertex {i} outside 1..{n}")
            summands.append((i, _int(s[1], f"summands[{k}][1]", 1)))
        N = _int(data.get("N", max((l for _, l in summands), default=1)), "N", 1)
        for k, (_, l) in enumerate(summands):
            if l > N:
                raise ConfigError(f"summands[{k}][1]: length {l} exceeds N={N}")
        if not isinstance(data["e"], list) or len(data["e"]) != n:
            raise ConfigError(f"e: expected a list of {n} integers")
        e = [_int(x, f"e[{k}]", 0) for k, x in enumerate(data["e"])]
        dims = dimension_vector(NilpotentRep(n, tuple(summands), N))
        for k, (x, m) in enumerate(zip(e, dims)):
            if x > m:
                raise ConfigError(f"e[{k}]: {x} exceeds dim M = {m} at vertex {k + 1}")
        cfg = cls(n, N, summands, e)
        if "commands" in data:
            cmds = data["commands"]
            if cmds == "all":
                cmds = list(COMMANDS)
            if not isinstance(cmds, list):
                raise ConfigError("commands: expected a list or \"all\"")
            for k, c in enumerate(cmds):
                if c not in COMMANDS:
                    raise ConfigError(f"commands[{k}]: unknown command {c!r}")
            cfg.commands = list(cmds)
        if "formats" in data:
            for k, f in enumerate(data["formats"]):
                if f not in FORMATS:
                    raise ConfigError(f"formats[{k}]: unknown format {f!r}")
            cfg.formats = list(data["formats"])
        if "gsub_mode" in data:
            if data["gsub_mode"] not in ("auto", "lemma410", "explicit", "heuristic"):
                raise ConfigError(f"gsub_mode: unknown mode {data['gsub_mode']!r}")
            cfg.gsub_mode = data["gsub_mode"]
        if "gsub" in data:
            cfg.gsub = [str(x) for x in data["gsub"]]
            for k, t in enumerate(cfg.gsub):
                try:
                    _parse_type(t, n, N)
                except ValueError as ex:
                    raise ConfigError(f"gsub[{k}]: {ex}") from None
        if "cocharacter" in data and data["cocharacter"] is not None:
            chi = data["cocharacter"]
            if not isinstance(chi, list) or len(chi) != len(summands) + 1:
                raise ConfigError(f"cocharacter: expected [K, c_1, ..., c_{len(summands)}]")
            cfg.cocharacter = [_int(x, f"cocharacter[{k}]", None) for k, x in enumerate(chi)]
        if "seed" in data:
            cfg.seed = _int(data["seed"], "seed", None)
        if "euler_policy" in data:
            if data["euler_policy"] not in ("equidim", "cell"):
                raise ConfigError(f"euler_policy: unknown policy {data['euler_policy']!r}")
            cfg.euler_policy = data["euler_policy"]
        if "euler_table" in data:
            cfg.euler_table = data["euler_table"]
        if "basis" in data:
            cfg.basis = data["basis"]
        return cfg

    @classmethod
    def from_inline(cls, text: str) -> "SessionConfig":
        """"n=2; U(1,4)+U(2,2)+U(2,2); e=2,2" with optional N=, chi=K,c1,.. and seed=."""
        try:
            M = NilpotentRep.parse(text)
        except ValueError as ex:
            raise ConfigError(f"inline: {ex}") from None
        m = re.search(r"\be\s*=\s*([\d\s,]+)", text)
        if not m:
            raise ConfigError("e: inline config needs e=...")
        data: dict[str, Any] = {
            "n": M.n,
            "N": M.N,
            "summands": [list(s) for s in M.summands],
            "e": [int(x) for x in m.group(1).replace(" ", "").split(",") if x],
        }
        m = re.search(r"\bchi\s*=\s*([-\d\s,]+)", text)
        if m:
            data["cocharacter"] = [int(x) for x in m.group(1).replace(" ", "").split(",") if x]
        m = re.search(r"\bseed\s*=\s*(-?\d+)", text)
        if m:
            data["seed"] = int(m.group(1))
        return cls.from_dict(data)


def _int(x, path: str, lo: int | None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{path}: expected an integer, got {x!r}")
    if lo is not None and x < lo:
        raise ConfigError(f"{path}: must be >= {lo}")
    return x


def _parse_type(text: str, n: int, N: int) -> NilpotentRep:
    body = text if "n=" in text else f"n={n}; {text}"
    T = NilpotentRep.parse(body)
    if T.n != n:
        raise ValueError(f"type {text!r} lives on a different cycle")
    return NilpotentRep(n, T.summands, N)


def _dependencies(cmds: list[str]) -> list[str]:
    need = set(cmds)
    if "verify-basis" in need:
        need.add("basis")
    if "basis" in need:
        need.add("euler")
    if "euler" in need:
        need |= {"desing", "moment-graph"}
    if "desing" in need:
        need |= {"moment-graph", "strata"}
    if need & {"moment-graph", "strata"}:
        need.add("fixed-points")
    return [c for c in COMMANDS if c in need]


@dataclass
class Result:
    report: dict
    files: dict[str, str]
    status: str

    @property
    def exit_code(self) -> int:
        return 0 if self.status in ("ok", "empty") else 1


def run(cfg: SessionConfig) -> Result:
    """Execute the requested commands in dependency order."""
    M = cfg.rep
    e = list(cfg.e)
    steps = _dependencies(cfg.commands)
    report: dict[str, Any] = {
        "input": {"representation": M.text(), "e": e, "commands": list(cfg.commands), "seed": cfg.seed},
    }
    files: dict[str, str] = {}
    failures: list[str] = []
    undetermined: list[str] = []
    Q = coefficient_quiver(M)
    target = {v: e[v - 1] for v in range(1, M.n + 1)}

    if cfg.cocharacter is not None:
        chi = Cocharacter(cfg.cocharacter[0], tuple(cfg.cocharacter[1:]))
    else:
        chi = choose_cocharacter(Q)

    def order_key(S):
        return (stratum_dim(iso_type(S, M), M),)

    g = moment_graph(
        Q, target, chi, order_key=order_key, type_of=lambda S: str(iso_type(S, M)), seed=cfg.seed
    )
    if not g.fixed_points:
        report["status"] = "empty"
        report["fixed-points"] = {"count": 0, "points": []}
        return Result(report, files, "empty")

    if "fixed-points" in steps:
        report["fixed-points"] = {
            "count": len(g.fixed_points),
            "points": [
                {"id": g.names[i], "labels": [label_text(b) for b in sorted(S)], "type": g.types[i]}
                for i, S in enumerate(g.fixed_points)
            ],
        }
    if "moment-graph" in steps:
        od = g.outdegrees()
        smooth = smoothness_report(g, max(od))
        report["moment-graph"] = {
            "cocharacter": chi.as_list(),
            "edge_count": len(g.edges),
            "outdegrees": dict(zip(g.names, od)),
            "poincare": poincare_polynomial(g),
            "poincare_text": poly_text(poincare_polynomial(g)),
            "singular_candidates": [r["point"] for r in smooth if r["singular_candidate"]],
            "graph": GraphDocument.from_graph(g).to_dict(),
        }
        if not g.is_topologically_ordered():
            failures.append("moment-graph: order is not topological")
        for fmt in cfg.formats:
            files[f"momentgraph.{EXT[fmt]}"] = export(g, fmt)
    strata = {}
    if "strata" in steps:
        for i, S in enumerate(g.fixed_points):
            T = iso_type(S, M)
            key = T.type_key()
            if key not in strata:
                strata[key] = {"type": str(T), "stratum_dim": stratum_dim(T, M), "points": []}
            strata[key]["points"].append(g.names[i])
        report["strata"] = sorted(strata.values(), key=lambda s: (-s["stratum_dim"], s["type"]))

    comps = []
    graphs = []
    generic: list[NilpotentRep] = []
    if "desing" in steps:
        mode = cfg.gsub_mode
        if mode == "auto":
            mode = "explicit" if cfg.gsub else ("lemma410" if _lemma_ok(M, e) else "heuristic")
        explicit = [_parse_type(t, M.n, M.N) for t in cfg.gsub] if mode == "explicit" else None
        try:
            gs = gsub(M, e, mode, explicit, graph=g)
        except ValueError as ex:
            raise ConfigError(f"gsub: {ex}") from None
        generic = gs.types
        comps = desing_components(M, e, gs)
        section = {"mode": mode, "proven": gs.proven, "components": []}
        for c in comps:
            cg = component_graph(c, g, chi=chi, seed=cfg.seed)
            graphs.append(cg)
            tw = tower_profile(c)
            pp = poincare_polynomial(cg)
            degs_ok = all(d == tw["dimension"] for d in cg.degrees())
            checks = {
                "degrees_equal_dimension": degs_ok,
                "tower_matches_cells": tw["dimension"] == max(cg.outdegrees(), default=0) and tw["poincare"] == pp,
            }
            if not all(checks.values()):
                failures.append(f"desing: component {c.index} checks {checks}")
            grid = {f"{i},{k}": v for (i, k), v in sorted(c.target.items(), key=lambda kv: (kv[0][1], kv[0][0]))}
            image = sorted({g.names[g.index_of(fr)] for fr in _images(cg)}, key=g.names.index)
            section["components"].append(
                {
                    "generic_type": str(c.generic_type),
                    "dim_vector_grid": grid,
                    "fixed_point_count": len(cg.fixed_points),
                    "tower": tw["levels"],
                    "poincare": pp,
                    "dimension": tw["dimension"],
                    "image": image,
                    "checks": checks,
                }
            )
            for fmt in cfg.formats:
                files[f"component_{c.index}.{EXT[fmt]}"] = export(cg, fmt)
        report["desing"] = section

    classes = None
    filt = Filtration.from_graph(g)
    eu = None
    if "euler" in steps:
        user = EulerTable.from_dict(cfg.euler_table) if cfg.euler_table else None
        closures = cell_closures(g, M, generic, user)
        eu, missing = populate_euler_table(g, closures, user, cfg.euler_policy)
        report["euler"] = {
            "policy": cfg.euler_policy,
            "closures": [
                {"cell": g.names[c.top], "dim": c.dim, "method": c.method, "points": sorted((g.names[x] for x in c.points), key=g.names.index)}
                for c in closures
            ],
            "table": eu.to_dict(chi),
            "missing": [list(k) for k in missing],
        }
        if missing:
            undetermined.append("euler")
    if "basis" in steps and eu is not None and "euler" not in undetermined:
        try:
            classes = basis_solve(g, filt, eu)
        except EulerUndetermined as ex:
            undetermined.append("basis")
            report["basis"] = {"error": "euler class undetermined", "missing": [list(k) for k in ex.missing]}
        except ArithmeticError as ex:
            failures.append(f"basis: {ex}")
            report["basis"] = {"error": str(ex)}
        else:
            report["basis"] = {"classes": [c.to_dict() for c in classes], "sign_table": sign_table(g)}
    if "verify-basis" in cfg.commands:
        target_classes = classes
        source = "computed"
        if cfg.basis is not None:
            source = "user"
            target_classes = [
                EquivariantClass([parse_polynomial(s, M.d) for s in row], list(g.names)) for row in cfg.basis
            ]
        if target_classes is None:
            undetermined.append("verify-basis")
        else:
            vr = basis_verify(target_classes, g, filt)
            vr["source"] = source
            report["verify-basis"] = vr
            if not vr["ok"]:
                failures.append("verify-basis")

    status = "failed" if failures else ("undetermined" if undetermined else "ok")
    report["status"] = status
    if failures:
        report["failures"] = failures
    if undetermined:
        report["undetermined"] = undetermined
    # sections the user did not ask for are dropped from the output
    for key in list(report):
        if key in COMMANDS and key not in cfg.commands:
            del report[key]
    return Result(report, files, status)


def _images(cg) -> list[frozenset]:
    from .cylinder import res_points

    return [res_points(W) for W in cg.fixed_points]


def _lemma_ok(M: NilpotentRep, e: list[int]) -> bool:
    lengths = {l for _, l in M.summands}
    if len(lengths) != 1:
        return False
    L = lengths.pop()
    return L % M.n == 0 and len(set(e)) == 1 and e[0] % (L // M.n) == 0


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def write_outputs(result: Result, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(result.report))
    for name, text in sorted(result.files.items()):
        (out / name).write_text(text)


def load_config(config: str | None, inline: str | None) -> SessionConfig:
    if config and inline:
        raise ConfigError("<cli>: give either --config or an inline config, not both")
    if config:
        try:
            data = json.loads(Path(config).read_text())
        except json.JSONDecodeError as ex:
            raise ConfigError(f"<root>: invalid JSON ({ex})") from None
        return SessionConfig.from_dict(data)
    if inline:
        return SessionConfig.from_inline(inline)
    raise ConfigError("<cli>: no config given")


def _execute(config, inline, out, formats, seed, commands) -> None:
    try:
        cfg = load_config(config, inline)
    except (ConfigError, OSError) as ex:
        click.echo(f"config error: {ex}", err=True)
        sys.exit(2)
    if formats:
        cfg.formats = list(formats)
    if seed is not None:
        cfg.seed = seed
    if commands is not None:
        cfg.commands = list(commands)
    try:
        result = run(cfg)
    except ConfigError as ex:
        click.echo(f"config error: {ex}", err=True)
        sys.exit(2)
    write_outputs(result, Path(out))
    click.echo(f"status: {result.status} ({Path(out) / 'report.json'})")
    sys.exit(result.exit_code)


_options = [
    click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), help="JSON session config."),
    click.option("--out", "out", default="out", show_default=True, type=click.Path(file_okay=False), help="Output directory."),
    click.option("--format", "formats", multiple=True, type=click.Choice(FORMATS), help="Graph export format (repeatable)."),
    click.option("--seed", "seed", type=int, default=None, help="Seed for the randomized membership checks."),
    click.argument("inline", required=False),
]


def _with_options(f):
    for opt in reversed(_options):
        f = opt(f)
    return f


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Quiver Grassmannians of the equioriented cycle: moment graphs and equivariant cohomology.

    INLINE is a quick config such as "n=2; U(1,4)+U(2,2)+U(2,2); e=2,2".
    """


@main.command("run")
@_with_options
def run_cmd(config, out, formats, seed, inline):
    """Run the commands listed in the config (default: all)."""
    _execute(config, inline, out, formats, seed, None)


def _verb(name: str):
    @_with_options
    def cmd(config, out, formats, seed, inline):
        _execute(config, inline, out, formats, seed, [name])

    cmd.__doc__ = f"Run the pipeline up to '{name}' and report that section."
    main.command(name)(cmd)


for _name in COMMANDS:
    _verb(_name)


if __name__ == "__main__":
    main()
