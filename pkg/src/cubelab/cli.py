"""``cubelab`` command line.

Exit codes: 0 for a decided verdict or completed run, 2 for an undecided
braid verdict, 1 for any error (usage, input or resource).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .coneoff import (
    CosetFamily, canonical_family, delta_curve, family_from_words, flat_collapse_check,
    ray_distance,
)
from .criteria import NO, UNDECIDED, analyze, verify_witness
from .graphcore import GraphError, GraphParseError, LabeledGraph, load_graph_file
from .medianlab import (
    Ball, BallResourceError, SafeRadiusError, SearchCapError, StaircaseError,
    TreeHypothesisError, ball_from_graph, check_flat, check_staircase, find_flats,
    generate_ball, halfspace_of_edge, staircase_witness, transeparation_check,
    tree_of_hyperplanes, vertex_cap,
)
from .words import GroupSpec, WordError

EXIT_OK, EXIT_ERROR, EXIT_UNDECIDED = 0, 1, 2
CAYLEY = ("racg", "raag", "gp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers

def _range(text: str) -> list[int]:
    """``2..6`` or ``1,3,5``."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad integer range {text!r}") from None


def _load(path: str, multigraph: bool) -> LabeledGraph:
    return load_graph_file(path, multigraph=multigraph)


def _spec(args, graph: LabeledGraph) -> GroupSpec:
    if args.family not in CAYLEY:
        raise UsageError(f"--family must be one of {', '.join(CAYLEY)} here")
    return GroupSpec(args.family, graph)


def _word(ball_or_spec, text: str):
    """Words on the command line: ``e`` (or empty) is the identity."""
    from .words import engine

    grp = ball_or_spec.group if isinstance(ball_or_spec, Ball) else engine(ball_or_spec)
    if text.strip() in ("", "e") and "e" not in grp.index:
        return ()
    return grp.parse(text).syllables


def _ball(args) -> Ball:
    if args.family == "median":
        return ball_from_graph(_load(args.graph, False))
    return generate_ball(_spec(args, _load(args.graph, False)), args.radius)


def _vertex(ball: Ball, text: str) -> int:
    if ball.group is None:
        return ball.vertex(text)
    return ball.vertex(_word(ball, text))


def _config(args) -> dict:
    skip = {"func", "timing", "report"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg["cap_vertices"] = vertex_cap()
    return cfg


def _emit(args, body: dict, started: float) -> None:
    report = {"tool": "cubelab", "version": __version__, "config": _config(args)}
    report.update(body)
    if getattr(args, "timing", False):
        report["timing_seconds"] = round(time.perf_counter() - started, 3)
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    if getattr(args, "report", None):
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _family_spec(spec: GroupSpec, text: str) -> CosetFamily:
    """``canonical``, ``none``, ``words:w1;w2``, ``canonical+w1;w2`` or ``standard:a,c;b,d``."""
    if text == "none":
        return CosetFamily()
    if text == "canonical":
        return canonical_family(spec)
    if text.startswith("canonical+"):
        return canonical_family(spec, [w for w in text[10:].split(";") if w.strip()])
    if text.startswith("words:"):
        return family_from_words(spec, [w for w in text[6:].split(";") if w.strip()])
    if text.startswith("standard:"):
        groups = [[t for t in part.split(",") if t] for part in text[9:].split(";") if part.strip()]
        return family_from_words(spec, (), groups)
    raise UsageError(f"unknown family spec {text!r}")


def _oracle(path: str | None):
    """JSON list of ``{"vertices": [...], "k": n, "cyclic": bool}`` entries."""
    if not path:
        return None
    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    table = {(frozenset(map(str, e["vertices"])), int(e["k"])): bool(e["cyclic"]) for e in entries}
    return lambda sub, k: table.get((frozenset(sub.vertices), k))


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args, started) -> int:
    multigraph = args.multigraph or args.family == "braid"
    g = _load(args.graph, multigraph)
    oracle = _oracle(args.oracle)
    v = analyze(args.family, g, args.n, oracle)
    if not verify_witness(args.family, g, v, oracle):
        raise RuntimeError("internal error: witness failed independent verification")
    body = {"command": "analyze", "verdict": v.to_dict(),
            "witness_verified": v.answer == NO}
    if args.family in ("racg", "raag", "gp"):
        body["contains_F2xF2"] = v.answer == NO
    _emit(args, body, started)
    return EXIT_UNDECIDED if v.answer == UNDECIDED else EXIT_OK


def cmd_ball(args, started) -> int:
    ball = _ball(args)
    body = {"command": "ball", "ball": ball.to_dict()}
    if args.dump:
        with open(args.dump, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["u", "v", "generator"])
            for (a, b), gv in zip(ball.edges, ball.edge_vertex):
                gen = ball.group.names[gv] if ball.group is not None else ""
                w.writerow([ball.name(int(a)), ball.name(int(b)), gen])
        body["dump"] = args.dump
    _emit(args, body, started)
    return EXIT_OK


def cmd_hyperplanes(args, started) -> int:
    ball = _ball(args)
    hs = ball.hyperplanes
    body = {"command": "hyperplanes", "ball": ball.to_dict(), "count": len(hs),
            "hyperplanes": [{"id": ball.hyperplanes_label(h), "vertex": h.vertex,
                             "edges": [[ball.name(a), ball.name(b)] for a, b in h.edges]}
                            for h in hs]}
    _emit(args, body, started)
    return EXIT_OK


def cmd_interval(args, started) -> int:
    ball = _ball(args)
    x, y = _vertex(ball, args.x), _vertex(ball, args.y)
    iv = ball.interval(x, y)
    _emit(args, {"command": "interval", "distance": ball.distance(x, y),
                 "size": len(iv), "interval": sorted(ball.name(i) for i in iv)}, started)
    return EXIT_OK


def _default_geodesic(ball: Ball, x: int, y: int) -> list[int]:
    if ball.group is not None:
        grp = ball.group
        path = grp.geodesic_path(grp.from_syllables(ball.labels[x]), grp.from_syllables(ball.labels[y]))
        return [ball.index[p.syllables] for p in path]
    ry = ball.row(y)
    path = [x]
    while path[-1] != y:
        path.append(min(w for w in ball.neighbors[path[-1]] if ry[w] == ry[path[-1]] - 1))
    return path


def cmd_staircase(args, started) -> int:
    ball = _ball(args)
    x, y, z = (_vertex(ball, t) for t in (args.x, args.y, args.z))
    if args.geodesic:
        path = [_vertex(ball, t) for t in args.geodesic.split(",")]
    else:
        path = _default_geodesic(ball, x, y)
    st = staircase_witness(ball, x, y, z, path)
    if not check_staircase(ball, st, path):
        raise RuntimeError("internal error: staircase failed independent verification")
    _emit(args, {"command": "staircase", "geodesic": [ball.name(p) for p in path],
                 "staircase": st.to_dict(ball), "verified": True}, started)
    return EXIT_OK


def cmd_flats(args, started) -> int:
    ball = _ball(args)
    res = find_flats(ball, args.amin, args.bmin, args.cap)
    if not all(check_flat(ball, f) for f in res.flats):
        raise RuntimeError("internal error: flat failed independent verification")
    shapes: dict = {}
    for f in res.flats:
        shapes[f"{f.a}x{f.b}"] = shapes.get(f"{f.a}x{f.b}", 0) + 1
    body = {"command": "flats", "ball": ball.to_dict(), "count": len(res.flats),
            "truncated": res.truncated, "shapes": shapes,
            "flats": [f.to_dict(ball) for f in res.flats[: args.show]]}
    _emit(args, body, started)
    return EXIT_OK


def _edge(ball: Ball, text: str):
    try:
        u, v = text.split(":", 1)
    except ValueError:
        raise UsageError(f"halfspace {text!r} must look like 'u:v'") from None
    return halfspace_of_edge(ball, _word(ball, u), _word(ball, v))


def cmd_hyptree(args, started) -> int:
    if args.family not in CAYLEY:
        raise UsageError("hyptree needs a Cayley family")
    ball = _ball(args)
    J, A, B = _edge(ball, args.J), _edge(ball, args.A), _edge(ball, args.B)
    tree = tree_of_hyperplanes(ball, _word(ball, args.a), _word(ball, args.b), J, A, B, args.depth)
    ok, witness = transeparation_check(ball, tree)
    _emit(args, {"command": "hyptree", "tree": tree.to_dict(ball),
                 "transeparation": {"ok": ok, "witness": witness}}, started)
    return EXIT_OK


def cmd_coneoff(args, started) -> int:
    spec = _spec(args, _load(args.graph, False))
    fam = _family_spec(spec, args.family_spec)
    curve = delta_curve(spec, fam, _range(args.radii), args.seed, args.basepoints,
                        args.scope, args.region, args.mode)
    csv_text = curve.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    body = {"command": "coneoff", "family": fam.to_dict(), "curve": curve.to_dict()}
    if args.K is not None:
        body["flat_collapse"] = {}
        for r in _range(args.radii):
            body["flat_collapse"][str(r)] = flat_collapse_check(generate_ball(spec, r), fam, args.K)
    if args.out:
        _emit(args, body, started)
    else:
        sys.stdout.write(csv_text)
        if args.report:
            _emit(args, body, started)
    return EXIT_OK


def cmd_ray(args, started) -> int:
    spec = _spec(args, _load(args.graph, False))
    fam = _family_spec(spec, args.family_spec)
    res = ray_distance(spec, fam, args.g, _range(args.k), args.radius, args.mode)
    res["distances"] = {str(k): v for k, v in res["distances"].items()}
    _emit(args, {"command": "ray", "family": fam.to_dict(), "ray": res}, started)
    return EXIT_OK


def _corpus_row(path: Path, family: str, n: int) -> dict:
    row = {"file": path.name, "family": family}
    try:
        multi = path.read_text(encoding="utf-8").lstrip().startswith("# multigraph")
        if multi and family != "braid":
            row.update(answer="skipped", rule="multigraph input needs the braid family")
            return row
        g = _load(str(path), family == "braid")
        if family == "gp" and g.labels is None:
            row.update(answer="skipped", rule="gp needs size labels")
            return row
        v = analyze(family, g, n)
        if not verify_witness(family, g, v):
            raise RuntimeError("witness failed independent verification")
        row.update(answer=v.answer, rule=v.rule)
    except (GraphError, WordError, OSError, UnicodeDecodeError) as exc:
        row.update(answer="error", rule=f"{type(exc).__name__}: {exc}")
    return row


def cmd_corpus(args, started) -> int:
    d = Path(args.directory)
    if not d.is_dir():
        raise GraphError(f"{d} is not a directory")
    files = sorted(p for p in d.iterdir() if p.is_file())
    fams = [f for f in args.families.split(",") if f]
    jobs = [(p, f) for p in files for f in fams]
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as ex:
        rows = list(ex.map(lambda t: _corpus_row(t[0], t[1], args.n), jobs))
    if args.format == "table":
        out = [f"{'file':<24} {'family':<7} {'answer':<10} rule"]
        out += [f"{r['file']:<24} {r['family']:<7} {r['answer']:<10} {r['rule']}" for r in rows]
        text = "\n".join(out) + "\n"
        if args.report:
            Path(args.report).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    else:
        _emit(args, {"command": "corpus", "rows": rows}, started)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cubelab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cubelab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, graph=True):
        sp.add_argument("--report", help="write the JSON report here instead of stdout")
        sp.add_argument("--timing", action="store_true", help="include wall time in the report")
        sp.add_argument("--seed", type=int, default=0)
        if graph:
            sp.add_argument("graph", help="graph file")

    a = sub.add_parser("analyze", help="decide cyclic hyperbolicity")
    a.add_argument("--family", required=True, choices=["racg", "raag", "gp", "braid"])
    a.add_argument("--n", type=int, default=2, help="particles (braid)")
    a.add_argument("--multigraph", action="store_true")
    a.add_argument("--oracle", help="JSON cyclicity facts for braid groups")
    common(a)
    a.set_defaults(func=cmd_analyze)

    def geom(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--family", required=True, choices=["racg", "raag", "gp", "median"],
                        help="'median' reads the file as a finite median graph")
        sp.add_argument("--radius", type=int, default=4)
        common(sp)
        sp.set_defaults(func=func)
        return sp

    b = geom("ball", cmd_ball, "Cayley ball statistics")
    b.add_argument("--dump", help="write the edge list as CSV")
    geom("hyperplanes", cmd_hyperplanes, "hyperplanes of a ball")
    i = geom("interval", cmd_interval, "interval between two vertices")
    i.add_argument("--x", required=True)
    i.add_argument("--y", required=True)
    s = geom("staircase", cmd_staircase, "staircase witness")
    for opt in ("--x", "--y", "--z"):
        s.add_argument(opt, required=True)
    s.add_argument("--geodesic", help="comma-separated vertices from x to y")
    f = geom("flats", cmd_flats, "maximal flat rectangles")
    f.add_argument("--amin", type=int, default=1)
    f.add_argument("--bmin", type=int, default=1)
    f.add_argument("--cap", type=int, default=10_000)
    f.add_argument("--show", type=int, default=20, help="flats listed in the report")
    h = geom("hyptree", cmd_hyptree, "tree of hyperplanes")
    for opt in ("--a", "--b", "--J", "--A", "--B"):
        h.add_argument(opt, required=True)
    h.add_argument("--depth", type=int, default=3)

    c = sub.add_parser("coneoff", help="delta curve of cone-offs")
    c.add_argument("--family", default="racg", choices=list(CAYLEY))
    c.add_argument("--family-spec", default="canonical")
    c.add_argument("--radii", default="2..4")
    c.add_argument("--basepoints", type=int, default=16)
    c.add_argument("--scope", default="safe", choices=["safe", "ball"])
    c.add_argument("--region", default="safe", choices=["safe", "ball"])
    c.add_argument("--mode", default="clique", choices=["clique", "apex"])
    c.add_argument("--K", type=float, help="also run the flat-collapse check with this K")
    c.add_argument("--out", help="CSV output path (CSV goes to stdout otherwise)")
    common(c)
    c.set_defaults(func=cmd_coneoff)

    r = sub.add_parser("ray", help="cone-off distances along powers of g")
    r.add_argument("--family", default="racg", choices=list(CAYLEY))
    r.add_argument("--family-spec", default="canonical")
    r.add_argument("--g", required=True)
    r.add_argument("--k", default="1..6")
    r.add_argument("--radius", type=int)
    r.add_argument("--mode", default="clique", choices=["clique", "apex"])
    common(r)
    r.set_defaults(func=cmd_ray)

    k = sub.add_parser("corpus", help="analyze every graph file in a directory")
    k.add_argument("directory")
    k.add_argument("--families", default="racg,raag")
    k.add_argument("--n", type=int, default=2)
    k.add_argument("--jobs", type=int, default=1)
    k.add_argument("--format", default="table", choices=["table", "json"])
    common(k, graph=False)
    k.set_defaults(func=cmd_corpus)
    return p


def run(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, started)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
    except GraphParseError as exc:
        print(f"input error: malformed graph file: {exc}", file=sys.stderr)
    except (GraphError, WordError, TreeHypothesisError, SafeRadiusError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
    except (BallResourceError, SearchCapError, StaircaseError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
    return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
