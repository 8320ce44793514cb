"""Command line entry point: ``electre-tree {elicit,classify,cluster,trib,boundary}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .core import ElectreTreeError, ValidationError
from .ensemble import CLUSTER_RESTARTS
from .clustering import kmeans, cluster_ranks
from .io import RunConfig, default_class_names, load_matrix, load_params
from .pipeline import boundary_grid, run_classify, run_elicit
from .tri_b import RULES, assign

log = logging.getLogger("electre_tree")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _pairs(items, what: str) -> dict[str, str]:
    out = {}
    for it in items or []:
        if "=" not in it:
            raise ValidationError(f"{what} expects NAME=VALUE, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _number_or_word(tok: str):
    try:
        return float(tok)
    except ValueError:
        return tok


def _elicitation_overrides(fix, free) -> dict:
    decl = {}
    groups = {"weights", "q", "p", "v", "lambda"}
    for name, val in _pairs(fix, "--fix").items():
        if name not in groups:
            raise ValidationError(f"--fix: unknown parameter group {name!r}")
        parts = [_number_or_word(t) for t in val.split(",")]
        decl[name] = parts[0] if len(parts) == 1 else parts
    for name, val in _pairs(free, "--free").items():
        if name not in groups:
            raise ValidationError(f"--free: unknown parameter group {name!r}")
        try:
            lo, hi = (float(t) for t in val.split(":"))
        except ValueError:
            raise ValidationError(f"--free expects NAME=LO:HI, got {val!r}") from None
        decl[name] = {"free": [lo, hi]}
    return decl


def _data_options(p):
    p.add_argument("--direction", action="append", metavar="NAME=max|min",
                   help="criterion orientation (default max)")
    p.add_argument("--normalize", choices=["none", "minmax"])
    p.add_argument("--classes", type=int)
    p.add_argument("--class-names", help="comma separated, best class first")
    p.add_argument("--labels-column")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="electre-tree", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("elicit", help="build an ensemble and elicit parameters")
    e.add_argument("data", nargs="?", help="input CSV (overrides the config)")
    e.add_argument("--config", help="JSON run configuration")
    _data_options(e)
    e.add_argument("--rule", choices=RULES)
    e.add_argument("--reference", choices=["clusters", "labels"])
    e.add_argument("--fix", action="append", metavar="GROUP=VALUE",
                   help="fix weights/q/p/v/lambda; comma list per criterion; v=none drops veto")
    e.add_argument("--free", action="append", metavar="GROUP=LO:HI")
    e.add_argument("--n-models", type=int)
    e.add_argument("--sample-fraction", type=float)
    e.add_argument("--generations", type=int)
    e.add_argument("--population", type=int)
    e.add_argument("--elite", type=int)
    e.add_argument("--mutation-rate", type=float)
    e.add_argument("--mu", type=float)
    e.add_argument("--eta", type=float)
    e.add_argument("--seed", type=int)
    e.add_argument("--trim", type=float, help="drop models below this accuracy")
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--out", default="electre_tree_out", help="output directory")

    c = sub.add_parser("classify", help="vote on new alternatives")
    c.add_argument("ensemble")
    c.add_argument("data")
    c.add_argument("--trim", type=float)
    c.add_argument("--out", help="write the vote table here instead of stdout")

    k = sub.add_parser("cluster", help="ordered K-means++ classes")
    k.add_argument("data")
    _data_options(k)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--restarts", type=int, default=CLUSTER_RESTARTS)
    k.add_argument("--out")

    t = sub.add_parser("trib", help="plain ELECTRE Tri-B with given parameters")
    t.add_argument("data")
    t.add_argument("--params", required=True, help="JSON parameter file")
    _data_options(t)
    t.add_argument("--rule", choices=RULES, default="pessimistic")
    t.add_argument("--out")

    b = sub.add_parser("boundary", help="decision-boundary grid as CSV")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--ensemble")
    src.add_argument("--params")
    b.add_argument("--data", help="CSV giving criteria and ranges (with --params)")
    b.add_argument("--labels-column", help="non-criterion column of --data to skip")
    b.add_argument("--rule", choices=RULES)
    b.add_argument("--x", required=True)
    b.add_argument("--y", required=True)
    b.add_argument("--resolution", type=int, default=100)
    b.add_argument("--at", action="append", metavar="NAME=VALUE",
                   help="value for a criterion not on the grid")
    b.add_argument("--out")
    return parser


def _config_from_args(a) -> RunConfig:
    base = RunConfig.from_file(a.config).to_dict() if a.config else {}
    if a.data:
        base["data"] = a.data
    if a.direction:
        base["directions"] = {**base.get("directions", {}), **_pairs(a.direction, "--direction")}
    simple = {"normalize": "normalization", "classes": "classes", "rule": "rule",
              "reference": "reference", "labels_column": "labels_column",
              "n_models": "n_models", "sample_fraction": "sample_fraction",
              "seed": "seed", "trim": "trim"}
    for attr, key in simple.items():
        val = getattr(a, attr)
        if val is not None:
            base[key] = val
    if a.labels_column and a.reference is None:
        base["reference"] = "labels"
    if a.class_names:
        base["class_names"] = [s.strip() for s in a.class_names.split(",")]
    elif a.classes is not None and len(base.get("class_names", [])) != a.classes:
        base["class_names"] = default_class_names(a.classes)
    decl = _elicitation_overrides(a.fix, a.free)
    if decl:
        base["elicitation"] = {**base.get("elicitation", {}), **decl}
    ga = dict(base.get("ga", {}))
    for attr, key in {"generations": "generations", "population": "population_size",
                      "elite": "elite_count", "mutation_rate": "mutation_rate",
                      "mu": "mu", "eta": "eta"}.items():
        val = getattr(a, attr)
        if val is not None:
            ga[key] = val
    base["ga"] = ga
    return RunConfig.from_dict(base)


def _plain_config(a, labels_column=None) -> RunConfig:
    names = [s.strip() for s in a.class_names.split(",")] if a.class_names else []
    classes = a.classes or (len(names) if names else 2)
    return RunConfig(directions=_pairs(a.direction, "--direction"),
                     normalization=a.normalize or "none", classes=classes,
                     class_names=names, labels_column=labels_column)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_elicit(a) -> int:
    cfg = _config_from_args(a)
    res = run_elicit(cfg, a.out, n_jobs=a.jobs)
    log.info("wrote %s and %s", Path(a.out) / "report.txt", Path(a.out) / "ensemble.json")
    print(f"vote accuracy {res.vote_accuracy:.4f}, merged accuracy {res.merged_accuracy:.4f}, "
          f"mean model accuracy {res.ensemble.accuracies.mean():.4f}")
    return EXIT_OK


def cmd_classify(a) -> int:
    res = run_classify(a.ensemble, a.data, trim=a.trim)
    _emit(res.table, a.out)
    return EXIT_OK


def cmd_cluster(a) -> int:
    cfg = _plain_config(a, labels_column=a.labels_column)
    matrix, _, _ = load_matrix(a.data, cfg)
    rng = np.random.default_rng(np.random.SeedSequence(a.seed))
    cl = kmeans(matrix, cfg.classes, rng, n_init=a.restarts)
    ranks = cluster_ranks(cl.centroids)
    names = cfg.class_names
    k = cfg.classes
    lines = ["[Centroids]", "cluster," + ",".join(matrix.criteria) + ",class"]
    for c, cen in enumerate(cl.centroids):
        lines.append(f"{c + 1}," + ",".join(repr(float(x)) for x in cen)
                     + f",{names[k - 1 - ranks[c]]}")
    lines += ["", "[Assignments]", "id,cluster,class"]
    for alt, c in zip(matrix.alternatives, cl.membership):
        lines.append(f"{alt},{c + 1},{names[k - 1 - ranks[c]]}")
    _emit("\n".join(lines) + "\n", a.out)
    return EXIT_OK


def cmd_trib(a) -> int:
    params = load_params(a.params)
    if a.classes is None and not a.class_names:
        a.classes = params.n_classes
    cfg = _plain_config(a, labels_column=a.labels_column)
    if cfg.classes != params.n_classes:
        raise ValidationError(
            f"parameters define {params.n_classes} classes, config says {cfg.classes}")
    matrix, _, _ = load_matrix(a.data, cfg)
    if matrix.shape[1] != params.n_criteria:
        raise ValidationError(
            f"data has {matrix.shape[1]} criteria, parameters have {params.n_criteria}")
    cls = assign(matrix, params, a.rule).classes
    k = params.n_classes
    lines = ["id,class"] + [f"{alt},{cfg.class_names[k - 1 - c]}"
                            for alt, c in zip(matrix.alternatives, cls)]
    _emit("\n".join(lines) + "\n", a.out)
    return EXIT_OK


def cmd_boundary(a) -> int:
    fixed = {k: float(v) for k, v in _pairs(a.at, "--at").items()}
    if a.ensemble:
        grid = boundary_grid(a.ensemble, a.x, a.y, a.resolution, fixed, rule=a.rule)
    else:
        if not a.data:
            raise ValidationError("--params needs --data for criteria names and ranges")
        params = load_params(a.params)
        matrix, _, _ = load_matrix(a.data, RunConfig(classes=params.n_classes,
                                                   labels_column=a.labels_column))
        ranges = (matrix.values.min(0), matrix.values.max(0))
        grid = boundary_grid(params, a.x, a.y, a.resolution, fixed, ranges=ranges,
                             criteria=matrix.criteria, rule=a.rule)
    _emit(grid.to_csv(), a.out)
    return EXIT_OK


COMMANDS = {"elicit": cmd_elicit, "classify": cmd_classify, "cluster": cmd_cluster,
            "trib": cmd_trib, "boundary": cmd_boundary}


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[a.command](a)
    except (ValidationError, FileNotFoundError) as e:
        print(f"electre-tree: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ElectreTreeError as e:
        print(f"electre-tree: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        print(f"electre-tree: runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
