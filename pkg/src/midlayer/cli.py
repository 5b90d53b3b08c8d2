"""Command-line interface: ``midlayer <group> <action> [flags]``.

Every command writes one JSON document (``sample run`` writes JSON lines)
to stdout or to ``--out``. Exit codes: 0 success, 1 usage error, 2 invalid
parameters or input, 3 resource limit, 4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import kernels
from .errors import ConsistencyError, ParameterError, ResourceLimitError, ValidationError
from .graph import MAX_D, binomial_vstar, build_graph, isoperimetry_check
from .polymers import PolymerParams

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RESOURCE, EXIT_CONSISTENCY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    d: int | None = None
    q: int | None = None
    params: PolymerParams = PolymerParams()
    k: int | None = None
    psi: int | None = None
    seed: int = 0
    samples: int = 1000
    workers: int = 1
    out: str | None = None
    precision: int = 128
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.d is not None and not 2 <= self.d <= MAX_D:
            raise ParameterError(f"--d must lie in [2, {MAX_D}]")
        if self.q is not None and self.q < 2:
            raise ParameterError("--q must be >= 2")
        for name in ("max_size", "max_boundary"):
            v = getattr(self.params, name)
            if v is not None and v < 0:
                raise ParameterError(f"--{name.replace('_', '-')} must be >= 0")
        if self.k is not None and self.k < 1:
            raise ParameterError("--k must be >= 1")
        if self.psi is not None and self.psi < 0:
            raise ParameterError("--psi must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("--seed must be a 64-bit unsigned integer")
        if self.samples < 0:
            raise ParameterError("--samples must be >= 0")
        if self.workers < 1:
            raise ParameterError("--workers must be >= 1")
        if not 53 <= self.precision <= 100_000:
            raise ParameterError("--precision must lie in [53, 100000] bits")


def _int_list(text: str) -> list[int]:
    if text is None or text.strip() == "":
        return []
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise ParameterError(f"expected comma-separated integers, got {text!r}") from exc


def _need(cfg: RunConfig, *names: str) -> None:
    for n in names:
        if getattr(cfg, n) is None:
            raise UsageError(f"--{n} is required for '{cfg.command}'")


def _partition(cfg: RunConfig):
    from .coloring import PrincipalPartition, principal_partitions

    A = cfg.extra.get("A")
    if A is None:
        return principal_partitions(cfg.q)[0]
    A = tuple(sorted(_int_list(A)))
    B = tuple(c for c in range(1, cfg.q + 1) if c not in A)
    return PrincipalPartition(A, B)


# ---------------------------------------------------------------- commands


def cmd_graph_info(cfg):
    _need(cfg, "d")
    g = build_graph(cfg.d)
    degs = {len(x) for x in g.neighbors}
    return {
        "d": g.d,
        "n": g.n,
        "N": g.N,
        "edges": g.num_edges,
        "regular": degs.pop() if len(degs) == 1 else None,
        "connected": g.is_connected(),
        "v_star": len(g.rotated.v_star),
        "v_star_expected": binomial_vstar(g.d),
    }


def cmd_iso_check(cfg):
    _need(cfg, "d")
    g = build_graph(cfg.d)
    return isoperimetry_check(g, _int_list(cfg.extra.get("vertices"))).as_dict()


def cmd_count_exact(cfg):
    from .coloring import BRUTE_MAX_D, brute_enumerate, count_colorings_exact

    _need(cfg, "d", "q")
    out = {"d": cfg.d, "q": cfg.q, "c_q": str(count_colorings_exact(cfg.d, cfg.q)), "backend": kernels.BACKEND}
    if cfg.extra.get("brute") and cfg.d <= BRUTE_MAX_D:
        out["brute_force"] = str(len(brute_enumerate(cfg.d, cfg.q)))
    return out


def cmd_flaw_analyze(cfg):
    from .coloring import flaw, nearest_ground_state

    _need(cfg, "d", "q")
    g = build_graph(cfg.d)
    f = _int_list(cfg.extra.get("coloring"))
    if cfg.extra.get("A") is None:
        rep = nearest_ground_state(g, f, cfg.q)
    else:
        rep = flaw(g, f, _partition(cfg))
    return rep.as_dict()


def cmd_polymers_enumerate(cfg):
    from .polymers import enumerate_polymers, polymer_census

    _need(cfg, "d")
    g = build_graph(cfg.d)
    polys = enumerate_polymers(g, cfg.params)
    out = {"d": cfg.d, "params": cfg.params.as_dict(), "count": len(polys), "census": {str(k): v for k, v in polymer_census(polys).items()}}
    if cfg.extra.get("list"):
        out["polymers"] = [p.to_json() for p in polys]
    return out


def cmd_polymers_weight(cfg):
    from .polymers import make_polymer, weight

    _need(cfg, "d", "q")
    g = build_graph(cfg.d)
    gamma = make_polymer(g, _int_list(cfg.extra.get("vertices")))
    p = _partition(cfg)
    from .util import frac_str

    return {"vertices": gamma.to_json(), "partition": p.as_dict(), "weight": frac_str(weight(g, gamma, p))}


def cmd_xi_compute(cfg):
    from .polymers import partition_function

    _need(cfg, "d", "q")
    g = build_graph(cfg.d)
    p = _partition(cfg)
    out = partition_function(g, cfg.params, p).as_dict()
    out["partition"] = p.as_dict()
    out["params"] = cfg.params.as_dict()
    return out


def cmd_capture_check(cfg):
    from .coloring import BRUTE_MAX_D, count_colorings_exact
    from .polymers import capture_count, captured_brute_force

    _need(cfg, "d", "q")
    g = build_graph(cfg.d)
    p = _partition(cfg)
    cap = capture_count(g, cfg.params, p)
    total = count_colorings_exact(cfg.d, cfg.q)
    out = {"partition": p.as_dict(), "params": cfg.params.as_dict(), "captured": str(cap), "total": str(total)}
    asserted = {"captured_le_total": cap <= total}
    if cfg.d <= BRUTE_MAX_D:
        bf = captured_brute_force(g, cfg.params, p)
        out["brute_force_captured"] = str(bf)
        asserted["matches_brute_force"] = bf == cap
    out["asserted"] = asserted
    return out


def cmd_clusters_lk(cfg):
    from .clusters import closed_form_L1, closed_form_L2, series_term
    from .util import frac_str

    _need(cfg, "d", "q", "k")
    g = build_graph(cfg.d)
    out = series_term(g, cfg.params, _partition(cfg), cfg.k).as_dict()
    if cfg.k <= 2 and cfg.params == PolymerParams() and cfg.q >= 3:
        out["closed_form"] = frac_str((closed_form_L1 if cfg.k == 1 else closed_form_L2)(cfg.d, cfg.q))
    return out


def cmd_expansion_approx(cfg):
    from .clusters import approx_count
    from .coloring import threshold_polymer_size

    _need(cfg, "d", "q")
    t = cfg.k if cfg.k is not None else threshold_polymer_size(cfg.q)
    eps_c = float(cfg.extra.get("eps_constant") or 1.0)
    return approx_count(cfg.d, cfg.q, t, eps_constant=eps_c, prec=cfg.precision).as_dict()


def cmd_expansion_compare(cfg):
    from .clusters import compare_with_exact

    _need(cfg, "d", "q")
    return compare_with_exact(cfg.d, cfg.q, cfg.k, prec=cfg.precision)


def cmd_expansion_logcheck(cfg):
    from .clusters import formal_log_check
    from .coloring import threshold_polymer_size
    from .polymers import enumerate_polymers

    _need(cfg, "d", "q")
    K = cfg.k if cfg.k is not None else threshold_polymer_size(cfg.q)
    g = build_graph(cfg.d)
    cap = K if cfg.params.max_size is None else min(K, cfg.params.max_size)
    polys = enumerate_polymers(g, PolymerParams(cap, cfg.params.max_boundary))
    return formal_log_check(g, polys, _partition(cfg), K)


def cmd_kp_check(cfg):
    from .polymers import kp_lhs

    _need(cfg, "d", "q")
    g = build_graph(cfg.d)
    v = int(cfg.extra.get("vertex") or 0)
    if not 0 <= v < g.N:
        raise ParameterError(f"--vertex must lie in [0, {g.N - 1}]")
    xi = Fraction(cfg.extra.get("xi") or 1)
    return kp_lhs(g, cfg.params, _partition(cfg), v, xi=xi, prec=cfg.precision).as_dict()


def cmd_containers_cover(cfg):
    from .containers import greedy_cover, mutual_cover

    _need(cfg, "d")
    g = build_graph(cfg.d)
    vs = cfg.extra.get("vertices")
    if vs is None:
        res = greedy_cover(sorted(g.lower), sorted(g.upper), {v: g.neighbors[v] for v in g.upper})
        return {"instance": "layer d-1 covered by layer d", **res.as_dict()}
    rep = mutual_cover(g, _int_list(vs))
    return {"instance": "mutual cover", **rep.as_dict()}


def cmd_containers_pair(cfg):
    from .containers import construct_approx_pair

    _need(cfg, "d", "psi")
    g = build_graph(cfg.d)
    return construct_approx_pair(g, _int_list(cfg.extra.get("vertices")), cfg.psi).as_dict()


def cmd_containers_verify(cfg):
    from .containers import pair_from_json, verify_approx_pair

    _need(cfg, "d")
    g = build_graph(cfg.d)
    src = cfg.extra.get("input")
    if not src:
        raise ParameterError("--input (a JSON file holding {F, S, psi, X}) is required")
    try:
        with open(src, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read pair from {src}: {exc}") from exc
    if isinstance(obj, dict) and "pair" in obj:
        obj = obj["pair"]
    return verify_approx_pair(g, pair_from_json(obj))


def _sampler_config(cfg):
    from .sampler import SamplerConfig

    _need(cfg, "d", "q")
    return SamplerConfig(cfg.d, cfg.q, cfg.params, cfg.seed, cfg.samples)


def cmd_sample_run(cfg):
    from .sampler import sample_mu_hat, write_jsonl

    sc = _sampler_config(cfg)
    with _output(cfg.out) as fh:
        write_jsonl(sample_mu_hat(sc, workers=cfg.workers), fh)
    return None


def cmd_sample_stats(cfg):
    from .sampler import defect_stats, exact_mu_hat, read_jsonl, sample_mu_hat, EXACT_MAX_D

    src = cfg.extra.get("input")
    if src:
        _need(cfg, "d")
        try:
            with open(src, encoding="utf-8") as fh:
                recs = read_jsonl(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read samples from {src}: {exc}") from exc
    else:
        recs = list(sample_mu_hat(_sampler_config(cfg), workers=cfg.workers))
    out = defect_stats(recs, build_graph(cfg.d).N)
    if cfg.q is not None and cfg.d <= EXACT_MAX_D:
        ex = exact_mu_hat(cfg.d, cfg.q, cfg.params)
        out["reported"]["exact_pr_flaw_equals_lambda"] = float(ex.pr_flaw_equals_lambda)
    return out


COMMANDS: dict[tuple[str, str], Callable] = {
    ("graph", "info"): cmd_graph_info,
    ("iso", "check"): cmd_iso_check,
    ("count", "exact"): cmd_count_exact,
    ("flaw", "analyze"): cmd_flaw_analyze,
    ("polymers", "enumerate"): cmd_polymers_enumerate,
    ("polymers", "weight"): cmd_polymers_weight,
    ("xi", "compute"): cmd_xi_compute,
    ("capture", "check"): cmd_capture_check,
    ("clusters", "lk"): cmd_clusters_lk,
    ("expansion", "approx"): cmd_expansion_approx,
    ("expansion", "compare"): cmd_expansion_compare,
    ("expansion", "logcheck"): cmd_expansion_logcheck,
    ("kp", "check"): cmd_kp_check,
    ("containers", "cover"): cmd_containers_cover,
    ("containers", "pair"): cmd_containers_pair,
    ("containers", "verify"): cmd_containers_verify,
    ("sample", "run"): cmd_sample_run,
    ("sample", "stats"): cmd_sample_stats,
}


# ------------------------------------------------------------------ plumbing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--max-size", type=int)
    p.add_argument("--max-boundary", type=int)
    p.add_argument("--k", type=int, help="cluster size, truncation t, or log degree K")
    p.add_argument("--psi", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--precision", type=int, default=128, help="mpmath working precision in bits")
    p.add_argument("--A", dest="A", help="colors of the upper layer, e.g. 1,2")
    p.add_argument("--vertices", help="comma-separated vertex indices")
    p.add_argument("--coloring", help="comma-separated colors, one per vertex")
    p.add_argument("--vertex", type=int)
    p.add_argument("--xi", help="constant in the large-boundary regime of g (default 1)")
    p.add_argument("--eps-constant", dest="eps_constant", type=float)
    p.add_argument("--input", help="input file for 'containers verify' and 'sample stats'")
    p.add_argument("--list", action="store_true", help="include the polymer list")
    p.add_argument("--brute", action="store_true", help="also count by brute force (d <= 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="midlayer", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", parser_class=_Parser)
    by_group: dict[str, list[str]] = {}
    for g, a in COMMANDS:
        by_group.setdefault(g, []).append(a)
    for g, actions in by_group.items():
        gp = groups.add_parser(g)
        sub = gp.add_subparsers(dest="action", parser_class=_Parser)
        for a in actions:
            _add_common(sub.add_parser(a))
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    extra = {k: getattr(ns, k) for k in ("A", "vertices", "coloring", "vertex", "xi", "eps_constant", "input", "list", "brute")}
    cfg = RunConfig(
        command=f"{ns.group} {ns.action}",
        d=ns.d,
        q=ns.q,
        params=PolymerParams(ns.max_size, ns.max_boundary),
        k=ns.k,
        psi=ns.psi,
        seed=ns.seed,
        samples=ns.samples,
        workers=ns.workers,
        out=ns.out,
        precision=ns.precision,
        extra=extra,
    )
    cfg.validate()
    return cfg


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def dispatch(cfg: RunConfig):
    group, action = cfg.command.split(" ", 1)
    fn = COMMANDS.get((group, action))
    if fn is None:
        raise UsageError(f"unknown command '{cfg.command}'")
    return fn(cfg)


def _emit(doc, out) -> None:
    with _output(out) as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if not ns.group or not getattr(ns, "action", None):
            raise UsageError("a command group and action are required; try --help")
        cfg = config_from_args(ns)
        doc = dispatch(cfg)
        if doc is not None:
            _emit(doc, cfg.out)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ParameterError, ValidationError) as exc:
        _emit_err(exc, "invalid")
        return EXIT_INVALID
    except ResourceLimitError as exc:
        _emit_err(exc, "resource", exc.estimate)
        return EXIT_RESOURCE
    except ConsistencyError as exc:
        _emit_err(exc, "consistency")
        return EXIT_CONSISTENCY


def _emit_err(exc, kind, estimate=None) -> None:
    doc = {"error": str(exc), "kind": kind}
    if estimate is not None:
        doc["estimate"] = str(estimate)
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
