"""Mini-grammar for graph, process and weight-function specs (grammar version 1).

Graph specs::

    cycle:n=64          path:n=10          complete:n=100      empty:n=5
    hypercube:dim=3     torus:16x16        torus:dims=8x8x8
    regular:n=256,d=4,seed=1
    product:cycle:n=8;complete:n=3      (Cartesian product, ';' separates factors)
    file:graph.txt                      (edge-list text)

Process specs::

    local-search   one-choice   d-choice:d=2   coupon   poisson:<process>

Weight-function specs (for coupling checks)::

    zero   distance-to:v   negative-distance-to:v   file:weights.txt

A weight file holds one ``vertex value`` pair per line (``#`` comments).
Unknown families or keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import graph as G
from .alloc import WeightFn

GRAMMAR_VERSION = 1


class SpecError(ValueError):
    pass


def _kv(body: str, allowed: dict[str, type], family: str) -> dict:
    out = {}
    if not body:
        return out
    for part in body.split(","):
        if "=" not in part:
            raise SpecError(f"{family}: expected key=value, got {part!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        if k not in allowed:
            raise SpecError(f"{family}: unknown key {k!r} (allowed: {', '.join(allowed)})")
        try:
            out[k] = allowed[k](v)
        except ValueError:
            raise SpecError(f"{family}: bad value for {k}: {v!r}") from None
    return out


def _need(params: dict, keys: tuple[str, ...], family: str) -> None:
    missing = [k for k in keys if k not in params]
    if missing:
        raise SpecError(f"{family}: missing {', '.join(missing)}")


def _dims(text: str) -> list[int]:
    try:
        return [int(x) for x in text.lower().split("x")]
    except ValueError:
        raise SpecError(f"torus: bad dimensions {text!r}") from None


def parse_graph(spec: str) -> G.Graph:
    family, _, body = spec.strip().partition(":")
    try:
        if family == "product":
            parts = body.split(";")
            if len(parts) != 2:
                raise SpecError("product: expected exactly two factors separated by ';'")
            return G.gen_cartesian_product(parse_graph(parts[0]), parse_graph(parts[1]))
        if family == "file":
            if not body:
                raise SpecError("file: missing path")
            return G.load_edge_list(Path(body).read_text(encoding="utf-8"))
        if family == "torus":
            if body.startswith("dims="):
                body = body[5:]
            return G.gen_torus(_dims(body))
        if family in ("cycle", "path", "complete", "empty"):
            p = _kv(body, {"n": int}, family)
            _need(p, ("n",), family)
            gen = {"cycle": G.gen_cycle, "path": G.gen_path, "complete": G.gen_complete, "empty": G.gen_empty}
            return gen[family](p["n"])
        if family == "hypercube":
            p = _kv(body, {"dim": int}, family)
            _need(p, ("dim",), family)
            return G.gen_hypercube(p["dim"])
        if family == "regular":
            p = _kv(body, {"n": int, "d": int, "seed": int}, family)
            _need(p, ("n", "d"), family)
            return G.gen_random_regular(p["n"], p["d"], p.get("seed", 0))
    except G.GraphError as exc:
        raise SpecError(f"{spec}: {exc}") from None
    except OSError as exc:
        raise SpecError(f"{spec}: {exc}") from None
    raise SpecError(f"unknown graph family {family!r}")


@dataclass(frozen=True)
class ProcessSpec:
    kind: str            # local-search | one-choice | d-choice | coupon
    d: int = 1
    poisson: bool = False

    def __str__(self) -> str:
        base = f"d-choice:d={self.d}" if self.kind == "d-choice" else self.kind
        return f"poisson:{base}" if self.poisson else base


def parse_process(spec: str) -> ProcessSpec:
    spec = spec.strip()
    if spec.startswith("poisson:"):
        inner = parse_process(spec[len("poisson:"):])
        if inner.poisson or inner.kind == "coupon":
            raise SpecError(f"cannot Poissonize {spec[len('poisson:'):]!r}")
        return ProcessSpec(inner.kind, inner.d, True)
    family, _, body = spec.partition(":")
    if family in ("local-search", "one-choice", "coupon"):
        if body:
            raise SpecError(f"{family} takes no parameters")
        return ProcessSpec(family)
    if family == "d-choice":
        p = _kv(body, {"d": int}, family)
        _need(p, ("d",), family)
        if p["d"] < 1:
            raise SpecError("d-choice: d must be >= 1")
        return ProcessSpec("d-choice", p["d"])
    raise SpecError(f"unknown process {spec!r}")


def parse_weights(spec: str, g: G.Graph) -> WeightFn:
    spec = spec.strip()
    try:
        if spec == "zero":
            return WeightFn.zero(g)
        if spec.startswith("distance-to:"):
            return WeightFn.distance_to(g, int(spec.split(":", 1)[1]))
        if spec.startswith("negative-distance-to:"):
            return WeightFn.distance_to(g, int(spec.split(":", 1)[1]), sign=-1)
        if spec.startswith("file:"):
            return load_weights(Path(spec[5:]).read_text(encoding="utf-8"), g)
    except (ValueError, G.GraphError, OSError) as exc:
        raise SpecError(f"{spec}: {exc}") from None
    raise SpecError(f"unknown weight function {spec!r}")


def load_weights(text: str, g: G.Graph) -> WeightFn:
    mu = [None] * g.n
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SpecError(f"weights line {lineno}: expected 'vertex value'")
        v, val = int(parts[0]), int(parts[1])
        if not 0 <= v < g.n:
            raise SpecError(f"weights line {lineno}: vertex {v} out of range")
        if mu[v] is not None:
            raise SpecError(f"weights line {lineno}: vertex {v} given twice")
        mu[v] = val
    missing = [v for v, x in enumerate(mu) if x is None]
    if missing:
        raise SpecError(f"weights missing for vertices {missing[:5]}")
    return WeightFn.for_graph(g, mu)
