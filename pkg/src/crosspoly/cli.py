"""``crosspoly`` command line: JSON instances in, one canonical JSON record out.

Exit codes: 0 ok, 2 invalid instance, 3 precondition violation,
4 degenerate input, 1 anything else (including a failed reduction check).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from decimal import Decimal, localcontext
from fractions import Fraction

from . import oracles
from .bench import run_bench
from .exceptions import InvalidInstance, VolumeError
from .geometry import CrossPolytope, as_fraction, as_vector, format_fraction, normalize_pair
from .k_ball import KBallInstance, approx_k_ball_volume
from .knapsack import KnapsackDualInstance, approx_knapsack_dual_volume
from .two_ball import TwoBallInstance, approx_two_ball_volume
from .vpolytope import VPolytopeInstance, exact_volume

KINDS = ("two_balls", "k_balls", "knapsack_dual", "v_polytope")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def decimal_string(x, digits: int = 17) -> str:
    """Plain (non-exponent) decimal; exact when ``x`` has a terminating expansion."""
    if isinstance(x, float):
        d = Decimal(repr(x))
    else:
        x = Fraction(x)
        with localcontext() as ctx:
            ctx.prec = digits
            d = Decimal(x.numerator) / Decimal(x.denominator)
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


# ---- instance files -------------------------------------------------------

def _vec(payload, key):
    try:
        return as_vector(payload[key])
    except KeyError as exc:
        raise InvalidInstance(f"instance is missing {key!r}") from exc


def parse_instance(doc) -> tuple[str, dict]:
    """Validate the raw JSON and return ``(kind, payload)`` with exact rationals."""
    if not isinstance(doc, dict):
        raise InvalidInstance("instance must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise InvalidInstance(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "two_balls":
        if "balls" in doc:
            balls = [CrossPolytope(as_vector(b["center"]), as_fraction(b["radius"]))
                     for b in doc["balls"]]
            if len(balls) != 2:
                raise InvalidInstance("two_balls needs exactly two balls")
            return kind, {"balls": [(b.center, b.radius) for b in balls]}
        if "r" not in doc:
            raise InvalidInstance("two_balls needs 'c' and 'r' or 'balls'")
        return kind, {"c": _vec(doc, "c"), "r": as_fraction(doc["r"])}
    if kind == "k_balls":
        centers = doc.get("centers")
        radii = doc.get("radii")
        if not isinstance(centers, list) or not isinstance(radii, list):
            raise InvalidInstance("k_balls needs 'centers' and 'radii' lists")
        return kind, {"centers": [as_vector(p) for p in centers],
                      "radii": [as_fraction(r) for r in radii]}
    if kind == "knapsack_dual":
        return kind, {"a": _vec(doc, "a")}
    verts = doc.get("vertices")
    if not isinstance(verts, list):
        raise InvalidInstance("v_polytope needs a 'vertices' list")
    return kind, {"vertices": [as_vector(v) for v in verts]}


def instance_digest(kind: str, payload: dict) -> str:
    blob = canonical_json({"kind": kind, **_jsonable(payload)})
    return hashlib.sha256(blob.encode("ascii")).hexdigest()


def load_instance(path: str):
    try:
        if path == "-":
            doc = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
    except OSError as exc:
        raise InvalidInstance(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInstance(f"{path} is not valid JSON: {exc}") from exc
    return parse_instance(doc)


def two_ball_of(payload) -> tuple[TwoBallInstance, Fraction]:
    """Canonical two-ball instance plus the volume scale factor."""
    if "balls" in payload:
        (c1, r1), (c2, r2) = payload["balls"]
        if len(c1) != len(c2):
            raise InvalidInstance("balls of different dimension")
        if r1 <= 0 or r2 <= 0:
            raise InvalidInstance("radii must be positive")
        first, second = CrossPolytope(c1, r1), CrossPolytope(c2, r2)
        if r2 > r1:
            first, second = second, first
        c, r, scale = normalize_pair(first, second)
        return TwoBallInstance(c, r), scale
    return TwoBallInstance(payload["c"], payload["r"]), Fraction(1)


def balls_of(kind: str, payload) -> list[CrossPolytope]:
    if kind == "two_balls":
        if "balls" in payload:
            return [CrossPolytope(c, r) for c, r in payload["balls"]]
        n = len(payload["c"])
        return [CrossPolytope((0,) * n, 1), CrossPolytope(payload["c"], payload["r"])]
    if kind == "k_balls":
        return [CrossPolytope(c, r) for c, r in zip(payload["centers"], payload["radii"])]
    raise InvalidInstance(f"{kind} is not a ball intersection")


# ---- records ---------------------------------------------------------------

def _record(value, *, engine, digest, t0, lower_exact, upper_factor, params, **extra):
    params = {"M": None, "beta": None, "delta": None, "epsilon": None, **params}
    rec = {
        "value": decimal_string(value),
        "guarantee": {"lower_exact": lower_exact, "upper_factor": decimal_string(upper_factor)},
        "params": _jsonable(params),
        "wall_time_ms": round((time.perf_counter() - t0) * 1000),
        "engine": engine,
        "instance_digest": digest,
    }
    rec.update(_jsonable(extra))
    return rec


def _volume(args) -> dict:
    kind, payload = load_instance(args.instance)
    expected = args.what.replace("-", "_")
    if kind != expected:
        raise InvalidInstance(f"'volume {args.what}' needs a {expected} instance, got {kind}")
    digest = instance_digest(kind, payload)
    t0 = time.perf_counter()
    if kind == "two_balls":
        inst, scale = two_ball_of(payload)
        res = approx_two_ball_volume(inst, args.delta, threads=args.threads)
        return _record(float(scale) * res.value, engine=res.engine, digest=digest, t0=t0,
                       lower_exact=True, upper_factor=res.upper_factor,
                       params={"M": res.M, "delta": res.delta})
    if kind == "k_balls":
        inst = KBallInstance(payload["centers"], payload["radii"])
        res = approx_k_ball_volume(inst, args.delta)
        return _record(res.value, engine=res.engine, digest=digest, t0=t0,
                       lower_exact=True, upper_factor=res.upper_factor,
                       params={"M": res.M, "delta": res.delta})
    if kind == "knapsack_dual":
        inst = KnapsackDualInstance(payload["a"])
        res = approx_knapsack_dual_volume(inst, args.epsilon, threads=args.threads)
        p = res.params
        return _record(res.value, engine=res.engine, digest=digest, t0=t0,
                       lower_exact=False, upper_factor=res.upper_factor,
                       params={"M": p["M"], "beta": p["beta"], "delta": p["delta"],
                               "epsilon": p["epsilon"]},
                       lower_factor=decimal_string(1 - p["epsilon"]))
    inst = VPolytopeInstance(payload["vertices"])
    vol = exact_volume(inst)
    return _record(vol, engine="v_polytope", digest=digest, t0=t0, lower_exact=True,
                   upper_factor=1, params={}, exact=vol)


def _oracle(args) -> dict:
    kind, payload = load_instance(args.instance)
    digest = instance_digest(kind, payload)
    t0 = time.perf_counter()
    if args.what == "exact":
        if kind in ("two_balls", "k_balls"):
            vol = oracles.exact_intersection_volume(balls_of(kind, payload))
        elif kind == "knapsack_dual":
            vol = oracles.exact_hull_volume(KnapsackDualInstance(payload["a"]).vertices())
        else:
            verts = payload["vertices"]
            if len(verts[0]) > oracles.MAX_EXACT_DIM:
                raise InvalidInstance(f"exact oracles refuse n > {oracles.MAX_EXACT_DIM}")
            vol = oracles.exact_hull_volume(verts)
        return _record(vol, engine="oracle_exact", digest=digest, t0=t0, lower_exact=True,
                       upper_factor=1, params={}, exact=vol)
    balls = balls_of(kind, payload)
    # Translate so the first centre is the origin; the sampler boxes around it.
    p1 = balls[0].center
    balls = [CrossPolytope(tuple(a - b for a, b in zip(x.center, p1)), x.radius) for x in balls]
    est = oracles.mc_volume(balls, args.samples, seed=args.seed)
    return _record(est.estimate, engine="oracle_mc", digest=digest, t0=t0, lower_exact=False,
                   upper_factor=1, params={"samples": est.samples, "seed": est.seed},
                   half_width=decimal_string(est.half_width))


def _check(args) -> dict:
    kind, payload = load_instance(args.instance)
    if kind != "knapsack_dual":
        raise InvalidInstance("check reduction needs a knapsack_dual instance (field 'a')")
    res = oracles.hardness_reduction_check(payload["a"])
    return {"lhs": res.lhs, "rhs": res.rhs, "pass": res.passed}


def _bench(args) -> dict:
    if args.instance is None:
        config = []
    else:
        try:
            with open(args.instance, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInstance(f"cannot read bench config: {exc}") from exc
    return {"rows": _jsonable(run_bench(config, threads=args.threads))}


# ---- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-i", "--instance", help="instance JSON file ('-' for stdin)")
    common.add_argument("-o", "--output", help="write the JSON record here instead of stdout")
    common.add_argument("--delta", type=as_fraction, default=Fraction(1, 4))
    common.add_argument("--epsilon", type=as_fraction, default=Fraction(1, 4))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=10**6)
    common.add_argument("--threads", type=int, default=1)

    p = argparse.ArgumentParser(prog="crosspoly", description="Volumes of L1-ball intersections and related polytopes.")
    sub = p.add_subparsers(dest="command", required=True)

    vol = sub.add_parser("volume", parents=[common], help="run an approximation or exact engine")
    vol.add_argument("what", choices=["two-balls", "k-balls", "knapsack-dual", "v-polytope"])
    vol.set_defaults(func=_volume)
    ora = sub.add_parser("oracle", parents=[common], help="ground-truth engines")
    ora.add_argument("what", choices=["exact", "mc"])
    ora.set_defaults(func=_oracle)
    chk = sub.add_parser("check", parents=[common], help="identity checks")
    chk.add_argument("what", choices=["reduction"])
    chk.set_defaults(func=_check)
    ben = sub.add_parser("bench", parents=[common], help="time the two-ball engine over a config of rows")
    ben.set_defaults(func=_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "bench" and not args.instance:
        parser.error("-i/--instance is required")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    code = 0
    try:
        out = args.func(args)
        if args.command == "check" and not out["pass"]:
            code = 1
    except VolumeError as exc:
        out = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        code = exc.exit_code
        print(f"crosspoly: {type(exc).__name__}: {exc}", file=sys.stderr)
    text = canonical_json(out)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
