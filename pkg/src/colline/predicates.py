"""Exact falsification checkers for map hypotheses.

A Pass verdict means "no counterexample among the probes run" (the probe
count is part of the verdict); a Fail verdict carries an exact witness that
re-evaluates to a genuine violation with zero tolerance.  Probe streams are
fully determined by the ProbeConfig, so identical (map, config) pairs yield
identical outcomes, including witness identity.

Witnesses are minimized by repeatedly halving coordinate numerators while
the violation persists, which keeps regression fixtures readable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional

from .errors import (
    CollineError,
    DegenerateGeometry,
    DimensionMismatch,
    MapDomainError,
    MapEvalError,
    ProbeEvaluationError,
)
from .field import Vector, affine_rank, linearly_independent
from .geometry import Line, Plane, divides_in_ratio, in_interval, line_through, lines_parallel
from .serialize import from_jsonable, to_jsonable
from .zoo import MapHandle


@dataclass(frozen=True)
class ProbeConfig:
    """Deterministic probe stream parameters."""

    seed: int = 0
    count: int = 500
    coordinate_range: int = 12
    params_per_line: int = 5

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("probe count must be positive")
        if self.coordinate_range < 1:
            raise ValueError("coordinate range must be positive")
        if self.params_per_line < 3:
            raise ValueError("params_per_line must be at least 3")


@dataclass(frozen=True)
class Witness:
    """Named exact inputs plus both sides of the violated equation."""

    check: str
    equation: str
    inputs: tuple[tuple[str, object], ...]
    values: tuple[tuple[str, object], ...]

    def to_json(self) -> dict:
        return {
            "equation": self.equation,
            "inputs": {k: to_jsonable(v) for k, v in self.inputs},
            "values": {k: to_jsonable(v) for k, v in self.values},
        }

    @classmethod
    def from_json(cls, check: str, obj: dict) -> "Witness":
        return cls(
            check=check,
            equation=obj["equation"],
            inputs=tuple((k, from_jsonable(v)) for k, v in obj["inputs"].items()),
            values=tuple((k, from_jsonable(v)) for k, v in obj["values"].items()),
        )


@dataclass(frozen=True)
class CheckOutcome:
    """Pass(probes run) or Fail(witness); skips are counted separately."""

    check: str
    passed: bool
    probes: int
    witness: Optional[Witness] = None
    skipped: int = 0

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "verdict": self.verdict,
            "probes": self.probes,
            "skipped": self.skipped,
            "witness": self.witness.to_json() if self.witness else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CheckOutcome":
        witness = obj.get("witness")
        return cls(
            check=obj["check"],
            passed=obj["verdict"] == "pass",
            probes=obj["probes"],
            witness=Witness.from_json(obj["check"], witness) if witness else None,
            skipped=obj.get("skipped", 0),
        )


class _Sampler:
    """Seeded probe generator; scalars are p/q with |p| ≤ R, 1 ≤ q ≤ R."""

    def __init__(self, cfg: ProbeConfig):
        self.rng = random.Random(cfg.seed)
        self.range = cfg.coordinate_range

    def scalar(self) -> Fraction:
        return Fraction(
            self.rng.randint(-self.range, self.range), self.rng.randint(1, self.range)
        )

    def nonzero_scalar(self) -> Fraction:
        while True:
            s = self.scalar()
            if s != 0:
                return s

    def vector(self, dim: int) -> Vector:
        return Vector(self.scalar() for _ in range(dim))

    def nonzero_vector(self, dim: int) -> Vector:
        while True:
            v = self.vector(dim)
            if not v.is_zero():
                return v

    def line(self, dim: int) -> Line:
        return Line(self.vector(dim), self.nonzero_vector(dim))

    def params(self, k: int) -> tuple[Fraction, ...]:
        fixed = (Fraction(0), Fraction(1), Fraction(-1))
        return fixed + tuple(self.scalar() for _ in range(k - 3))

    def unit_interval(self) -> Fraction:
        q = self.rng.randint(2, max(2, self.range))
        return Fraction(self.rng.randint(1, q - 1), q)


_SKIP = object()

# check name -> factory building the violation closure for a map; the same
# closure drives checking, witness shrinking, and report revalidation.
_VIOLATIONS: dict[str, Callable[[MapHandle], Callable[[dict], object]]] = {}


def _register(name: str):
    def deco(factory):
        _VIOLATIONS[name] = factory
        return factory

    return deco


def _trunc_half(n: int) -> int:
    return (abs(n) // 2) * (1 if n > 0 else -1)


def _scalar_slots(inputs: dict):
    for name, val in inputs.items():
        if isinstance(val, Fraction):
            yield name, None
        elif isinstance(val, Vector):
            for i in range(val.dim):
                yield name, ("coord", i)
        elif isinstance(val, Line):
            for part in ("origin", "direction"):
                for i in range(val.dim):
                    yield name, (part, i)
        elif isinstance(val, tuple) and all(isinstance(x, Fraction) for x in val):
            for i in range(len(val)):
                yield name, ("item", i)


def _replace_slot(inputs: dict, name: str, path, new: Fraction) -> Optional[dict]:
    out = dict(inputs)
    val = inputs[name]
    try:
        if path is None:
            out[name] = new
        elif path[0] == "coord":
            coords = list(val.coords)
            coords[path[1]] = new
            out[name] = Vector(coords)
        elif path[0] in ("origin", "direction"):
            origin, direction = val.origin, val.direction
            coords = list((origin if path[0] == "origin" else direction).coords)
            coords[path[1]] = new
            if path[0] == "origin":
                origin = Vector(coords)
            else:
                direction = Vector(coords)
            out[name] = Line(origin, direction)
        elif path[0] == "item":
            items = list(val)
            items[path[1]] = new
            out[name] = tuple(items)
    except (DegenerateGeometry, DimensionMismatch):
        return None
    return out


def _slot_value(inputs: dict, name: str, path) -> Fraction:
    val = inputs[name]
    if path is None:
        return val
    if path[0] == "coord":
        return val.coords[path[1]]
    if path[0] == "origin":
        return val.origin.coords[path[1]]
    if path[0] == "direction":
        return val.direction.coords[path[1]]
    return val[path[1]]


def _shrink(inputs: dict, violation) -> dict:
    """Halve witness numerators while the violation persists."""
    changed = True
    while changed:
        changed = False
        for name, path in list(_scalar_slots(inputs)):
            cur = _slot_value(inputs, name, path)
            if cur.numerator == 0:
                continue
            cand = Fraction(_trunc_half(cur.numerator), cur.denominator)
            if cand == cur:
                continue
            cand_inputs = _replace_slot(inputs, name, path, cand)
            if cand_inputs is None:
                continue
            try:
                result = violation(cand_inputs)
            except (MapDomainError, MapEvalError):
                continue
            if isinstance(result, dict):
                inputs = cand_inputs
                changed = True
    return inputs


def _falsify(check: str, equation: str, cfg: ProbeConfig, sample, violation) -> CheckOutcome:
    probes = 0
    skipped = 0
    sampler = _Sampler(cfg)
    for _ in range(cfg.count):
        inputs = sample(sampler)
        if inputs is None:
            skipped += 1
            continue
        try:
            result = violation(inputs)
        except MapDomainError:
            skipped += 1
            continue
        except MapEvalError as exc:
            raise ProbeEvaluationError(check, inputs, exc) from exc
        if result is _SKIP:
            skipped += 1
            continue
        probes += 1
        if result is not None:
            inputs = _shrink(inputs, violation)
            values = violation(inputs)
            witness = Witness(
                check=check,
                equation=equation,
                inputs=tuple(inputs.items()),
                values=tuple(values.items()),
            )
            return CheckOutcome(check, False, probes, witness, skipped)
    return CheckOutcome(check, True, probes, None, skipped)


def revalidate_witness(f: MapHandle, witness: Witness) -> bool:
    """True iff the stored witness still reproduces a genuine violation.

    Malformed or mismatched witness data (e.g. a tampered report) simply
    fails to revalidate instead of raising.
    """
    factory = _VIOLATIONS.get(witness.check)
    if factory is None:
        return False
    try:
        result = factory(f)(dict(witness.inputs))
    except (CollineError, KeyError, ValueError, TypeError):
        return False
    return isinstance(result, dict)


# -- homogeneity / additivity / zero ------------------------------------------


@_register("homogeneity")
def _violation_homogeneity(f: MapHandle):
    def violation(inp):
        a, c = inp["a"], inp["c"]
        lhs = f(c * a)
        rhs = c * f(a)
        if lhs != rhs:
            return {"f(c*a)": lhs, "c*f(a)": rhs}
        return None

    return violation


def check_homogeneity(f: MapHandle, cfg: ProbeConfig) -> CheckOutcome:
    def sample(s: _Sampler):
        return {"a": s.vector(f.m), "c": s.scalar()}

    return _falsify("homogeneity", "f(c*a) = c*f(a)", cfg, sample, _violation_homogeneity(f))


@_register("additivity")
def _violation_additivity(f: MapHandle):
    def violation(inp):
        a, b = inp["a"], inp["b"]
        lhs = f(a + b)
        rhs = f(a) + f(b)
        if lhs != rhs:
            return {"f(a+b)": lhs, "f(a)+f(b)": rhs}
        return None

    return violation


def check_additivity(f: MapHandle, cfg: ProbeConfig) -> CheckOutcome:
    def sample(s: _Sampler):
        return {"a": s.vector(f.m), "b": s.vector(f.m)}

    return _falsify("additivity", "f(a+b) = f(a)+f(b)", cfg, sample, _violation_additivity(f))


@_register("zero-fixed")
def _violation_zero_fixed(f: MapHandle):
    def violation(inp):
        x = inp["x"]
        fx = f(x)
        if not fx.is_zero():
            return {"f(0)": fx, "0": Vector.zero(f.n)}
        return None

    return violation


def check_zero_fixed(f: MapHandle) -> CheckOutcome:
    check = "zero-fixed"
    violation = _violation_zero_fixed(f)
    inputs = {"x": Vector.zero(f.m)}
    try:
        result = violation(inputs)
    except MapDomainError:
        return CheckOutcome(check, True, 0, None, 1)
    except MapEvalError as exc:
        raise ProbeEvaluationError(check, inputs, exc) from exc
    if result is None:
        return CheckOutcome(check, True, 1)
    witness = Witness(check, "f(0) = 0", tuple(inputs.items()), tuple(result.items()))
    return CheckOutcome(check, False, 1, witness)


# -- line image and injectivity -----------------------------------------------


def _line_points_images(f: MapHandle, line: Line, params):
    pts = [line.point_at(t) for t in params]
    return pts, [f(p) for p in pts]


@_register("line-image")
def _violation_line_image(f: MapHandle):
    def violation(inp):
        line, params = inp["line"], inp["params"]
        _, imgs = _line_points_images(f, line, params)
        if affine_rank(imgs) <= 1:
            return None
        for i, j, k in combinations(range(len(imgs)), 3):
            if affine_rank([imgs[i], imgs[j], imgs[k]]) == 2:
                return {
                    "witness params": (params[i], params[j], params[k]),
                    "images": (imgs[i], imgs[j], imgs[k]),
                }
        return None

    return violation


def check_line_image(f: MapHandle, cfg: ProbeConfig) -> CheckOutcome:
    """Fail iff three sampled images of one line are affinely independent.

    Pass certifies only that the sampled image points are collinear or
    equal; whether the image fills a whole line is not decidable by finite
    sampling and is deliberately not claimed.
    """

    def sample(s: _Sampler):
        return {"line": s.line(f.m), "params": s.params(cfg.params_per_line)}

    return _falsify(
        "line-image",
        "sampled images of a line are mutually collinear",
        cfg,
        sample,
        _violation_line_image(f),
    )


@_register("line-injectivity")
def _violation_line_injectivity(f: MapHandle):
    def violation(inp):
        line, params = inp["line"], inp["params"]
        _, imgs = _line_points_images(f, line, params)
        if affine_rank(imgs) != 1:
            return _SKIP
        for i, j in combinations(range(len(imgs)), 2):
            if params[i] != params[j] and imgs[i] == imgs[j]:
                return {
                    "t0": params[i],
                    "t1": params[j],
                    "common image": imgs[i],
                }
        return None

    return violation


def check_line_injectivity(f: MapHandle, cfg: ProbeConfig) -> CheckOutcome:
    def sample(s: _Sampler):
        return {"line": s.line(f.m), "params": s.params(cfg.params_per_line)}

    return _falsify(
        "line-injectivity",
        "distinct parameters on a line with line-shaped image map to distinct points",
        cfg,
        sample,
        _violation_line_injectivity(f),
    )


# -- ratio preservation ---------------------------------------------------------


@_register("ratio-preservation")
def _violation_ratio(f: MapHandle):
    def violation(inp):
        a, b, r, s = inp["a"], inp["b"], inp["r"], inp["s"]
        if a == b or r + s == 0:
            return _SKIP
        fa, fb = f(a), f(b)
        if fa == fb:
            return _SKIP
        c = divides_in_ratio(a, b, r, s)
        fc = f(c)
        want = divides_in_ratio(fa, fb, r, s)
        if fc != want:
            return {"c": c, "f(c)": fc, "point dividing f(a),f(b)": want}
        return None

    return violation


def check_ratio_preservation(f: MapHandle, cfg: ProbeConfig) -> CheckOutcome:
    def sample(s: _Sampler):
        a, b = s.vector(f.m), s.vector(f.m)
        r, t = s.scalar(), s.scalar()
        if a == b or r + t == 0:
            return None
        return {"a": a, "b": b, "r": r, "s": t}

    return _falsify(
        "ratio-preservation",
        "f(c) divides f(a),f(b) in the same ratio as c divides a,b",
        cfg,
        sample,
        _violation_ratio(f),
    )


# -- independence witness -------------------------------------------------------


def find_independence_witness(f: MapHandle, cfg: ProbeConfig) -> Optional[tuple[Vector, Vector]]:
    """First probe pair (a0, a1) whose images are linearly independent.

    The stream starts with all standard-basis pairs (deterministic anchors
    for full-rank maps), then random pairs.  None after cfg.count probes.
    """
    sampler = _Sampler(cfg)

    def candidates():
        for i in range(f.m):
            for j in range(i + 1, f.m):
                yield Vector.basis(f.m, i), Vector.basis(f.m, j)
        for _ in range(cfg.count):
            yield sampler.vector(f.m), sampler.vector(f.m)

    for a0, a1 in candidates():
        try:
            if linearly_independent(f(a0), f(a1)):
                return a0, a1
        except MapDomainError:
            continue
    return None


# -- betweenness -----------------------------------------------------------------


@_register("betweenness-cor43")
def _violation_betweenness_cor43(f: MapHandle):
    def violation(inp):
        a, b, c = inp["a"], inp["b"], inp["c"]
        if a == b or not in_interval(a, b, c, "open"):
            return _SKIP
        ga, gb, gc = f(a), f(b), f(c)
        if ga == gb == gc:
            return None
        if in_interval(ga, gb, gc, "open"):
            return None
        return {"g(a)": ga, "g(b)": gb, "g(c)": gc}

    return violation


@_register("betweenness-prop44")
def _violation_betweenness_prop44(f: MapHandle):
    def violation(inp):
        a, c = inp["a"], inp["c"]
        zero_in = Vector.zero(f.m)
        if a.is_zero() or not in_interval(a, zero_in, c, "open"):
            return _SKIP
        fa, fc = f(a), f(c)
        if fa.is_zero() and fc.is_zero():
            return None
        if in_interval(fa, Vector.zero(f.n), fc, "open"):
            return None
        return {"f(a)": fa, "f(c)": fc}

    return violation


def check_betweenness(f: MapHandle, cfg: ProbeConfig, variant: str = "cor43") -> CheckOutcome:
    if variant == "cor43":

        def sample(s: _Sampler):
            a, b = s.vector(f.m), s.vector(f.m)
            if a == b:
                return None
            t = s.unit_interval()
            return {"a": a, "b": b, "c": a + t * (b - a)}

        return _falsify(
            "betweenness-cor43",
            "g(c) stays strictly between g(a) and g(b), unless all three collapse",
            cfg,
            sample,
            _violation_betweenness_cor43(f),
        )
    if variant == "prop44":

        def sample(s: _Sampler):
            a = s.nonzero_vector(f.m)
            t = s.unit_interval()
            return {"a": a, "c": t * a}

        return _falsify(
            "betweenness-prop44",
            "f(c) stays strictly between f(a) and 0, unless both vanish",
            cfg,
            sample,
            _violation_betweenness_prop44(f),
        )
    raise ValueError(f"unknown betweenness variant {variant!r} (use cor43 or prop44)")


# -- scalar checks ----------------------------------------------------------------


def _require_scalar_map(f: MapHandle) -> None:
    if f.m != 1 or f.n != 1:
        raise DimensionMismatch(f"scalar check needs a 1->1 map, got {f.m}->{f.n}")


def _scalar_eval(f: MapHandle, t: Fraction) -> Fraction:
    return f(Vector((t,))).coords[0]


@_register("scalar-multiplicative")
def _violation_scalar_multiplicative(f: MapHandle):
    def violation(inp):
        r, s = inp["r"], inp["s"]
        lhs = _scalar_eval(f, r * s)
        rhs = _scalar_eval(f, r) * _scalar_eval(f, s)
        if lhs != rhs:
            return {"h(r*s)": lhs, "h(r)*h(s)": rhs}
        return None

    return violation


def check_scalar_multiplicative(f: MapHandle, cfg: ProbeConfig) -> CheckOutcome:
    _require_scalar_map(f)
    first = [True]

    def sample(s: _Sampler):
        if first[0]:
            first[0] = False
            return {"r": Fraction(1), "s": Fraction(1)}
        return {"r": s.scalar(), "s": s.scalar()}

    return _falsify(
        "scalar-multiplicative",
        "h(r*s) = h(r)*h(s)",
        cfg,
        sample,
        _violation_scalar_multiplicative(f),
    )


@_register("scalar-monotone")
def _violation_scalar_monotone(f: MapHandle):
    def violation(inp):
        x, y, z = inp["x"], inp["y"], inp["z"]
        if not x < y < z:
            return _SKIP
        hx, hy, hz = (_scalar_eval(f, t) for t in (x, y, z))
        d1, d2 = hy - hx, hz - hy
        if (d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0):
            return {"h(x)": hx, "h(y)": hy, "h(z)": hz}
        return None

    return violation


def check_scalar_monotone(f: MapHandle, cfg: ProbeConfig) -> CheckOutcome:
    """Fail iff the sampled value set shows both a strict rise and a strict
    fall; the witness is a triple x < y < z with conflicting slopes."""
    _require_scalar_map(f)
    check = "scalar-monotone"
    sampler = _Sampler(cfg)
    points = {Fraction(-1), Fraction(0), Fraction(1)}
    for _ in range(cfg.count):
        points.add(sampler.scalar())
    xs = sorted(points)
    values = {}
    skipped = 0
    usable = []
    for x in xs:
        try:
            values[x] = _scalar_eval(f, x)
            usable.append(x)
        except MapDomainError:
            skipped += 1
    rise = fall = None
    for i in range(len(usable) - 1):
        d = values[usable[i + 1]] - values[usable[i]]
        if d > 0 and rise is None:
            rise = i
        if d < 0 and fall is None:
            fall = i
    if rise is None or fall is None:
        return CheckOutcome(check, True, len(usable), None, skipped)
    if rise < fall:
        lo, hi = rise, fall
        mid = max(range(lo + 1, hi + 1), key=lambda i: (values[usable[i]], -i))
    else:
        lo, hi = fall, rise
        mid = min(range(lo + 1, hi + 1), key=lambda i: (values[usable[i]], i))
    inputs = {"x": usable[lo], "y": usable[mid], "z": usable[hi + 1]}
    violation = _violation_scalar_monotone(f)
    inputs = _shrink(inputs, violation)
    witness = Witness(
        check,
        "h is monotone (order preserved or reversed throughout)",
        tuple(inputs.items()),
        tuple(violation(inputs).items()),
    )
    return CheckOutcome(check, False, len(usable), witness, skipped)


# -- plane image classification ----------------------------------------------------


@dataclass(frozen=True)
class PlaneImage:
    """Sampled shape of a plane's image plus the injectivity flag."""

    shape: Optional[str]  # "point" | "line" | "plane" | None on trichotomy failure
    injective: Optional[bool]  # populated only when shape == "plane"
    outcome: CheckOutcome


@_register("plane-image")
def _violation_plane_image(f: MapHandle):
    def violation(inp):
        plane: Plane = inp["plane"]
        if "q" in inp:  # injectivity witness on a rank-2 plane image
            p, q = inp["p"], inp["q"]
            anchors = [inp["w0"], inp["w1"], inp["w2"]]
            if p == q:
                return _SKIP
            if not all(plane.contains(x) for x in [p, q, *anchors]):
                return _SKIP
            if affine_rank([f(w) for w in anchors]) != 2:
                return _SKIP
            if f(p) == f(q):
                return {"f(p)": f(p), "f(q)": f(q)}
            return None
        pts = [inp["p0"], inp["p1"], inp["p2"], inp["p3"]]
        if not all(plane.contains(x) for x in pts):
            return _SKIP
        imgs = [f(p) for p in pts]
        if affine_rank(imgs) >= 3:
            return {"images": tuple(imgs)}
        return None

    return violation


def classify_plane_image(f: MapHandle, plane: Plane, cfg: ProbeConfig) -> PlaneImage:
    """Sampled affine rank of the plane's image: point / line / plane.

    A sampled rank above 2, or a collision on a rank-2 image, yields a
    Fail outcome witnessing the violation.
    """
    check = "plane-image"
    sampler = _Sampler(cfg)
    grid = [
        (Fraction(i), Fraction(j)) for i in (0, 1, -1) for j in (0, 1, -1)
    ]
    target = min(cfg.count, 60)
    seen = set(grid)
    while len(grid) < target:
        uv = (sampler.scalar(), sampler.scalar())
        if uv not in seen:
            seen.add(uv)
            grid.append(uv)
    points = [plane.point_at(u, v) for u, v in grid]
    images = []
    usable = []
    skipped = 0
    for p in points:
        try:
            images.append(f(p))
            usable.append(p)
        except MapDomainError:
            skipped += 1
    if not usable:
        return PlaneImage(None, None, CheckOutcome(check, True, 0, None, skipped))
    rank = affine_rank(images)
    violation = _violation_plane_image(f)
    if rank > 2:
        base = [usable[0]]
        for p in usable[1:]:
            if affine_rank([f(x) for x in base + [p]]) > affine_rank([f(x) for x in base]):
                base.append(p)
            if len(base) == 4:
                break
        inputs = {"plane": plane, **{f"p{i}": p for i, p in enumerate(base)}}
        witness = Witness(
            check,
            "images of a plane have affine rank at most 2",
            tuple(inputs.items()),
            tuple(violation(inputs).items()),
        )
        return PlaneImage(None, None, CheckOutcome(check, False, len(usable), witness, skipped))
    shape = ("point", "line", "plane")[rank]
    injective = None
    if rank == 2:
        anchors = [usable[0]]
        for p in usable[1:]:
            if affine_rank([f(x) for x in anchors + [p]]) > affine_rank([f(x) for x in anchors]):
                anchors.append(p)
            if len(anchors) == 3:
                break
        img_index = {}
        for p, img in zip(usable, images):
            if img in img_index and img_index[img] != p:
                inputs = {
                    "plane": plane,
                    "p": img_index[img],
                    "q": p,
                    "w0": anchors[0],
                    "w1": anchors[1],
                    "w2": anchors[2],
                }
                witness = Witness(
                    check,
                    "a map spreading a plane onto a plane is one-to-one on it",
                    tuple(inputs.items()),
                    tuple(violation(inputs).items()),
                )
                return PlaneImage(
                    "plane", False, CheckOutcome(check, False, len(usable), witness, skipped)
                )
            img_index[img] = p
        injective = True
    return PlaneImage(shape, injective, CheckOutcome(check, True, len(usable), None, skipped))


# -- parallelism preservation --------------------------------------------------------


def _span_line(points) -> Line:
    base = points[0]
    other = next(p for p in points[1:] if p != base)
    return line_through(base, other)


@_register("parallelism-preservation")
def _violation_parallelism(f: MapHandle):
    def violation(inp):
        line0: Line = inp["line"]
        offset: Vector = inp["offset"]
        params = inp["params"]
        line1 = Line(line0.origin + offset, line0.direction)
        _, imgs0 = _line_points_images(f, line0, params)
        _, imgs1 = _line_points_images(f, line1, params)
        if affine_rank(imgs0) != 1 or affine_rank(imgs1) != 1:
            return _SKIP
        m0, m1 = _span_line(imgs0), _span_line(imgs1)
        if lines_parallel(m0, m1):
            return None
        return {"image line 0": m0, "image line 1": m1}

    return violation


def check_parallelism_preservation(f: MapHandle, cfg: ProbeConfig) -> CheckOutcome:
    """Sampled parallel line pairs whose images are both lines must map to
    parallel lines; pairs with degenerate images are skipped (and counted)."""

    def sample(s: _Sampler):
        return {
            "line": s.line(f.m),
            "offset": s.vector(f.m),
            "params": s.params(cfg.params_per_line),
        }

    return _falsify(
        "parallelism-preservation",
        "images of parallel lines are parallel",
        cfg,
        sample,
        _violation_parallelism(f),
    )
