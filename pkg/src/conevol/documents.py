"""YAML input documents.

Three kinds are accepted::

    kind: toric
    rays: [[0,0,1], [1,0,1], [0,1,1], [1,1,1]]

    kind: complexity_one
    tail: [[-1,1], [13,4]]
    terms:
      - {point: "0", vertices: [["2/5","1/5"]]}
      - {point: inf, vertices: [["-2/3","1/3"]]}

    kind: suss_family
    k: 2
    m: 0
    mp: 1

Rationals are integers or ``"p/q"`` strings; decimal literals are rejected so
that every number in a document is exact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

import yaml

from .cxone import MarkedPoint, PolyhedralDivisor, SussFamilyParams, suss_family
from .errors import ParseError
from .ratgeom import RationalCone, RationalPolyhedron
from .toric import ToricConeVariety

KINDS = ("toric", "complexity_one", "suss_family")


def parse_rational(x) -> Fraction:
    if isinstance(x, bool):
        raise ParseError(f"expected a rational, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        s = x.strip()
        if any(c in s for c in ".eE") or not s:
            raise ParseError(f"rationals must be written exactly as 'p/q', got {x!r}")
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational {x!r}") from exc
    raise ParseError(f"rationals must be integers or 'p/q' strings, got {x!r}")


def parse_integer(x) -> int:
    q = parse_rational(x)
    if q.denominator != 1:
        raise ParseError(f"expected an integer, got {x!r}")
    return int(q)


def parse_vector(text: str) -> tuple[Fraction, ...]:
    """``"a/b,c/d,..."`` as used by ``--xi``."""
    parts = str(text).split(",")
    if not parts or any(not p.strip() for p in parts):
        raise ParseError(f"bad vector {text!r}")
    return tuple(parse_rational(p) for p in parts)


def format_rational(q: Fraction):
    q = Fraction(q)
    return int(q) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _int_rows(rows, what: str) -> tuple[tuple[int, ...], ...]:
    if not isinstance(rows, list) or not rows:
        raise ParseError(f"{what} must be a nonempty list of integer vectors")
    out = []
    for r in rows:
        if not isinstance(r, list) or not r:
            raise ParseError(f"{what}: {r!r} is not a vector")
        out.append(tuple(parse_integer(x) for x in r))
    if len({len(r) for r in out}) != 1:
        raise ParseError(f"{what}: vectors have different lengths")
    return tuple(out)


@dataclass(frozen=True)
class InputDocument:
    kind: str
    rays: tuple = ()  # toric rays, or the tail of a complexity-one divisor
    terms: tuple = ()  # (MarkedPoint, vertices) pairs
    suss: SussFamilyParams | None = None

    # -- construction ---------------------------------------------------

    @classmethod
    def from_mapping(cls, data) -> InputDocument:
        if not isinstance(data, dict):
            raise ParseError("document must be a mapping")
        kind = data.get("kind")
        if kind not in KINDS:
            raise ParseError(f"kind must be one of {', '.join(KINDS)}; got {kind!r}")
        if kind == "toric":
            return cls(kind, rays=_int_rows(data.get("rays"), "rays"))
        if kind == "complexity_one":
            tail = _int_rows(data.get("tail"), "tail")
            terms = []
            for t in data.get("terms") or []:
                if not isinstance(t, dict) or "point" not in t or "vertices" not in t:
                    raise ParseError(f"term {t!r} needs 'point' and 'vertices'")
                verts = t["vertices"]
                if not isinstance(verts, list) or not verts:
                    raise ParseError("vertices must be a nonempty list")
                vs = tuple(tuple(parse_rational(x) for x in v) for v in verts)
                if any(len(v) != len(tail[0]) for v in vs):
                    raise ParseError("vertex dimension does not match the tail")
                terms.append((MarkedPoint.parse(t["point"]), vs))
            return cls(kind, rays=tail, terms=tuple(terms))
        params = SussFamilyParams(
            parse_integer(data.get("k", 0)),
            parse_integer(data.get("m", 0)),
            parse_integer(data.get("mp", 0)),
            tuple(parse_rational(x) for x in data.get("generic_positions") or ()),
        )
        return cls(kind, suss=params)

    @classmethod
    def loads(cls, text: str) -> InputDocument:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ParseError(f"not valid YAML: {exc}") from exc
        return cls.from_mapping(data)

    @classmethod
    def load(cls, path) -> InputDocument:
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.loads(fh.read())
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc

    # -- serialization --------------------------------------------------

    def to_mapping(self) -> dict:
        if self.kind == "toric":
            return {"kind": "toric", "rays": [list(r) for r in self.rays]}
        if self.kind == "complexity_one":
            return {
                "kind": "complexity_one",
                "tail": [list(r) for r in self.rays],
                "terms": [
                    {"point": str(y), "vertices": [[format_rational(x) for x in v] for v in vs]}
                    for y, vs in self.terms
                ],
            }
        p = self.suss
        return {
            "kind": "suss_family",
            "k": p.k,
            "m": p.m,
            "mp": p.mp,
            "generic_positions": [format_rational(x) for x in p.generic_positions],
        }

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_mapping(), sort_keys=False, default_flow_style=None)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()

    # -- geometry ---------------------------------------------------------

    def build(self):
        """The :class:`ToricConeVariety` or :class:`PolyhedralDivisor` described."""
        if self.kind == "toric":
            return ToricConeVariety.from_rays(self.rays)
        if self.kind == "suss_family":
            return suss_family(self.suss)
        tail = RationalCone.from_rays(self.rays)
        return PolyhedralDivisor(tail, [(y, RationalPolyhedron(vs, tail)) for y, vs in self.terms])


def suss_document(k: int, m: int = 0, mp: int = 0) -> InputDocument:
    return InputDocument("suss_family", suss=SussFamilyParams(k, m, mp))


def toric_document(rays) -> InputDocument:
    return InputDocument("toric", rays=tuple(tuple(int(x) for x in r) for r in rays))
