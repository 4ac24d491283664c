"""Finite Kripke frames and models, and evaluation of formulas on them.

Worlds are indexed by position; world sets are int bitmasks. Extensions are
computed bottom-up, and propositional quantifiers enumerate all subsets with
short-circuiting. Within one top-level call, extensions are cached per node
and per assignment of that node's free symbols, which keeps nested
quantifiers affordable.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterator, Mapping

from .formula import (
    And,
    BackBox,
    BackDia,
    Bottom,
    Box,
    CExistsNom,
    CExistsProp,
    CForallNom,
    CForallProp,
    Comp,
    Dia,
    ExistsNom,
    ExistsProp,
    ForallNom,
    ForallProp,
    Formula,
    Implies,
    Ineq,
    L,
    MetaAnd,
    MetaImplies,
    Nominal,
    Not,
    Or,
    PropVar,
    Top,
    free_symbols,
)

World = Hashable


class UnassignedSymbolError(LookupError):
    """A free symbol of the evaluated formula has no value."""


@dataclass(frozen=True)
class KripkeFrame:
    worlds: tuple
    relation: frozenset

    def __post_init__(self):
        if not self.worlds:
            raise ValueError("a frame needs at least one world")
        if len(set(self.worlds)) != len(self.worlds):
            raise ValueError("duplicate world identifiers")
        ws = set(self.worlds)
        for a, b in self.relation:
            if a not in ws or b not in ws:
                raise ValueError(f"edge ({a}, {b}) references an unknown world")

    @property
    def size(self) -> int:
        return len(self.worlds)

    @cached_property
    def index(self) -> dict:
        return {w: k for k, w in enumerate(self.worlds)}

    @cached_property
    def full(self) -> int:
        return (1 << len(self.worlds)) - 1

    @cached_property
    def succ(self) -> tuple[int, ...]:
        out = [0] * self.size
        for a, b in self.relation:
            out[self.index[a]] |= 1 << self.index[b]
        return tuple(out)

    @cached_property
    def pred(self) -> tuple[int, ...]:
        out = [0] * self.size
        for a, b in self.relation:
            out[self.index[b]] |= 1 << self.index[a]
        return tuple(out)

    def mask(self, ws) -> int:
        m = 0
        for w in ws:
            if w not in self.index:
                raise ValueError(f"unknown world {w!r}")
            m |= 1 << self.index[w]
        return m

    def members(self, mask: int) -> frozenset:
        return frozenset(w for k, w in enumerate(self.worlds) if mask >> k & 1)


@dataclass(frozen=True)
class Valuation:
    props: Mapping[str, frozenset] = field(default_factory=dict)
    noms: Mapping[str, World] = field(default_factory=dict)


@dataclass(frozen=True)
class KripkeModel:
    frame: KripkeFrame
    valuation: Valuation = field(default_factory=Valuation)

    def __post_init__(self):
        ws = set(self.frame.worlds)
        for p, ext in self.valuation.props.items():
            if not set(ext) <= ws:
                raise ValueError(f"valuation of {p} leaves the frame")
        for i, w in self.valuation.noms.items():
            if w not in ws:
                raise ValueError(f"nominal {i} denotes an unknown world")

    def masks(self) -> tuple[dict[str, int], dict[str, int]]:
        f = self.frame
        return (
            {p: f.mask(ext) for p, ext in self.valuation.props.items()},
            {i: f.index[w] for i, w in self.valuation.noms.items()},
        )


def _box(succ, e: int) -> int:
    out = 0
    for w, s in enumerate(succ):
        if not s & ~e:
            out |= 1 << w
    return out


def _dia(succ, e: int) -> int:
    out = 0
    for w, s in enumerate(succ):
        if s & e:
            out |= 1 << w
    return out


class Evaluator:
    """Bitmask evaluator bound to one frame; cache lives as long as the object."""

    def __init__(self, frame: KripkeFrame):
        self.frame = frame
        self.n = frame.size
        self.full = frame.full
        self.succ = frame.succ
        self.pred = frame.pred
        self._free: dict[int, tuple] = {}
        self._memo: dict = {}

    def _key(self, phi, props, noms):
        entry = self._free.get(id(phi))
        if entry is None:
            fp, fn = free_symbols(phi)
            entry = (phi, tuple(sorted(fp)), tuple(sorted(fn)))
            self._free[id(phi)] = entry
        _, fp, fn = entry
        try:
            return (id(phi), tuple(props[p] for p in fp), tuple(noms[i] for i in fn))
        except KeyError as err:
            raise UnassignedSymbolError(f"no value for free symbol {err.args[0]}") from None

    def ext(self, phi: Formula, props: dict, noms: dict) -> int:
        """Set of worlds where `phi` holds, as a bitmask."""
        match phi:
            case PropVar(name):
                if name not in props:
                    raise UnassignedSymbolError(f"no value for propositional variable {name}")
                return props[name]
            case Nominal(name):
                if name not in noms:
                    raise UnassignedSymbolError(f"no value for nominal {name}")
                return 1 << noms[name]
            case Top():
                return self.full
            case Bottom():
                return 0
            case Not(a):
                return self.full & ~self.ext(a, props, noms)
            case And(a, b):
                return self.ext(a, props, noms) & self.ext(b, props, noms)
            case Or(a, b):
                return self.ext(a, props, noms) | self.ext(b, props, noms)
            case Implies(a, b):
                return (self.full & ~self.ext(a, props, noms)) | self.ext(b, props, noms)
        key = self._key(phi, props, noms)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out = self._ext_slow(phi, props, noms)
        self._memo[key] = out
        return out

    def _ext_slow(self, phi, props, noms) -> int:
        full = self.full
        match phi:
            case Box(a):
                return _box(self.succ, self.ext(a, props, noms))
            case Dia(a):
                return _dia(self.succ, self.ext(a, props, noms))
            case BackBox(a):
                return _box(self.pred, self.ext(a, props, noms))
            case BackDia(a):
                return _dia(self.pred, self.ext(a, props, noms))
            case L(a, b):
                ok = not self.ext(a, props, noms) & ~self.ext(b, props, noms) & full
                return full if ok else 0
            case ForallProp(name, body):
                acc = full
                inner = dict(props)
                for x in range(full + 1):
                    inner[name] = x
                    acc &= self.ext(body, inner, noms)
                    if not acc:
                        break
                return acc
            case ExistsProp(name, body):
                acc = 0
                inner = dict(props)
                for x in range(full + 1):
                    inner[name] = x
                    acc |= self.ext(body, inner, noms)
                    if acc == full:
                        break
                return acc
            case ForallNom(name, body):
                acc = full
                inner = dict(noms)
                for w in range(self.n):
                    inner[name] = w
                    acc &= self.ext(body, props, inner)
                    if not acc:
                        break
                return acc
            case ExistsNom(name, body):
                acc = 0
                inner = dict(noms)
                for w in range(self.n):
                    inner[name] = w
                    acc |= self.ext(body, props, inner)
                    if acc == full:
                        break
                return acc
        raise TypeError(f"not a formula: {phi!r}")

    def holds(self, c: Comp, props: dict, noms: dict) -> bool:
        match c:
            case Ineq(a, b):
                return not self.ext(a, props, noms) & ~self.ext(b, props, noms) & self.full
            case MetaAnd(cs):
                return all(self.holds(x, props, noms) for x in cs)
            case MetaImplies(a, b):
                return not self.holds(a, props, noms) or self.holds(b, props, noms)
            case CForallProp(name, body):
                return all(self.holds(body, {**props, name: x}, noms) for x in range(self.full + 1))
            case CExistsProp(name, body):
                return any(self.holds(body, {**props, name: x}, noms) for x in range(self.full + 1))
            case CForallNom(name, body):
                return all(self.holds(body, props, {**noms, name: w}) for w in range(self.n))
            case CExistsNom(name, body):
                return any(self.holds(body, props, {**noms, name: w}) for w in range(self.n))
        raise TypeError(f"not a complex inequality: {c!r}")

    def assignments(self, node) -> Iterator[tuple[dict, dict]]:
        """Every assignment of the free symbols of `node` (props to subsets, nominals to worlds)."""
        fp, fn = free_symbols(node)
        fp, fn = sorted(fp), sorted(fn)
        for pv in itertools.product(range(self.full + 1), repeat=len(fp)):
            for nv in itertools.product(range(self.n), repeat=len(fn)):
                yield dict(zip(fp, pv)), dict(zip(fn, nv))


def eval_at(m: KripkeModel, w: World, phi: Formula) -> bool:
    props, noms = m.masks()
    if w not in m.frame.index:
        raise ValueError(f"unknown world {w!r}")
    return bool(Evaluator(m.frame).ext(phi, props, noms) >> m.frame.index[w] & 1)


def extension(m: KripkeModel, phi: Formula) -> frozenset:
    props, noms = m.masks()
    return m.frame.members(Evaluator(m.frame).ext(phi, props, noms))


def holds_ineq(m: KripkeModel, ineq: Ineq) -> bool:
    return holds_comp(m, ineq)


def holds_comp(m: KripkeModel, c: Comp) -> bool:
    props, noms = m.masks()
    return Evaluator(m.frame).holds(c, props, noms)


def frame_valid(f: KripkeFrame, phi: Formula) -> bool:
    """Valid on `f`: true at every world under every assignment of the free symbols."""
    ev = Evaluator(f)
    return all(ev.ext(phi, props, noms) == f.full for props, noms in ev.assignments(phi))


def comp_valid(f: KripkeFrame, c: Comp) -> bool:
    """`c` holds on `f` under every assignment of its free symbols."""
    ev = Evaluator(f)
    return all(ev.holds(c, props, noms) for props, noms in ev.assignments(c))


def frame(n: int, edges) -> KripkeFrame:
    """Frame on worlds w0..w{n-1} with edges given as index pairs."""
    ws = tuple(f"w{k}" for k in range(n))
    return KripkeFrame(ws, frozenset((ws[a], ws[b]) for a, b in edges))


def enumerate_frames(max_size: int) -> Iterator[KripkeFrame]:
    """All frames on w0..w{n-1} for n = 1..max_size, 2^(n*n) per size, in a fixed order."""
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    for n in range(1, max_size + 1):
        pairs = [(a, b) for a in range(n) for b in range(n)]
        for bits in range(1 << (n * n)):
            yield frame(n, [pr for k, pr in enumerate(pairs) if bits >> k & 1])


def random_frame(rng: random.Random, n: int, density: float = 0.4) -> KripkeFrame:
    return frame(n, [(a, b) for a in range(n) for b in range(n) if rng.random() < density])


def random_model(rng: random.Random, f: KripkeFrame, props=(), noms=()) -> KripkeModel:
    val = Valuation(
        {p: frozenset(w for w in f.worlds if rng.random() < 0.5) for p in props},
        {i: rng.choice(f.worlds) for i in noms},
    )
    return KripkeModel(f, val)
