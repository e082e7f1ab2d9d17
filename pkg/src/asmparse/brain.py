"""Assembly Calculus execution environment.

A brain is a set of areas of ``n`` excitatory neurons joined by fibers.  Every
ordered neuron pair inside an area, and across a fiber, carries a synapse with
probability ``p`` and initial weight 1.  Time is discrete: in one synchronous
round every open area computes synaptic input from the neurons that fired in
the previous round, the ``k`` neurons with the largest input fire next, and
every synapse from a neuron that fired to a neuron that fires now is scaled
by ``1 + beta``.

Connectivity is sampled lazily: the outgoing synapses of a neuron over one
directed connection are drawn the first time that neuron fires across it, from
a random stream keyed by ``(seed, connection, neuron)``.  The sampled graph is
therefore a pure function of the seed, independent of the order in which rows
are materialised, while a 10^4-neuron brain only stores rows that were used.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

DEFAULT_N = 10000
DEFAULT_K = 100
DEFAULT_P = 0.05
DEFAULT_BETA = 0.1
DEFAULT_ROUNDS = 20


class BrainError(ValueError):
    """Invalid brain construction or command."""


@dataclass(frozen=True)
class AreaParams:
    name: str
    n: int = DEFAULT_N
    k: int = DEFAULT_K
    beta: float = DEFAULT_BETA
    recurrent_beta: Optional[float] = None   # None: same as beta

    @property
    def beta_recurrent(self) -> float:
        return self.beta if self.recurrent_beta is None else self.recurrent_beta

    def __post_init__(self):
        if not self.name:
            raise BrainError("area name must be non-empty")
        if self.n <= 0 or self.k <= 0:
            raise BrainError(f"area {self.name}: n and k must be positive")
        if self.k > self.n:
            raise BrainError(f"area {self.name}: k={self.k} exceeds n={self.n}")
        if self.beta < 0 or self.beta_recurrent < 0:
            raise BrainError(f"area {self.name}: beta must be non-negative")


@dataclass(frozen=True)
class Assembly:
    """A set of neuron indices in one area, stored sorted."""

    area: str
    neurons: Tuple[int, ...]

    @classmethod
    def of(cls, area: str, neurons: Iterable[int]) -> "Assembly":
        return cls(area, tuple(sorted(int(i) for i in set(neurons))))

    def __len__(self):
        return len(self.neurons)

    def overlap(self, other: Union["Assembly", Iterable[int]]) -> int:
        theirs = other.neurons if isinstance(other, Assembly) else other
        return len(set(self.neurons).intersection(theirs))


def _stream_key(*parts) -> int:
    return zlib.crc32("\x1f".join(str(p) for p in parts).encode())


class Synapses:
    """Directed synapses from one area to another (or to itself).

    Rows are stored in a growing pool: ``start[i]``/``length[i]`` locate the
    post-synaptic indices and weights of pre-synaptic neuron ``i``; ``start``
    is -1 until the row is materialised.
    """

    def __init__(self, n_pre: int, n_post: int, p: float, seed: int,
                 src: str, dst: str):
        self.n_pre = n_pre
        self.n_post = n_post
        self.p = p
        self.recurrent = src == dst
        self._key = _stream_key(src, dst)
        self._seed = seed
        self.start = np.full(n_pre, -1, dtype=np.int64)
        self.length = np.zeros(n_pre, dtype=np.int64)
        self._idx = np.empty(0, dtype=np.int32)
        self._w = np.empty(0, dtype=np.float64)
        self._used = 0
        self.explicit = False

    # -- sampling -------------------------------------------------------
    def _sample_row(self, i: int) -> np.ndarray:
        rng = np.random.default_rng([self._seed, self._key, i])
        # self-loops excluded: sample over n_post - 1 slots and shift
        span = self.n_post - 1 if self.recurrent else self.n_post
        if span <= 0:
            return np.empty(0, dtype=np.int32)
        if self.p >= 1.0:
            row = np.arange(span, dtype=np.int64)
        else:
            mean = span * self.p
            chunk = int(mean + 6.0 * np.sqrt(mean) + 16)
            pos = np.cumsum(rng.geometric(self.p, size=chunk)) - 1
            while pos[-1] < span:
                more = np.cumsum(rng.geometric(self.p, size=chunk)) + pos[-1]
                pos = np.concatenate([pos, more])
            row = pos[pos < span]
        if self.recurrent:
            row = row + (row >= i)
        return row.astype(np.int32)

    def _append(self, i: int, idx: np.ndarray, w: np.ndarray):
        need = self._used + len(idx)
        if need > len(self._idx):
            cap = max(need, 2 * len(self._idx), 1024)
            self._idx = np.resize(self._idx, cap)
            self._w = np.resize(self._w, cap)
        self._idx[self._used:need] = idx
        self._w[self._used:need] = w
        self.start[i] = self._used
        self.length[i] = len(idx)
        self._used = need

    def ensure(self, pre: np.ndarray):
        if self.explicit:
            return
        for i in pre[self.start[pre] < 0]:
            row = self._sample_row(int(i))
            self._append(int(i), row, np.ones(len(row)))

    def ensure_all(self):
        self.ensure(np.arange(self.n_pre))

    def set_explicit(self, edges: Mapping[Tuple[int, int], float]):
        """Replace the sampled graph by exactly ``edges`` ((i, j) -> weight)."""
        rows: Dict[int, List[Tuple[int, float]]] = {}
        for (i, j), w in edges.items():
            if not (0 <= i < self.n_pre and 0 <= j < self.n_post):
                raise BrainError(f"edge ({i}, {j}) out of range")
            if self.recurrent and i == j:
                raise BrainError("self-loops are not allowed")
            if w <= 0:
                raise BrainError("weights must be positive")
            rows.setdefault(i, []).append((j, float(w)))
        self.start[:] = -1
        self.length[:] = 0
        self._used = 0
        for i in range(self.n_pre):
            row = sorted(rows.get(i, []))
            self._append(i, np.array([j for j, _ in row], dtype=np.int32),
                         np.array([w for _, w in row], dtype=np.float64))
        self.explicit = True

    # -- access ---------------------------------------------------------
    def positions(self, pre: np.ndarray) -> np.ndarray:
        """Pool positions of all synapses leaving ``pre`` (materialising rows)."""
        self.ensure(pre)
        starts = self.start[pre]
        lens = self.length[pre]
        total = int(lens.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        base = np.repeat(starts - np.cumsum(lens) + lens, lens)
        return base + np.arange(total)

    def input_from(self, pre: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Synaptic input to every post-synaptic neuron, plus the positions used."""
        pos = self.positions(pre)
        si = np.bincount(self._idx[pos], weights=self._w[pos],
                         minlength=self.n_post)
        return si, pos

    def potentiate(self, pos: np.ndarray, post_mask: np.ndarray, factor: float):
        hit = pos[post_mask[self._idx[pos]]]
        self._w[hit] *= factor

    def row(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        self.ensure(np.array([i]))
        s, n = self.start[i], self.length[i]
        return self._idx[s:s + n].copy(), self._w[s:s + n].copy()

    def weight(self, i: int, j: int) -> float:
        idx, w = self.row(i)
        hit = np.flatnonzero(idx == j)
        return float(w[hit[0]]) if len(hit) else 0.0

    def materialized_edges(self) -> Dict[Tuple[int, int], float]:
        out = {}
        for i in np.flatnonzero(self.start >= 0):
            s, n = self.start[i], self.length[i]
            for j, w in zip(self._idx[s:s + n], self._w[s:s + n]):
                out[(int(i), int(j))] = float(w)
        return out

    def edges(self) -> Dict[Tuple[int, int], float]:
        self.ensure_all()
        return self.materialized_edges()


@dataclass
class Area:
    params: AreaParams
    synapses: Synapses
    winners: np.ndarray
    inhibited: bool = True
    clamped: bool = False

    @property
    def name(self):
        return self.params.name


@dataclass
class Fiber:
    endpoints: frozenset
    inhibited: bool = True


def top_k(si: np.ndarray, k: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Indices of the k largest entries; ties go to the lowest index.

    With ``rng`` given, ties at the k-th value are broken by a uniform draw
    instead.  Neurons with zero input are only used to fill the set when fewer
    than ``k`` neurons have positive input.
    """
    positive = np.flatnonzero(si > 0)
    if len(positive) <= k:
        zeros = np.flatnonzero(si <= 0)[: k - len(positive)]
        return np.sort(np.concatenate([positive, zeros]))
    vals = si[positive]
    kth = np.partition(vals, len(vals) - k)[len(vals) - k]
    above = positive[vals > kth]
    tied = positive[vals == kth]
    if rng is None:
        tied = tied[: k - len(above)]
    else:
        tied = rng.choice(tied, k - len(above), replace=False)
    return np.sort(np.concatenate([above, tied]))


FiberTarget = Union[str, Tuple[str, str]]


TIE_BREAKS = ("index", "random")


class Brain:
    """The dynamical system: areas, fibers, weights, firing and inhibition.

    ``tie_break="index"`` selects the lowest-index neurons among equal inputs;
    ``"random"`` uses a uniform draw from a stream seeded by ``seed``, which
    keeps runs reproducible while avoiding a systematic bias towards the same
    low-index neurons in every fresh projection.
    """

    def __init__(self, area_specs: Sequence[AreaParams],
                 fiber_specs: Sequence[Tuple[str, str]] = (),
                 p: float = DEFAULT_P, seed: int = 0, tie_break: str = "index"):
        if not (0 < p <= 1):
            raise BrainError(f"p must lie in (0, 1], got {p}")
        if tie_break not in TIE_BREAKS:
            raise BrainError(f"tie_break must be one of {TIE_BREAKS}")
        self.tie_break = tie_break
        self._tie_rng = np.random.default_rng([int(seed), 0x7AE]) if tie_break == "random" else None
        self.p = float(p)
        self.seed = int(seed)
        self.areas: Dict[str, Area] = {}
        self.fibers: Dict[frozenset, Fiber] = {}
        self.synapses: Dict[Tuple[str, str], Synapses] = {}
        for spec in area_specs:
            if spec.name in self.areas:
                raise BrainError(f"duplicate area name {spec.name!r}")
            syn = Synapses(spec.n, spec.n, self.p, self.seed, spec.name, spec.name)
            self.synapses[(spec.name, spec.name)] = syn
            self.areas[spec.name] = Area(spec, syn, np.empty(0, dtype=np.int64))
        for a, b in fiber_specs:
            for name in (a, b):
                if name not in self.areas:
                    raise BrainError(f"fiber ({a}, {b}) references unknown area {name!r}")
            if a == b:
                raise BrainError(f"fiber endpoints must differ, got ({a}, {b})")
            key = frozenset((a, b))
            if key in self.fibers:
                raise BrainError(f"duplicate fiber ({a}, {b})")
            self.fibers[key] = Fiber(key)
            for src, dst in ((a, b), (b, a)):
                self.synapses[(src, dst)] = Synapses(
                    self.areas[src].params.n, self.areas[dst].params.n,
                    self.p, self.seed, src, dst)
        self.rounds = 0
        self.synaptic_events = 0
        self.plasticity = True

    # -- construction helpers ------------------------------------------
    @classmethod
    def from_config(cls, config: Mapping) -> "Brain":
        areas = [AreaParams(a["name"], int(a["n"]), int(a["k"]), float(a.get("beta", DEFAULT_BETA)),
                            a.get("recurrent_beta"))
                 for a in config["areas"]]
        fibers = [tuple(f) for f in config.get("fibers", [])]
        return cls(areas, fibers, p=config.get("p", DEFAULT_P), seed=config.get("seed", 0),
                   tie_break=config.get("tie_break", "index"))

    def config(self) -> dict:
        return {
            "areas": [dict(name=a.name, n=a.params.n, k=a.params.k, beta=a.params.beta,
                           recurrent_beta=a.params.recurrent_beta)
                      for a in self.areas.values()],
            "fibers": [sorted(f.endpoints) for f in self.fibers.values()],
            "p": self.p,
            "seed": self.seed,
            "tie_break": self.tie_break,
        }

    def snapshot(self, weights: bool = True) -> dict:
        """Config plus current winners, flags and (materialised) weights."""
        out = self.config()
        out["winners"] = {name: [int(i) for i in a.winners] for name, a in self.areas.items()}
        out["inhibited_areas"] = sorted(n for n, a in self.areas.items() if a.inhibited)
        out["disinhibited_fibers"] = sorted(sorted(f.endpoints) for f in self.fibers.values()
                                            if not f.inhibited)
        if weights:
            out["weights"] = [[src, dst, i, j, w]
                              for (src, dst), syn in self.synapses.items()
                              for (i, j), w in sorted(syn.materialized_edges().items())
                              if w != 1.0]
        return out

    def dump(self, path, weights: bool = True):
        with open(path, "w") as fh:
            json.dump(self.snapshot(weights), fh)

    def set_edges(self, src: str, dst: str, edges: Mapping[Tuple[int, int], float]):
        """Replace sampled synapses src->dst by an explicit weighted edge set."""
        self._connection(src, dst).set_explicit(edges)

    def edges(self, src: str, dst: str) -> Dict[Tuple[int, int], float]:
        return self._connection(src, dst).edges()

    def weight(self, src: str, dst: str, i: int, j: int) -> float:
        return self._connection(src, dst).weight(i, j)

    def _connection(self, src: str, dst: str) -> Synapses:
        try:
            return self.synapses[(src, dst)]
        except KeyError:
            raise BrainError(f"no synapses from {src!r} to {dst!r}") from None

    def _area(self, name: str) -> Area:
        try:
            return self.areas[name]
        except KeyError:
            raise BrainError(f"unknown area {name!r}") from None

    def _fiber(self, a: str, b: str) -> Fiber:
        try:
            return self.fibers[frozenset((a, b))]
        except KeyError:
            raise BrainError(f"unknown fiber ({a}, {b})") from None

    # -- control commands ----------------------------------------------
    def set_winners(self, area: str, neurons: Union[Assembly, Iterable[int]]):
        a = self._area(area)
        if isinstance(neurons, Assembly):
            if neurons.area != area:
                raise BrainError(f"assembly belongs to {neurons.area!r}, not {area!r}")
            neurons = neurons.neurons
        arr = np.array(sorted(set(int(i) for i in neurons)), dtype=np.int64)
        if len(arr) != a.params.k:
            raise BrainError(f"area {area} needs exactly k={a.params.k} winners, got {len(arr)}")
        if arr[0] < 0 or arr[-1] >= a.params.n:
            raise BrainError(f"winner index out of range for area {area}")
        a.winners = arr

    def clear_winners(self, area: Optional[str] = None):
        for a in ([self._area(area)] if area else self.areas.values()):
            a.winners = np.empty(0, dtype=np.int64)

    def winners(self, area: str) -> Optional[Assembly]:
        a = self._area(area)
        if len(a.winners) == 0:
            return None
        return Assembly(area, tuple(int(i) for i in a.winners))

    def set_beta(self, area: str, beta: Optional[float] = None,
                 recurrent_beta: Optional[float] = None):
        """Change an area's plasticity rates (incoming fibers / recurrent)."""
        a = self._area(area)
        a.params = replace(a.params,
                           beta=a.params.beta if beta is None else beta,
                           recurrent_beta=(a.params.recurrent_beta if recurrent_beta is None
                                           else recurrent_beta))

    def clamp(self, area: str, clamped: bool = True):
        """A clamped area keeps its winners fixed, acting as a stimulus.

        It still fires into open fibers and the synapses entering it from
        firing areas are potentiated; its recurrent synapses are left idle.
        """
        self._area(area).clamped = clamped

    def _target(self, target: FiberTarget):
        if isinstance(target, str):
            return self._area(target)
        a, b = target
        return self._fiber(a, b)

    def inhibit(self, target: FiberTarget):
        self._target(target).inhibited = True

    def disinhibit(self, target: FiberTarget):
        self._target(target).inhibited = False

    def is_inhibited(self, target: FiberTarget) -> bool:
        return self._target(target).inhibited

    def inhibition_state(self) -> Tuple[frozenset, frozenset]:
        """(open areas, open fibers) -- a comparable view of the flags."""
        return (frozenset(n for n, a in self.areas.items() if not a.inhibited),
                frozenset(k for k, f in self.fibers.items() if not f.inhibited))

    def set_inhibition(self, state: Tuple[Iterable[str], Iterable[Iterable[str]]]):
        """Restore flags captured by :meth:`inhibition_state`."""
        open_areas, open_fibers = set(state[0]), set(frozenset(f) for f in state[1])
        for name, a in self.areas.items():
            a.inhibited = name not in open_areas
        for key, f in self.fibers.items():
            f.inhibited = key not in open_fibers

    def reset(self, open_areas: Iterable[str] = (), open_fibers: Iterable[Tuple[str, str]] = (),
              keep_winners: Iterable[str] = ()):
        """Clear winners and restore an inhibition pattern; weights untouched."""
        keep = set(keep_winners)
        for name, a in self.areas.items():
            if name not in keep:
                a.winners = np.empty(0, dtype=np.int64)
            a.inhibited = True
        for f in self.fibers.values():
            f.inhibited = True
        for name in open_areas:
            self._area(name).inhibited = False
        for a, b in open_fibers:
            self._fiber(a, b).inhibited = False

    # -- dynamics --------------------------------------------------------
    def _active_inputs(self, fired: Mapping[str, np.ndarray], target: str) -> List[str]:
        sources = []
        # a clamped area is driven externally: its recurrent synapses idle
        if target in fired and not self.areas[target].clamped:
            sources.append(target)
        for key, fiber in self.fibers.items():
            if fiber.inhibited or target not in key:
                continue
            (other,) = key - {target}
            if other in fired:
                sources.append(other)
        return sources

    def step(self):
        """One synchronous round of firing and plasticity."""
        fired = {name: a.winners for name, a in self.areas.items()
                 if not a.inhibited and len(a.winners)}
        new: Dict[str, np.ndarray] = {}
        links: List[Tuple[str, str, np.ndarray]] = []
        for name, area in self.areas.items():
            if area.inhibited:
                continue
            sources = self._active_inputs(fired, name)
            si = np.zeros(area.params.n)
            for src in sources:
                contrib, pos = self.synapses[(src, name)].input_from(fired[src])
                links.append((src, name, pos))
                si += contrib
                self.synaptic_events += len(pos)
            if area.clamped:
                new[name] = area.winners
            elif not np.any(si > 0):
                new[name] = np.empty(0, dtype=np.int64)
            else:
                new[name] = top_k(si, area.params.k, self._tie_rng)
        if self.plasticity:
            masks: Dict[str, np.ndarray] = {}
            for src, dst, pos in links:
                post = new[dst]
                params = self.areas[dst].params
                beta = params.beta_recurrent if src == dst else params.beta
                if not len(post) or beta == 0:
                    continue
                if dst not in masks:
                    masks[dst] = np.zeros(self.areas[dst].params.n, dtype=bool)
                    masks[dst][post] = True
                self.synapses[(src, dst)].potentiate(pos, masks[dst], 1.0 + beta)
        for name, w in new.items():
            self.areas[name].winners = w
        self.rounds += 1

    def project_star(self, rounds: int = DEFAULT_ROUNDS):
        """``rounds`` consecutive steps over the currently open subgraph."""
        if rounds < 1:
            raise BrainError("project* needs at least one round")
        for _ in range(rounds):
            self.step()

    def fire_into(self, src: str, neurons: Iterable[int], dst: str) -> Optional[Assembly]:
        """Winners ``dst`` would select if only ``neurons`` of ``src`` fired.

        Read-only: ignores inhibition flags and changes no state.  Used by the
        parse readout.
        """
        pre = np.asarray(sorted(neurons), dtype=np.int64)
        si, _ = self._connection(src, dst).input_from(pre)
        if not np.any(si > 0):
            return None
        return Assembly(dst, tuple(int(i) for i in top_k(si, self.areas[dst].params.k)))


def build_brain(area_specs: Sequence[AreaParams], fiber_specs: Sequence[Tuple[str, str]] = (),
                p: float = DEFAULT_P, seed: int = 0, tie_break: str = "index") -> Brain:
    return Brain(area_specs, fiber_specs, p=p, seed=seed, tie_break=tie_break)


def overlap(a: Iterable[int], b: Iterable[int]) -> int:
    return len(set(int(i) for i in a).intersection(int(i) for i in b))
