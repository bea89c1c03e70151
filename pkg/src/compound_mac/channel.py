"""Compound multiple-access channels with transmitter-side state information.

A compound channel is a finite list of states, each a stochastic array
``W[x, y, z] = W(z|x, y)``.  Every state carries one CSIT label per
transmitter; the labels induce the two CSIT partitions and their joint
cells.  A receiver-side label may be attached but is only metadata: the
capacity regions do not depend on it.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConfigurationError, DomainError, QuantizationInfeasible, ValidationError

ROW_TOL = 1e-9


@dataclass(frozen=True)
class Channel:
    """One state of a compound MAC; ``matrix[x, y, z] = W(z|x, y)``."""

    matrix: np.ndarray
    name: str = "W"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 3 or 0 in m.shape:
            raise ConfigurationError(f"channel {self.name!r}: matrix must be indexed (x, y, z), got shape {m.shape}")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ConfigurationError(f"channel {self.name!r}: negative or non-finite probability")
        sums = m.sum(axis=2)
        bad = np.argwhere(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            x, y = (int(v) for v in bad[0])
            raise ConfigurationError(
                f"channel {self.name!r}: row (x={x}, y={y}) sums to {sums[x, y]:.12g}, not 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(self.matrix.shape)

    @classmethod
    def from_rows(cls, rows, x_size: int, y_size: int, name: str = "W") -> "Channel":
        """Build from a ``(|X||Y|, |Z|)`` matrix whose row ``x*|Y| + y`` is ``W(.|x, y)``.

        For binary inputs this is the familiar "row 2x+y+1" layout with
        one-based row numbers.
        """
        r = np.asarray(rows, dtype=float)
        if r.ndim != 2 or r.shape[0] != x_size * y_size:
            raise ConfigurationError(f"expected {x_size * y_size} rows, got shape {r.shape}")
        return cls(r.reshape(x_size, y_size, r.shape[1]), name)


@dataclass(frozen=True)
class CompoundChannel:
    """Finite compound MAC with CSIT partitions given by per-state labels."""

    states: tuple[Channel, ...]
    t1_labels: tuple[str, ...]
    t2_labels: tuple[str, ...]
    csir_labels: tuple[str, ...] | None = None
    _t1: tuple[str, ...] = field(init=False, repr=False, compare=False)
    _t2: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise DomainError("a compound channel needs at least one state")
        shape = states[0].shape
        for s in states[1:]:
            if s.shape != shape:
                raise ConfigurationError(
                    f"state {s.name!r} has alphabet sizes {s.shape}, expected {shape}")
        t1, t2 = tuple(map(str, self.t1_labels)), tuple(map(str, self.t2_labels))
        if len(t1) != len(states) or len(t2) != len(states):
            raise ConfigurationError("every state needs exactly one label per transmitter")
        if self.csir_labels is not None and len(self.csir_labels) != len(states):
            raise ConfigurationError("csir labels must cover every state")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "t1_labels", t1)
        object.__setattr__(self, "t2_labels", t2)
        # one label per state makes each t_nu a partition of the state list
        object.__setattr__(self, "_t1", tuple(dict.fromkeys(t1)))
        object.__setattr__(self, "_t2", tuple(dict.fromkeys(t2)))

    @classmethod
    def single(cls, channel: Channel) -> "CompoundChannel":
        return cls((channel,), ("*",), ("*",))

    @classmethod
    def no_csit(cls, channels) -> "CompoundChannel":
        channels = tuple(channels)
        return cls(channels, ("*",) * len(channels), ("*",) * len(channels))

    @classmethod
    def full_csit(cls, channels) -> "CompoundChannel":
        channels = tuple(channels)
        names = tuple(c.name for c in channels)
        if len(set(names)) != len(names):
            names = tuple(str(i) for i in range(len(channels)))
        return cls(channels, names, names)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.states[0].shape

    @property
    def T1(self) -> tuple[str, ...]:
        return self._t1

    @property
    def T2(self) -> tuple[str, ...]:
        return self._t2

    @property
    def cells(self) -> tuple[tuple[str, str], ...]:
        """All joint CSIT cells, including empty ones, in canonical order."""
        return tuple((a, b) for a in self._t1 for b in self._t2)

    @property
    def stack(self) -> np.ndarray:
        """All states as one array of shape ``(S, X, Y, Z)``."""
        return np.stack([s.matrix for s in self.states])

    def t1_index(self) -> np.ndarray:
        return np.array([self._t1.index(l) for l in self.t1_labels])

    def t2_index(self) -> np.ndarray:
        return np.array([self._t2.index(l) for l in self.t2_labels])

    def cell_index(self) -> np.ndarray:
        """Position in :attr:`cells` of the joint cell containing each state."""
        return self.t1_index() * len(self._t2) + self.t2_index()

    def joint_cell(self, tau1: str, tau2: str) -> list[int]:
        """Indices of the states compatible with both transmitters' knowledge."""
        if tau1 not in self._t1:
            raise ConfigurationError(f"unknown CSIT label {tau1!r} for transmitter 1")
        if tau2 not in self._t2:
            raise ConfigurationError(f"unknown CSIT label {tau2!r} for transmitter 2")
        return [i for i, (a, b) in enumerate(zip(self.t1_labels, self.t2_labels))
                if a == tau1 and b == tau2]

    @property
    def empty_cells(self) -> tuple[tuple[str, str], ...]:
        occupied = set(zip(self.t1_labels, self.t2_labels))
        return tuple(c for c in self.cells if c not in occupied)

    def with_csit(self, t1_labels, t2_labels) -> "CompoundChannel":
        return CompoundChannel(self.states, tuple(t1_labels), tuple(t2_labels), self.csir_labels)

    def fingerprint(self) -> str:
        """Short stable hash of the channel content (for result metadata)."""
        import hashlib

        return hashlib.sha256(serialize_channel(self).encode()).hexdigest()[:16]


# --- files -----------------------------------------------------------------

def _line_of(text: str, needle: str) -> int | None:
    pos = text.find(needle)
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def parse_channel_file(text: str) -> CompoundChannel:
    """Parse the JSON channel format and validate every invariant.

    Each state gives either ``matrix`` indexed ``[x][y][z]`` or ``rows``, a
    ``(|X||Y|, |Z|)`` list whose row ``x*|Y| + y`` holds ``W(.|x,y)``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ValidationError("top level must be an object")
    try:
        sx, sy, sz = (int(doc[k]) for k in ("X", "Y", "Z"))
    except (KeyError, TypeError, ValueError):
        raise ValidationError("missing or non-integer alphabet size X, Y or Z") from None
    if min(sx, sy, sz) < 1:
        raise ValidationError("alphabet sizes must be positive")
    raw_states = doc.get("states")
    if not isinstance(raw_states, list) or not raw_states:
        raise ValidationError("'states' must be a non-empty list")

    states, t1, t2, csir = [], [], [], []
    for idx, st in enumerate(raw_states):
        name = str(st.get("name", f"W{idx + 1}")) if isinstance(st, dict) else f"W{idx + 1}"
        line = _line_of(text, f'"{name}"')
        if not isinstance(st, dict):
            raise ValidationError(f"state #{idx} is not an object", line=line)
        try:
            if "matrix" in st:
                m = np.array(st["matrix"], dtype=float)
            elif "rows" in st:
                m = np.array(st["rows"], dtype=float).reshape(sx, sy, -1)
            else:
                raise ValidationError(f"state {name!r} has neither 'matrix' nor 'rows'", line=line)
        except ValueError:
            raise ValidationError(f"state {name!r}: ragged or non-numeric matrix", line=line) from None
        if m.shape != (sx, sy, sz):
            raise ValidationError(
                f"state {name!r}: matrix shape {m.shape} inconsistent with alphabets {(sx, sy, sz)}", line=line)
        if np.any(m < 0):
            raise ValidationError(f"state {name!r}: negative probability", line=line)
        sums = m.sum(axis=2)
        for x in range(sx):
            for y in range(sy):
                if abs(sums[x, y] - 1.0) > ROW_TOL:
                    raise ValidationError(
                        f"state {name!r}: row (x={x}, y={y}) sums to {sums[x, y]:.12g}, not 1", line=line)
        states.append(Channel(m, name))
        t1.append(str(st.get("t1", "*")))
        t2.append(str(st.get("t2", "*")))
        csir.append(st.get("csir"))
    csir_labels = tuple(map(str, csir)) if all(c is not None for c in csir) else None
    return CompoundChannel(tuple(states), tuple(t1), tuple(t2), csir_labels)


def serialize_channel(c: CompoundChannel) -> str:
    """Inverse of :func:`parse_channel_file`; output is canonical and stable."""
    sx, sy, sz = c.sizes
    states = []
    for i, s in enumerate(c.states):
        entry = {"name": s.name, "t1": c.t1_labels[i], "t2": c.t2_labels[i],
                 "matrix": s.matrix.tolist()}
        if c.csir_labels is not None:
            entry["csir"] = c.csir_labels[i]
        states.append(entry)
    doc = {"X": sx, "Y": sy, "Z": sz, "states": states}
    text = json.dumps(doc, indent=2)
    # keep innermost probability lists on one line
    return re.sub(r"\[\s+([^\[\]]*?)\s+\]", lambda m: "[" + " ".join(m.group(1).split()) + "]", text) + "\n"


def load_channel(path) -> CompoundChannel:
    with open(path, encoding="utf-8") as fh:
        return parse_channel_file(fh.read())


def paper_example_text() -> str:
    return resources.files("compound_mac").joinpath("data/paper_example.json").read_text(encoding="utf-8")


def paper_example() -> CompoundChannel:
    """The two-state binary MAC with no CSIT used in the worked example."""
    return parse_channel_file(paper_example_text())


# --- quantization ------------------------------------------------------------

@dataclass(frozen=True)
class QuantizationResult:
    """Grid approximation of a compound channel.

    ``numerators[g]`` holds the integer entries of grid channel ``g`` over the
    common ``denominator``; ``assignment[s]`` is the grid channel that state
    ``s`` is mapped to and ``cell_tags[g]`` the joint CSIT cell it belongs to.
    """

    grid_channels: tuple[Channel, ...]
    numerators: tuple[np.ndarray, ...]
    denominator: int
    assignment: tuple[int, ...]
    cell_tags: tuple[tuple[str, str], ...]
    N: int
    domination_factor: float
    max_deviation: float

    def channel(self) -> CompoundChannel:
        """The quantized compound channel, labelled by the original CSIT cells."""
        return CompoundChannel(self.grid_channels,
                               tuple(t[0] for t in self.cell_tags),
                               tuple(t[1] for t in self.cell_tags))


def grid_cardinality_bound(sizes, denominator: int) -> int:
    """Crude count ``(D+1)^{|X||Y||Z|}`` of grid arrays with denominator ``D``."""
    x, y, z = sizes
    return (denominator + 1) ** (x * y * z)


def grid_channel_count(sizes, denominator: int) -> int:
    """Exact number of stochastic arrays whose entries are multiples of ``1/D``."""
    x, y, z = sizes
    return math.comb(denominator + z - 1, z - 1) ** (x * y)


def _quantize_row(w: np.ndarray, denom: int, factor: float) -> np.ndarray:
    scaled = w * denom
    f = np.floor(scaled + 1e-9).astype(np.int64)
    left = denom - int(f.sum())
    rem = np.where(w > 0, scaled - f, -np.inf)
    # largest remainder, ties to the lowest index
    for e in sorted(range(w.size), key=lambda i: (-rem[i], i))[:max(left, 0)]:
        f[e] += 1
    while int(f.sum()) > denom:
        f[int(np.argmax(f))] -= 1
    for _ in range(4 * w.size):
        viol = [e for e in range(w.size) if w[e] > factor * f[e] / denom]
        if not viol:
            break
        e = viol[0]
        donors = [d for d in range(w.size)
                  if d != e and f[d] > 0 and w[d] <= factor * (f[d] - 1) / denom]
        if not donors:
            break
        d = max(donors, key=lambda i: (f[i], -i))
        f[e] += 1
        f[d] -= 1
    return f


def quantize(c: CompoundChannel, N: int) -> QuantizationResult:
    """Map every state onto the grid of multiples of ``1/(2N|T1||T2|)``.

    Both approximation inequalities (entrywise deviation at most ``|Z|/N`` and
    domination ``W <= exp(2|Z|^2/N) f(W)``) are verified after rounding;
    states in different joint CSIT cells are kept as separate grid channels
    even when their grid arrays coincide.
    """
    sx, sy, sz = c.sizes
    if N <= 2 * sz:
        raise DomainError(f"N must exceed 2|Z| = {2 * sz}, got {N}")
    denom = 2 * N * len(c.T1) * len(c.T2)
    factor = math.exp(2 * sz * sz / N)
    dev_bound = sz / N

    grid, nums, tags, assignment = [], [], [], []
    seen: dict[tuple, int] = {}
    max_dev = 0.0
    for s, (state, l1, l2) in enumerate(zip(c.states, c.t1_labels, c.t2_labels)):
        w = state.matrix
        f = np.empty(w.shape, dtype=np.int64)
        for x in range(sx):
            for y in range(sy):
                f[x, y] = _quantize_row(w[x, y], denom, factor)
        q = f / denom
        dev = np.abs(w - q)
        if np.any(dev > dev_bound + 1e-12):
            e = tuple(int(v) for v in np.argwhere(dev > dev_bound + 1e-12)[0])
            raise QuantizationInfeasible(
                f"state {state.name!r}: entry {e} deviates by {dev[e]:.3g} > |Z|/N", state=s, entry=e)
        dom = w > factor * q
        if np.any(dom):
            e = tuple(int(v) for v in np.argwhere(dom)[0])
            raise QuantizationInfeasible(
                f"state {state.name!r}: entry {e} = {w[e]:.6g} not dominated by "
                f"{factor:.6g} * {q[e]:.6g}", state=s, entry=e)
        max_dev = max(max_dev, float(dev.max()))
        key = ((l1, l2), f.tobytes())
        if key not in seen:
            seen[key] = len(grid)
            grid.append(Channel(q, f"{state.name}~N{N}"))
            nums.append(f)
            tags.append((l1, l2))
        assignment.append(seen[key])
    return QuantizationResult(tuple(grid), tuple(nums), denom, tuple(assignment), tuple(tags),
                              N, factor, max_dev)
