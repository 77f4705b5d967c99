"""
Robot bodies as compositions of finite-resolution devices.

A body is a tree of quantized sensors and motors. Its entropy is the log of
the number of joint states it can take (every device independent and uniform
over its states). Physical constraints, such as an object held in the hand,
shrink the set of allowed joint states and so the entropy.

All functions are pure and every type is immutable.
"""

import itertools
import json
import math
import os
from collections import namedtuple
from dataclasses import dataclass
from enum import Enum
from typing import Union

import jsonschema

from .log import app_log
from .utils import PreconditionError, check_base, log_base

HERE = os.path.dirname(os.path.abspath(__file__))
MORPHOLOGY_SCHEMA_PATH = os.path.join(HERE, "schemas", "morphology.json")

# refuse to list more joint states than this, use count-mode constraints instead
ENUMERATION_CAP = 10**7


class ConstraintMismatch(PreconditionError):
    """Raised when a constraint set does not fit a morphology"""

    def __init__(self, message, *, state=None, resolutions=None):
        super().__init__(message)
        self.state = state
        self.resolutions = resolutions


class EnumerationLimitExceeded(PreconditionError):
    """Raised when listing the joint states would exceed the enumeration cap"""

    def __init__(self, message, *, count, cap):
        super().__init__(message)
        self.count = count
        self.cap = cap


class DeviceKind(Enum):
    SENSOR = "sensor"
    MOTOR = "motor"


@dataclass(frozen=True)
class Device:
    """One quantized sensor or motor with `resolution` distinguishable states"""

    id: str
    kind: DeviceKind = DeviceKind.MOTOR
    resolution: int = 2

    def __post_init__(self):
        if isinstance(self.resolution, bool) or not isinstance(self.resolution, int):
            raise PreconditionError(
                f"Device {self.id!r}: resolution must be an integer, got {self.resolution!r}"
            )
        if self.resolution < 1:
            raise PreconditionError(
                f"Device {self.id!r}: resolution must be >= 1, got {self.resolution}"
            )
        if not isinstance(self.kind, DeviceKind):
            object.__setattr__(self, "kind", DeviceKind(self.kind))


@dataclass(frozen=True)
class Leaf:
    device: Device


@dataclass(frozen=True)
class _Composite:
    children: tuple = ()

    def __post_init__(self):
        children = tuple(self.children)
        if not children:
            raise PreconditionError(
                f"{self.__class__.__name__} composition needs at least one child"
            )
        for child in children:
            if not isinstance(child, (Leaf, Serial, Parallel)):
                raise PreconditionError(
                    f"{self.__class__.__name__} child must be a node, got {child!r}"
                )
        object.__setattr__(self, "children", children)


class Serial(_Composite):
    """Devices chained one after the other, e.g. a kinematic chain"""


class Parallel(_Composite):
    """Devices acting side by side on the same object, e.g. fingers"""


Node = Union[Leaf, Serial, Parallel]


def _leaves(node):
    if isinstance(node, Leaf):
        yield node.device
    else:
        for child in node.children:
            yield from _leaves(child)


@dataclass(frozen=True)
class Morphology:
    """A finite, non-empty composition tree of devices

    Serial and Parallel tags are structural metadata only:
    the free state count is the product of the leaf resolutions either way.
    Impossible states of rigid designs are modelled with a ConstraintSet.
    """

    root: Node

    def __post_init__(self):
        if not isinstance(self.root, (Leaf, Serial, Parallel)):
            raise PreconditionError(f"Morphology root must be a node, got {self.root!r}")

    @property
    def devices(self):
        """Leaf devices, depth first, left to right"""
        return tuple(_leaves(self.root))

    @property
    def resolutions(self):
        return tuple(device.resolution for device in self.devices)

    @property
    def free_count(self):
        return math.prod(self.resolutions)

    @classmethod
    def uniform(cls, count, resolution, layout=Serial, kind=DeviceKind.MOTOR):
        """`count` identical devices composed with `layout`"""
        if count < 1:
            raise PreconditionError(f"need at least one device, got {count}")
        leaves = [
            Leaf(Device(id=f"d{i}", kind=kind, resolution=resolution))
            for i in range(count)
        ]
        if count == 1:
            return cls(leaves[0])
        return cls(layout(leaves))

    def extend(self, device, layout=Serial):
        """A new morphology with `device` composed next to this one"""
        return Morphology(layout([self.root, Leaf(device)]))


class ConstraintMode(Enum):
    NONE = "none"
    EXPLICIT = "explicit"
    COUNT = "count"


@dataclass(frozen=True)
class ConstraintSet:
    """Allowed joint states of a morphology

    - none: every joint state is allowed
    - explicit: the allowed joint-state vectors are listed
    - count: only the number of allowed states is known
    """

    mode: ConstraintMode = ConstraintMode.NONE
    states: tuple = ()
    count: int = None

    def __post_init__(self):
        if not isinstance(self.mode, ConstraintMode):
            object.__setattr__(self, "mode", ConstraintMode(self.mode))
        if self.mode is ConstraintMode.EXPLICIT:
            states = tuple(tuple(int(v) for v in state) for state in self.states)
            if len(set(states)) != len(states):
                raise ConstraintMismatch("explicit constraint lists a state twice")
            if not states:
                raise ConstraintMismatch("explicit constraint needs at least one state")
            object.__setattr__(self, "states", states)
        elif self.mode is ConstraintMode.COUNT:
            if isinstance(self.count, bool) or not isinstance(self.count, int):
                raise ConstraintMismatch(
                    f"count constraint needs an integer count, got {self.count!r}"
                )
            if self.count < 1:
                raise ConstraintMismatch(
                    f"count constraint needs count >= 1, got {self.count}"
                )

    @classmethod
    def none(cls):
        return cls(ConstraintMode.NONE)

    @classmethod
    def explicit(cls, states):
        return cls(ConstraintMode.EXPLICIT, states=tuple(states))

    @classmethod
    def counted(cls, count):
        return cls(ConstraintMode.COUNT, count=count)


@dataclass(frozen=True)
class EntropyValue:
    """An entropy in a given log base (2 = bits)"""

    value: float
    base: float = 2.0

    def to_base(self, base):
        """The same entropy expressed in another log base"""
        base = check_base(base)
        return EntropyValue(self.value * math.log(self.base) / math.log(base), base)

    def __float__(self):
        return float(self.value)


EquivalenceReport = namedtuple(
    "EquivalenceReport", ["r_x", "r_y", "k", "ratio", "capacity", "surplus"]
)
HierarchyLevel = namedtuple(
    "HierarchyLevel", ["level", "count", "resolution", "capacity", "holds"]
)
LadderRung = namedtuple("LadderRung", ["name", "states", "entropy", "loss"])


def device_entropy(device, base=2):
    """log_base of the number of states of one device"""
    base = check_base(base)
    return EntropyValue(log_base(device.resolution, base), base)


def free_entropy(m, base=2):
    """Entropy of the unconstrained body: log of the product of leaf resolutions"""
    base = check_base(base)
    return EntropyValue(log_base(m.free_count, base), base)


def _check_resolution(name, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise PreconditionError(f"{name} must be an integer, got {value!r}")
    if value < 2:
        raise PreconditionError(
            f"{name} must be >= 2 (a single-state device carries no choice), got {value}"
        )


def equivalent_unit_count(r_x, r_y):
    """Smallest k such that k devices of r_y states match one device of r_x states

    i.e. the smallest k with r_y**k >= r_x, computed in integer arithmetic.
    """
    _check_resolution("R_X", r_x)
    _check_resolution("R_Y", r_y)
    k = 0
    capacity = 1
    while capacity < r_x:
        capacity *= r_y
        k += 1
    return k


def equivalence(r_x, r_y):
    """equivalent_unit_count together with the exact real ratio

    capacity is r_y**k, surplus the number of states beyond r_x.
    """
    k = equivalent_unit_count(r_x, r_y)
    capacity = r_y**k
    return EquivalenceReport(
        r_x=r_x,
        r_y=r_y,
        k=k,
        ratio=math.log(r_x) / math.log(r_y),
        capacity=capacity,
        surplus=capacity - r_x,
    )


def _check_state(state, resolutions):
    if len(state) != len(resolutions):
        raise ConstraintMismatch(
            f"state {state} has {len(state)} components, morphology has {len(resolutions)} devices",
            state=state,
            resolutions=resolutions,
        )
    for value, resolution in zip(state, resolutions):
        if not 0 <= value < resolution:
            raise ConstraintMismatch(
                f"state {state} is out of range for resolutions {resolutions}",
                state=state,
                resolutions=resolutions,
            )


def allowed_state_count(m, c):
    """Number of joint states of `m` allowed by `c`"""
    free = m.free_count
    if c.mode is ConstraintMode.NONE:
        return free
    if c.mode is ConstraintMode.COUNT:
        if c.count > free:
            raise ConstraintMismatch(
                f"count constraint allows {c.count} states, morphology only has {free}",
                resolutions=m.resolutions,
            )
        return c.count
    resolutions = m.resolutions
    for state in c.states:
        _check_state(state, resolutions)
    return len(c.states)


def constrained_entropy(m, c, base=2):
    """log_base of the number of allowed joint states"""
    base = check_base(base)
    return EntropyValue(log_base(allowed_state_count(m, c), base), base)


def relative_entropy_loss(m, c, base=2):
    """constrained entropy minus free entropy, never positive"""
    base = check_base(base)
    allowed = allowed_state_count(m, c)
    return log_base(allowed, base) - log_base(m.free_count, base)


def enumerate_states(m, c=None, cap=ENUMERATION_CAP):
    """Allowed joint-state vectors in lexicographic order

    Count-mode constraints do not say which states are allowed
    and cannot be enumerated.
    """
    c = c or ConstraintSet.none()
    free = m.free_count
    if free > cap:
        raise EnumerationLimitExceeded(
            f"morphology has {free} joint states, more than the enumeration cap of {cap}."
            " Use a count-mode constraint instead.",
            count=free,
            cap=cap,
        )
    if c.mode is ConstraintMode.COUNT:
        raise ConstraintMismatch(
            "count-mode constraints do not identify states and cannot be enumerated"
        )
    if c.mode is ConstraintMode.EXPLICIT:
        allowed_state_count(m, c)
        return sorted(c.states)
    return list(itertools.product(*(range(r) for r in m.resolutions)))


def information_hierarchy(levels, base=2):
    """Capacities count * log(resolution) along a chain of organisation levels

    `levels` is a list of (count, resolution) pairs from the top level down.
    `holds` is True where a level's capacity does not exceed the next one's,
    i.e. the chain j log R_a <= k log R_b <= ... holds at that step.
    The last level has nothing to compare with and always holds.
    """
    base = check_base(base)
    if not levels:
        raise PreconditionError("information hierarchy needs at least one level")
    capacities = []
    for count, resolution in levels:
        if count < 1 or resolution < 1:
            raise PreconditionError(
                f"hierarchy level needs count >= 1 and resolution >= 1, got ({count}, {resolution})"
            )
        capacities.append(count * log_base(resolution, base))
    rows = []
    for i, ((count, resolution), capacity) in enumerate(zip(levels, capacities)):
        if i + 1 < len(capacities):
            holds = capacity <= capacities[i + 1] + 1e-12
        else:
            holds = True
        rows.append(HierarchyLevel(i, count, resolution, capacity, holds))
    return rows


def entropy_ladder(m, constraints, base=2):
    """Entropy of `m` under a sequence of named constraints

    `constraints` maps names to ConstraintSets, in the order they should be
    compared (e.g. free, soft object, pen grip, closed grasp).
    """
    base = check_base(base)
    free = m.free_count
    rungs = []
    for name, c in constraints.items():
        allowed = allowed_state_count(m, c)
        entropy = log_base(allowed, base)
        rungs.append(LadderRung(name, allowed, entropy, entropy - log_base(free, base)))
    return rungs


def is_monotone(rungs):
    """True when entropies never increase along the ladder"""
    return all(a.entropy >= b.entropy for a, b in zip(rungs, rungs[1:]))


def human_hand_grips(finger_resolution, fingers=5):
    """Allowed-state counts of the human hand for typical grips

    The free hand has R**fingers states and the closed grasp one. A soft
    object absorbs one finger's freedom (R**(fingers-1)), a three-finger
    grip leaves R**3 states and a two-finger pen grip R**2. Every count is
    capped by the free count, so small hands keep a valid ladder; with
    four or more fingers the ladder is monotone.
    """
    r = finger_resolution
    free = r**fingers

    def capped(count):
        return ConstraintSet.counted(min(count, free))

    return {
        "free": ConstraintSet.none(),
        "soft": capped(r ** max(fingers - 1, 0)),
        "three-finger": capped(r**3),
        "pen": capped(r**2),
        "closed": ConstraintSet.counted(1),
    }


def human_hand(finger_resolution=4, fingers=5, base=2, grips=None):
    """Entropy ladder of a hand of `fingers` fingers with `finger_resolution` states each"""
    if finger_resolution < 2:
        raise PreconditionError(
            f"finger resolution must be >= 2, got {finger_resolution}"
        )
    hand = Morphology.uniform(fingers, finger_resolution, layout=Parallel)
    grips = grips or human_hand_grips(finger_resolution, fingers)
    return entropy_ladder(hand, grips, base)


# documents


def _build_node(doc, counter):
    kind = doc["kind"]
    if kind == "leaf":
        position = next(counter)
        device = Device(
            id=doc.get("id", f"d{position}"),
            kind=DeviceKind(doc.get("device", "motor")),
            resolution=doc["resolution"],
        )
        return Leaf(device)
    children = [_build_node(child, counter) for child in doc["children"]]
    if kind == "serial":
        return Serial(children)
    return Parallel(children)


def _validate_document(doc):
    with open(MORPHOLOGY_SCHEMA_PATH) as f:
        schema = json.load(f)
    jsonschema.validate(doc, schema)


def load_constraints(doc):
    """Build a ConstraintSet from its JSON form"""
    if doc is None:
        return ConstraintSet.none()
    mode = ConstraintMode(doc["mode"])
    if mode is ConstraintMode.EXPLICIT:
        return ConstraintSet.explicit(doc["states"])
    if mode is ConstraintMode.COUNT:
        return ConstraintSet.counted(doc["count"])
    return ConstraintSet.none()


def load_morphology(doc):
    """Build a Morphology from a node document"""
    return Morphology(_build_node(doc, itertools.count()))


def load_document(doc):
    """Validate and build (Morphology, ConstraintSet) from a document

    `doc` is a parsed JSON object or a path to a JSON file. It is either a
    bare node or ``{"morphology": node, "constraints": {...}}``.
    Raises jsonschema.ValidationError for malformed documents.
    """
    if isinstance(doc, (str, os.PathLike)):
        app_log.debug("Loading morphology document %s", doc)
        with open(doc) as f:
            doc = json.load(f)
    _validate_document(doc)
    if "morphology" in doc:
        return load_morphology(doc["morphology"]), load_constraints(
            doc.get("constraints")
        )
    return load_morphology(doc), ConstraintSet.none()


def dump_morphology(m):
    """The JSON form of a morphology, inverse of load_morphology"""

    def dump(node):
        if isinstance(node, Leaf):
            device = node.device
            return {
                "kind": "leaf",
                "id": device.id,
                "device": device.kind.value,
                "resolution": device.resolution,
            }
        kind = "serial" if isinstance(node, Serial) else "parallel"
        return {"kind": kind, "children": [dump(child) for child in node.children]}

    return dump(m.root)
