"""Entropy of morphologies"""

import json
import math

import jsonschema
import numpy as np
import pytest

from embodic import infomorph
from embodic.infomorph import (
    ConstraintMismatch,
    ConstraintSet,
    Device,
    DeviceKind,
    EnumerationLimitExceeded,
    Leaf,
    Morphology,
    Parallel,
    Serial,
)
from embodic.utils import PreconditionError


@pytest.mark.parametrize(
    "resolution, expected",
    [
        (1024, 10),
        (1, 0),
        (2, 1),
    ],
)
def test_device_entropy(resolution, expected):
    device = Device("x", DeviceKind.SENSOR, resolution)
    assert infomorph.device_entropy(device).value == expected


def test_device_resolution_must_be_positive():
    with pytest.raises(PreconditionError):
        Device("x", resolution=0)
    with pytest.raises(PreconditionError):
        Device("x", resolution=2.5)


def test_free_entropy(three_finger_hand):
    assert infomorph.free_entropy(three_finger_hand).value == pytest.approx(
        4.755, abs=1e-3
    )
    assert infomorph.free_entropy(Morphology(Leaf(Device("x", resolution=1024)))).value == 10
    links = Morphology.uniform(5, 4, layout=Parallel)
    assert links.free_count == 1024
    assert infomorph.free_entropy(links).value == 10


def test_serial_parallel_tags_do_not_change_counting():
    serial = Morphology.uniform(4, 3, layout=Serial)
    parallel = Morphology.uniform(4, 3, layout=Parallel)
    assert serial.free_count == parallel.free_count == 81


def test_free_entropy_is_additive():
    arm = Morphology.uniform(3, 5, layout=Serial)
    hand = Morphology.uniform(5, 4, layout=Parallel)
    body = Morphology(Serial([arm.root, hand.root]))
    assert infomorph.free_entropy(body).value == pytest.approx(
        infomorph.free_entropy(arm).value + infomorph.free_entropy(hand).value
    )


def test_adding_a_device_increases_free_entropy():
    m = Morphology.uniform(2, 3)
    for resolution in (2, 3, 17):
        bigger = m.extend(Device("extra", resolution=resolution))
        assert infomorph.free_entropy(bigger).value > infomorph.free_entropy(m).value


def test_base_change(three_finger_hand):
    scaled = [
        infomorph.free_entropy(three_finger_hand, base).value * math.log(base)
        for base in (2, math.e, 3.5, 10)
    ]
    for value in scaled:
        assert value == pytest.approx(scaled[0], rel=1e-12)
    bits = infomorph.free_entropy(three_finger_hand, 2)
    assert bits.to_base(10).value == pytest.approx(
        infomorph.free_entropy(three_finger_hand, 10).value, rel=1e-12
    )


@pytest.mark.parametrize("base", [1, 0.5, -2, math.inf, True])
def test_invalid_base(three_finger_hand, base):
    with pytest.raises(PreconditionError):
        infomorph.free_entropy(three_finger_hand, base)


@pytest.mark.parametrize(
    "r_x, r_y, k",
    [
        (1024, 2, 10),
        (1024, 4, 5),
        (256, 2, 8),
        (7, 7, 1),
        (1025, 2, 11),
        (256, 3, 6),
    ],
)
def test_equivalent_unit_count(r_x, r_y, k):
    assert infomorph.equivalent_unit_count(r_x, r_y) == k


def test_equivalent_unit_count_is_minimal():
    rng = np.random.default_rng(7)
    for r_x, r_y in rng.integers(2, [100_000, 12], size=(200, 2)):
        r_x, r_y = int(r_x), int(r_y)
        k = infomorph.equivalent_unit_count(r_x, r_y)
        assert r_y**k >= r_x
        assert r_y ** (k - 1) < r_x


@pytest.mark.parametrize("r_x, r_y", [(1, 2), (1024, 1), (0, 2), (1024, 2.0)])
def test_equivalent_unit_count_rejects_degenerate_devices(r_x, r_y):
    with pytest.raises(PreconditionError):
        infomorph.equivalent_unit_count(r_x, r_y)


def test_equivalence_report():
    report = infomorph.equivalence(1024, 2)
    assert report.k == 10
    assert report.ratio == pytest.approx(10.0)
    assert report.capacity == 1024
    assert report.surplus == 0

    report = infomorph.equivalence(256, 3)
    assert report.k == 6
    assert report.capacity == 729
    assert report.surplus == 729 - 256
    assert report.ratio == pytest.approx(math.log(256) / math.log(3))


def test_constrained_entropy(three_finger_hand, grasp):
    assert infomorph.constrained_entropy(three_finger_hand, grasp).value == pytest.approx(
        1.585, abs=1e-3
    )
    closed = ConstraintSet.counted(1)
    assert infomorph.constrained_entropy(three_finger_hand, closed).value == 0
    assert (
        infomorph.constrained_entropy(three_finger_hand, ConstraintSet.none()).value
        == infomorph.free_entropy(three_finger_hand).value
    )


def test_relative_entropy_loss(three_finger_hand, grasp):
    assert infomorph.relative_entropy_loss(three_finger_hand, grasp, 10) == pytest.approx(
        -0.954, abs=0.005
    )
    assert infomorph.relative_entropy_loss(three_finger_hand, grasp, 2) == pytest.approx(
        -3.170, abs=0.005
    )
    assert infomorph.relative_entropy_loss(three_finger_hand, ConstraintSet.none()) == 0
    assert infomorph.relative_entropy_loss(
        three_finger_hand, ConstraintSet.counted(1)
    ) == pytest.approx(-math.log2(27))


def test_constrained_never_exceeds_free(three_finger_hand):
    for count in range(1, 28):
        c = ConstraintSet.counted(count)
        assert infomorph.relative_entropy_loss(three_finger_hand, c) <= 0
    # allowing every state is no constraint at all
    everything = ConstraintSet.explicit(infomorph.enumerate_states(three_finger_hand))
    assert infomorph.relative_entropy_loss(three_finger_hand, everything) == 0


def test_constraint_mismatch(three_finger_hand):
    with pytest.raises(ConstraintMismatch) as e:
        infomorph.constrained_entropy(
            three_finger_hand, ConstraintSet.explicit([(0, 0, 3)])
        )
    assert e.value.state == (0, 0, 3)
    assert e.value.resolutions == (3, 3, 3)

    with pytest.raises(ConstraintMismatch):
        infomorph.constrained_entropy(three_finger_hand, ConstraintSet.explicit([(0, 0)]))

    with pytest.raises(ConstraintMismatch):
        infomorph.allowed_state_count(three_finger_hand, ConstraintSet.counted(28))


@pytest.mark.parametrize(
    "make",
    [
        lambda: ConstraintSet.explicit([(0, 1), (0, 1)]),
        lambda: ConstraintSet.explicit([]),
        lambda: ConstraintSet.counted(0),
    ],
)
def test_invalid_constraint_sets(make):
    with pytest.raises(ConstraintMismatch):
        make()


def test_enumerate_states():
    pair = Morphology.uniform(2, 2)
    assert infomorph.enumerate_states(pair) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    single = Morphology(Leaf(Device("x", resolution=3)))
    assert infomorph.enumerate_states(single) == [(0,), (1,), (2,)]


def test_enumerate_explicit_states(three_finger_hand):
    allowed = [(2, 2, 2), (0, 0, 0), (1, 1, 1)]
    c = ConstraintSet.explicit(allowed)
    states = infomorph.enumerate_states(three_finger_hand, c)
    assert states == sorted(allowed)
    assert len(states) == infomorph.allowed_state_count(three_finger_hand, c)


def test_enumeration_cap():
    huge = Morphology.uniform(30, 2)
    with pytest.raises(EnumerationLimitExceeded) as e:
        infomorph.enumerate_states(huge)
    assert e.value.count == 2**30
    assert e.value.cap == infomorph.ENUMERATION_CAP
    # counting still works
    assert infomorph.free_entropy(huge).value == 30


def test_count_constraints_cannot_be_enumerated(three_finger_hand, grasp):
    with pytest.raises(ConstraintMismatch):
        infomorph.enumerate_states(three_finger_hand, grasp)


def test_information_hierarchy():
    rows = infomorph.information_hierarchy([(1, 1024), (10, 2), (20, 2)])
    assert [row.capacity for row in rows] == pytest.approx([10, 10, 20])
    assert all(row.holds for row in rows)

    rows = infomorph.information_hierarchy([(1, 1024), (5, 2)])
    assert not rows[0].holds
    assert rows[1].holds

    with pytest.raises(PreconditionError):
        infomorph.information_hierarchy([])
    with pytest.raises(PreconditionError):
        infomorph.information_hierarchy([(0, 2)])


def test_human_hand():
    rungs = infomorph.human_hand(finger_resolution=4, fingers=5, base=2)
    by_name = {rung.name: rung for rung in rungs}
    assert [rung.name for rung in rungs] == [
        "free",
        "soft",
        "three-finger",
        "pen",
        "closed",
    ]
    assert [rung.states for rung in rungs] == [1024, 256, 64, 16, 1]
    assert by_name["free"].entropy == 10
    assert by_name["free"].loss == 0
    assert by_name["three-finger"].entropy == pytest.approx(3 * math.log2(4))
    assert by_name["pen"].entropy == pytest.approx(2 * math.log2(4))
    assert by_name["closed"].entropy == 0
    assert by_name["closed"].loss == -10
    assert infomorph.is_monotone(rungs)


@pytest.mark.parametrize("fingers", [1, 2])
def test_human_hand_with_few_fingers(fingers):
    rungs = infomorph.human_hand(finger_resolution=3, fingers=fingers)
    by_name = {rung.name: rung for rung in rungs}
    free = 3**fingers
    assert by_name["free"].states == free
    assert by_name["closed"].states == 1
    assert by_name["pen"].states == min(9, free)
    assert by_name["three-finger"].states == free
    assert all(rung.states <= free for rung in rungs)
    assert all(rung.loss <= 0 for rung in rungs)


def test_entropy_ladder_detects_non_monotone_order(three_finger_hand):
    rungs = infomorph.entropy_ladder(
        three_finger_hand,
        {"closed": ConstraintSet.counted(1), "free": ConstraintSet.none()},
    )
    assert not infomorph.is_monotone(rungs)


def test_load_document(grasp_document, three_finger_hand):
    m, c = infomorph.load_document(grasp_document)
    assert m == three_finger_hand
    assert c == ConstraintSet.counted(3)
    assert [device.id for device in m.devices] == ["d0", "d1", "d2"]
    assert all(device.kind is DeviceKind.MOTOR for device in m.devices)


def test_load_bare_node():
    m, c = infomorph.load_document(
        {
            "kind": "serial",
            "children": [
                {"kind": "leaf", "id": "camera", "device": "sensor", "resolution": 256},
                {"kind": "leaf", "resolution": 2},
            ],
        }
    )
    assert m.resolutions == (256, 2)
    assert m.devices[0].kind is DeviceKind.SENSOR
    assert c == ConstraintSet.none()


def test_load_document_from_file(tmp_path, grasp_document):
    path = tmp_path / "hand.json"
    path.write_text(json.dumps(grasp_document))
    m, c = infomorph.load_document(str(path))
    assert m.free_count == 27
    assert c.count == 3


@pytest.mark.parametrize(
    "doc",
    [
        {"kind": "leaf"},
        {"kind": "leaf", "resolution": 2, "children": []},
        {"kind": "parallel", "children": []},
        {"kind": "serial", "resolution": 2, "children": [{"kind": "leaf", "resolution": 2}]},
        {"kind": "tree", "children": []},
        {
            "morphology": {"kind": "leaf", "resolution": 2},
            "constraints": {"mode": "count"},
        },
        {
            "morphology": {"kind": "leaf", "resolution": 2},
            "extra": True,
        },
    ],
)
def test_invalid_documents(doc):
    with pytest.raises(jsonschema.ValidationError):
        infomorph.load_document(doc)


def test_dump_morphology():
    m = Morphology(
        Serial(
            [
                Leaf(Device("shoulder", resolution=8)),
                Parallel([Leaf(Device(f"f{i}", resolution=4)) for i in range(5)]),
            ]
        )
    )
    assert infomorph.load_morphology(infomorph.dump_morphology(m)) == m
