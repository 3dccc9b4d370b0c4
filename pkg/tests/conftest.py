from __future__ import annotations

import random

import pytest

from llplace.geometry import BBoxDims, PlacedObject, Point3, RoomBounds


def box(name="box", w=1.0, h=1.0, d=1.0, x=0.0, y=0.5, z=0.0, yaw=0.0, category=""):
    return PlacedObject(
        name=name,
        category=category,
        dims=BBoxDims(h=h, w=w, d=d),
        center=Point3(x, y, z),
        yaw=yaw,
    )


def random_box(rng: random.Random, name: str) -> PlacedObject:
    return box(
        name=name,
        w=rng.uniform(0.2, 3.0),
        h=rng.uniform(0.2, 3.0),
        d=rng.uniform(0.2, 3.0),
        x=rng.uniform(-3.0, 3.0),
        y=rng.uniform(-3.0, 3.0),
        z=rng.uniform(-3.0, 3.0),
        yaw=rng.uniform(0.0, 360.0),
    )


@pytest.fixture
def bounds_4x4():
    return RoomBounds(half_x=2.0, half_z=2.0, height=3.0)
