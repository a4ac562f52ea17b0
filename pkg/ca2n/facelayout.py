# -*- coding: utf-8 -*-
"""
ca2n.facelayout
~~~~~~~~~~~~~~~

Splits an aligned face frame into its five component regions and pastes
component images or feature maps back into place.

Boxes are defined as fractions of the frame size and rounded to even
pixel coordinates, so a layout scales with the resolution.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import enum
import logging
import math

import attr

from .core.exceptions import ValidationError, require
from .numerics import ops

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 32


class ComponentId(enum.Enum):
    RIGHT_EYE = "right_eye"
    LEFT_EYE = "left_eye"
    NOSE = "nose"
    MOUTH = "mouth"
    REMAINDER = "remainder"


#: Paste order; later components win where boxes overlap.
PASTE_ORDER = (
    ComponentId.NOSE,
    ComponentId.MOUTH,
    ComponentId.LEFT_EYE,
    ComponentId.RIGHT_EYE,
)

#: Fractional (x, y, w, h) boxes of a centered, aligned face.
DEFAULT_FRACTIONS = {
    ComponentId.LEFT_EYE: (0.15625, 0.3125, 0.25, 0.1875),
    ComponentId.RIGHT_EYE: (0.59375, 0.3125, 0.25, 0.1875),
    ComponentId.NOSE: (0.375, 0.4375, 0.25, 0.25),
    ComponentId.MOUTH: (0.3125, 0.65625, 0.375, 0.1875),
}


@attr.s(frozen=True, slots=True)
class RegionBox(object):
    x = attr.ib()
    y = attr.ib()
    w = attr.ib()
    h = attr.ib()

    @property
    def region(self):
        return (self.x, self.y, self.w, self.h)

    @property
    def shape(self):
        return (self.h, self.w)

    def scaled(self, scale):
        box = RegionBox(*(int(round(v * scale)) for v in self.region))
        require(
            box.w > 0 and box.h > 0,
            "scale",
            "scale {} collapses box {} to nothing",
            scale,
            self.region,
        )
        return box


@attr.s(frozen=True)
class ComponentLayout(object):
    """One :class:`RegionBox` per :class:`ComponentId` of an ``S x S`` frame.
    The remainder box always is the full frame."""

    size = attr.ib()
    boxes = attr.ib()

    def __getitem__(self, component):
        return self.boxes[component]

    def __iter__(self):
        return iter(ComponentId)


def _even(value):
    return 2 * int(math.floor(value / 2.0 + 0.5))


def _parse_fractions(fractions):
    parsed = dict(DEFAULT_FRACTIONS)
    for key, box in (fractions or {}).items():
        try:
            component = key if isinstance(key, ComponentId) else ComponentId(key)
        except ValueError:
            raise ValidationError("layout", "unknown component {!r}".format(key))
        if component is ComponentId.REMAINDER:
            raise ValidationError("layout", "the remainder always spans the frame")
        require(len(box) == 4, "layout", "box of {} needs (x, y, w, h)", key)
        parsed[component] = tuple(float(v) for v in box)
    return parsed


def default_layout(size, fractions=None):
    """Returns the component layout of a ``size x size`` frame.

    :param size: Frame size S, at least 32 and divisible by 4.
    :param fractions: Optional ``{component: (x, y, w, h)}`` overrides,
        as fractions of S.
    """
    require(
        size >= MIN_RESOLUTION and size % 4 == 0,
        "resolution",
        "frame size must be >= {} and divisible by 4, got {}",
        MIN_RESOLUTION,
        size,
    )
    boxes = {}
    for component, box in _parse_fractions(fractions).items():
        x, y, w, h = (_even(v * size) for v in box)
        require(
            w > 0 and h > 0 and x > 0 and y > 0 and x + w < size and y + h < size,
            "layout",
            "{} box {} does not lie strictly inside a {} frame",
            component.value,
            (x, y, w, h),
            size,
        )
        boxes[component] = RegionBox(x, y, w, h)
    boxes[ComponentId.REMAINDER] = RegionBox(0, 0, size, size)
    return ComponentLayout(size=size, boxes=boxes)


def split(image, layout):
    """Cuts an image (``[..., S, S]``) into its component patches.

    :returns: ``{ComponentId: Tensor}``; the remainder is the full image.
    """
    require(
        image.shape[-2:] == (layout.size, layout.size),
        "image",
        "spatial size {} does not match the {}x{} layout",
        image.shape[-2:],
        layout.size,
        layout.size,
    )
    return {
        component: image
        if component is ComponentId.REMAINDER
        else ops.crop(image, layout[component].region)
        for component in ComponentId
    }


def paste_components(remainder_map, component_maps, layout, scale=1.0):
    """Pastes component maps into ``remainder_map`` at their scaled boxes.

    :param scale: Ratio of the map size to the frame size.
    """
    expected = layout[ComponentId.REMAINDER].scaled(scale)
    require(
        remainder_map.shape[-2:] == expected.shape,
        "remainder",
        "map size {} does not match the scaled frame {}",
        remainder_map.shape[-2:],
        expected.shape,
    )
    out = remainder_map
    for component in PASTE_ORDER:
        patch = component_maps.get(component)
        if patch is None:
            continue
        box = layout[component].scaled(scale)
        require(
            patch.shape[-2:] == box.shape,
            component.value,
            "map size {} does not match the scaled box {}",
            patch.shape[-2:],
            box.shape,
        )
        out = ops.paste(out, patch, box.region)
    return out


def assemble(maps, layout):
    """Places per-component feature maps into the remainder map."""
    require(
        ComponentId.REMAINDER in maps, "maps", "the remainder map is required"
    )
    others = {c: m for c, m in maps.items() if c is not ComponentId.REMAINDER}
    return paste_components(maps[ComponentId.REMAINDER], others, layout, 1.0)
