"""Compact evaluation regions: a centered ball intersected with a coordinate box."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = ["CompactRegion"]


@dataclass(frozen=True)
class CompactRegion:
    """Membership test for { |x| <= ball_radius } intersect { |x_i| <= box[i] }.

    Either constraint may be omitted (None).  Used as the compact set over
    which stability gaps and potential differences are measured.
    """

    ball_radius: float | None = None
    box_halfwidths: np.ndarray | None = None

    def __post_init__(self):
        if self.ball_radius is None and self.box_halfwidths is None:
            raise InvalidInputError("region needs a ball radius or box halfwidths")
        if self.ball_radius is not None and self.ball_radius <= 0:
            raise InvalidInputError("ball radius must be positive")
        if self.box_halfwidths is not None:
            box = np.asarray(self.box_halfwidths, dtype=float).copy()
            if box.ndim != 1 or np.any(box <= 0):
                raise InvalidInputError("box halfwidths must be positive")
            box.flags.writeable = False
            object.__setattr__(self, "box_halfwidths", box)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask over rows of ``points``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = np.ones(pts.shape[0], dtype=bool)
        if self.ball_radius is not None:
            mask &= np.linalg.norm(pts, axis=1) <= self.ball_radius
        if self.box_halfwidths is not None:
            if self.box_halfwidths.size != pts.shape[1]:
                raise InvalidInputError("box halfwidths dimension mismatch")
            mask &= np.all(np.abs(pts) <= self.box_halfwidths[None, :], axis=1)
        return mask

    def to_dict(self) -> dict:
        out: dict = {}
        if self.ball_radius is not None:
            out["ball_radius"] = float(self.ball_radius)
        if self.box_halfwidths is not None:
            out["box_halfwidths"] = [float(v) for v in self.box_halfwidths]
        return out

    @staticmethod
    def from_dict(obj: dict) -> "CompactRegion":
        box = obj.get("box_halfwidths")
        return CompactRegion(
            ball_radius=obj.get("ball_radius"),
            box_halfwidths=None if box is None else np.asarray(box, dtype=float),
        )
