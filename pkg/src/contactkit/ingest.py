"""Proposal documents, mask filtering and calibrated initial confidence maps.

A proposal document describes one object::

    {"object_id": "mug",
     "intents": [{"intent_id": 0, "part_name": "handle", "description": "...",
                  "views": [{"view_id": 1, "visible": true,
                             "bbox": [x0, y0, x1, y1], "confidence": 0.8}, ...]}]}

Bounding boxes are half-open pixel-index rectangles: pixel ``(col, row)``
lies inside when ``x0 <= col < x1`` and ``y0 <= row < y1``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateBoxError, EmptyProposalError, ProposalParseError, ShapeError

log = logging.getLogger(__name__)

STAGES = ("initial", "refined", "normalized")


@dataclass(frozen=True)
class ViewProposal:
    view_id: int
    visible: bool
    bbox: tuple | None
    confidence: float


@dataclass(frozen=True)
class IntentProposal:
    intent_id: int
    part_name: str
    description: str
    views: tuple = ()

    def view(self, view_id):
        for v in self.views:
            if v.view_id == view_id:
                return v
        return None

    @property
    def visible_views(self):
        return [v for v in self.views if v.visible]


@dataclass(eq=False)
class ConfidenceMap:
    scores: np.ndarray
    stage: str = "initial"
    view_id: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        self.scores = np.asarray(self.scores, float)


def _valid_bbox(bbox):
    if bbox is None or not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
        return False
    try:
        x0, y0, x1, y1 = (float(b) for b in bbox)
    except (TypeError, ValueError):
        return False
    return all(math.isfinite(b) for b in (x0, y0, x1, y1)) and x1 > x0 and y1 > y0


def _as_document(document):
    if isinstance(document, dict):
        return document
    if isinstance(document, Path) or (isinstance(document, str) and not document.lstrip().startswith("{")):
        text = Path(document).read_text()
    else:
        text = document
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProposalParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc


def _field(obj, key, loc, kind=None):
    if not isinstance(obj, dict):
        raise ProposalParseError("expected an object", loc)
    if key not in obj:
        raise ProposalParseError(f"missing field {key!r}", loc)
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ProposalParseError(f"field {key!r} has wrong type {type(value).__name__}", f"{loc}.{key}")
    return value


def load_proposals(document) -> list[IntentProposal]:
    """Parse and clean a proposal document.

    Invalid boxes are removed, confidences clipped to [0, 1], and a missing
    visibility flag is inferred from whether a valid box exists. Intents
    left with no visible view are dropped.
    """
    doc = _as_document(document)
    intents = _field(doc, "intents", "$", list)
    out = []
    for k, item in enumerate(intents):
        loc = f"$.intents[{k}]"
        intent_id = _field(item, "intent_id", loc)
        if isinstance(intent_id, bool) or not isinstance(intent_id, int):
            raise ProposalParseError("intent_id must be an integer", f"{loc}.intent_id")
        part_name = str(item.get("part_name", ""))
        description = str(item.get("description", ""))
        views = []
        for j, entry in enumerate(_field(item, "views", loc, list)):
            vloc = f"{loc}.views[{j}]"
            view_id = _field(entry, "view_id", vloc)
            if isinstance(view_id, bool) or not isinstance(view_id, int):
                raise ProposalParseError("view_id must be an integer", f"{vloc}.view_id")
            conf = _field(entry, "confidence", vloc)
            if isinstance(conf, bool) or not isinstance(conf, (int, float)) or math.isnan(conf):
                raise ProposalParseError("confidence must be a number", f"{vloc}.confidence")
            bbox = entry.get("bbox")
            has_box = _valid_bbox(bbox)
            visible = entry.get("visible")
            if visible is None:
                visible = has_box
            elif not isinstance(visible, bool):
                raise ProposalParseError("visible must be a boolean", f"{vloc}.visible")
            if visible and not has_box:
                log.info("dropping %s: invalid bounding box %r", vloc, bbox)
                continue
            views.append(ViewProposal(
                view_id=view_id,
                visible=visible,
                bbox=tuple(float(b) for b in bbox) if visible else None,
                confidence=float(min(max(conf, 0.0), 1.0)),
            ))
        if not any(v.visible for v in views):
            log.info("dropping intent %s: no visible view left", intent_id)
            continue
        out.append(IntentProposal(intent_id, part_name, description, tuple(views)))
    if not out:
        raise EmptyProposalError("no intent survived proposal cleaning")
    if not 2 <= len(out) <= 4:
        log.info("%d intents in document; proposals usually carry two to four", len(out))
    return out


def filter_mask(mask, depth) -> np.ndarray:
    """Keep only mask pixels that land on the object (valid depth)."""
    mask = np.asarray(mask, bool)
    depth = np.asarray(depth, float)
    if mask.shape != depth.shape:
        raise ShapeError(f"mask {mask.shape} vs depth {depth.shape}")
    return mask & np.isfinite(depth) & (depth > 0)


def bbox_area(bbox):
    x0, y0, x1, y1 = bbox
    return (x1 - x0) * (y1 - y0)


def bbox_pixels(shape, bbox):
    """Boolean image of the pixels whose index lies in the half-open box."""
    h, w = shape
    x0, y0, x1, y1 = bbox
    cols = np.arange(w)
    rows = np.arange(h)
    return ((rows >= y0) & (rows < y1))[:, None] & ((cols >= x0) & (cols < x1))[None, :]


def valid_region_ratio(filtered, bbox) -> float:
    """Fraction of the box area covered by the filtered mask."""
    if not _valid_bbox(bbox):
        raise DegenerateBoxError(f"bounding box {bbox!r} has no area")
    filtered = np.asarray(filtered, bool)
    inside = np.count_nonzero(filtered & bbox_pixels(filtered.shape, bbox))
    return min(inside / bbox_area(bbox), 1.0)


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def calibrate_confidence(c, rho, scale=None, bias=0.0) -> float:
    """Logistic re-weighting of a raw confidence by the valid-region ratio.

    With ``scale`` set, the logistic is applied to ``scale * (rho - bias)``
    instead of ``rho``; the default applies it to ``rho`` directly.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"confidence {c} outside [0, 1]")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"region ratio {rho} outside [0, 1]")
    x = rho if scale is None else scale * (rho - bias)
    return sigmoid(x) * c


def init_confidence_map(filtered, c_bar, view_id=0) -> ConfidenceMap:
    if c_bar < 0:
        raise ValueError("calibrated confidence must be >= 0")
    filtered = np.asarray(filtered, bool)
    return ConfidenceMap(np.where(filtered, float(c_bar), 0.0), "initial", view_id)
