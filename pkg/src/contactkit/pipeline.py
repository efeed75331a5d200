"""End-to-end commands: validate a bundle, run it, evaluate logs, synthesize scenes."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import io
from .bundle import load_bundle, synthesize, validate_bundle, write_bundle
from .config import PipelineConfig
from .errors import EmptyInputError, ValidationError
from .handkin import (KinematicChain, builtin_chain, default_initial_pose, partition_regions, solve_ik,
                      world_palm_normal)
from .handkin.hands import BUILTIN
from .metrics import EpisodeLog, evaluate
from .sgcr import ContactMap, run_sgcr

log = logging.getLogger(__name__)


def load_chain(hand) -> KinematicChain:
    if hand in BUILTIN:
        return builtin_chain(hand)
    return KinematicChain.from_document(json.loads(Path(hand).read_text()))


def pseudo_pose(cmap, chain, cfg: PipelineConfig):
    """Partition the map, start from the default pose and run the IK."""
    h0 = default_initial_pose(chain, cmap, cfg.ik.standoff)
    assignment = partition_regions(cmap, chain, world_palm_normal(chain, h0), cfg.thumb_side)
    return h0, assignment, solve_ik(chain, h0, assignment, cfg.ik)


def run_intent(bundle, intent_id, cfg: PipelineConfig, chain):
    cmap = run_sgcr(bundle, intent_id, cfg.sgcr)
    h0, assignment, res = pseudo_pose(cmap, chain, cfg)
    pose = {"intent_id": int(intent_id), **res.h.to_dict(), "objective_trace": res.trace.tolist()}
    diag = {**cmap.diagnostics, "partition": assignment.to_dict(), "initial_pose": h0.to_dict(),
            "hand": chain.name, "ik": cfg.ik.to_dict()}
    return cmap, pose, diag


def cmd_validate(bundle_path):
    return validate_bundle(bundle_path)


def cmd_run(bundle_path, cfg: PipelineConfig, out_dir, intent=None, threads=1):
    """Run every intent (or one) and write maps, poses and diagnostics.

    All files are staged and moved into ``out_dir`` only after every intent
    has finished. Returns the written file names.
    """
    findings = validate_bundle(bundle_path)
    if findings:
        raise ValidationError(findings)
    bundle = load_bundle(bundle_path)
    chain = load_chain(cfg.hand)
    ids = [p.intent_id for p in bundle.proposals]
    if intent is not None:
        if intent not in ids:
            raise ValueError(f"intent {intent} not in bundle (have {ids})")
        ids = [intent]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda k: run_intent(bundle, k, cfg, chain), ids))

    files = {}
    for k, (cmap, pose, diag) in zip(ids, results):
        files[f"contact_map_{k}.json"] = lambda p, c=cmap: io.dump_json(p, c.to_dict())
        files[f"contact_map_{k}.ply"] = lambda p, c=cmap: io.write_ply(p, c.points, c.scores)
        files[f"pseudo_pose_{k}.json"] = lambda p, d=pose: io.dump_json(p, d)
        files[f"diagnostics_{k}.json"] = lambda p, d=diag: io.dump_json(p, d)
    io.atomic_write_dir(files, out_dir)
    return sorted(files)


def load_maps(maps_dir):
    maps = {}
    for f in sorted(Path(maps_dir).glob("contact_map_*.json")):
        cm = ContactMap.from_dict(json.loads(f.read_text()))
        maps[cm.intent_id] = cm
    return maps


def cmd_eval(logs_dir, maps_dir, cfg: PipelineConfig, out=None):
    """Metrics over every ``*.jsonl`` episode log in ``logs_dir``."""
    paths = sorted(Path(logs_dir).glob("*.jsonl"))
    if not paths:
        raise EmptyInputError(f"no episode logs (*.jsonl) in {logs_dir}")
    maps = load_maps(maps_dir)
    if not maps:
        raise EmptyInputError(f"no contact maps (contact_map_*.json) in {maps_dir}")
    logs = [EpisodeLog.read(p) for p in paths]
    # a single map serves episodes that carry no intent id
    if len(maps) == 1:
        only = next(iter(maps.values()))
        for l in logs:
            if l.intent_id is None:
                l.intent_id = only.intent_id
    report = evaluate(logs, maps, cfg.metrics)
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        io.dump_json(out, report)
    return report


def cmd_synth(shape, out_dir, resolution=64, seed=0, n_intents=1, confidences=None):
    bundle, doc = synthesize(shape, resolution, seed, n_intents, confidences)
    return write_bundle(bundle, doc, out_dir)


def cmd_config_init(path):
    io.dump_json(path, PipelineConfig().to_dict())
    return path
