"""Contact maps from multi-view proposals, pseudo grasp poses by fingertip IK,
and the reward and metric functions used to train and score grasps."""

from .bundle import SceneBundle, load_bundle, synthesize, validate_bundle, write_bundle
from .config import PipelineConfig, load_config
from .sgcr import ContactMap, SgcrConfig, run_sgcr

__version__ = "0.1.0"
