"""Hand chains, forward kinematics, region partitioning and fingertip IK."""

from .chain import (HandConfiguration, Joint, KinematicChain, clamp_joints, fingertip_jacobian,
                    forward_kinematics, link_frames, mid_range, so3_left_jacobian,
                    world_palm_normal)
from .hands import (BUILTIN, allegro_like_document, builtin_chain, planar_finger_document,
                    shadow_like_document)
from .ik import (IkConfig, IkResult, canonical_rotvec, default_initial_pose, ik_objective,
                 nearest_targets, solve_ik)
from .regions import FingerRegionAssignment, partition_regions, principal_axis
