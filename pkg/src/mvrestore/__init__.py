"""Deterministic orchestration core for restoring inconsistent multi-view captures.

Orders images along a pose trajectory, lays them out as initial videos with
zero frames, drives a pluggable restorer batch by batch, builds training
pairs, and scores results with raw and affine-aligned PSNR/SSIM.
"""

from .errors import ContractViolation, ManifestError, ParseError, ValidationError
from .geometry import (Pose, PoseSet, compute_scales, pose_distance, quat_to_rotation,
                       rotation_distance, rotation_to_quat, translation_distance)
from .lossweights import LossWeights, compute_weights, weight_loss_vector
from .maskkit import apply_inpaint, downsample_mask, make_inpaint_masks, make_style_masks
from .metrics import AffineFit, affine_align, evaluate, psnr, ssim
from .scheduler import (BatchParams, affine_style_restorer, batch_params, identity_restorer,
                        run_pipeline)
from .threadpose import OrderedTrajectory, list_distance, sort_poses
from .videoplan import FramePlan, ImageSlot, ZeroSlot, allocate_zero_frames, build_frame_plan

__version__ = "0.1.0"
