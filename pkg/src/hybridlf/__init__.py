"""Hybrid light field toolkit: fuse a low-resolution light field with a high-resolution camera image."""

from ._accel import USE_NUMBA
from .config import Config, ConfigError
from .core import (LFCFormatError, ImageIOError, LightField, MalformedPNGError, UnsupportedChannelsError,
                   as_image, box_downsample, lfc_read, lfc_write, luma, png_read, png_write,
                   resize_bicubic, sample_bilinear)
from .decode import LensletGrid, decode_rect_lenslet, mux_rect_lenslet, vignette_gain
from .depth import (DepthErrorModel, DisparityMap, ProfileRow, StereoGeometry, depth_error,
                    depth_from_disparity, depth_rmse, disparity_block_match, disparity_from_depth,
                    disparity_from_flow, disparity_profile, max_range)
from .flow import (FlowParams, Residual, endpoint_error, flow_compose, flow_estimate, flow_negate_approx,
                   grid_interpolate, pyramid, residual, warp_backward, zero_flow)
from .fusion import (EnhanceInfo, FusionParams, Registration, SubbandPyramid, dwt_haar2, enhance_lightfield,
                     fuse, fuse_alpha, fuse_wavelet, idwt_haar2, photomatch_hr, register)
from .occlusion import OcclusionParams, occlusion_fill, occlusion_mask
from .photometric import IntensityMatchFunction, histogram256, imf_apply, imf_estimate
from .refocus import RefocusParams, corner_mask, epi_horizontal, epi_vertical, refocus, sharpness_vol
from .synth import (HybridCapture, Plane, RigSpec, SceneSpec, default_scene, planar_scene, psnr,
                    render_view, staircase_scene, synth_hybrid_capture)

__version__ = "0.1.0"
