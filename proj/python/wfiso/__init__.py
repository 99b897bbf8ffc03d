"""Progressive wavefront isosurface raycasting over block-compressed volumes."""

from ._core import (
    InputError,
    PipelineError,
    Camera,
    CompressedVolume,
    Grids,
    Volume,
    build_grids,
    compare_images,
    compress,
    decode_full,
    load_raw,
    load_wcz,
    reference_render,
    render,
    save_wcz,
    synthesize,
)

__all__ = [
    "InputError",
    "PipelineError",
    "Camera",
    "CompressedVolume",
    "Grids",
    "Volume",
    "build_grids",
    "compare_images",
    "compress",
    "decode_full",
    "load_raw",
    "load_wcz",
    "reference_render",
    "render",
    "save_wcz",
    "synthesize",
]
