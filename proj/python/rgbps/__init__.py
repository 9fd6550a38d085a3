"""Single-image RGB photometric stereo with piecewise-constant albedo."""

from ._core import (
    InputError,
    angular_error,
    benchmark_rig,
    classical_ps,
    config_keys,
    default_config,
    gen_instance,
    integrate_normals,
    invert_pixels,
    read_pfm,
    reconstruct,
    render,
    set_threads,
    threads,
    write_pfm,
)

__version__ = "0.1.0"

__all__ = [
    "InputError",
    "angular_error",
    "benchmark_rig",
    "classical_ps",
    "config_keys",
    "default_config",
    "gen_instance",
    "integrate_normals",
    "invert_pixels",
    "read_pfm",
    "reconstruct",
    "render",
    "set_threads",
    "threads",
    "write_pfm",
]
