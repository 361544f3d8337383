"""PMACE ptychographic reconstruction toolkit.

Thin numpy-facing wrapper over the C++ core: synthetic data generation,
PMACE and baseline reconstructions (ePIE, AWF, SHARP), and evaluation
metrics.
"""

from pmace._core import (
    __version__,
    aligned_nrmse,
    forward_nrmse,
    generate_phantom,
    generate_probe,
    generate_scan_pattern,
    overlap_ratio,
    preprocess_measured,
    read_array,
    reconstruct,
    simulate_measurements,
    tukey_window_2d,
    write_array,
)

__all__ = [
    "__version__",
    "aligned_nrmse",
    "forward_nrmse",
    "generate_phantom",
    "generate_probe",
    "generate_scan_pattern",
    "overlap_ratio",
    "preprocess_measured",
    "read_array",
    "reconstruct",
    "simulate_measurements",
    "tukey_window_2d",
    "write_array",
]
