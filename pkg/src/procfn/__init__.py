"""Classical deterministic process functions on closed time-like curves.

Validate candidate processes against the unique-fixed-point law, analyse
their signalling structure, classify them up to relabelling, and enumerate
every valid binary process on up to four regions.
"""
from procfn.core import (
    DenseFunction,
    MalformedStateError,
    OwnOutputDependenceError,
    ProcessShape,
    ProcessTable,
    ShapeMismatchError,
    apply,
    binary_operation,
    fixed_points,
    loop_map,
    rank,
    unrank,
)

__version__ = "0.1.0"
