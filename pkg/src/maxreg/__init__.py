"""Grid laboratory for the uncentered maximal operator on block-decreasing functions."""

from .bdgen import (
    Constant,
    QuasiBall,
    RadialDecreasing,
    Separable,
    Square,
    check_block_decreasing,
    default_corpus,
    generate,
    jump_estimate,
    precise_rep,
)
from .grid import Grid, GridFunction, make_grid, read_csv, sample, write_csv
from .maxop import (
    ExtensionMismatchError,
    MaxField,
    NotBlockDecreasingError,
    ball_average,
    enk_classify,
    ern_classify,
    maximal_at,
    maximal_bd_pruned,
    maximal_brute,
    maximal_centered,
)
from .norms import NormSpec, mu, parse_norm, stencil
from .variation import (
    VariationReport,
    partial_variation,
    variation_1d,
    variation_bd_boundary,
    variation_directional,
)

__version__ = "0.1.0"
