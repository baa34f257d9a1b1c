"""Numerical toolkit for variation and jump inequalities of Calderón-Zygmund operators."""
from .grid import Grid, SampledFunction, TestFamily, make_test_function, l2_norm
from .kernels import Kernel, FIXTURES, kernel_from_config, dini_norm, omega1
from .sequences import (SampleSequence, lambda_jump_count, q_variation, sup_lambda_jump,
                        short_variation)

__version__ = "0.1.0"

__all__ = [
    "Grid", "SampledFunction", "TestFamily", "make_test_function", "l2_norm",
    "Kernel", "FIXTURES", "kernel_from_config", "dini_norm", "omega1",
    "SampleSequence", "lambda_jump_count", "q_variation", "sup_lambda_jump",
    "short_variation",
]
