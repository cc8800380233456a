"""Ground answer-set programs compiled to tight ordered completion."""

from .parser import parse_program, render_program
from .program import Program, Rule
from .toc import toc_module, toc_program

__version__ = "0.1.0"

__all__ = ["parse_program", "render_program", "Program", "Rule",
           "toc_module", "toc_program", "__version__"]
