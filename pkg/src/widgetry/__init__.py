"""Exact-arithmetic toolkit for widgets: systems of point pairs.

A widget is an ordered list of n pairs of points in d-dimensional space
over an exact field (rationals or GF(p)). The package decides legality
(every section spans at most n-1 dimensions), fullness (all 2n points span
at least n), and validity (both), searches for legal subwidgets, and runs
a constructive perturbation procedure that extracts one from any valid
widget — emitting certificates that are independently re-checkable by
rank computations alone.
"""

from .errors import (ConfigError, ContractError, FieldTooSmallError,
                     GenerationError, InputError, WidgetParseError)
from .fields import RATIONAL, PrimeField, RationalField
from .model import (MINUS, PLUS, SKIP, VALID, NOT_FULL, NOT_LEGAL,
                    LEGAL_SUBWIDGET_FOUND, THEOREM_VIOLATION, Certificate,
                    Relabeling, Widget, apply_linear, maximal_sections,
                    parse_widget, relabel, section_points, serialize_widget,
                    subwidget)
from .linalg import PointMatrix, in_span, incremental_rank_probe, span_dim
from .checkers import (check_corollary_biconditional, find_legal_subwidget,
                       find_legal_not_full_subwidget, is_full, is_legal,
                       is_legal_subwidget, is_valid)
from .engine import (ProofStep, deleted_positive_section,
                     extract_legal_subwidget, k_statistic, perturb,
                     positive_section, reduce_k_step, replay_trace)
from .generators import (FuzzConfig, GenConfig, census_gf,
                         enumerate_widgets_gf, fuzz_theorem, generate)

__version__ = "0.1.0"
