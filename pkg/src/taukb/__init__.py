"""taukb: implication knowledge base for the tau-cover enhanced Scheepers
diagram, with a desk-scale gamma-array diagonalization lab."""

from .core import (
    Atom,
    CardinalAtom,
    CardinalExpr,
    CoverKind,
    CoverVariant,
    Judgment,
    Max,
    Min,
    ProofTrace,
    Property,
    SelectorKind,
    Verdict,
    normalize_expr,
    parse_expr,
    property_by_serial,
    render_expr,
)
from .engine import (
    ClosureResult,
    Contradiction,
    KnowledgeBase,
    build_knowledge_base,
    close,
    derive_cardinality,
    diff,
    explain,
    load_default_kb,
    query,
    replay_all,
)
from .formats import (
    FactFile,
    ReferenceTable,
    list_problems,
    load_default_facts,
    load_reference_table,
    parse_facts,
    parse_table,
    render_facts,
    render_table,
)
from .gamma import (
    Diagonalizer,
    GammaArray,
    GammaFamily,
    Selector,
    finitely_tau_diagonalizable,
    is_gamma_array,
    o_diagonalizable,
    random_gamma_family,
    verify_selector,
)
from .models import (
    Model,
    ModelRegistry,
    ZfcConstraint,
    eval_expr,
    load_default_registry,
    validate_model,
)

__version__ = "0.1.0"
