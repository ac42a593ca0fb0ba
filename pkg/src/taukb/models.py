"""Registry of set-theoretic models used as the consistency oracle.

A model assigns each cardinal characteristic atom a small integer level;
only the relative order of levels matters.  Level 1 is aleph1 and the top
level of a model is the continuum.  The registry answers one question: is
x < y consistent, i.e. does some registered model evaluate x strictly below
y?  Model values are shipped data curated from standard references; the
validation pass checks them against a list of ZFC-provable inequalities so
that transcription errors fail loudly.

A model may omit atoms whose value in it is not settled (od in most classical
models); constraints and queries touching a missing atom simply skip that
model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Atom,
    CardinalAtom,
    CardinalExpr,
    MalformedExpr,
    Min,
    TaukbError,
    atom,
    normalize_expr,
    parse_expr,
    render_expr,
)


class UnknownAtom(TaukbError):
    """Expression references an atom the model does not assign."""


class ModelParseError(TaukbError):
    def __init__(self, errors: list[tuple[int, int, str]]):
        self.errors = errors
        super().__init__("; ".join(f"line {l}, col {c}: {m}" for l, c, m in errors))


@dataclass(frozen=True)
class Model:
    name: str
    levels: tuple[tuple[CardinalAtom, int], ...]  # sorted by atom name
    citation: str

    def level(self, a: CardinalAtom) -> int:
        for k, v in self.levels:
            if k is a:
                return v
        raise UnknownAtom(f"model {self.name!r} assigns no level to {a}")

    def has(self, a: CardinalAtom) -> bool:
        return any(k is a for k, _ in self.levels)


def make_model(name: str, levels: dict[CardinalAtom, int], citation: str) -> Model:
    items = tuple(sorted(levels.items(), key=lambda kv: kv[0].value))
    return Model(name, items, citation)


@dataclass(frozen=True)
class ZfcConstraint:
    """lhs <= rhs holds in every model of ZFC; citation carries the burden."""

    lhs: CardinalExpr
    rhs: CardinalExpr
    citation: str

    def render(self) -> str:
        return f"{render_expr(self.lhs)} <= {render_expr(self.rhs)}"


@dataclass(frozen=True)
class Violation:
    model: str
    description: str
    lhs_level: int
    rhs_level: int


def eval_expr(e: CardinalExpr, model: Model) -> int:
    """Evaluate an expression to the model's level; min/max are pointwise."""
    if isinstance(e, Atom):
        return model.level(e.atom)
    vals = [eval_expr(c, model) for c in e.args]
    return min(vals) if isinstance(e, Min) else max(vals)


def _mentioned_atoms(e: CardinalExpr) -> set[CardinalAtom]:
    if isinstance(e, Atom):
        return {e.atom}
    out: set[CardinalAtom] = set()
    for c in e.args:
        out |= _mentioned_atoms(c)
    return out


def constraint_list() -> list[ZfcConstraint]:
    """The shipped ZFC inequality list used to vet every registered model."""
    def c(lhs: str, rhs: str, cite: str) -> ZfcConstraint:
        return ZfcConstraint(parse_expr(lhs), parse_expr(rhs), cite)

    out = [
        c("p", "t", "van Douwen diagram"),
        c("t", "h", "Balcar-Pelant-Simon"),
        c("h", "min{s,b}", "Balcar-Pelant-Simon; Handbook of Set Theory survey"),
        c("b", "d", "folklore"),
        c("cov(M)", "d", "Cichon diagram"),
        c("cov(M)", "od", "o-diagonalization number bounds"),
        c("od", "d", "o-diagonalization number bounds"),
        c("g", "d", "Handbook of Set Theory survey"),
        # t <= add(M) <= cov(M); guards the registry against models that would
        # wrongly settle open table cells comparing t with cov(M).
        c("t", "cov(M)", "Piotrowski-Szymanski, via add(M)"),
    ]
    for a in CardinalAtom:
        if a is not CardinalAtom.ALEPH1:
            out.append(ZfcConstraint(Atom(CardinalAtom.ALEPH1), Atom(a), "definition"))
        if a is not CardinalAtom.C:
            out.append(ZfcConstraint(Atom(a), Atom(CardinalAtom.C), "definition"))
    return out


DEFAULT_CONSTRAINTS = constraint_list()


def validate_model(model: Model, constraints: list[ZfcConstraint] | None = None) -> list[Violation]:
    """All constraint violations; empty means the model is acceptable.

    Constraints touching an unassigned atom are skipped.  Two structural
    checks apply on top of the constraint list: aleph1 sits at level 1 and c
    at the model's maximum level.
    """
    if constraints is None:
        constraints = DEFAULT_CONSTRAINTS
    out: list[Violation] = []
    if model.has(CardinalAtom.ALEPH1) and model.level(CardinalAtom.ALEPH1) != 1:
        out.append(Violation(model.name, "aleph1 must sit at level 1",
                             model.level(CardinalAtom.ALEPH1), 1))
    top = max((v for _, v in model.levels), default=1)
    if model.has(CardinalAtom.C) and model.level(CardinalAtom.C) != top:
        out.append(Violation(model.name, "c must sit at the maximum level",
                             model.level(CardinalAtom.C), top))
    for con in constraints:
        needed = _mentioned_atoms(con.lhs) | _mentioned_atoms(con.rhs)
        if not all(model.has(a) for a in needed):
            continue
        lv, rv = eval_expr(con.lhs, model), eval_expr(con.rhs, model)
        if lv > rv:
            out.append(Violation(model.name, f"violates {con.render()} ({con.citation})", lv, rv))
    return out


class ModelRegistry:
    """Ordered collection of validated models; immutable once built."""

    def __init__(self, models: list[Model], constraints: list[ZfcConstraint] | None = None):
        self.models = tuple(models)
        self.constraints = tuple(constraints if constraints is not None else DEFAULT_CONSTRAINTS)
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise TaukbError(f"duplicate model names in registry: {names}")
        self._less_cache: dict[tuple[CardinalExpr, CardinalExpr], str | None] = {}

    def __iter__(self):
        return iter(self.models)

    def get(self, name: str) -> Model:
        for m in self.models:
            if m.name == name:
                return m
        raise TaukbError(f"no registered model named {name!r}")

    def validate(self) -> dict[str, list[Violation]]:
        return {m.name: validate_model(m, list(self.constraints)) for m in self.models}

    def consistently_less(self, x: CardinalExpr, y: CardinalExpr) -> str | None:
        """Name of the first registered model with eval(x) < eval(y), if any.

        Models missing an atom of x or y are unusable for the query.
        """
        x = normalize_expr(x)
        y = normalize_expr(y)
        key = (x, y)
        if key in self._less_cache:
            return self._less_cache[key]
        found = None
        for m in self.models:
            try:
                if eval_expr(x, m) < eval_expr(y, m):
                    found = m.name
                    break
            except UnknownAtom:
                continue
        self._less_cache[key] = found
        return found


# ---------------------------------------------------------------------------
# Registry file format: blank-line separated blocks of
#   model <name> cite "<citation>"
#   level <atom> <integer>
# with '#' comments.


def parse_models(text: str) -> list[Model]:
    errors: list[tuple[int, int, str]] = []
    models: list[Model] = []
    name: str | None = None
    citation = ""
    levels: dict[CardinalAtom, int] = {}

    def flush(lineno: int) -> None:
        nonlocal name, citation, levels
        if name is None:
            return
        if not levels:
            errors.append((lineno, 1, f"model {name!r} has no level lines"))
        models.append(make_model(name, levels, citation))
        name, citation, levels = None, "", {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            flush(lineno)
            continue
        parts = line.split()
        if parts[0] == "model":
            flush(lineno)
            rest = line[len("model"):].strip()
            fields = rest.split(None, 1)
            if len(fields) != 2 or not fields[1].startswith("cite"):
                errors.append((lineno, 1, "expected: model <name> cite \"<citation>\""))
                continue
            name = fields[0]
            cite_part = fields[1][len("cite"):].strip()
            if not (cite_part.startswith('"') and cite_part.endswith('"') and len(cite_part) >= 2):
                errors.append((lineno, line.find("cite") + 1, "citation must be double-quoted"))
                citation = ""
            else:
                citation = cite_part[1:-1]
        elif parts[0] == "level":
            if name is None:
                errors.append((lineno, 1, "level line outside a model block"))
                continue
            if len(parts) != 3:
                errors.append((lineno, 1, "expected: level <atom> <integer>"))
                continue
            try:
                a = atom(parts[1]).atom
            except MalformedExpr:
                errors.append((lineno, len("level ") + 1, f"unknown atom {parts[1]!r}"))
                continue
            try:
                lvl = int(parts[2])
            except ValueError:
                errors.append((lineno, 1, f"level must be an integer, got {parts[2]!r}"))
                continue
            if lvl < 1:
                errors.append((lineno, 1, "levels start at 1"))
                continue
            levels[a] = lvl
        else:
            errors.append((lineno, 1, f"unknown directive {parts[0]!r}"))
    flush(len(text.splitlines()) + 1)
    if errors:
        raise ModelParseError(errors)
    return models


def render_models(models: list[Model]) -> str:
    blocks = []
    for m in models:
        lines = [f'model {m.name} cite "{m.citation}"']
        lines += [f"level {a.value if a is not CardinalAtom.COV_M else 'covM'} {v}" for a, v in m.levels]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def load_registry(text: str, constraints: list[ZfcConstraint] | None = None,
                  require_valid: bool = True) -> ModelRegistry:
    registry = ModelRegistry(parse_models(text), constraints)
    if require_valid:
        bad = {k: v for k, v in registry.validate().items() if v}
        if bad:
            msgs = "; ".join(f"{k}: {v[0].description}" for k, v in bad.items())
            raise TaukbError(f"registry failed validation: {msgs}")
    return registry


def load_default_registry() -> ModelRegistry:
    from importlib.resources import files

    text = files("taukb.data").joinpath("models.txt").read_text(encoding="utf-8")
    return load_registry(text)
