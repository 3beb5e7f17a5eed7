"""
Manifold files: schema, loading and the builtin charts.
"""
import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ValidationError, field_validator, model_validator

from src.errors import ExpressionError, JetEvaluationError, ManifoldFileError
from src.expr import eval_jet, parse
from src.manifold import Chart, sample_points

logger = logging.getLogger('norden-lab.charts')

SYMMETRY_CHECK_POINTS = 16
SYMMETRY_CHECK_SEED = 42
SYMMETRY_CHECK_TOL = 1e-12

FLAT_DOMAIN = (-1.0, 1.0)
CONFORMAL_DOMAIN = (0.2, 0.8)


class ManifoldFile(BaseModel):
    """JSON manifold description; expressions use the chart expression grammar."""
    name: str
    dimension: int
    domain: List[Tuple[float, float]]
    g: List[List[str]]
    J: List[List[str]]

    @field_validator("dimension")
    @classmethod
    def _even_dimension(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError("dimension must be an even integer >= 4")
        return value

    @model_validator(mode="after")
    def _consistent_sizes(self) -> "ManifoldFile":
        dim = self.dimension
        if len(self.domain) != dim:
            raise ValueError(f"domain has {len(self.domain)} intervals, expected {dim}")
        for i, (lo, hi) in enumerate(self.domain):
            if not lo < hi:
                raise ValueError(f"domain[{i}] is empty: [{lo}, {hi}]")
        for label, matrix in (("g", self.g), ("J", self.J)):
            if len(matrix) != dim or any(len(row) != dim for row in matrix):
                raise ValueError(f"{label} must be a {dim}x{dim} array")
        return self


def _location(loc: Sequence[Union[str, int]]) -> str:
    text = ""
    for part in loc:
        text += f"[{part}]" if isinstance(part, int) else (f".{part}" if text else str(part))
    return text


def _parse_matrix(label: str, matrix: List[List[str]], dim: int):
    rows = []
    for i, row in enumerate(matrix):
        parsed = []
        for j, text in enumerate(row):
            try:
                parsed.append(parse(text, dim))
            except ExpressionError as exc:
                raise ManifoldFileError(str(exc), location=f"{label}[{i}][{j}]") from None
        rows.append(tuple(parsed))
    return tuple(rows)


def _check_symmetric_entries(model: ManifoldFile, g_exprs) -> None:
    """g[i][j] and g[j][i] must agree numerically wherever the texts differ."""
    dim = model.dimension
    pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)
             if g_exprs[i][j].to_text() != g_exprs[j][i].to_text()]
    if not pairs:
        return
    for p in sample_points(model.domain, SYMMETRY_CHECK_POINTS, SYMMETRY_CHECK_SEED):
        for i, j in pairs:
            try:
                a = eval_jet(g_exprs[i][j], p, 0).value
                b = eval_jet(g_exprs[j][i], p, 0).value
            except JetEvaluationError as exc:
                raise ManifoldFileError(f"evaluation failed at {p}: {exc}", location=f"g[{i}][{j}]") from None
            if abs(a - b) > SYMMETRY_CHECK_TOL * max(1.0, abs(a)):
                raise ManifoldFileError(
                    f"g[{i}][{j}] = {a!r} but g[{j}][{i}] = {b!r} at {p}", location=f"g[{i}][{j}]")


def chart_from_model(model: ManifoldFile) -> Chart:
    """Parse every expression of a validated file into a Chart."""
    dim = model.dimension
    g_exprs = _parse_matrix("g", model.g, dim)
    j_exprs = _parse_matrix("J", model.J, dim)
    _check_symmetric_entries(model, g_exprs)
    return Chart(model.name, dim // 2, tuple(tuple(d) for d in model.domain), g_exprs, j_exprs)


def load_model(path: Union[str, Path]) -> ManifoldFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ManifoldFileError(f"cannot read file: {exc}", location=str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifoldFileError(f"invalid JSON: {exc.msg}",
                                location=f"{path}:{exc.lineno}:{exc.colno}") from None
    try:
        return ManifoldFile.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = _location(error["loc"]) or str(path)
        raise ManifoldFileError(error["msg"], location=location) from None


def load_chart(path: Union[str, Path]) -> Chart:
    """
    Load and validate a manifold file.

    Raises:
        ManifoldFileError: unreadable file, schema violation or bad expression,
            with a location such as ``g[1][2]``
    """
    chart = chart_from_model(load_model(path))
    logger.info(f"Loaded chart '{chart.name}' (dimension {chart.dim}) from {path}")
    return chart


# -- builtin charts -------------------------------------------------------------

def _standard_J(n: int) -> List[List[str]]:
    """J e_i = e_(n+i), J e_(n+i) = -e_i."""
    dim = 2 * n
    J = [["0"] * dim for _ in range(dim)]
    for i in range(n):
        J[n + i][i] = "1"
        J[i][n + i] = "-1"
    return J


def _diagonal(entries: List[str]) -> List[List[str]]:
    dim = len(entries)
    return [[entries[i] if i == j else "0" for j in range(dim)] for i in range(dim)]


def flat_kahler_file(n: int) -> ManifoldFile:
    """g = diag(I_n, -I_n) with the standard J; a Kaehler Norden chart."""
    dim = 2 * n
    return ManifoldFile(
        name=f"flat_kahler_{dim}",
        dimension=dim,
        domain=[FLAT_DOMAIN] * dim,
        g=_diagonal(["1"] * n + ["-1"] * n),
        J=_standard_J(n),
    )


def conformal_flat_file(n: int, u: str) -> ManifoldFile:
    """
    g = exp(2u) diag(I_n, -I_n) with the standard J.

    Raises:
        ExpressionError: u does not parse in dimension 2n
    """
    dim = 2 * n
    u_text = parse(u, dim).to_text()
    factor = f"exp(2*({u_text}))"
    return ManifoldFile(
        name=f"conformal_flat_{dim}",
        dimension=dim,
        domain=[CONFORMAL_DOMAIN] * dim,
        g=_diagonal([factor] * n + [f"-{factor}"] * n),
        J=_standard_J(n),
    )


def flat_kahler(n: int) -> Chart:
    return chart_from_model(flat_kahler_file(n))


def conformal_flat(n: int, u: str) -> Chart:
    return chart_from_model(conformal_flat_file(n, u))


BUILTINS = ("flat-kahler", "conformal-flat")


def builtin_file(name: str, n: int, u: Optional[str] = None) -> ManifoldFile:
    """ManifoldFile for a builtin chart name."""
    if n not in (2, 3):
        raise ValueError(f"builtin charts support n in (2, 3), got {n}")
    if name == "flat-kahler":
        return flat_kahler_file(n)
    if name == "conformal-flat":
        if not u:
            raise ValueError("conformal-flat needs a conformal factor expression u")
        return conformal_flat_file(n, u)
    raise ValueError(f"unknown builtin '{name}'; choose from {', '.join(BUILTINS)}")


def dump_file(model: ManifoldFile) -> str:
    return json.dumps(model.model_dump(), indent=2)
