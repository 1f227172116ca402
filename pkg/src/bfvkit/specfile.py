"""Run-description files: a line-oriented key = value format.

A run file names a target system, an ordered stage list and the numeric
knobs of the pipeline.  The format is deliberately small: comments with
``#``, ``[section]`` headers, scalar values (quoted strings, integers,
floats), lists of quoted strings, and two special section families.  A
``[system]`` section defines a constraint system inline on the standard
q/p chart, with optional ``[tensor.X]`` sections holding sparse closure
tensors as ``i,j,k: value`` lines.  A ``[samples]`` section carries a
plain numeric table, one frame point per row in packed coordinate order.

Errors never escape one at a time: the parser collects every problem it
can locate and raises a single SpecError listing them with line and
column numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .bfv import ConstraintSystem
from .galg import ParseError
from .phase import PhaseChart

__all__ = [
    "STAGES", "STAGE_DEPS", "RunSpec", "SpecError", "parse_spec",
    "render_system", "load_spec",
]

STAGES = ("validate", "bfv", "double", "cohomology", "quantize", "gravity")

# a stage may only appear after the stage whose data it consumes
STAGE_DEPS = {"double": "bfv", "cohomology": "bfv", "quantize": "double"}

TENSOR_SHAPES = {
    "f": ("n1", "n1", "n1"),
    "h": ("n2", "n2", "n2"),
    "m": ("n1", "n2", "n1"),
    "g": ("n1", "n2", "n2"),
}

# packed frame-point layout, the documented column order of [samples]
SAMPLE_COLUMNS = 60


class SpecError(ValueError):
    """All located problems of one parse, line and column are 1-based."""

    def __init__(self, errors: List[Tuple[int, int, str]]):
        self.errors = list(errors)
        super().__init__("\n".join(
            "line %d, col %d: %s" % (ln, col, msg) for ln, col, msg in self.errors))


@dataclass
class RunSpec:
    """A fully resolved run description."""

    target: str
    stages: List[str]
    system: Optional[ConstraintSystem] = None
    model: Optional[str] = None
    max_degree: int = 4
    tol: float = 1e-8
    seed: int = 0
    steps: int = 1000
    flow_samples: int = 100
    samples: int = 20
    out: Optional[str] = None
    table: Optional[List[List[float]]] = None


_RUN_KEYS = {
    "target": str, "stages": list, "model": str, "max_degree": int,
    "tol": float, "seed": int, "steps": int, "flow_samples": int,
    "samples": int, "out": str,
}
_SYSTEM_KEYS = {"name": str, "pairs": int, "phi": list, "psi": list}


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def _parse_scalar(raw: str):
    """Value of a key = value line; returns (value, err_msg)."""
    s = raw.strip()
    if not s:
        return None, "missing value"
    if s.startswith('"'):
        if not s.endswith('"') or len(s) < 2:
            return None, "unterminated string"
        return s[1:-1], None
    if s.startswith("["):
        if not s.endswith("]"):
            return None, "unterminated list"
        inner = s[1:-1].strip()
        if not inner:
            return [], None
        items = []
        for part in inner.split(","):
            part = part.strip()
            if not (part.startswith('"') and part.endswith('"') and len(part) >= 2):
                return None, "list items must be quoted strings"
            items.append(part[1:-1])
        return items, None
    try:
        return int(s), None
    except ValueError:
        pass
    try:
        return float(s), None
    except ValueError:
        return None, "unrecognised value %r" % s


def _parse_fraction(s: str):
    try:
        return Fraction(s.strip()), None
    except (ValueError, ZeroDivisionError):
        return None, "bad rational %r" % s.strip()


def parse_spec(text: str) -> RunSpec:
    """Parse and resolve a run description, or raise SpecError.

    Resolution covers stage ordering, registry membership of the
    target, inline-system assembly with tensor shape checks, and the
    sample-table column count.
    """
    errors: List[Tuple[int, int, str]] = []
    run: Dict[str, object] = {}
    system: Dict[str, object] = {}
    tensors: Dict[str, Dict[Tuple[int, int, int], Fraction]] = {}
    tensor_spots: Dict[str, Tuple[int, int]] = {}
    table: List[List[float]] = []
    section = "run"
    key_lines: Dict[Tuple[str, str], int] = {}

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        stripped = line.strip()
        col = line.index(stripped[0]) + 1

        if stripped.startswith("["):
            if not stripped.endswith("]"):
                errors.append((ln, col, "unterminated section header"))
                continue
            name = stripped[1:-1].strip()
            if name == "run" or name == "system" or name == "samples":
                section = name
            elif name.startswith("tensor."):
                t = name[len("tensor."):]
                if t not in TENSOR_SHAPES:
                    errors.append((ln, col, "unknown tensor %r" % t))
                    section = "ignore"
                else:
                    section = name
                    tensors.setdefault(t, {})
            else:
                errors.append((ln, col, "unknown section %r" % name))
                section = "ignore"
            continue

        if section == "ignore":
            continue

        if section == "samples":
            try:
                row = [float(tok) for tok in stripped.split()]
            except ValueError:
                errors.append((ln, col, "sample rows must be numbers"))
                continue
            if len(row) != SAMPLE_COLUMNS:
                errors.append((ln, col, "sample row has %d columns, expected %d"
                               % (len(row), SAMPLE_COLUMNS)))
                continue
            table.append(row)
            continue

        if section.startswith("tensor."):
            tname = section[len("tensor."):]
            if ":" not in stripped:
                errors.append((ln, col, "tensor entries use i,j,k: value"))
                continue
            left, right = stripped.split(":", 1)
            parts = [p.strip() for p in left.split(",")]
            if len(parts) != 3 or not all(p.lstrip("-").isdigit() for p in parts):
                errors.append((ln, col, "bad tensor index %r" % left.strip()))
                continue
            idx = tuple(int(p) for p in parts)
            val, err = _parse_fraction(right)
            if err:
                errors.append((ln, line.index(":") + 2, err))
                continue
            if idx in tensors[tname]:
                errors.append((ln, col, "duplicate tensor entry %r" % (idx,)))
                continue
            tensors[tname][idx] = val
            tensor_spots.setdefault(tname, (ln, col))
            continue

        # key = value sections
        if "=" not in stripped:
            errors.append((ln, col, "expected key = value"))
            continue
        key, raw_val = (part.strip() for part in stripped.split("=", 1))
        allowed = _RUN_KEYS if section == "run" else _SYSTEM_KEYS
        if key not in allowed:
            errors.append((ln, col, "unknown key %r" % key))
            continue
        if (section, key) in key_lines:
            errors.append((ln, col, "duplicate key %r (first at line %d)"
                           % (key, key_lines[(section, key)])))
            continue
        key_lines[(section, key)] = ln
        val, err = _parse_scalar(raw_val)
        if err:
            errors.append((ln, line.index("=") + 2, err))
            continue
        want = allowed[key]
        if want is float and isinstance(val, int):
            val = float(val)
        if not isinstance(val, want):
            errors.append((ln, col, "key %r expects %s" % (key, want.__name__)))
            continue
        (run if section == "run" else system)[key] = val

    spec = _resolve(run, system, tensors, tensor_spots, table, errors)
    if errors:
        raise SpecError(errors)
    return spec


def _resolve(run, system, tensors, tensor_spots, table, errors) -> Optional[RunSpec]:
    from .registry import REGISTRY

    target = run.get("target")
    if target is None:
        errors.append((1, 1, "missing required key 'target'"))
    stages = run.get("stages")
    if stages is None:
        errors.append((1, 1, "missing required key 'stages'"))
    else:
        seen = []
        for st in stages:
            if st not in STAGES:
                errors.append((1, 1, "unknown stage %r" % st))
                continue
            if st in seen:
                errors.append((1, 1, "stage %r listed twice" % st))
                continue
            dep = STAGE_DEPS.get(st)
            if dep is not None and dep not in seen:
                errors.append((1, 1, "stage %r requires %r earlier in the list"
                               % (st, dep)))
            seen.append(st)

    sys_obj = None
    if target == "inline":
        sys_obj = _build_inline(system, tensors, tensor_spots, errors)
    elif target is not None and target not in REGISTRY:
        errors.append((1, 1, "unknown target %r; registry has %s"
                       % (target, ", ".join(sorted(REGISTRY)))))
    if errors:
        return None
    return RunSpec(
        target=target,
        stages=list(stages),
        system=sys_obj,
        model=run.get("model"),
        max_degree=run.get("max_degree", 4),
        tol=run.get("tol", 1e-8),
        seed=run.get("seed", 0),
        steps=run.get("steps", 1000),
        flow_samples=run.get("flow_samples", 100),
        samples=run.get("samples", 20),
        out=run.get("out"),
        table=table or None,
    )


def _build_inline(system, tensors, tensor_spots, errors) -> Optional[ConstraintSystem]:
    pairs = system.get("pairs")
    if not isinstance(pairs, int) or pairs < 1:
        errors.append((1, 1, "[system] needs pairs >= 1"))
        return None
    phi_src = system.get("phi") or []
    psi_src = system.get("psi") or []
    if not phi_src:
        errors.append((1, 1, "[system] needs at least one phi constraint"))
        return None
    chart = PhaseChart.build(
        [(("q%d" % (i + 1), 0), ("p%d" % (i + 1), 0)) for i in range(pairs)])
    al = chart.alg

    def parse_family(srcs, label):
        out = []
        for k, src in enumerate(srcs):
            try:
                out.append(al.parse(src))
            except ParseError as e:
                errors.append((1, 1, "%s[%d]: %s" % (label, k, e)))
        return out

    phi = parse_family(phi_src, "phi")
    psi = parse_family(psi_src, "psi")
    n1, n2 = len(phi_src), len(psi_src)
    dims = {"n1": n1, "n2": n2}
    for tname, entries in tensors.items():
        shape = tuple(dims[d] for d in TENSOR_SHAPES[tname])
        for idx in entries:
            if not all(0 <= idx[k] < shape[k] for k in range(3)):
                ln, col = tensor_spots.get(tname, (1, 1))
                errors.append((ln, col, "tensor %s entry %r outside shape %r"
                               % (tname, idx, shape)))
    if errors:
        return None
    return ConstraintSystem(
        name=system.get("name", "inline"),
        chart=chart,
        phi=phi,
        psi=psi,
        f=tensors.get("f", {}),
        h=tensors.get("h", {}),
        g=tensors.get("g", {}),
        m=tensors.get("m", {}),
    )


def render_system(sys: ConstraintSystem) -> str:
    """Inline-section text that parses back to an equal system.

    Only systems on the standard q/p chart can be rendered, which is
    every registry entry except the field-theory ones.
    """
    names = [n for pair in sys.chart.pairs for n in pair]
    expect = ["q%d" % (i + 1) for i in range(len(sys.chart.pairs))] + \
             ["p%d" % (i + 1) for i in range(len(sys.chart.pairs))]
    if sorted(names) != sorted(expect):
        raise ValueError("system is not on the standard q/p chart")
    lines = ["[system]",
             'name = "%s"' % sys.name,
             "pairs = %d" % len(sys.chart.pairs),
             "phi = [%s]" % ", ".join('"%s"' % p.to_text() for p in sys.phi),
             "psi = [%s]" % ", ".join('"%s"' % p.to_text() for p in sys.psi)]
    for tname in ("f", "h", "g", "m"):
        entries = getattr(sys, tname)
        if not entries:
            continue
        lines.append("")
        lines.append("[tensor.%s]" % tname)
        for idx in sorted(entries):
            lines.append("%d,%d,%d: %s" % (idx + (entries[idx],)))
    return "\n".join(lines) + "\n"


def load_spec(path: str) -> RunSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())
