"""CPLEX-LP text subset: Minimize / Subject To / Bounds / Generals / Binary / End."""

from __future__ import annotations

import math
import re

from .model import MilpModel, Sense

_SECTIONS = {
    "minimize": "obj", "minimise": "obj", "minimum": "obj", "min": "obj",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "bound": "bounds",
    "generals": "gen", "general": "gen", "gen": "gen",
    "binary": "bin", "binaries": "bin", "bin": "bin",
    "end": "end",
}
_TERM = re.compile(r"([+-]?)\s*([0-9.eE+-]*[0-9.])?\s*([A-Za-z_][A-Za-z0-9_.\[\]]*)")


def _num(v: float) -> str:
    return f"{v:.12g}"


def _expr(pairs) -> str:
    parts = []
    for name, coef in pairs:
        sign = "-" if coef < 0 or (coef == 0 and math.copysign(1.0, coef) < 0) else "+"
        parts.append(f"{sign} {_num(abs(coef))} {name}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _bound(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return _num(v)


def write_lp_file(model: MilpModel, relax: bool = False) -> str:
    """Deterministic LP text. With ``relax`` the integrality sections are omitted."""
    out = [f"\\ {model.name}", "Minimize"]
    out.append(" obj: " + _expr(zip(model.names, model.obj)) if model.names else " obj:")
    out.append("Subject To")
    for c in model.constraints:
        lhs = _expr((model.names[i], v) for i, v in zip(c.index.tolist(), c.coef.tolist()))
        if not lhs:
            lhs = f"0 {model.names[0]}" if model.names else "0"
        out.append(f" {c.name}: {lhs} {c.sense.value} {_num(c.rhs)}")
    binary = [not relax and model.integer[i] and model.lb[i] == 0.0 and model.ub[i] == 1.0
              for i in range(model.num_vars)]
    out.append("Bounds")
    for i, name in enumerate(model.names):
        if binary[i]:
            continue
        lo, hi = model.lb[i], model.ub[i]
        if lo == -math.inf and hi == math.inf:
            out.append(f" {name} free")
        elif hi == math.inf:
            out.append(f" {name} >= {_bound(lo)}")
        else:
            out.append(f" {_bound(lo)} <= {name} <= {_bound(hi)}")
    if not relax:
        generals = [n for i, n in enumerate(model.names) if model.integer[i] and not binary[i]]
        binaries = [n for i, n in enumerate(model.names) if binary[i]]
        if generals:
            out.append("Generals")
            out.extend(f" {n}" for n in generals)
        if binaries:
            out.append("Binary")
            out.extend(f" {n}" for n in binaries)
    out.append("End")
    return "\n".join(out) + "\n"


def _parse_expr(text: str) -> list[tuple[str, float]]:
    terms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse expression near {text[pos:pos + 20]!r}")
        sign, coef, name = m.groups()
        value = float(coef) if coef else 1.0
        terms.append((name, -value if sign == "-" else value))
        pos = m.end()
    return terms


def _parse_value(token: str) -> float:
    t = token.strip().lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(t)


def parse_lp_file(text: str) -> MilpModel:
    """Parse the subset emitted by :func:`write_lp_file`."""
    model = MilpModel()
    section = None
    order: list[str] = []
    obj: dict[str, float] = {}
    rows = []
    bounds: dict[str, tuple[float, float]] = {}
    integer: set[str] = set()
    binary: set[str] = set()

    def see(name):
        if name not in obj and name not in seen:
            seen.add(name)
            order.append(name)

    seen: set[str] = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            if section is None and len(line) > 2:
                model.name = line[1:].strip()
            continue
        key = line.lower()
        # an indented line is section content even if it spells a keyword
        if key in _SECTIONS and not raw[0].isspace():
            section = _SECTIONS[key]
            continue
        if section == "obj":
            body = line.split(":", 1)[1] if ":" in line else line
            for name, coef in _parse_expr(body):
                see(name)
                obj[name] = obj.get(name, 0.0) + coef
        elif section == "rows":
            name, body = (line.split(":", 1) if ":" in line else (None, line))
            m = re.match(r"(.*?)(<=|>=|=<|=>|=|<|>)\s*(\S+)\s*$", body)
            if not m:
                raise ValueError(f"cannot parse constraint {line!r}")
            terms = _parse_expr(m.group(1))
            for n, _ in terms:
                see(n)
            rows.append((name.strip() if name else None, terms, Sense.parse(m.group(2)),
                         _parse_value(m.group(3))))
        elif section == "bounds":
            toks = line.split()
            if len(toks) == 2 and toks[1].lower() == "free":
                see(toks[0])
                bounds[toks[0]] = (-math.inf, math.inf)
            elif len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
                see(toks[2])
                bounds[toks[2]] = (_parse_value(toks[0]), _parse_value(toks[4]))
            elif len(toks) == 3 and toks[1] in (">=", "<=", "="):
                see(toks[0])
                lo, hi = bounds.get(toks[0], (0.0, math.inf))
                v = _parse_value(toks[2])
                if toks[1] == ">=":
                    lo = v
                elif toks[1] == "<=":
                    hi = v
                else:
                    lo = hi = v
                bounds[toks[0]] = (lo, hi)
            else:
                raise ValueError(f"cannot parse bound {line!r}")
        elif section in ("gen", "bin"):
            for name in line.split():
                see(name)
                (integer if section == "gen" else binary).add(name)
        elif section == "end":
            break
        else:
            raise ValueError(f"content outside any section: {line!r}")
    for name in order:
        lo, hi = bounds.get(name, (0.0, math.inf))
        if name in binary:
            lo, hi = 0.0, 1.0
        model.add_var(name, lo, hi, name in integer or name in binary, obj.get(name, 0.0))
    for name, terms, sense, rhs in rows:
        coeffs: dict[int, float] = {}
        for n, v in terms:
            i = model.index(n)
            coeffs[i] = coeffs.get(i, 0.0) + v
        model.add_constraint(coeffs, sense, rhs, name)
    return model


def parse_solution(text: str) -> tuple[dict[str, float], float | None]:
    """Lines ``name value``; an optional ``=obj= value`` line carries the objective."""
    values: dict[str, float] = {}
    objective = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) != 2:
            raise ValueError(f"solution line {lineno}: expected 'name value', got {line!r}")
        try:
            v = float(toks[1])
        except ValueError:
            raise ValueError(f"solution line {lineno}: bad value {toks[1]!r}") from None
        if toks[0] == "=obj=":
            objective = v
        else:
            values[toks[0]] = v
    return values, objective
