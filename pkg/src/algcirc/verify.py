"""Re-checking saved artifacts against independent computations."""

from __future__ import annotations

from pathlib import Path

from .circuit import parse_circuit
from .det_embed import DET, parse_projection
from .errors import BudgetExceeded, CircuitSyntaxError
from .families import DECLARED, FamilyDescriptor, check_params, family_oracle, gen_family
from .field import field_from_spec
from .linalg import det_bareiss
from .matrices import evaluate_matrix
from .perm_embed import per_at_points
from .poly import expand, parse_polynomial
from .rng import SplitMix64

SYMBOLIC_SIDE = 14


def _random_points(pm, count: int, seed: int):
    f = pm.field
    rng = SplitMix64(seed)
    span = f.characteristic or 1 << 20
    return [{v: f.coerce(rng.below(span)) for v in pm.variables} for _ in range(count)]


def _values_at(pm, points):
    f = pm.field
    if pm.identity == DET:
        return [det_bareiss(evaluate_matrix(pm.entries, pt, f), f) for pt in points]
    return per_at_points(pm.entries, points, f)


def verify_projection(text: str, seed: int = 0, budget: int = 10**6, points: int = 20):
    pm = parse_projection(text)
    rows = [("identity", pm.identity), ("side", pm.side)]
    mode = "random points"
    if pm.side <= SYMBOLIC_SIDE:
        try:
            ok = pm.compute(budget=budget) == pm.target
            mode = "symbolic"
        except BudgetExceeded:
            pass
    if mode == "random points":
        ok = True
    pts = _random_points(pm, points, seed)
    vals = _values_at(pm, pts)
    witness = None
    for pt, v in zip(pts, vals):
        if v != pm.target.evaluate(pt).value:
            ok = False
            witness = pt
            break
    rows.append(("mode", mode))
    if not ok and witness is not None:
        f = pm.field
        rows.append(("witness", " ".join(f"{k}={f.format(x)}" for k, x in sorted(witness.items()))))
    return ok, rows


def _parse_sidecar(text: str):
    info = {}
    oracle = None
    lines = text.splitlines()
    k = 0
    while k < len(lines):
        line = lines[k].strip()
        k += 1
        if not line:
            continue
        if line == "oracle":
            body = []
            while k < len(lines) and lines[k].strip() != "end":
                body.append(lines[k])
                k += 1
            k += 1
            oracle = "\n".join(body)
            continue
        key, _, value = line.partition(" ")
        info[key] = value
    if "family" not in info or "field" not in info:
        raise CircuitSyntaxError(1, "family sidecar needs family and field lines")
    params = {}
    for item in info.get("params", "").split():
        name, _, v = item.partition("=")
        params[name] = int(v)
    return info, params, oracle


def verify_family(text: str, path: str, seed: int = 0, budget: int = 10**6):
    info, params, oracle_text = _parse_sidecar(text)
    name = info["family"]
    f = field_from_spec(info["field"])
    params = check_params(name, params)
    circuit_path = Path(path[: -len(".meta")]) if path.endswith(".meta") else None
    if circuit_path is not None and circuit_path.exists():
        c = parse_circuit(circuit_path.read_text())
        source = "circuit file"
    else:
        c = gen_family(name, params, f).construction
        source = "regenerated"
    desc = FamilyDescriptor(name, params, f, c, DECLARED[name])
    ok, mode = desc.verify(seed=seed, budget=budget)
    rows = [("family", name), ("circuit", source), ("mode", mode)]
    if oracle_text is not None:
        recorded = parse_polynomial(oracle_text, f)
        try:
            same = expand(c, budget=budget) == recorded
        except BudgetExceeded:
            same = family_oracle(name, params, f) == recorded
        rows.append(("recorded_oracle", "match" if same else "mismatch"))
        ok = ok and same
    return ok, rows
