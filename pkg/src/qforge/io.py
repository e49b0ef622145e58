"""JSON/CSV file formats.

Profiles on disk are ``{"categories": [...], "pmf": [...]}`` and counts are
``{"categories": [...], "counts": [...]}``.  Loaded profiles are put in
lexicographic category order so files listing categories differently still
line up.  Every float written out is rounded to 12 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import InvalidProfile
from .optimizer import SolveReport, TradeoffPoint
from .profile import CategoryCounts, Profile
from .simulate import ConvergenceReport, SimulationConfig
from .types_lab import TypeReport

SIG_DIGITS = 12
CURVE_HEADER = ("rho", "risk_bits", "lambda")


def fmt(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def round_sig(x: float) -> float | None:
    """Round to 12 significant digits; non-finite values become None (JSON null)."""
    if not math.isfinite(x):
        return None
    return float(fmt(x))


def _clean(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _clean(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _read_json(source: str | Path) -> Any:
    try:
        with open(source, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidProfile(f"{source}: malformed JSON ({exc})") from exc


def profile_from_dict(data: Any) -> Profile:
    if not isinstance(data, dict) or "categories" not in data or "pmf" not in data:
        raise InvalidProfile('a profile needs "categories" and "pmf" fields')
    cats, pmf = data["categories"], data["pmf"]
    if not isinstance(cats, list) or not isinstance(pmf, list):
        raise InvalidProfile('"categories" and "pmf" must be arrays')
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in pmf):
        raise InvalidProfile('"pmf" entries must be numbers')
    return Profile(cats, pmf).canonical()


def profile_to_dict(p: Profile) -> dict:
    return {"categories": list(p.categories), "pmf": list(p.pmf)}


def load_profile(path: str | Path) -> Profile:
    return profile_from_dict(_read_json(path))


def save_profile(p: Profile, path: str | Path) -> None:
    Path(path).write_text(dumps(profile_to_dict(p)), encoding="utf-8")


def counts_from_dict(data: Any) -> CategoryCounts:
    if not isinstance(data, dict) or "categories" not in data or "counts" not in data:
        raise InvalidProfile('counts need "categories" and "counts" fields')
    cats, counts = data["categories"], data["counts"]
    if not isinstance(cats, list) or not isinstance(counts, list):
        raise InvalidProfile('"categories" and "counts" must be arrays')
    if any(isinstance(c, bool) or not isinstance(c, int) for c in counts):
        raise InvalidProfile('"counts" entries must be integers')
    if len(counts) != len(cats):
        raise InvalidProfile(f"{len(counts)} counts for {len(cats)} categories")
    order = sorted(range(len(cats)), key=lambda i: str(cats[i]))
    return CategoryCounts([cats[i] for i in order], [counts[i] for i in order])


def load_counts(path: str | Path) -> CategoryCounts:
    return counts_from_dict(_read_json(path))


def align(*profiles: Profile) -> list[Profile]:
    """Express profiles over the sorted union of their categories, zero-filling gaps."""
    union = sorted({c for p in profiles for c in p.categories})
    return [p.aligned_to(union) for p in profiles]


def _load_profile_ref(value: Any, base: Path) -> Profile:
    if isinstance(value, str):
        return load_profile(base / value)
    return profile_from_dict(value)


def load_simulation(path: str | Path) -> tuple[SimulationConfig | None, dict]:
    """Parse a simulation config file.

    Fields: ``user`` and optionally ``forged`` and ``population``, each an
    inline profile object or a path relative to the config file; ``rho``,
    ``total_queries``, ``seed`` and optional ``exact_forgery``.  Returns the
    config (None when ``forged`` is absent and must be solved for) plus the
    loaded profiles keyed by field name, all aligned to one category list.
    """
    path = Path(path)
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InvalidProfile("simulation config must be a JSON object")
    missing = [k for k in ("user", "rho", "total_queries", "seed") if k not in data]
    if missing:
        raise InvalidProfile(f"simulation config lacks fields {missing}")
    loaded = {"user": _load_profile_ref(data["user"], path.parent)}
    for key in ("forged", "population"):
        if data.get(key) is not None:
            loaded[key] = _load_profile_ref(data[key], path.parent)
    aligned = dict(zip(loaded, align(*loaded.values())))

    rho, total, seed = data["rho"], data["total_queries"], data["seed"]
    if isinstance(rho, bool) or not isinstance(rho, (int, float)):
        raise InvalidProfile('"rho" must be a number')
    for name, v in (("total_queries", total), ("seed", seed)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise InvalidProfile(f'"{name}" must be a nonnegative integer')
    exact = data.get("exact_forgery", False)
    if not isinstance(exact, bool):
        raise InvalidProfile('"exact_forgery" must be a boolean')

    settings = {"rho": float(rho), "total_queries": total, "seed": seed, "exact_forgery": exact}
    cfg = None
    if "forged" in aligned:
        cfg = SimulationConfig(aligned["user"], aligned["forged"], **settings)
    return cfg, {**aligned, **settings}


def point_to_dict(point: TradeoffPoint, report: SolveReport | None = None) -> dict:
    out = {
        "categories": list(point.r_opt.categories),
        "rho": point.rho,
        "risk_bits": point.risk,
        "lambda": point.lam,
        "r_opt": list(point.r_opt.pmf),
        "s_opt": list(point.s_opt.pmf),
        "solver_iters": point.solver_iters,
    }
    if report is not None:
        out["kkt"] = {
            "kkt_stationarity_residual": report.kkt_stationarity_residual,
            "primal_feasibility_residual": report.primal_feasibility_residual,
            "complementary_slackness_residual": report.complementary_slackness_residual,
            "oracle_gap_bits": report.oracle_gap_bits,
            "certified": report.certified,
        }
    return out


def curve_to_csv(points: Iterable[TradeoffPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    for pt in points:
        writer.writerow([fmt(pt.rho), fmt(pt.risk), fmt(pt.lam)])
    return buf.getvalue()


def read_curve_csv(text: str) -> list[tuple[float, float, float]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CURVE_HEADER:
        raise ValueError("not a tradeoff curve CSV")
    return [tuple(float(v) for v in row) for row in rows[1:]]


def report_to_dict(rep: ConvergenceReport) -> dict:
    return {
        "n_observed": rep.n_observed,
        "categories": list(rep.empirical.categories),
        "empirical": list(rep.empirical.pmf),
        "div_to_apparent": rep.div_to_apparent,
        "measured_risk": rep.measured_risk,
    }


def type_report_to_dict(rep: TypeReport) -> dict:
    return {
        "counts": list(rep.counts),
        "t": list(rep.t.pmf),
        "exact_log2_class_size": rep.exact_log2_class_size,
        "entropy_approx": rep.entropy_approx,
        "probability": rep.probability,
        "exact_log2_prob": rep.exact_log2_prob,
        "divergence_exponent": rep.divergence_exponent,
        "gap_per_symbol": rep.gap_per_symbol,
    }


def type_reports_to_csv(reports: Sequence[TypeReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["counts", "probability", "exact_log2_class_size", "entropy_approx",
                     "exact_log2_prob", "divergence_exponent", "gap_per_symbol"])
    for rep in reports:
        writer.writerow([
            " ".join(str(c) for c in rep.counts),
            fmt(rep.probability),
            fmt(rep.exact_log2_class_size),
            fmt(rep.entropy_approx),
            fmt(rep.exact_log2_prob),
            fmt(rep.divergence_exponent),
            fmt(rep.gap_per_symbol),
        ])
    return buf.getvalue()
