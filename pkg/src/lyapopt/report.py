"""The analysis pipeline and its JSON report."""
from __future__ import annotations

import json
import math
import platform
import time
from typing import Callable, Optional

import numpy as np
import scipy

from . import __version__
from .certify import (
    barabanov_norm,
    check_domination_rate,
    check_pinching,
    check_twisting,
    cuneo_potential,
    extremal_residual,
    find_invariant_family,
    find_invariant_multicone,
    norm_equivalence_constant,
    search_backward_noc,
)
from .cocycle import alpha_bounds, almost_multiplicativity_constant, beta_bracket
from .config import SCHEMA_VERSION, AnalysisConfig, check_schema_version
from .errors import InputError, NumericError
from .mather import (
    compare_maximizers,
    entropy_scaling_curve,
    maximizing_orbits,
    optimal_pairs,
    verify_cross_ratio_certificate,
    verify_norm_monotonicity,
)
from .projcone import MulticoneFamily, check_backward_noc, check_forward_noc, check_subshift_noc
from .symbolics import word_str

OK, SKIPPED, FAILED = "ok", "skipped", "failed"


def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(report: dict) -> str:
    # json writes floats with repr(), the shortest string that round-trips
    return json.dumps(_clean(report), indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def loads(text: str) -> dict:
    data = json.loads(text)
    if not isinstance(data, dict) or "schema_version" not in data:
        raise InputError("not an analysis report (missing schema_version)")
    check_schema_version(data["schema_version"], "report")
    return data


class _Pipeline:
    def __init__(self, cfg: AnalysisConfig, timings: bool):
        self.cfg = cfg
        self.p = cfg.parameters
        self.A = cfg.cocycle()
        self.full = self.A.transitions.is_full()
        self.stages: dict = {}
        self.timings = {} if timings else None
        # shared products of the stages
        self.bracket = None
        self.multicone = None
        self.family = None
        self.norm = None
        self.orbits = None

    def stage(self, name: str, fn: Callable[[], dict]) -> None:
        t0 = time.perf_counter()
        try:
            out = fn()
        except (InputError, NumericError) as exc:
            out = {"status": FAILED, "reason": str(exc)}
        out.setdefault("status", OK)
        self.stages[name] = out
        if self.timings is not None:
            self.timings[name] = time.perf_counter() - t0

    @staticmethod
    def skip(reason: str) -> dict:
        return {"status": SKIPPED, "reason": reason}

    # -- stages --------------------------------------------------------------------------

    def brackets(self) -> dict:
        p = self.p
        self.bracket = beta_bracket(self.A, p.L_max, p.n_max)
        alpha = alpha_bounds(self.A, p.L_max)
        kappa = almost_multiplicativity_constant(self.A, p.kappa_length)
        return {"beta": self.bracket.to_dict(), "alpha": alpha.to_dict(),
                "kappa": {"value": kappa, "max_length": p.kappa_length}}

    def domination(self) -> dict:
        p = self.p
        fit = check_domination_rate(self.A, p.n_max)
        out = {"fit": fit.to_dict(), "tolerances": {"search_margin": p.search_margin, "seed_radius": p.seed_radius,
                                                     "seed_length": p.seed_length}}
        supplied = self.cfg.supplied_multicone()
        if supplied is not None:
            if self.full:
                self.multicone = supplied
            else:
                self.family = MulticoneFamily.constant(supplied, self.A.transitions)
            out["source"] = "config"
        else:
            search = (find_invariant_multicone if self.full else find_invariant_family)(
                self.A, p.seed_length, p.seed_radius, p.search_margin)
            out["search"] = search.to_dict()
            out["source"] = "search"
            self.multicone, self.family = search.multicone, search.family
        out["dominated"] = self.multicone is not None or self.family is not None
        out["multicone"] = self.multicone.to_list() if self.multicone is not None else None
        out["family"] = self.family.to_list() if self.family is not None else None
        return out

    def noc(self) -> dict:
        p = self.p
        if self.multicone is None and self.family is None:
            return self.skip("no invariant multicone")
        if self.full:
            fwd = check_forward_noc(self.A, self.multicone, p.noc_margin, p.tol_angle)
            bwd = check_backward_noc(self.A, self.multicone, p.noc_margin, p.tol_angle)
        else:
            res = check_subshift_noc(self.A, self.family, delta=p.noc_margin, tol_angle=p.tol_angle)
            fwd, bwd = res.forward, res.backward
        out = {"subshift": not self.full, "forward": fwd.to_dict(), "backward_source": "complement"}
        if not bwd.holds:
            # complements are only a sufficient test; search the inverse directly
            searched, search = search_backward_noc(self.A, p.seed_length, p.seed_radius, p.search_margin,
                                                   p.noc_margin, p.tol_angle)
            out["backward_complement"] = bwd.to_dict()
            out["backward_search"] = search.to_dict()
            if searched.holds or bwd.status == "false":
                bwd = searched
                out["backward_source"] = "search"
        out["backward"] = bwd.to_dict()
        out["holds"] = fwd.holds and bwd.holds
        out["note"] = "a false verdict means the condition fails for every multicone examined"
        return out

    def typicality(self) -> dict:
        p = self.p
        w = check_pinching(self.A, p.L_max, p.tol_pinch)
        twists = []
        for q in self.cfg.twisting:
            t = check_twisting(self.A, float(q.F), [float(g) for g in q.G], p.L_max, p.tol_angle)
            twists.append({"F": q.F, "G": q.G, "witness": word_str(t) if t is not None else None,
                           "verdict": "witness" if t is not None else "inconclusive"})
        return {"pinching": {"witness": word_str(w) if w is not None else None, "tol_pinch": p.tol_pinch,
                             "L_max": p.L_max},
                "twisting": twists, "tolerances": {"tol_angle": p.tol_angle}}

    def barabanov(self) -> dict:
        p = self.p
        if not self.full:
            return self.skip("extremal norms are only built for the full shift")
        try:
            norm = barabanov_norm(self.A, self.bracket, p.m_vertices, p.barabanov_tol, p.max_iter)
        except InputError as exc:
            return self.skip(str(exc))
        out = {
            "beta_hat": norm.beta_hat,
            "residual": extremal_residual(norm, self.A, p.residual_grid),
            "C": norm_equivalence_constant(norm),
            "converged": norm.converged,
            "iterations": norm.iterations,
            "norm": norm.to_dict(),
            "tolerances": {"tol": p.barabanov_tol, "m_vertices": p.m_vertices, "grid": p.residual_grid},
        }
        if not norm.converged:
            out["status"] = FAILED
            out["reason"] = f"no convergence within {p.max_iter} iterations"
        else:
            self.norm = norm
        return out

    def mather(self) -> dict:
        p = self.p
        self.orbits, value = maximizing_orbits(self.A, p.L_max, p.tie_tol)
        table = entropy_scaling_curve(self.A, self.norm, p.n_list, p.epsilon,
                                      bracket=self.bracket, hereditary=p.hereditary)
        return {
            "maximizing_orbits": [str(c) for c in self.orbits],
            "value": value,
            "filter": "extremal norm" if self.norm is not None else "euclidean",
            "hereditary": p.hereditary,
            "entropy": table.to_dict(),
            "entropy_csv": table.to_csv(),
            "rows_nonincreasing": table.rows_nonincreasing(),
            "tolerances": {"tie_tol": p.tie_tol},
        }

    def certificates(self) -> dict:
        p = self.p
        if self.norm is None or self.multicone is None:
            return self.skip("needs both an extremal norm and an invariant multicone")
        pairs = optimal_pairs(self.A, self.norm, self.orbits, self.multicone, window=p.splitting_window,
                              tol=p.barabanov_tol)
        cert = verify_cross_ratio_certificate(self.A, self.norm, pairs, p.barabanov_tol)
        mono = {str(q.orbit): [verify_norm_monotonicity(self.A, self.norm, q, q.v + t * q.e2)
                               for t in p.monotonicity_steps] for q in pairs}
        return {"pairs": [q.to_dict() for q in pairs], "cross_ratio": cert.to_dict(),
                "monotonicity": {"steps": p.monotonicity_steps, "results": mono,
                                 "all_pass": all(all(v) for v in mono.values())},
                "tolerances": {"tol": p.barabanov_tol}}

    def cuneo(self) -> dict:
        if self.multicone is None:
            return self.skip("needs a single invariant multicone (domination)")
        return self.compare_at(self.p.window)

    def compare_at(self, m: int) -> dict:
        p = self.p
        f = cuneo_potential(self.A, self.multicone, m)
        cmp = compare_maximizers(self.A, f, p.L_max, p.tie_tol, p.defect_length)
        out = cmp.to_dict()
        out.update({"window": m, "contraction": f.contraction,
                    "tolerances": {"tie_tol": p.tie_tol, "defect_length": p.defect_length}})
        return out

    def report(self) -> dict:
        rep = {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "lyapopt", "version": __version__},
            "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
            "config": self.cfg.to_dict(),
            "stages": self.stages,
            "failed_stages": [k for k, v in self.stages.items() if v["status"] == FAILED],
        }
        if self.timings is not None:
            rep["timings"] = self.timings
        return _clean(rep)


def run_analyze(cfg: AnalysisConfig, timings: bool = False) -> dict:
    """Run every stage in order; failures are recorded and the run continues."""
    pl = _Pipeline(cfg, timings)
    pl.stage("brackets", pl.brackets)
    pl.stage("domination", pl.domination)
    pl.stage("noc", pl.noc)
    pl.stage("typicality", pl.typicality)
    pl.stage("barabanov", pl.barabanov)
    pl.stage("mather", pl.mather)
    pl.stage("certificates", pl.certificates)
    pl.stage("cuneo", pl.cuneo)
    return pl.report()


def run_compare(cfg: AnalysisConfig) -> dict:
    """Potential defect, gap and verdict for each window in ``parameters.windows``."""
    pl = _Pipeline(cfg, timings=False)
    pl.stage("domination", pl.domination)
    rows = []
    if pl.multicone is None:
        status, reason = SKIPPED, "no domination: needs a single invariant multicone"
    else:
        status, reason = OK, ""
        for m in cfg.parameters.windows:
            try:
                rows.append(pl.compare_at(m))
            except (InputError, NumericError) as exc:
                status, reason = FAILED, str(exc)
                break
    return _clean({"schema_version": SCHEMA_VERSION, "name": cfg.name, "status": status, "reason": reason,
                   "rows": [{k: r[k] for k in ("window", "defect", "gap", "verdict", "contraction")} for r in rows]})


def exit_status(report: dict) -> int:
    return 2 if report.get("failed_stages") or report.get("status") == FAILED else 0
