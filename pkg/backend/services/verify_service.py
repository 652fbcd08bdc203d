"""
Verify Service
Named verification suites at desk-scale parameters. Each suite returns a report of
individual checks; `wsatlab verify <suite>` exits 0 iff every check passes.
"""

from __future__ import annotations

import inspect
import logging
import math
import random
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import networkx as nx

from backend.services.bounds_service import BoundsService, get_bounds_service
from backend.services.constructions_service import (
    ConstructionsService,
    get_constructions_service,
)
from backend.services.errors import ParameterError, WsatLabError
from backend.services.graph_core import LabeledGraph, PatternGraph
from backend.services.invariants_service import (
    InvariantsService,
    get_invariants_service,
    rational_json,
)
from backend.services.logger import get_logger, log_timing
from backend.services.percolation_service import PercolationService, get_percolation_service
from backend.services.solver_service import SolverService, get_solver_service

logger = get_logger("verify")

SUITES = ("thm1", "thm2", "thm5", "thm6", "thm7", "thm8", "claim4", "claim6", "claim7", "k9")


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict[str, Any] = field(default_factory=dict)

    def to_json_dict(self) -> dict[str, Any]:
        return {"name": self.name, "passed": self.passed, **self.detail}


@dataclass
class SuiteReport:
    suite: str
    parameters: dict[str, Any]
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **detail: Any) -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        if not passed:
            logger.warning(f"{self.suite}: check {name} failed {detail}")
        return bool(passed)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "parameters": self.parameters,
            "passed": self.passed,
            "failed": [c.name for c in self.checks if not c.passed],
            "checks": [c.to_json_dict() for c in self.checks],
        }


def cycle_pattern(n: int) -> PatternGraph:
    return PatternGraph.from_graph(
        LabeledGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)]), name=f"cycle:{n}"
    )


def random_pattern(rng: random.Random, n: int, p: float, connected: bool = False) -> PatternGraph | None:
    g = nx.gnp_random_graph(n, p, seed=rng.randrange(2**32))
    if any(d == 0 for _, d in g.degree()) or (connected and not nx.is_connected(g)):
        return None
    return PatternGraph.from_graph(LabeledGraph.from_edges(n, g.edges()), name=f"gnp:{n}")


class VerifyService:
    """Runs the named suites"""

    def __init__(
        self,
        percolation: PercolationService | None = None,
        invariants: InvariantsService | None = None,
        bounds: BoundsService | None = None,
        constructions: ConstructionsService | None = None,
        solver: SolverService | None = None,
    ):
        self.percolation = percolation or get_percolation_service()
        self.invariants = invariants or get_invariants_service()
        self.bounds = bounds or get_bounds_service()
        self.constructions = constructions or get_constructions_service()
        self.solver = solver or get_solver_service()

    def run(self, suite: str, **params: Any) -> SuiteReport:
        runners: dict[str, Callable[..., None]] = {
            "thm1": self._slope_sandwich,
            "thm2": self._nonconcentration,
            "thm5": self._fvd_formula,
            "thm6": self._clique_formula,
            "thm7": self._gstar_upper,
            "thm8": self._exact_dispatch,
            "claim4": self._sparse_families,
            "claim6": self._beta_below_connectivity,
            "claim7": self._subadditivity,
            "k9": self._k9,
        }
        if suite not in runners:
            raise ParameterError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
        params = {k: v for k, v in params.items() if v is not None}
        accepted = set(inspect.signature(runners[suite]).parameters) - {"report"}
        unknown = sorted(set(params) - accepted)
        if unknown:
            raise ParameterError(f"suite {suite} does not take {', '.join(unknown)}")
        report = SuiteReport(suite, params)
        with log_timing(logger, f"suite {suite}", logging.INFO, suite=suite, **params) as ctx:
            try:
                runners[suite](report, **params)
            except WsatLabError as e:
                report.add("suite-error", False, error=str(e))
            ctx["checks"] = len(report.checks)
            ctx["failed"] = [c.name for c in report.checks if not c.passed]
        return report

    def pattern(self, spec: str) -> PatternGraph:
        return self.constructions.resolve_pattern(spec)[0]

    def corpus(self) -> list[PatternGraph]:
        names = ["clique:3", "clique:4", "fvd:5,3", "fabc:3,4,2"]
        return [self.pattern(s) for s in names] + [cycle_pattern(5)]

    def sandwich_corpus(self) -> list[tuple[PatternGraph, frozenset[int] | None]]:
        """The corpus plus each optimality family at its smallest m, with its growth set"""
        entries: list[tuple[PatternGraph, frozenset[int] | None]] = [(f, None) for f in self.corpus()]
        for case, delta, m in ((1, 2, 3), (2, 2, 7), (3, 3, 6)):
            res = self.constructions.pattern_optimality_family(case, delta, m)
            entries.append((res.as_pattern(), res.distinguished))
        return entries

    # Suites

    def _sandwich(
        self,
        report: SuiteReport,
        f: PatternGraph,
        n: int,
        distinguished: frozenset[int] | None = None,
        budget_ms: int | None = None,
    ) -> None:
        name = f"sandwich {f.label()} n={n}"
        profile = self.invariants.profile(f, i_max=n - f.v)
        bounds = self.bounds.report(profile, n, distinguished=distinguished)
        res = self.solver.wsat_exact(f, n, budget_ms=budget_ms)
        if not res.exact:
            # Out of solver reach: only the bounds themselves are compared
            report.add(name, bounds.consistent(), skipped="budget exhausted", bounds=bounds.to_json_dict())
            return
        ok = all(val <= res.value for _, val in bounds.lower) and all(
            res.value <= val for _, val in bounds.upper
        )
        if bounds.exact is not None:
            ok = ok and bounds.exact[0] == res.value
        report.add(name, ok, value=res.value, bounds=bounds.to_json_dict())

    def _slope_sandwich(
        self,
        report: SuiteReport,
        seed: int = 7,
        samples: int = 30,
        extra: int = 3,
        budget_ms: int = 30_000,
    ) -> None:
        for f, distinguished in self.sandwich_corpus():
            for n in range(f.v, f.v + extra + 1):
                self._sandwich(report, f, n, distinguished, budget_ms)
        rng = random.Random(seed)
        tested = 0
        while tested < samples:
            f = random_pattern(rng, rng.randint(5, 8), rng.uniform(0.4, 0.9))
            if f is None or f.delta < 2:
                continue
            tested += 1
            gamma = self.invariants.gamma(self.invariants.edge_deficiency(f))
            for tag, slope in self.bounds.theorem1_slopes(f):
                report.add(
                    f"gamma {tag} on {f.graph!r}",
                    gamma >= slope,
                    gamma=rational_json(gamma),
                    slope=rational_json(slope),
                )

    def _nonconcentration(self, report: SuiteReport, delta_max: int = 3) -> None:
        for delta in range(2, delta_max + 1):
            for k in range((delta - 2) * (delta + 1) // 2 + 1):
                m = max(2 * (k + 1), 2 * delta + 1)
                res = self.constructions.pattern_nonconcentration(delta, k, m)
                f = res.as_pattern()
                rho = Fraction(delta, 2) + Fraction(k, delta + 1)
                label = f"noncon:{delta},{k},{m}"
                report.add(f"{label} edges", res.count_matches, claimed=res.claimed_edges)
                report.add(f"{label} flat", self.invariants.flatness(f)[0])
                gamma = self.invariants.gamma(self.invariants.edge_deficiency(f))
                report.add(f"{label} gamma", gamma == rho, gamma=rational_json(gamma))
                assert res.distinguished is not None
                slope = self.invariants.sparse_slope(f, res.distinguished)
                report.add(f"{label} slope", slope == rho, slope=rational_json(slope))

    def _fvd_formula(self, report: SuiteReport, v: int = 5, delta: int = 3, n_max: int | None = None) -> None:
        res = self.constructions.pattern_F_v_delta(v, delta)
        f = res.as_pattern()
        report.add(f"fvd:{v},{delta} edges", res.count_matches, claimed=res.claimed_edges)
        n_max = v + 1 if n_max is None else n_max
        formula = lambda n: math.comb(v - 1, 2) + (n - v + 1) * (delta - 1)  # noqa: E731
        ranged = self.solver.verify_formula_range(f, formula, range(v, n_max + 1))
        for check in ranged.checks:
            report.add(f"fvd:{v},{delta} n={check.n}", check.status == "match", **check.to_json_dict())

    def _clique_formula(self, report: SuiteReport, v_max: int = 6, extra: int = 3) -> None:
        for v in range(3, v_max + 1):
            f = self.pattern(f"clique:{v}")
            profile = self.invariants.profile(f, i_max=extra)
            for n in range(v, v + extra + 1):
                formula = math.comb(v, 2) - 1 + (n - v) * (v - 2)
                cor1 = self.bounds.upper_bound_gstar_beta(profile, n)
                witness = self.constructions.saturator_clique_witness(v, n)
                report.add(f"K_{v} n={n} g*_beta", cor1 == formula, value=cor1, expected=formula)
                report.add(
                    f"K_{v} n={n} clique witness",
                    witness.count_matches and self.constructions.verify(witness) is not False,
                    edges=witness.graph.edge_count,
                )
        # Where properties 2 and 3 grant the g*_2 upper bound, the solver meets g*_2 exactly
        for spec in ("clique:3", "clique:4"):
            f = self.pattern(spec)
            profile = self.invariants.profile(f, i_max=2)
            if not self.bounds.bridges_status(profile, 2).grants_upper_bound:
                report.add(f"{spec} property 2 at r=2", False)
                continue
            for n in range(f.v, f.v + 3):
                res = self.solver.wsat_exact(f, n)
                expected = profile.gstar_at(2, n - f.v) + f.ell - 1
                report.add(f"{spec} n={n} g*_2", res.exact and res.value == expected, value=res.value, expected=expected)

    def _gstar_upper(self, report: SuiteReport) -> None:
        for f in self.corpus() + [self.pattern("k9mm")]:
            profile = self.invariants.profile(f)
            for r in range(f.v):
                status = self.bounds.bridges_status(profile, r)
                report.add(f"{f.label()} r={r}", status.agree, **status.to_json_dict())

    def _exact_dispatch(self, report: SuiteReport) -> None:
        f = self.pattern("fabc:3,4,2")
        profile = self.invariants.profile(f, i_max=2)
        for n in range(f.v, f.v + 3):
            claim = self.bounds.exact_claim(profile, n)
            res = self.solver.wsat_exact(f, n)
            report.add(
                f"fabc:3,4,2 n={n}",
                claim is not None and res.exact and claim[0] == res.value,
                predicted=claim[0] if claim else None,
                source=claim[1] if claim else None,
                value=res.value,
            )
        g = self.pattern("fabc:5,5,4")
        profile = self.invariants.profile(g)
        status = self.bounds.bridges_status(profile, 2)
        report.add("fabc:5,5,4 max K_2", status.max_kset_r == 5, max_kset_r=status.max_kset_r)
        report.add("fabc:5,5,4 beta", profile.beta == 3, beta=profile.beta)
        report.add("fabc:5,5,4 property 2", status.property2)
        claim = self.bounds.exact_claim(profile, g.v + 3)
        report.add("fabc:5,5,4 dispatch", claim is not None, claim=list(claim) if claim else None)

    def _sparse_families(self, report: SuiteReport) -> None:
        for spec, p, steps in (("clique:4", {3}, 3), ("clique:3", {2}, 4)):
            f = self.pattern(spec)
            res = self.constructions.saturator_sparse_growth(f, p, steps)
            report.add(f"{spec} growth edges", res.count_matches, edges=res.graph.edge_count)
            report.add(f"{spec} growth saturates", self.constructions.verify(res) is True)

        families = [
            (1, 2, 3, Fraction(2, 3)),
            (1, 3, 3, Fraction(3, 2) - Fraction(1, 4)),
            (2, 2, 7, Fraction(1)),
            (2, 3, 8, Fraction(3, 2)),
            (3, 3, 6, Fraction(3, 2) - Fraction(1, 10)),
        ]
        for case, delta, m, slope in families:
            res = self.constructions.pattern_optimality_family(case, delta, m)
            f = res.as_pattern()
            label = f"optfam:{case},{delta},{m}"
            assert res.distinguished is not None
            report.add(f"{label} edges", res.count_matches, claimed=res.claimed_edges)
            report.add(f"{label} delta", f.delta == delta, delta=f.delta)
            report.add(f"{label} flat", self.constructions.verify(res) is not False)
            got = self.invariants.sparse_slope(f, res.distinguished)
            report.add(f"{label} slope", got == slope, slope=rational_json(got))
            gamma = self.invariants.gamma(self.invariants.edge_deficiency(f))
            report.add(f"{label} gamma", gamma == slope, gamma=rational_json(gamma))

    def _beta_below_connectivity(self, report: SuiteReport, seed: int = 11, samples: int = 50) -> None:
        rng = random.Random(seed)
        tested = 0
        while tested < samples:
            f = random_pattern(rng, rng.randint(3, 8), rng.uniform(0.3, 0.9), connected=True)
            if f is None:
                continue
            tested += 1
            beta = self.invariants.beta(f)
            report.add(
                f"beta on {f.graph!r}",
                beta <= f.edge_connectivity - 1,
                beta=beta,
                edge_connectivity=f.edge_connectivity,
            )

    def _subadditivity(self, report: SuiteReport, top: int = 3) -> None:
        f = self.pattern("clique:3")
        base = f.ell - 1
        values = {}
        for i in range(2 * top + 1):
            res = self.solver.wsat_exact(f, f.v + i)
            values[i] = res.value if res.exact else None
        for i in range(top + 1):
            for j in range(i, top + 1):
                a, b, c = values[i], values[j], values[i + j]
                ok = None not in (a, b, c) and c - base <= (a - base) + (b - base)  # type: ignore[operator]
                report.add(f"K_3 i={i} j={j}", ok, values=[a, b, c])

        path3 = LabeledGraph.from_edges(3, [(0, 1), (1, 2)])
        path4 = LabeledGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        glued = self.constructions.saturator_union_glue(path3, path4, f, "fixed-sets")
        report.add(
            "fixed-sets glue", glued.count_matches and self.constructions.verify(glued) is True,
            edges=glued.graph.edge_count,
        )
        h = self.constructions.saturator_generic(f, f.v + 2).graph
        glued = self.constructions.saturator_union_glue(h, h, f, "first-copy")
        report.add(
            "first-copy glue",
            glued.count_matches
            and self.constructions.verify(glued) is True
            and glued.graph.edge_count - base <= 2 * (h.edge_count - base),
            edges=glued.graph.edge_count,
            n=glued.graph.n,
        )

    def _k9(self, report: SuiteReport) -> None:
        res = self.constructions.pattern_k9_minus_matching()
        f = res.as_pattern()
        profile = self.invariants.profile(f, i_max=60)
        report.add("ell - 1", f.ell - 1 == 31, value=f.ell - 1)
        report.add("delta", f.delta == 7, value=f.delta)
        report.add("beta", profile.beta == 6, value=profile.beta)
        report.add("flat", profile.flat)
        expected_e = (0, 6, 12, 17, 21, 25, 28, 30, 31, 31)
        report.add("edge deficiency", profile.ed.e == expected_e, e=list(profile.ed.e))
        report.add("K", profile.kset == (1, 3, 4, 5, 6, 7, 8, 9), kset=list(profile.kset))
        checkpoints = {3 * t: profile.gstar_at(profile.beta, 3 * t) for t in range(1, 7)}
        report.add(
            "g*_beta at i=3t", all(val == 17 * i // 3 for i, val in checkpoints.items()), values=checkpoints
        )
        steps = [profile.gstar_at(profile.beta, i + 3) - profile.gstar_at(profile.beta, i) for i in range(30, 58)]
        report.add("g*_beta slope 17/3", all(s == 17 for s in steps))
        report.add("no exactness claim", self.bounds.exact_claim(profile, 40) is None)
        assert res.distinguished is not None
        growth = self.constructions.saturator_sparse_growth(f, res.distinguished, 2)
        report.add(
            "growth gadget",
            growth.extras["per_step_edges"] == 22 and growth.count_matches,
            per_step_edges=growth.extras["per_step_edges"],
        )
        report.add("growth saturates", self.constructions.verify(growth) is True)
        report.add(
            "gadget beats g*_beta",
            Fraction(22, 4) < Fraction(17, 3),
            slope=rational_json(Fraction(22, 4)),
        )


# Singleton instance
_verify_service: VerifyService | None = None


def get_verify_service() -> VerifyService:
    """Get or create the verify service singleton"""
    global _verify_service
    if _verify_service is None:
        _verify_service = VerifyService()
    return _verify_service
