"""
Bounds Service
Lower and upper bounds on wsat(n, F), g*_r upper-bound status and exactness
dispatch. All slopes are exact rationals; rounding happens only when a value
enters a BoundReport (lower bounds ceil, upper bounds are constructed counts).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from backend.services.errors import InapplicableBoundError, ParameterError
from backend.services.graph_core import PatternGraph
from backend.services.invariants_service import (
    BoundProfile,
    EdgeDeficiencyVector,
    InvariantsService,
    get_invariants_service,
)
from backend.services.logger import get_logger

logger = get_logger("bounds")


def ceil_fraction(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


@dataclass
class BoundReport:
    """Every applicable bound for one (F, n)"""

    n: int
    lower: list[tuple[str, int]] = field(default_factory=list)
    upper: list[tuple[str, int]] = field(default_factory=list)
    exact: tuple[int, str] | None = None

    @property
    def best_lower(self) -> int | None:
        return max((val for _, val in self.lower), default=None)

    @property
    def best_upper(self) -> int | None:
        return min((val for _, val in self.upper), default=None)

    def consistent(self) -> bool:
        lo, hi = self.best_lower, self.best_upper
        if lo is not None and hi is not None and lo > hi:
            return False
        if self.exact is not None:
            value = self.exact[0]
            if (lo is not None and value < lo) or (hi is not None and value > hi):
                return False
        return True

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "lower": [{"src": src, "val": val} for src, val in self.lower],
            "upper": [{"src": src, "val": val} for src, val in self.upper],
            "exact": {"val": self.exact[0], "src": self.exact[1]} if self.exact else None,
        }


@dataclass
class BridgesStatus:
    """Upper-bound properties of g*_r for one r"""

    r: int
    flat: bool
    max_kset_r: int
    v_minus_beta: int
    property2: bool
    property3_window: bool
    window: int

    @property
    def agree(self) -> bool:
        return self.property2 == self.property3_window

    @property
    def grants_upper_bound(self) -> bool:
        """wsat(n,F) <= g*_r(n-v) + ell - 1 holds for all n >= v"""
        return self.flat and self.property2

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "r": self.r,
            "flat": self.flat,
            "max_kset_r": self.max_kset_r,
            "v_minus_beta": self.v_minus_beta,
            "property2": self.property2,
            "property3_window": self.property3_window,
            "agree": self.agree,
            "window": self.window,
            "grants_upper_bound": self.grants_upper_bound,
        }


class BoundsService:
    """Evaluates the bound formulas"""

    def __init__(self, invariants: InvariantsService | None = None):
        self.invariants = invariants or get_invariants_service()

    @staticmethod
    def _check_n(f: PatternGraph, n: int) -> None:
        if n < f.v:
            raise ParameterError(f"n={n} must be at least v={f.v}")

    # Upper bounds

    def upper_bound_generic(self, f: PatternGraph, n: int, flat: bool | None = None) -> int:
        """Generic: wsat(v,F) + (n-v)(delta-1), wsat(v,F) = ell-1 if flat else C(v,2)-1"""
        self._check_n(f, n)
        if flat is None:
            flat = self.invariants.flatness(f)[0]
        wsat_v = f.ell - 1 if flat else math.comb(f.v, 2) - 1
        return wsat_v + (n - f.v) * (f.delta - 1)

    def upper_bound_gstar_beta(self, profile: BoundProfile, n: int) -> int:
        """g*_beta(n-v) + ell - 1 (flat patterns)"""
        self._check_n(profile.pattern, n)
        if not profile.flat:
            raise InapplicableBoundError("the g*_beta bound needs wsat(v,F) = ell - 1")
        return profile.gstar_at(profile.beta, n - profile.v) + profile.ell - 1

    def upper_bound_sparse_growth(self, profile: BoundProfile, p: frozenset[int], n: int) -> int:
        """Sparse-growth count for n = v + |P| m"""
        f = profile.pattern
        self._check_n(f, n)
        if not profile.flat:
            raise InapplicableBoundError("sparse growth needs wsat(v,F) = ell - 1")
        if f.v - len(p) < f.delta - 1:
            raise InapplicableBoundError("sparse growth needs |V(F) minus P| >= delta - 1")
        steps, rest = divmod(n - f.v, len(p))
        if rest:
            raise InapplicableBoundError(f"n - v = {n - f.v} is not a multiple of |P| = {len(p)}")
        slope = self.invariants.sparse_slope(f, p)
        return int(slope * len(p)) * steps + f.ell - 1

    # Lower bounds

    def lower_bound_fgj(self, f: PatternGraph, n: int) -> int:
        """Degree bound: (delta/2 - 1/(delta+1)) n"""
        if f.delta < 1:
            raise InapplicableBoundError("delta must be at least 1")
        return ceil_fraction(self.slope_base(f.delta) * n)

    @staticmethod
    def slope_base(delta: int) -> Fraction:
        return Fraction(delta, 2) - Fraction(1, delta + 1)

    def theorem1_slopes(self, f: PatternGraph) -> list[tuple[str, Fraction]]:
        """Applicable degree-based slopes with their case tags"""
        if f.delta < 2:
            raise InapplicableBoundError(f"degree-based slopes need delta >= 2, got {f.delta}")
        d = f.delta
        slopes = [("thm1-case1", self.slope_base(d))]
        if f.connected and d % 2 == 1:
            slopes.append(("thm1-case2", Fraction(d, 2) - Fraction(1, 2 * (d + 2))))
        if (f.connected and d % 2 == 0) or f.two_edge_connected:
            slopes.append(("thm1-case3", Fraction(d, 2)))
        return slopes

    def lower_bound_theorem1(self, f: PatternGraph, n: int) -> int:
        return self.lower_bound_theorem1_tagged(f, n)[1]

    def lower_bound_theorem1_tagged(self, f: PatternGraph, n: int) -> tuple[str, int]:
        self._check_n(f, n)
        tag, slope = max(self.theorem1_slopes(f), key=lambda item: item[1])
        return tag, ceil_fraction(slope * (n - f.v)) + f.ell - 1

    def lower_bound_gstar(self, profile: BoundProfile, n: int) -> int:
        """Subadditive lower bound with g = g*_1"""
        self._check_n(profile.pattern, n)
        return profile.gstar_at(1, n - profile.v) + profile.ell - 1

    def lower_bound_cf(self, f: PatternGraph, n: int, cf: Fraction) -> int:
        """c_F (n-v) + ell - 1 for a certified c_F"""
        self._check_n(f, n)
        return ceil_fraction(Fraction(cf) * (n - f.v)) + f.ell - 1

    def check_subadditive_g(self, g: Sequence[int | Fraction], ed: EdgeDeficiencyVector) -> bool:
        """Subadditivity hypotheses on the given range"""
        top = len(g) - 1
        for i in range(min(top, ed.v - 1) + 1):
            if g[i] > ed.e[i]:
                return False
        for i in range(top + 1):
            for j in range(top + 1 - i):
                if g[i + j] > g[i] + g[j]:
                    return False
        return True

    # g*_r upper bounds / exactness

    def bridges_status(self, profile: BoundProfile, r: int) -> BridgesStatus:
        v = profile.v
        if not 0 <= r <= v - 1:
            raise ParameterError(f"r must lie in 0..{v - 1}, got {r}")
        max_k = max(profile.kset_r(r))
        v_minus_beta = v - profile.beta
        window = profile.window
        prop3 = profile.flat and all(
            profile.gstar_at(profile.beta, i) <= profile.gstar_at(r, i) for i in range(window + 1)
        )
        return BridgesStatus(
            r=r,
            flat=profile.flat,
            max_kset_r=max_k,
            v_minus_beta=v_minus_beta,
            property2=profile.flat and max_k <= v_minus_beta,
            property3_window=prop3,
            window=window,
        )

    def exact_claim(self, profile: BoundProfile, n: int) -> tuple[int, str] | None:
        """Exact value when verifiable hypotheses hold, with its source tag"""
        self._check_n(profile.pattern, n)
        if not profile.flat:
            return None
        v_minus_beta = profile.v - profile.beta
        # g*_1 upper bound meets the subadditive lower bound
        if max(profile.kset_r(1)) <= v_minus_beta:
            return profile.gstar_at(1, n - profile.v) + profile.ell - 1, "thm7-r1+thm3"
        if profile.v >= 3 and max(profile.kset_r(2)) <= v_minus_beta:
            return profile.gstar_at(2, n - profile.v) + profile.ell - 1, "cor2"
        return None

    def predicted_exact(self, profile: BoundProfile, n: int) -> int | None:
        claim = self.exact_claim(profile, n)
        return claim[0] if claim else None

    # Reports

    def report(
        self,
        profile: BoundProfile,
        n: int,
        cf: Fraction | None = None,
        distinguished: frozenset[int] | None = None,
    ) -> BoundReport:
        f = profile.pattern
        self._check_n(f, n)
        rep = BoundReport(n=n)

        rep.lower.append(("eq2-fgj", self.lower_bound_fgj(f, n)))
        if f.delta >= 2:
            rep.lower.append(self.lower_bound_theorem1_tagged(f, n))
        rep.lower.append(("thm3-gstar", self.lower_bound_gstar(profile, n)))
        rep.lower.append(("claim1-cf", self.lower_bound_cf(f, n, cf if cf is not None else profile.gamma)))

        rep.upper.append(("eq1-generic", self.upper_bound_generic(f, n, flat=profile.flat)))
        if profile.flat:
            rep.upper.append(("cor1-gstar-beta", self.upper_bound_gstar_beta(profile, n)))
            if distinguished:
                try:
                    rep.upper.append(
                        ("claim4-sparse", self.upper_bound_sparse_growth(profile, distinguished, n))
                    )
                except InapplicableBoundError:
                    pass
        if f.ell == math.comb(f.v, 2):
            rep.upper.append(("appendix-clique", math.comb(f.v, 2) - 1 + (n - f.v) * (f.v - 2)))

        rep.exact = self.exact_claim(profile, n)
        if not rep.consistent():
            logger.error(f"inconsistent bounds for {f.label()} at n={n}: {rep.to_json_dict()}")
        return rep


# Singleton instance
_bounds_service: BoundsService | None = None


def get_bounds_service() -> BoundsService:
    """Get or create the bounds service singleton"""
    global _bounds_service
    if _bounds_service is None:
        _bounds_service = BoundsService()
    return _bounds_service
