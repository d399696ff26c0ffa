"""Regeneration of the two published iteration tables.

Both tables come from the decoupled recurrence
``v = (1-tau) x + tau T x``, ``x+ = (1-alpha) v + alpha T v`` run from
``x_1 = y_1 = 1``. Table 1 is pinned to its printed values; Table 2 cannot be
matched by the stated maps (its x-map has fixed point 3, the table settles
at 2), so it is only printed next to the published numbers.
"""
from dataclasses import dataclass

from . import fixtures
from .solvers import SolverConfig, solve_decoupled_km

__all__ = ["TableCheck", "run_table", "table1_checks", "TABLE1_PUBLISHED", "TABLE2_PUBLISHED"]

# (row, column) -> (printed value, tolerance)
TABLE1_PUBLISHED = {
    (2, "x"): (1.446428571, 1e-8),
    (2, "y"): (0.8831268924, 1e-7),
    (74, "y"): (0.5, 1e-9),
    (100, "x"): (3.999999697, 1e-6),
}

TABLE2_PUBLISHED = {
    (2, "x"): 1.402141502, (2, "y"): 1.283490816,
    (3, "x"): 1.584779961, (3, "y"): 1.420942750,
    (80, "x"): 1.999999998, (81, "x"): 1.999999999,
    (98, "x"): 1.999999999, (98, "y"): 1.998915702,
    (99, "x"): 1.999999999, (99, "y"): 1.998975310,
    (100, "x"): 1.999999999, (100, "y"): 1.999031634,
}


@dataclass(frozen=True)
class TableCheck:
    row: int
    column: str
    computed: float
    published: float
    tolerance: float

    @property
    def diff(self):
        return abs(self.computed - self.published)

    @property
    def passed(self):
        return self.diff <= self.tolerance


def run_table(table_id, rows=100):
    """Decoupled trace for table 1 or 2, indexed from ``n = 1``."""
    if table_id == 1:
        problem, params = fixtures.example1_problem(), fixtures.EXAMPLE1_PARAMS
    elif table_id == 2:
        problem, params = fixtures.example2_problem(), fixtures.EXAMPLE2_PARAMS
    else:
        raise ValueError(f"table id must be 1 or 2, got {table_id!r}")
    cfg = SolverConfig(mode="decoupled-km", tau=params["tau"], alpha=params["alpha"],
                       max_iters=rows - 1, stop_tolerance=1e-300, paper_exact_override=True)
    return solve_decoupled_km(problem, cfg)


def table1_checks(trace=None):
    trace = trace if trace is not None else run_table(1)
    out = []
    for (row, colname), (published, tol) in TABLE1_PUBLISHED.items():
        rec = trace.by_index(row)
        value = float(getattr(rec, colname)[0])
        out.append(TableCheck(row, colname, value, published, tol))
    return out
