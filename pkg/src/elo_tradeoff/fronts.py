"""
Pareto fronts produced by the constraint sweeps.

A front is a table with one row per constraint value (energy budget E_max for
the power scenario, slot budget T for the time scenario). Infeasible
constraint values stay in the table as explicit rows with feasible = 0 and a
reason, so a sweep never silently loses a point.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List

import pandas as pd

Row = Dict[str, object]

MONOTONE_REL_TOL = 1e-9

POWER_COLUMNS = [
    "E_max",
    "latency_bound",
    "Q_star",
    "fc_star",
    "E_comp",
    "E_tx",
    "comp_quantile",
    "tx_quantile",
    "exact_tx_quantile",
    "convexity_certified",
    "clipped",
    "is_baseline",
    "feasible",
    "reason",
]

TIME_COLUMNS = [
    "T",
    "qaoi",
    "E_total",
    "alpha_star",
    "Q_star",
    "fc_star",
    "P_succ",
    "eps_c",
    "eps_tx",
    "E_comp",
    "E_tx",
    "feasible",
    "reason",
]

SCENARIO_LAYOUT = {
    # scenario: (columns, constraint column, objective column)
    "power": (POWER_COLUMNS, "E_max", "latency_bound"),
    "time": (TIME_COLUMNS, "T", "E_total"),
}


def infeasible_row(scenario: str, constraint_value: float, reason: str) -> Row:
    """Build the explicit row reported for an infeasible constraint value."""
    columns, constraint, _ = SCENARIO_LAYOUT[scenario]
    row: Row = {name: math.nan for name in columns}
    row[constraint] = constraint_value
    row["feasible"] = 0
    row["reason"] = reason
    for flag in ("convexity_certified", "clipped", "is_baseline"):
        if flag in row:
            row[flag] = 0
    return row


@dataclass
class ParetoFront:
    """
    Constraint sweep result for one scenario and one reliability level rho.

    Rows are kept sorted by the constraint value; duplicate constraint values
    are rejected.
    """

    scenario: str  # "power" or "time"
    rho: float
    rows: List[Row] = field(default_factory=list)

    def __post_init__(self):
        if self.scenario not in SCENARIO_LAYOUT:
            raise ValueError(
                f"Unknown scenario: {self.scenario}. Available: {sorted(SCENARIO_LAYOUT)}"
            )
        key = self.constraint
        self.rows = sorted(self.rows, key=lambda row: row[key])
        values = [row[key] for row in self.rows]
        if len(set(values)) != len(values):
            raise ValueError(f"Duplicate {key} values in {self.scenario} front: {values}")

    @property
    def columns(self) -> List[str]:
        return SCENARIO_LAYOUT[self.scenario][0]

    @property
    def constraint(self) -> str:
        return SCENARIO_LAYOUT[self.scenario][1]

    @property
    def objective(self) -> str:
        return SCENARIO_LAYOUT[self.scenario][2]

    @property
    def feasible_rows(self) -> List[Row]:
        return [row for row in self.rows if row["feasible"]]

    def is_monotone(self, rel_tol: float = MONOTONE_REL_TOL) -> bool:
        """
        True if the objective never increases as the constraint is relaxed.

        An increase of at most rel_tol relative to the previous row counts as
        a tie; budgets that share one optimum agree only to solver precision.
        """
        objectives = [row[self.objective] for row in self.feasible_rows]
        return all(b <= a + rel_tol * abs(a) for a, b in zip(objectives, objectives[1:]))

    def to_dataframe(self) -> pd.DataFrame:
        """Rows as a DataFrame with the scenario's column order."""
        return pd.DataFrame(self.rows, columns=self.columns)

    def print_summary(self) -> None:
        """Print the front as a table."""
        objective_label = "Latency [s]" if self.scenario == "power" else "Energy [J]"
        print(f"\n{'='*70}")
        print(f"{self.scenario.capitalize()} scenario Pareto front (rho = {self.rho})")
        print(f"{'='*70}")
        print(f"{self.constraint:<10} {objective_label:<14} {'Q*':<8} {'f_c* [GHz]':<12} {'Status':<10}")
        print("-" * 70)
        for row in self.rows:
            if row["feasible"]:
                print(
                    f"{row[self.constraint]:<10.4g} {row[self.objective]:<14.6g} "
                    f"{row['Q_star']:<8.4f} {row['fc_star'] / 1e9:<12.4f} {'ok':<10}"
                )
            else:
                print(f"{row[self.constraint]:<10.4g} {'-':<14} {'-':<8} {'-':<12} {'infeasible':<10}")
        print()


def pareto_filter(front: ParetoFront) -> ParetoFront:
    """
    Drop infeasible and dominated rows.

    A row is kept only if its objective is strictly below the objective of
    every row with a smaller constraint value.
    """
    kept: List[Row] = []
    best = math.inf
    for row in front.feasible_rows:
        value = row[front.objective]
        if value < best:
            kept.append(row)
            best = value
    return ParetoFront(scenario=front.scenario, rho=front.rho, rows=kept)
