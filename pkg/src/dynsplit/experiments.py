"""Order-table experiments for the two preset problems.

Each :class:`TableRow` carries the previously published observed order for
that scheme; ``reproduce_table`` recomputes it with this package.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import presets
from .analysis import (
    ConvergenceReport,
    Exact,
    ExperimentSpec,
    FineRun,
    detect_plateau,
    dyadic_taus,
    fit_order,
    measure_errors,
    split_window,
)
from .splitting import LIE, STRANG, Scheme

# Regime boundary (natural log of tau) for the Strang rows of table2.
STRANG_SPLIT_LOG_TAU = -2.5


@dataclass(frozen=True)
class TableRow:
    scheme: Scheme
    regime: str                 # "plateau", "coarse" or "fine"
    published: float
    gated: bool = True


@dataclass(frozen=True)
class TableSetup:
    name: str
    preset: str
    nx: int
    t_max: float
    dyadic: tuple[int, int]
    reference: str              # "exact" or "fine"
    fine_factor: int
    rows: tuple[TableRow, ...]

    def problem(self, nx=None):
        build = presets.example1_problem if self.preset == "example1" else presets.example2_problem
        return build(nx=nx or self.nx, t_max=self.t_max)


W03 = Scheme.weighted(0.3)
W05 = Scheme.weighted(0.5)

TABLES = {
    "table1": TableSetup(
        "table1", "example1", nx=32768, t_max=2.0, dyadic=(2, 11), reference="exact",
        fine_factor=64,
        rows=(
            TableRow(LIE, "plateau", 1.0004),
            TableRow(STRANG, "plateau", 1.2405),
            TableRow(W03, "plateau", 1.0549),
            TableRow(W05, "plateau", 1.1646),
        ),
    ),
    "table2": TableSetup(
        "table2", "example2", nx=128, t_max=2.0, dyadic=(2, 10), reference="fine",
        fine_factor=64,
        rows=(
            TableRow(LIE, "plateau", 1.0100),
            TableRow(STRANG, "coarse", 1.3056),
            TableRow(STRANG, "fine", 1.9812),
            TableRow(W03, "plateau", 1.0256),
            TableRow(W05, "plateau", 1.5765, gated=False),
        ),
    ),
}


@dataclass(frozen=True)
class RowResult:
    row: TableRow
    report: ConvergenceReport | None
    error: str | None = None

    @property
    def computed(self) -> float | None:
        return None if self.report is None else self.report.slope


def table_spec(setup: TableSetup, scheme: Scheme, nx=None) -> ExperimentSpec:
    taus = dyadic_taus(setup.t_max, *setup.dyadic)
    if setup.reference == "exact":
        ref = Exact()
    else:
        ref = FineRun(setup.fine_factor * 2 ** setup.dyadic[1])
    return ExperimentSpec(setup.problem(nx), scheme, taus, ref)


def _window(entries, regime):
    if regime == "plateau":
        return detect_plateau(entries)
    return split_window(entries, STRANG_SPLIT_LOG_TAU, regime)


def reproduce_table(which: str, nx: int | None = None) -> tuple[TableSetup, list[RowResult], dict]:
    """Run every row of a table.

    Returns the setup, one result per row, and the raw sweeps keyed by scheme
    label.  A row whose computation fails carries the error message instead
    of a report.
    """
    setup = TABLES[which]
    sweeps: dict[str, list] = {}
    results = []
    for row in setup.rows:
        label = row.scheme.label
        try:
            if label not in sweeps:
                sweeps[label] = measure_errors(table_spec(setup, row.scheme, nx))
            entries = sweeps[label]
            window = _window(entries, row.regime)
            slope, intercept = fit_order(entries, window)
            report = ConvergenceReport(tuple(entries), window, slope, intercept, row.scheme)
            results.append(RowResult(row, report))
        except (ArithmeticError, ValueError) as exc:
            results.append(RowResult(row, None, f"{type(exc).__name__}: {exc}"))
    return setup, results, sweeps
