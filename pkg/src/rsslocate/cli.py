"""Command-line front end.

Exit codes: 0 success, 1 bad input or config, 2 unexpected internal
error. All outputs are deterministic for a fixed (scenario, seed,
options) combination, so repeated runs produce byte-identical CSVs.
"""

from __future__ import annotations

import sys
import traceback
from pathlib import Path

import click

from .core import ConflictError, InvalidInputError, LocalizationError
from .evaluate import (
    ExperimentConfig,
    compare_methods,
    export_csv,
    export_outcomes_csv,
    export_ranges_csv,
    run_experiment,
    segmentation_study,
    sweep_reference_points,
)
from .io import load_database, save_database
from .segmentation import partition_manual, segment_auto
from .simulate import load_scenario, survey


def _parse_int_list(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from exc
    if not values:
        raise click.BadParameter("expected at least one integer")
    return values


def _seed_tuple(seed: int, seeds: int | None) -> tuple[int, ...]:
    if seeds is None:
        return (seed,)
    if seeds < 1:
        raise click.BadParameter("--seeds must be at least 1")
    return tuple(range(seeds))


def _scenario_area(scenario) -> str:
    b = scenario.floorplan.bounds
    return f"{b.width:g} x {b.height:g} m"


@click.group()
def cli():
    """RSS fingerprinting workbench: survey, segment, estimate, evaluate."""


@cli.command("survey")
@click.option("--scenario", default="office", help="Preset name or scenario file.")
@click.option("--m", type=int, default=None, help="Reference point count (default: scenario).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="db.json", show_default=True)
def survey_cmd(scenario, m, seed, out):
    """Run a grid survey and write the fingerprint database."""
    sc = load_scenario(scenario)
    db = survey(sc, m, seed)
    save_database(db, out)
    click.echo(f"surveyed {len(db.reference_points)} points x {len(db.beacons)} beacons -> {out}")


@cli.command()
@click.option("--scenario", default="office", help="Preset name or scenario file.")
@click.option("--m", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(["auto", "manual"]), default="auto", show_default=True)
@click.option("--db", "db_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Segment this database file instead of surveying.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the segmented database here.")
def segment(scenario, m, seed, mode, db_path, out):
    """Partition a surveyed database into feature-distinct subareas."""
    sc = load_scenario(scenario)
    db = load_database(db_path) if db_path else survey(sc, m, seed)
    if mode == "manual":
        created = partition_manual(db, sc.regions)
        click.echo(f"manual partition: {len(created)} subareas")
    else:
        report = segment_auto(db, seed=seed)
        if report.success:
            click.echo(f"auto segmentation: {len(report.subareas)} subareas "
                       f"({report.iterations} iterations)")
        else:
            click.echo(f"auto segmentation failed ({report.iterations} iterations):")
            for rect, reason in report.failures:
                click.echo(f"  {reason} at [{rect.x0:.2f},{rect.y0:.2f},"
                           f"{rect.x1:.2f},{rect.y1:.2f}]")
    if out and (mode == "manual" or report.success):
        save_database(db, out)
        click.echo(f"wrote {out}")


def _run_and_export(config: ExperimentConfig, out_dir: str, filename: str, runner):
    rows = runner(config)
    out = Path(out_dir) / filename
    export_csv(rows, out)
    for r in rows:
        if r.outcome == "ok":
            click.echo(
                f"{r.method:<10} m={r.m:<4} seed={r.seed:<3} "
                f"mean={r.mean_error:.3f} median={r.median_error:.3f} max={r.max_error:.3f}"
            )
        else:
            click.echo(f"{r.method:<10} m={r.m:<4} seed={r.seed:<3} {r.outcome}")
    click.echo(f"wrote {out}")
    return rows


@cli.command()
@click.option("--scenario", default="office", help="Preset name or scenario file.")
@click.option("--method", default="3NNF", show_default=True, help="Comma list: 3NNF,KNN(2),RBF.")
@click.option("--m", default=None, help="Comma list of reference point counts.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seeds", type=int, default=None, help="Evaluate seeds 0..N-1.")
@click.option("--segmentation", type=click.Choice(["auto", "manual", "none"]),
              default="manual", show_default=True)
@click.option("--n-test", type=int, default=25, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="results", show_default=True)
def evaluate(scenario, method, m, seed, seeds, segmentation, n_test, out):
    """Measure localization error over test points."""
    config = ExperimentConfig(
        scenario=scenario,
        methods=tuple(part.strip() for part in method.split(",") if part.strip()),
        segmentation=segmentation,
        seeds=_seed_tuple(seed, seeds),
        m_values=_parse_int_list(m) or (None,),
        n_test=n_test,
    )
    _run_and_export(config, out, "metrics.csv", run_experiment)


@cli.command()
@click.option("--scenario", default="office", help="Preset name or scenario file.")
@click.option("--method", default="3NNF,KNN(2)", show_default=True)
@click.option("--m", default="20,40,60,70", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seeds", type=int, default=20, show_default=True)
@click.option("--segmentation", type=click.Choice(["auto", "manual", "none"]),
              default="manual", show_default=True)
@click.option("--n-test", type=int, default=25, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="results", show_default=True)
def sweep(scenario, method, m, seed, seeds, segmentation, n_test, out):
    """Error versus reference-point count."""
    config = ExperimentConfig(
        scenario=scenario,
        methods=tuple(part.strip() for part in method.split(",") if part.strip()),
        segmentation=segmentation,
        seeds=_seed_tuple(seed, seeds),
        m_values=_parse_int_list(m),
        n_test=n_test,
    )
    _run_and_export(config, out, "sweep.csv", sweep_reference_points)


@cli.command()
@click.option("--scenario", default="office", help="Preset name or scenario file.")
@click.option("--m", default=None, help="Comma list of reference point counts.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seeds", type=int, default=20, show_default=True)
@click.option("--n-test", type=int, default=25, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="results", show_default=True)
def compare(scenario, m, seed, seeds, n_test, out):
    """Side-by-side error bands for all three methods."""
    config = ExperimentConfig(
        scenario=scenario,
        methods=("3NNF", "KNN(2)", "RBF"),
        segmentation="manual",
        seeds=_seed_tuple(seed, seeds),
        m_values=_parse_int_list(m) or (None,),
        n_test=n_test,
    )
    rows = run_experiment(config)
    export_csv(rows, Path(out) / "compare_metrics.csv")
    report = compare_methods(rows, _scenario_area(config.resolve_scenario()))
    report_path = Path(out) / "compare.txt"
    report_path.write_text(report, encoding="utf-8")
    click.echo(report, nl=False)
    click.echo(f"wrote {report_path}")


@cli.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seeds", type=int, default=20, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="results", show_default=True)
def segstudy(seed, seeds, out):
    """Auto-segmentation outcomes for both presets across seeds."""
    outcomes, ranges = segmentation_study(seeds=_seed_tuple(seed, seeds))
    export_outcomes_csv(outcomes, Path(out) / "segstudy_outcomes.csv")
    export_ranges_csv(ranges, Path(out) / "segstudy_ranges.csv")
    by_scenario: dict[str, list] = {}
    for o in outcomes:
        by_scenario.setdefault(o.scenario, []).append(o)
    for name, group in sorted(by_scenario.items()):
        ok = sum(o.success for o in group)
        counts = sorted({o.subarea_count for o in group if o.success})
        click.echo(f"{name}: {ok}/{len(group)} succeeded"
                   + (f", subarea counts {counts}" if counts else ""))
    click.echo(f"wrote {Path(out) / 'segstudy_outcomes.csv'} and "
               f"{Path(out) / 'segstudy_ranges.csv'}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="rsslocate", standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except (InvalidInputError, ConflictError, LocalizationError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
