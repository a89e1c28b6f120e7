"""Command-line front end.

Subcommands: ``fer`` (cooperative sweep), ``baseline`` (non-cooperation),
``exit`` (transfer curves and convergence thresholds), ``limits``
(capacity-threshold table) and ``interleaver`` (generate/dump).  Every
report command writes CSV or JSON and, unless ``--no-plot`` is given, a
PNG figure next to it.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import plots
from .channel import NetworkGeometry, compute_gains
from .exit import exit_curve_inner, exit_curve_outer, find_threshold
from .limits import threshold_table
from .relay import (
    InterleaverConstructionError,
    Permutation,
    default_spread,
    make_s_random_interleaver,
)
from .simulate import (
    BASELINE_SPECS,
    ExperimentConfig,
    emit_results,
    run_fer,
    run_noncoop_baseline,
)


def _parse_snrs(snrs: str | None, snr_range: str | None) -> tuple[float, ...]:
    if snrs and snr_range:
        raise click.UsageError("give either --snrs or --snr-range, not both")
    if snrs:
        return tuple(float(tok) for tok in snrs.split(","))
    if snr_range:
        try:
            start, stop, step = (float(tok) for tok in snr_range.split(":"))
        except ValueError:
            raise click.UsageError("--snr-range needs start:stop:step")
        return tuple(np.arange(start, stop + 1e-9, step).round(6))
    raise click.UsageError("an SNR sweep is required (--snrs or --snr-range)")


def _load_config(config_path: str | None, overrides: dict) -> ExperimentConfig:
    base = {}
    if config_path:
        base = json.loads(Path(config_path).read_text())
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(base)


_common_options = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="JSON config file; flags override it."),
    click.option("--q", type=int, default=None, help="Number of sources."),
    click.option("--k", type=int, default=None, help="Info bits per source."),
    click.option("--model", "channel_model",
                 type=click.Choice(["awgn", "rayleigh", "fast-rayleigh"]),
                 default=None, help="Channel model."),
    click.option("--snrs", default=None,
                 help="Comma-separated gamma_sd sweep in dB."),
    click.option("--snr-range", default=None, help="start:stop:step in dB."),
    click.option("--iterations", "max_iterations", type=int, default=None),
    click.option("--min-frame-errors", type=int, default=None),
    click.option("--max-frames", type=int, default=None),
    click.option("--seed", "master_seed", type=int, default=None),
    click.option("--energy", type=click.Choice(["info", "coded"]),
                 default=None,
                 help="Per-information-bit or per-coded-bit E_b (default info)."),
    click.option("--early-stop",
                 type=click.Choice(["stable-decisions", "none"]),
                 default=None),
    click.option("--workers", type=int, default=1, show_default=True),
    click.option("--out", type=click.Path(), required=True),
    click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                 default="csv", show_default=True),
    click.option("--plot/--no-plot", default=True, show_default=True,
                 help="Render a PNG figure next to the output file."),
]


def _apply_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


@click.group()
def main():
    """Relay-network coded cooperation: simulation and analysis."""


@main.command()
@_apply_options(_common_options)
@click.option("--strategy", type=click.Choice(["A", "B"]), default=None)
@click.option("--group-size", type=int, default=None,
              help="Strategy A group size J (default q).")
@click.option("--rho", default=None,
              help="Strategy B permeability, e.g. 1/2 (default 1/q).")
@click.option("--interleaver-spread", type=int, default=None)
@click.option("--interleaver-seed", type=int, default=None)
@click.option("--interleaver-file", type=click.Path(exists=True), default=None)
@click.option("--trace", "trace_path", type=click.Path(), default=None,
              help="Also write a per-iteration residual-error trace of the "
                   "first frames of the first sweep point.")
@click.option("--trace-frames", type=int, default=10, show_default=True)
def fer(config_path, workers, out, fmt, plot, snrs, snr_range, trace_path,
        trace_frames, **overrides):
    """Cooperative-scheme FER/BER sweep."""
    overrides["snrs_db"] = _parse_snrs(snrs, snr_range)
    cfg = _load_config(config_path, overrides)
    try:
        records = run_fer(cfg, workers=workers)
    except InterleaverConstructionError as exc:
        raise click.ClickException(str(exc))
    emit_results(records, fmt, out, config=cfg, kind="fer")
    if trace_path:
        from .simulate import run_trace

        run_trace(cfg, 0, trace_frames, trace_path)
        click.echo(f"iteration trace written to {trace_path}")
    for rec in records:
        click.echo(
            f"gamma_sd={rec.gamma_sd_db:+.3f} dB  FER={rec.fer:.3e}  "
            f"BER={rec.ber:.3e}  frames={rec.frames}  stop={rec.stop_reason}"
        )
    if plot:
        png = Path(out).with_suffix(".png")
        plots.render_fer_plot({f"strategy {cfg.strategy}": records}, png)
        click.echo(f"figure written to {png}")


@main.command()
@_apply_options(_common_options)
@click.option("--rate", type=click.Choice(sorted(BASELINE_SPECS)),
              default="1/3", show_default=True)
def baseline(config_path, workers, out, fmt, plot, snrs, snr_range, rate,
             **overrides):
    """Non-cooperation baseline FER/BER sweep."""
    overrides["snrs_db"] = _parse_snrs(snrs, snr_range)
    cfg = _load_config(config_path, overrides)
    records = run_noncoop_baseline(cfg, rate=rate, workers=workers)
    emit_results(records, fmt, out, config=cfg, kind="fer")
    for rec in records:
        click.echo(
            f"gamma_sd={rec.gamma_sd_db:+.3f} dB  FER={rec.fer:.3e}  "
            f"BER={rec.ber:.3e}  frames={rec.frames}  stop={rec.stop_reason}"
        )
    if plot:
        png = Path(out).with_suffix(".png")
        plots.render_fer_plot({f"baseline rate {rate}": records}, png)
        click.echo(f"figure written to {png}")


@main.command("exit")
@click.option("--mode", type=click.Choice(["curves", "thresholds"]),
              default="curves", show_default=True)
@click.option("--strategy", "strategies", multiple=True,
              type=click.Choice(["A", "B"]), default=("B",), show_default=True)
@click.option("--q", "qs", multiple=True, type=int, default=(2,),
              show_default=True)
@click.option("--gamma-sd", "gammas", multiple=True, type=float,
              help="gamma_sd values for curve mode (dB).")
@click.option("--model", type=click.Choice(["awgn", "rayleigh",
                                            "fast-rayleigh"]),
              default="rayleigh", show_default=True)
@click.option("--samples", type=int, default=200_000, show_default=True)
@click.option("--grid-points", type=int, default=50, show_default=True)
@click.option("--precision", type=float, default=0.05, show_default=True,
              help="Threshold bisection precision in dB.")
@click.option("--energy", type=click.Choice(["info", "coded"]),
              default="info", show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def exit_cmd(mode, strategies, qs, gammas, model, samples, grid_points,
             precision, energy, seed, out, fmt, plot):
    """EXIT transfer curves or convergence thresholds."""
    from .simulate import ExperimentConfig  # default spec wiring

    geometry = NetworkGeometry()
    _, g_rd = compute_gains(geometry)
    grid = np.linspace(0.0, 1.0, grid_points + 1)[:-1]
    if mode == "curves":
        if not gammas:
            raise click.UsageError("curve mode needs at least one --gamma-sd")
        curves = []
        outer = None
        for strat in strategies:
            for q in qs:
                scfg = ExperimentConfig(q=q, strategy=strat).strategy_config()
                outer = exit_curve_outer(
                    list(scfg.source_specs), q, grid=np.linspace(0, 1, grid_points + 1),
                    samples=samples, seed=seed,
                )
                curves.append(outer)
                for gamma in gammas:
                    curves.append(exit_curve_inner(
                        scfg, q, gamma, gamma + g_rd, model,
                        grid=grid, samples=samples, seed=seed, energy=energy,
                    ))
        emit_results(curves, fmt, out, kind="exit")
        click.echo(f"{len(curves)} curves written to {out}")
        if plot:
            png = Path(out).with_suffix(".png")
            inner_curves = [c for c in curves if c.component == "inner"]
            plots.render_exit_plot(inner_curves, outer, png)
            click.echo(f"figure written to {png}")
        return
    rows = []
    for strat in strategies:
        for q in qs:
            scfg = ExperimentConfig(q=q, strategy=strat).strategy_config()
            th = find_threshold(
                scfg, q, geometry, model, precision_db=precision,
                grid=grid, samples=samples, seed=seed, energy=energy,
            )
            rows.append({"strategy": strat, "q": q, "threshold_db": th})
            click.echo(f"strategy {strat} q={q}: threshold {th:+.2f} dB")
    _write_rows(rows, fmt, out, "exit-thresholds")
    if plot:
        png = Path(out).with_suffix(".png")
        plots.render_threshold_plot(rows, png)
        click.echo(f"figure written to {png}")


@main.command()
@click.option("--qs", default="2,4,8,16,20,30,50,100", show_default=True,
              help="Comma-separated source counts.")
@click.option("--model", type=click.Choice(["awgn", "rayleigh",
                                            "fast-rayleigh"]),
              default="rayleigh", show_default=True)
@click.option("--energy", type=click.Choice(["info", "coded"]),
              default="info", show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def limits(qs, model, energy, out, fmt, plot):
    """Capacity-threshold table (sum-constrained and per-user forms)."""
    q_list = tuple(int(tok) for tok in qs.split(","))
    rows = threshold_table(q_list, model=model, energy=energy)
    for row in rows:
        click.echo(
            f"q={row['q']:4d}  threshold={row['threshold_db']:+.4f} dB  "
            f"per-user={row['threshold_per_user_db']:+.4f} dB  "
            f"R_eff={row['r_eff']:.4f}"
        )
    _write_rows(rows, fmt, out, "limits")
    if plot:
        png = Path(out).with_suffix(".png")
        plots.render_limits_plot(rows, png)
        click.echo(f"figure written to {png}")


@main.command()
@click.option("--n", type=int, default=None, help="Permutation size.")
@click.option("--spread", type=int, default=None,
              help="Spread S (default floor(sqrt(n/2))).")
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--load", "load_path", type=click.Path(exists=True),
              default=None, help="Verify and re-dump an existing file.")
@click.option("--out", type=click.Path(), required=True)
def interleaver(n, spread, seed, load_path, out):
    """Generate (or reload) a spread-constrained interleaver and dump it
    as a newline-separated index list."""
    if load_path:
        perm = Permutation.load(load_path)
        click.echo(f"loaded permutation of size {len(perm)} from {load_path}")
    else:
        if n is None:
            raise click.UsageError("--n is required unless --load is given")
        spread = spread if spread is not None else default_spread(n)
        try:
            perm = make_s_random_interleaver(n, spread, seed)
        except InterleaverConstructionError as exc:
            raise click.ClickException(str(exc))
        click.echo(f"built size-{n} permutation with spread {spread}")
    perm.save(out)
    click.echo(f"written to {out}")


def _write_rows(rows: list[dict], fmt: str, out, kind: str) -> None:
    import csv as _csv
    import io as _io

    path = Path(out)
    if fmt == "json":
        path.write_text(json.dumps(
            {"schema": f"relaycode-{kind}/1", "records": rows},
            indent=2, sort_keys=True,
        ) + "\n")
        return
    buf = _io.StringIO()
    buf.write(f"# schema: relaycode-{kind}/1\n")
    writer = _csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    path.write_text(buf.getvalue())


if __name__ == "__main__":
    sys.exit(main())
