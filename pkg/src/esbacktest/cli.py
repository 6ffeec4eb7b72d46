"""Command-line interface.

Subcommands: backtest (PIT file), mes (bivariate PIT file), simulate
(DGP to PIT file), fit-forecast (returns file), experiment (size/power
tables from a JSON config).

Exit codes: 0 success; 2 when the input contains no VaR violations
(no test can be computed); 1 for malformed input or configuration.
The default seed comes from --seed, else the ESBACKTEST_SEED
environment variable, else 0.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import dataio, dgplab, mctest, mesx, momentengine, report, riskmodels, rivals, xharness
from .errors import BacktestError, DomainError, InputError, NoViolationsError
from .momentengine import MomentFamily, MomentSpec
from .sampletx import extract_sample

GRID_PRESETS = ("global", "cc_var_dur", "cc_var", "cc_var_es", "uc_var_es")


def _default_seed() -> int:
    return int(os.environ.get("ESBACKTEST_SEED", "0"))


def _seed_option(f):
    return click.option("--seed", type=int, default=None,
                        help="RNG seed (default: $ESBACKTEST_SEED or 0)")(f)


def _resolve_seed(seed):
    return _default_seed() if seed is None else int(seed)


def _build_spec(test, K, Kprime, families, alpha) -> MomentSpec:
    if test == "custom":
        if not families:
            raise DomainError("--test custom requires --families")
        fams = []
        for name in families.split(","):
            try:
                fams.append(MomentFamily(name.strip().lower()))
            except ValueError:
                valid = ", ".join(f.value for f in MomentFamily)
                raise DomainError(f"unknown family {name!r}; choose from {valid}") from None
        return MomentSpec(K=K, Kprime=Kprime, families=tuple(fams), alpha=alpha)
    return momentengine.preset(test, K, Kprime, alpha)


def _format_table(rep: dict) -> str:
    lines = []
    out = rep["outcome"]
    lines.append(f"observations      {rep['sample']['observations']}")
    lines.append(f"violations        {rep['sample']['violations']}")
    lines.append(f"alpha             {rep['alpha']}")
    t = rep["test"]
    lines.append(f"test              {t['preset']} (K={t['K']}, K'={t['Kprime']}, "
                 f"{t['conditions']} conditions)")
    lines.append(f"statistic         {out['statistic']:.6f}")
    lines.append(f"p (asymptotic)    {out['p_asymptotic']:.6f}")
    if out["p_mc"] is not None:
        lines.append(f"p (Monte-Carlo)   {out['p_mc']:.6f}  [{out['mc_reps']} replications]")
    lines.append(f"reject at {out['level']:.0%}      {'yes' if out['reject'] else 'no'}")
    lines.append("")
    lines.append(f"{'condition':<22}{'mean':>12}{'m':>8}")
    for c in rep["conditions"]:
        label = f"{c['family']}({c['k']},{c['j']})" if c["k"] else f"{c['family']}({c['j']})"
        lines.append(f"{label:<22}{c['mean']:>12.5f}{c['m']:>8}")
    if "rivals" in rep:
        lines.append("")
        for name, r in rep["rivals"].items():
            p = r["p_mc"] if r.get("p_mc") is not None else r["p_asymptotic"]
            lines.append(f"{name:<22}stat {r['statistic']:>10.4f}   p {p:.4f}")
    return "\n".join(lines) + "\n"


def _emit(rep: dict, fmt: str) -> None:
    click.echo(report.to_json(rep) if fmt == "json" else _format_table(rep), nl=False)


def _backtest_report(sample, spec, seed, mc_reps, level, input_path, total_obs,
                     rival_entries=None) -> dict:
    outcome, mv = mctest.run_test(sample, spec, mc_reps=mc_reps or None, seed=seed)
    rep = report.header(seed)
    rep["input"] = {"path": str(input_path), "sha256": report.file_digest(input_path),
                    "rows": total_obs}
    rep["alpha"] = spec.alpha
    rep["test"] = report.spec_echo(spec)
    rep["sample"] = {"observations": total_obs, "violations": sample.n,
                     "boundary_severities": sample.n_boundary}
    rep["conditions"] = report.moment_entries(mv)
    rep["outcome"] = report.outcome_entry(outcome, level)
    if rival_entries:
        rep["rivals"] = rival_entries
    return rep


@click.group()
def cli():
    """Duration-severity backtests for VaR and Expected Shortfall."""


@cli.command()
@click.argument("pit_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--test", type=click.Choice(list(momentengine.PRESETS) + ["custom"]),
              default="global", show_default=True)
@click.option("--K", "K", type=int, default=1, show_default=True,
              help="max marginal polynomial order")
@click.option("--Kprime", "Kprime", type=int, default=2, show_default=True,
              help="max joint order k+j")
@click.option("--families", default=None,
              help="comma list of families for --test custom")
@click.option("--mc-reps", type=int, default=mctest.DEFAULT_MC_REPS, show_default=True,
              help="Monte-Carlo replications (0 disables the exact p-value)")
@click.option("--level", type=float, default=0.05, show_default=True)
@click.option("--rivals", "with_rivals", is_flag=True,
              help="include the mean/autocorrelation competitor tests")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json",
              show_default=True)
@_seed_option
def backtest(pit_csv, alpha, test, K, Kprime, families, mc_reps, level, with_rivals,
             fmt, seed):
    """Backtest a reported PIT series."""
    seed = _resolve_seed(seed)
    pit = dataio.read_pit_csv(pit_csv)
    spec = _build_spec(test, K, Kprime, families, alpha)
    sample = extract_sample(pit, alpha)
    rival_entries = None
    if with_rivals:
        uc = rivals.du_uc(pit, alpha)
        bp = rivals.du_bp(pit, alpha, m=5, mc_reps=mc_reps or None, seed=seed)
        rival_entries = {
            "du_uc": {"statistic": uc.statistic, "p_asymptotic": uc.p_asymptotic,
                      "p_mc": uc.p_mc},
            "du_bp": {"statistic": bp.statistic, "p_asymptotic": bp.p_asymptotic,
                      "p_mc": bp.p_mc},
        }
    rep = _backtest_report(sample, spec, seed, mc_reps, level, pit_csv, len(pit),
                           rival_entries)
    _emit(rep, fmt)


@cli.command()
@click.argument("bivariate_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--test", type=click.Choice(list(momentengine.PRESETS) + ["custom"]),
              default="global", show_default=True)
@click.option("--K", "K", type=int, default=1, show_default=True)
@click.option("--Kprime", "Kprime", type=int, default=2, show_default=True)
@click.option("--families", default=None)
@click.option("--mc-reps", type=int, default=mctest.DEFAULT_MC_REPS, show_default=True)
@click.option("--level", type=float, default=0.05, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json",
              show_default=True)
@_seed_option
def mes(bivariate_csv, alpha, test, K, Kprime, families, mc_reps, level, fmt, seed):
    """Backtest Marginal Expected Shortfall from bivariate PITs."""
    seed = _resolve_seed(seed)
    biv = dataio.read_bivariate_csv(bivariate_csv)
    spec = _build_spec(test, K, Kprime, families, alpha)
    sample = mesx.mes_sample(biv, alpha)
    rep = _backtest_report(sample, spec, seed, mc_reps, level, bivariate_csv, len(biv))
    rep["measure"] = "mes"
    _emit(rep, fmt)


def _parse_params(text) -> dgplab.GarchParams:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 6:
        raise DomainError("--params needs 6 comma-separated values: d0,d1,g0,g1,g2,nu")
    return dgplab.GarchParams(*(float(p) for p in parts))


@cli.command()
@click.option("--dgp", type=click.Choice([k.value for k in dgplab.DgpKind]), required=True)
@click.option("--T", "T", type=int, default=None, help="series length in days")
@click.option("--n", "n", type=int, default=None,
              help="violation count (direct DGPs only)")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--params", default="0,0.05,0.05,0.1,0.85,5",
              show_default=True, help="GARCH parameters d0,d1,g0,g1,g2,nu")
@click.option("--burn-in", type=int, default=dgplab.DEFAULT_BURN_IN, show_default=True)
@click.option("--raw-innovations", is_flag=True,
              help="raw t(nu) innovations instead of unit-variance")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_seed_option
def simulate(dgp, T, n, alpha, params, burn_in, raw_innovations, out, seed):
    """Simulate a DGP and write a PIT series file.

    Direct DGPs embed the drawn duration/severity pairs in a PIT
    series: violation days carry u = alpha*(1 - severity), all other
    days u = 0.5.
    """
    seed = _resolve_seed(seed)
    kind = dgplab.DgpKind(dgp)
    if kind.is_direct:
        if n is None:
            if T is None:
                raise DomainError("direct DGPs need --n or --T")
            n = xharness.direct_n(T, alpha)
        if kind is dgplab.DgpKind.NULL_DIRECT:
            sample = dgplab.simulate_direct_null(n, alpha, seed)
        else:
            sample = dgplab.simulate_alternative(kind, n, alpha, seed)
        total = int(sample.durations.sum())
        u = np.full(total, 0.5)
        u[np.cumsum(sample.durations) - 1] = alpha * (1.0 - sample.severities)
    else:
        if T is None:
            raise DomainError("GARCH DGPs need --T")
        p = _parse_params(params)
        path = dgplab.simulate_garch(p, T, burn_in=burn_in, seed=seed,
                                     standardized=not raw_innovations)
        if kind is dgplab.DgpKind.NULL_GARCH:
            u = dgplab.pit_true(path, p).values
        elif kind is dgplab.DgpKind.A4:
            u = dgplab.pit_bank_a4(path, p).values
        else:
            u = dgplab.pit_bank_a5(path, p).values
    dataio.write_pit_csv(out, u)
    click.echo(f"wrote {len(u)} PIT values to {out}")


@cli.command("fit-forecast")
@click.argument("returns_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--split-date", required=True,
              help="first out-of-sample date (ISO-8601)")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--mc-reps", type=int, default=mctest.DEFAULT_MC_REPS, show_default=True)
@click.option("--n-starts", type=int, default=8, show_default=True)
@click.option("--lb-lags", type=int, default=10, show_default=True)
@click.option("--level", type=float, default=0.05, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="directory for forecasts.csv and report.json")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json",
              show_default=True)
@_seed_option
def fit_forecast(returns_csv, split_date, alpha, mc_reps, n_starts, lb_lags, level,
                 out, fmt, seed):
    """Fit the volatility model in-sample, forecast out-of-sample, and
    run the full backtest grid on the out-of-sample PITs."""
    seed = _resolve_seed(seed)
    dates, returns = dataio.read_returns_csv(returns_csv)
    losses = -returns
    split_idx = next((i for i, d in enumerate(dates) if d >= split_date), len(dates))
    if split_idx < 100:
        raise DomainError(
            f"split at {split_date} leaves only {split_idx} in-sample points (minimum 100)"
        )
    if split_idx >= len(dates):
        raise DomainError(f"split at {split_date} leaves no out-of-sample points")
    y_in, y_oos = losses[:split_idx], losses[split_idx:]
    fit = riskmodels.fit(y_in, n_starts=n_starts, seed=seed)
    fc = riskmodels.forecast(fit.params, y_in, y_oos, alpha)
    _, _, resid = riskmodels.filter_series(fit.params, y_in)
    lb_raw = riskmodels.ljung_box(resid, lb_lags)
    lb_sq = riskmodels.ljung_box(resid**2, lb_lags)

    sample = extract_sample(fc.pit, alpha)
    grid = []
    for K in (1, 2, 3, 4):
        for Kp in (2, 3, 4, 5):
            row = {"K": K, "Kprime": Kp}
            for name in GRID_PRESETS:
                spec = momentengine.preset(name, K, Kp, alpha)
                outcome, _ = mctest.run_test(sample, spec, mc_reps=mc_reps or None,
                                             seed=seed)
                p = outcome.p_mc if outcome.p_mc is not None else outcome.p_asymptotic
                row[name] = {"p": p, "reject": bool(p <= level)}
            grid.append(row)

    p = fit.params
    rep = report.header(seed)
    rep["input"] = {"path": str(returns_csv),
                    "sha256": report.file_digest(returns_csv), "rows": len(dates)}
    rep["alpha"] = alpha
    rep["split"] = {"date": split_date, "in_sample": int(split_idx),
                    "out_of_sample": int(len(dates) - split_idx)}
    rep["fit"] = {
        "params": {"delta0": p.delta0, "delta1": p.delta1, "gamma0": p.gamma0,
                   "gamma1": p.gamma1, "gamma2": p.gamma2, "nu": p.nu},
        "loglik": fit.loglik,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "start_points_tried": fit.start_points_tried,
        "note": "parameters describe the loss series (negated returns)",
    }
    rep["diagnostics"] = {
        "ljung_box_residuals": {"lags": lb_lags, "statistic": lb_raw[0], "p": lb_raw[1]},
        "ljung_box_squared": {"lags": lb_lags, "statistic": lb_sq[0], "p": lb_sq[1]},
    }
    rep["sample"] = {"observations": int(len(y_oos)), "violations": sample.n,
                     "boundary_severities": sample.n_boundary}
    rep["pvalue_grid"] = grid

    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "forecasts.csv", "w") as fh:
            fh.write("date,loss,mean,sigma,var,es,u\n")
            for i, d in enumerate(dates[split_idx:]):
                row = (y_oos[i], fc.mean[i], fc.sigma[i], fc.var[i], fc.es[i], fc.pit[i])
                fh.write(d + "," + ",".join(repr(float(v)) for v in row) + "\n")
        (outdir / "report.json").write_text(report.to_json(rep))
    if fmt == "table":
        lines = [f"fitted params: {rep['fit']['params']}",
                 f"loglik {fit.loglik:.3f}  converged {fit.converged}",
                 f"out-of-sample violations: {sample.n}/{len(y_oos)}", "",
                 f"{'K':>2} {'Kp':>3} " + " ".join(f"{n:>11}" for n in GRID_PRESETS)]
        for row in grid:
            cells = " ".join(f"{row[n]['p']:>10.4f}{'*' if row[n]['reject'] else ' '}"
                             for n in GRID_PRESETS)
            lines.append(f"{row['K']:>2} {row['Kprime']:>3} {cells}")
        lines.append("")
        lines.append("* p-value at or below the test level")
        click.echo("\n".join(lines))
    else:
        click.echo(report.to_json(rep), nl=False)


@cli.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-prefix", default=None,
              help="write <prefix>.csv and <prefix>.json instead of stdout")
def experiment(config_file, out_prefix):
    """Run a size/power experiment described by a JSON config.

    Config keys: kind (size|power|rival), dgp, alpha, sample_sizes,
    K_values, Kprime_values, replications, level, size_corrected,
    preset, seed, crit_reps, burn_in, raw_innovations, and for
    kind=rival: test (bp_es|z_c) and m.
    """
    with open(config_file) as fh:
        raw = json.load(fh)
    kind = raw.pop("kind", "size")
    rival_test = raw.pop("test", None)
    m = raw.pop("m", 5)
    known = {f.name for f in dataclasses.fields(xharness.ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    if "params" in raw:
        raw["params"] = dgplab.GarchParams(*raw["params"])
    cfg = xharness.ExperimentConfig(**raw)
    if kind == "size":
        rows = xharness.size_experiment(cfg)
    elif kind == "power":
        rows = xharness.power_experiment(cfg)
    elif kind == "rival":
        if rival_test is None:
            raise DomainError("kind=rival needs a 'test' key (bp_es or z_c)")
        rows = xharness.rival_power_experiment(cfg, rival_test, m=m)
    else:
        raise DomainError(f"unknown experiment kind {kind!r}")
    if out_prefix:
        Path(out_prefix + ".csv").write_text(xharness.rows_to_csv(rows))
        Path(out_prefix + ".json").write_text(xharness.rows_to_json(rows))
        click.echo(f"wrote {out_prefix}.csv and {out_prefix}.json")
    else:
        click.echo(xharness.rows_to_csv(rows), nl=False)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as e:
        return int(e.exit_code)
    except click.Abort:
        return 1
    except click.UsageError as e:
        click.echo(f"error: {e.format_message()}", err=True)
        return 1
    except NoViolationsError as e:
        click.echo(f"error: {e}", err=True)
        return 2
    except (BacktestError, InputError, OSError, json.JSONDecodeError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
