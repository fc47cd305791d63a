"""
wustat command-line entry point.

Every subcommand reads one YAML config, writes CSV/JSON results under the output
directory and finishes with a manifest.json listing each output with its digest.

Usage:
    uv run wustat clt --config presets/correlation_integral.yaml --out results/correlation_integral
    uv run wustat gmc --config presets/gmc_ar1.yaml --seed 7
    uv run wustat longmem limitvar --config presets/wilcoxon.yaml
"""
import argparse
import hashlib
import json
import logging
import sys
from collections.abc import Callable
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from diagnostics.contraction import (
    condition3_score,
    estimate_delta,
    estimate_gmc,
    estimate_theta_tilde,
    probe_concentration,
    theta_grid,
)
from errors import ConfigError, DomainError, UnsupportedModeError
from harness.runner import qq_frame, replicates_frame, run_experiment, summarize
from longmem.decomposition import condition27_check, rate_exponent, z_term_for_path, z_term_wilcoxon
from longmem.quadrature import limit_variance
from processes.generate import generate, generate_coupled, memory_tail_variance
from processes.models import LinearProcessSpec
from statistic.engine import compute, compute_banded, compute_dense, correlation_integral, signed_rank
from statistic.models import IndicatorDistanceKernel
from statistic.weights import diagnose, diagnostics_frame
from toolkit.config import load_settings
from toolkit.configfile import dump_config, experiment_config, parse_config
from toolkit.models import ConfigFile, OutputEntry, RunManifest

logger = logging.getLogger(__name__)

TOOLKIT_VERSION = "0.1.0"
DEFAULT_OUTPUT_DIR = Path("results")
FLOAT_FORMAT = "%.17g"

SUBCOMMANDS = ('simulate', 'ustat', 'gmc', 'delta', 'theta', 'concentration', 'weights', 'clt', 'longmem')
LONGMEM_ACTIONS = ('rates', 'zterm', 'limitvar', 'cond27')

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    """Bad command line; reported with the usage text and exit status 1."""


class ToolkitParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> ToolkitParser:
    parser = ToolkitParser(prog='wustat', description="Weighted U-statistics for dependent processes")
    sub = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND', parser_class=ToolkitParser)
    sub.required = True
    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name, help=f"run {name}")
        if name == 'longmem':
            cmd.add_argument('action', choices=LONGMEM_ACTIONS, help="longmem sub-action")
        cmd.add_argument('--config', required=True, type=Path, help="YAML config file")
        cmd.add_argument('--seed', type=int, default=None, help="Override the config seed (unsigned 64-bit)")
        cmd.add_argument('--out', type=Path, default=None, help="Output directory")
        cmd.add_argument('--threads', type=int, default=None, help="Cap on worker threads (default: 1)")
    return parser


def _require(config: ConfigFile, command: str, *sections: str) -> None:
    missing = [f"'{s}' section is required for {command}" for s in sections if getattr(config, s) is None]
    if missing:
        raise ConfigError(missing)


class Outputs:
    """Writes result files with round-trip float formatting and remembers them."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.written: list[Path] = []
        directory.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, frame: pd.DataFrame) -> None:
        path = self.directory / name
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        self.written.append(path)

    def json(self, name: str, payload) -> None:
        path = self.directory / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        self.written.append(path)


def cmd_simulate(config: ConfigFile, seed: int, out: Outputs, threads: int) -> None:
    _require(config, 'simulate', 'process')
    section = config.simulate
    if section.coupled:
        pair = generate_coupled(config.process, section.n, section.coupled, seed, z0=section.z0)
        out.csv('path.csv', pd.DataFrame({
            't': np.arange(0, section.n + 1),
            'primary': np.concatenate([[pair.primary_start], pair.primary.values]),
            'shadow': np.concatenate([[pair.shadow_start], pair.shadow.values]),
        }))
        out.json('summary.json', {'n': section.n, 'seed': seed, 'mode': pair.mode,
                                  'coupling_time': pair.coupling_time,
                                  'spec_fingerprint': pair.primary.spec_fingerprint})
        return
    path = generate(config.process, section.n, seed, retain_innovations=section.retain_innovations)
    out.csv('path.csv', pd.DataFrame({'t': np.arange(1, path.n + 1), 'value': path.values}))
    if path.innovations is not None:
        offset = path.innovations.size - path.n
        out.csv('innovations.csv', pd.DataFrame({
            'index': np.arange(1 - offset, path.n + 1),
            'value': path.innovations,
        }))
    out.json('summary.json', {'n': path.n, 'seed': seed, 'spec_fingerprint': path.spec_fingerprint,
                              'path_fingerprint': path.fingerprint})


def _load_path(config: ConfigFile, seed: int) -> np.ndarray:
    section = config.ustat
    if section.path_file is None:
        _require(config, 'ustat without path_file', 'process')
        return generate(config.process, section.n, seed, retain_innovations=False).values
    frame = pd.read_csv(section.path_file, header=None, comment='#')
    if frame.shape[1] != 1:
        raise ValueError(f"{section.path_file}: expected one real per line")
    return frame.iloc[:, 0].to_numpy(dtype=np.float64)


def cmd_ustat(config: ConfigFile, seed: int, out: Outputs, threads: int) -> None:
    section = config.ustat
    x = _load_path(config, seed)
    if section.method == 'signed_rank':
        result = signed_rank(x)
        out.json('ustat.json', {'value': result.value, 'n': result.n, 'method': 'signed_rank',
                                'pair_count': result.pair_count,
                                'flags': ['ties broken by index'] if result.ties_broken else []})
        return
    if section.method == 'correlation_integral':
        if not isinstance(config.kernel, IndicatorDistanceKernel):
            raise ConfigError(["ustat: correlation_integral needs an indicator_distance kernel"])
        result = correlation_integral(x, config.kernel.b)
    else:
        _require(config, 'ustat', 'weights', 'kernel')
        method = {'auto': compute, 'dense': compute_dense, 'banded': compute_banded}[section.method]
        if section.method == 'banded':
            result = method(x, config.weights, config.kernel, section.include_diagonal)
        else:
            result = method(x, config.weights, config.kernel, section.include_diagonal, n_jobs=threads)
    payload = result.to_dict()
    out.json('ustat.json', {k: payload[k] for k in ('value', 'n', 'method', 'flags', 'include_diagonal')})


def cmd_gmc(config: ConfigFile, seed: int, out: Outputs, threads: int) -> None:
    _require(config, 'gmc', 'process')
    d = config.diagnostics
    estimate = estimate_gmc(config.process, d.alpha, d.horizons, max(d.reps, 1000), seed)
    out.csv('gmc.csv', pd.DataFrame([p.model_dump() for p in estimate.moment_curve]))
    out.json('gmc.json', estimate.model_dump(mode='json', exclude={'moment_curve'}))


def cmd_delta(config: ConfigFile, seed: int, out: Outputs, threads: int) -> None:
    _require(config, 'delta', 'process', 'kernel')
    d = config.diagnostics
    curve = estimate_delta(config.process, config.kernel, d.ell_grid, d.j_grid, d.reps, seed)
    out.csv('delta.csv', pd.DataFrame([p.model_dump() for p in curve.points]))
    out.json('delta.json', curve.model_dump(mode='json', exclude={'points'}))


def cmd_theta(config: ConfigFile, seed: int, out: Outputs, threads: int) -> None:
    _require(config, 'theta', 'process', 'kernel')
    d = config.diagnostics
    thetas = theta_grid(config.process, config.kernel, d.theta_lags, d.theta_indices,
                        d.outer_reps, d.inner_reps, seed)
    out.csv('theta.csv', pd.DataFrame([t.model_dump() for t in thetas]))
    if d.theta_tilde and isinstance(config.process, LinearProcessSpec):
        tilde = [
            estimate_theta_tilde(config.process, config.kernel, t.i, t.j, d.ell_grid,
                                 d.outer_reps, d.inner_reps, seed)
            for t in thetas
        ]
        out.csv('theta_tilde.csv', pd.DataFrame([t.model_dump() for t in tilde]))
    if config.weights is not None:
        out.json('condition3.json', condition3_score(config.weights, thetas).model_dump(mode='json'))


def cmd_concentration(config: ConfigFile, seed: int, out: Outputs, threads: int) -> None:
    _require(config, 'concentration', 'process')
    d = config.diagnostics
    probe = probe_concentration(config.process, d.j_grid, d.tau_grid, d.x_points, max(d.reps, 100), seed)
    out.csv('concentration.csv', pd.DataFrame([p.model_dump() for p in probe.points]))
    out.json('concentration.json', probe.model_dump(mode='json', exclude={'points'}))


def cmd_weights(config: ConfigFile, seed: int, out: Outputs, threads: int) -> None:
    _require(config, 'weights', 'weights')
    diag = diagnose(config.weights, config.diagnostics.n_max)
    out.csv('weights.csv', diagnostics_frame(diag))
    out.json('weights.json', diag.model_dump(
        mode='json', include={'summable', 'liminf_positive', 'ratio_vanishes', 'flags'}
    ))


def cmd_clt(config: ConfigFile, seed: int, out: Outputs, threads: int) -> None:
    _require(config, 'clt', 'process', 'kernel', 'weights', 'experiment')
    experiment = experiment_config(config, seed)
    results = run_experiment(experiment, n_jobs=threads)
    report = summarize(experiment, results)
    out.csv('replicates.csv', replicates_frame(results))
    out.json('report.json', report.model_dump(mode='json'))
    out.csv('qq.csv', qq_frame(report))


def _longmem_rates(config: ConfigFile, out: Outputs) -> None:
    section = config.longmem
    rows = [{'case': name, 'beta': None, 'exponent': rate_exponent(name), 'note': ''}
            for name in ('clt_summable', 'clt_w1_theorem11', 'correlation_integral')]
    for example in ('sample_covariance', 'wilcoxon'):
        for beta in section.betas:
            case = section.case.model_copy(update={'example': example, 'beta': beta})
            try:
                rows.append({'case': example, 'beta': beta, 'exponent': rate_exponent(case), 'note': ''})
            except DomainError as e:
                rows.append({'case': example, 'beta': beta, 'exponent': None, 'note': str(e)})
    out.csv('rates.csv', pd.DataFrame(rows))


def _longmem_zterm(config: ConfigFile, seed: int, out: Outputs) -> None:
    _require(config, 'longmem zterm', 'process')
    if not isinstance(config.process, LinearProcessSpec):
        raise ConfigError(["longmem zterm: process must be linear"])
    section = config.longmem
    case = section.case
    wilcoxon = case.example == 'wilcoxon'
    rows = []
    for rep in range(section.replicates):
        path = generate(config.process, section.n, seed, stream=(rep,), retain_innovations=not wilcoxon)
        if wilcoxon:
            term = z_term_wilcoxon(path, config.process)
        else:
            term = z_term_for_path(path, config.process, case.lag)
        rows.append({'rep': rep, 'n': section.n, 'example': case.example, 'r': term.r,
                     'lag': None if wilcoxon else case.lag, 'z_term': term.value})
    out.csv('zterm.csv', pd.DataFrame(rows))


def _longmem_limitvar(config: ConfigFile, seed: int, out: Outputs) -> None:
    section = config.longmem
    beta = section.case.beta
    entries = []
    for r in range(1, section.r_max + 1):
        if r * (2.0 * beta - 1.0) >= 1.0:
            logger.info(f"r={r}: r(2 beta - 1) >= 1, limit integral diverges; skipped")
            continue
        result = limit_variance(beta, r, seed=seed)
        entries.append(result.model_dump(mode='json') | {'rel_gap': result.rel_gap})
    out.json('limitvar.json', {'beta': beta, 'integrals': entries})


def _longmem_cond27(config: ConfigFile, out: Outputs) -> None:
    section = config.longmem
    rows = [
        condition27_check(section.case.beta, rho, name).model_dump()
        for rho in section.rho_grid
        for name in section.slowly_varying
    ]
    out.csv('cond27.csv', pd.DataFrame(rows))


def cmd_longmem(config: ConfigFile, seed: int, out: Outputs, threads: int, action: str) -> None:
    _require(config, 'longmem', 'longmem')
    if action == 'rates':
        _longmem_rates(config, out)
    elif action == 'zterm':
        _longmem_zterm(config, seed, out)
    elif action == 'limitvar':
        _longmem_limitvar(config, seed, out)
    else:
        _longmem_cond27(config, out)


HANDLERS: dict[str, Callable] = {
    'simulate': cmd_simulate,
    'ustat': cmd_ustat,
    'gmc': cmd_gmc,
    'delta': cmd_delta,
    'theta': cmd_theta,
    'concentration': cmd_concentration,
    'weights': cmd_weights,
    'clt': cmd_clt,
    'longmem': cmd_longmem,
}


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def dispatch(
    subcommand: str,
    config: ConfigFile,
    *,
    seed: int | None = None,
    out: Path | None = None,
    threads: int | None = None,
    action: str | None = None,
) -> RunManifest:
    """Run one subcommand and write its outputs plus manifest.json.

    Output directory precedence: ``out`` > WUSTAT_OUTPUT_DIR > config output.directory > ./results.
    """
    if subcommand not in HANDLERS:
        raise ValueError(f"Unknown subcommand '{subcommand}', expected one of {SUBCOMMANDS}")
    settings = load_settings()
    seed = config.seed if seed is None else seed
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    threads = settings.threads if threads is None else threads
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    directory = out or settings.output_dir or (
        Path(config.output.directory) if config.output.directory else DEFAULT_OUTPUT_DIR
    )
    effective = config.model_copy(update={'seed': seed})
    digest = hashlib.sha256(dump_config(effective).encode('utf-8')).hexdigest()

    started = datetime.now(timezone.utc)
    logger.info(f"{subcommand}: seed={seed}, threads={threads}, output={directory}")
    outputs = Outputs(Path(directory))
    bias = memory_tail_variance(config.process) if isinstance(config.process, LinearProcessSpec) else None
    if bias is not None:
        logger.info(f"{subcommand}: history cutoff M={config.process.memory} drops variance {bias:.3g} per value")
    handler = HANDLERS[subcommand]
    if subcommand == 'longmem':
        handler(config, seed, outputs, threads, action or 'rates')
    else:
        handler(config, seed, outputs, threads)

    manifest = RunManifest(
        subcommand=subcommand if action is None else f"{subcommand} {action}",
        version=TOOLKIT_VERSION,
        config_digest=digest,
        seed=seed,
        started_at=started,
        finished_at=datetime.now(timezone.utc),
        outputs=[OutputEntry(name=p.name, sha256=_digest(p), bytes=p.stat().st_size) for p in outputs.written],
        truncation_bias=bias,
    )
    (outputs.directory / 'manifest.json').write_text(manifest.model_dump_json(indent=2) + '\n', encoding='utf-8')
    logger.info(f"{subcommand}: wrote {len(outputs.written)} file(s) to {outputs.directory}")
    return manifest


def main(argv: list[str] | None = None) -> int:
    """CLI entry point; returns 0 on success, 1 on usage/validation errors, 2 on runtime failures.

    DomainError and UnsupportedModeError raised after the config parsed are runtime failures.
    """
    settings = load_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE

    try:
        config = parse_config(args.config)
        dispatch(
            args.subcommand,
            config,
            seed=args.seed,
            out=args.out,
            threads=args.threads,
            action=getattr(args, 'action', None),
        )
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (DomainError, UnsupportedModeError) as e:
        command = " ".join(filter(None, (args.subcommand, getattr(args, 'action', None))))
        logger.error(f"{command} failed: {type(e).__name__}: {e}")
        return EXIT_RUNTIME
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"{args.subcommand} failed: {e}", exc_info=True)
        return EXIT_RUNTIME
    return 0


if __name__ == '__main__':
    sys.exit(main())
