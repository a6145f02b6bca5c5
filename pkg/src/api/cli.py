"""
Command-line frontend: analyze, sweep and generate

Every table is written as plain CSV so any plotting tool can draw the
accumulated C(q) curves and zeta traces.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from ..core.detect import DetectionPolicy, SweepReport
from ..core.engine import AnalysisConfig
from ..core.errors import AVRError, ConfigError
from ..core.ingest import (
    DEFAULT_DECIMALS,
    PriceSeries,
    SeriesFormat,
    SyntheticKind,
    SyntheticSpec,
    generate_synthetic,
    parse_series,
    serialize_series,
)
from ..core.mfcore import QGrid
from ..utils.tables import accumulated_frame, noise_frame, spectrum_frame, trace_frame
from .pipeline import CrisisPipeline, CrisisReport

logger = logging.getLogger(__name__)

BANNER = "=" * 70


@dataclass
class RunManifest:
    """
    Everything one analyze or sweep invocation needs

    Exactly one of ``input_path`` and ``synthetic`` is set.
    """
    config: AnalysisConfig
    policy: DetectionPolicy
    output_dir: Path
    input_path: Optional[Path] = None
    input_format: SeriesFormat = SeriesFormat.CSV_TWO_COLUMN
    synthetic: Optional[SyntheticSpec] = None
    emit_zeta_trace: bool = True
    emit_spectra: bool = True
    emit_noise_reference: bool = True
    emit_report: bool = True
    noise_seed: int = 0
    noise_basis: str = "levels"
    measured_noise_floor: bool = False
    reference_date: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if (self.input_path is None) == (self.synthetic is None):
            raise ConfigError("exactly one of an input file and a synthetic spec is required")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        self.output_dir = Path(self.output_dir)
        if self.output_dir.exists() and not self.output_dir.is_dir():
            raise ConfigError(f"output path {self.output_dir} is not a directory")

    def load_series(self) -> PriceSeries:
        if self.synthetic is not None:
            return generate_synthetic(self.synthetic)
        return parse_series(Path(self.input_path), self.input_format)

    def pipeline(self, series: PriceSeries) -> CrisisPipeline:
        return CrisisPipeline(
            series,
            config=self.config,
            policy=self.policy,
            seed=self.noise_seed,
            workers=self.workers,
            noise_basis=self.noise_basis,
        )


def _write_frame(frame, path: Path):
    frame.to_csv(path, index=False)
    logger.info("wrote %s", path)


def _write_report(report: CrisisReport, path: Path):
    path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    logger.info("wrote %s", path)


def _emit_analysis(manifest: RunManifest, report: CrisisReport, sweep: SweepReport):
    out = manifest.output_dir
    out.mkdir(parents=True, exist_ok=True)
    base = sweep.base_results

    if manifest.emit_zeta_trace:
        _write_frame(trace_frame(base), out / "zeta_trace.csv")
    if manifest.emit_spectra:
        _write_frame(accumulated_frame(base), out / "spectra_accumulated.csv")
        for event in report.events:
            window = base[event.n - 1]
            if window.spectrum is not None:
                _write_frame(spectrum_frame(window.spectrum), out / f"spectrum_{event.n}.csv")
    if manifest.emit_noise_reference and report.noise is not None and not report.noise.degenerate:
        _write_frame(noise_frame(base, report.noise.results), out / "noise_reference.csv")
    if manifest.emit_report:
        _write_report(report, out / "report.json")


def _print_summary(title: str, report: CrisisReport, elapsed: float):
    print(BANNER)
    print(title)
    print(BANNER)
    print(f"Series:  {report.series_name}")
    print(f"Window:  N={report.config.N}, T={report.config.T}, l={report.config.l}")
    print(f"Max zeta: {report.zeta_summary['max']}")
    if report.noise is not None:
        print(f"Noise max zeta: {report.noise.summary['max']}")
    print(f"Status:  {report.status}")
    for event in report.events:
        print(
            f"  - index {event.t_prime} ({event.label or 'no date'}): "
            f"zeta={event.zeta}, persistence={event.persistence:.2f}, {event.classification.value}"
        )
    print(f"Elapsed: {elapsed:.2f}s")


def cmd_analyze(manifest: RunManifest) -> int:
    """
    Run the detector on one series and write its tables

    Returns 0 whether or not events were found.
    """
    series = manifest.load_series()
    report, sweep, elapsed = manifest.pipeline(series).compute_complete_analysis(
        reference_index=manifest.reference_date,
        with_noise=manifest.emit_noise_reference,
        measured_noise_floor=manifest.measured_noise_floor,
    )
    _emit_analysis(manifest, report, sweep)
    _print_summary("AVR ANALYSIS", report, elapsed)
    return 0


def cmd_sweep(manifest: RunManifest) -> int:
    """Same as analyze, plus one zeta trace per sweep configuration"""
    series = manifest.load_series()
    report, sweep, elapsed = manifest.pipeline(series).compute_complete_analysis(
        reference_index=manifest.reference_date,
        with_noise=manifest.emit_noise_reference,
        measured_noise_floor=manifest.measured_noise_floor,
    )
    _emit_analysis(manifest, report, sweep)

    sweep_dir = manifest.output_dir / "sweep"
    sweep_dir.mkdir(parents=True, exist_ok=True)
    for (N, T, l), member in sorted(sweep.members.items()):
        _write_frame(trace_frame(member.results), sweep_dir / f"zeta_N{N}_T{T}_l{l}.csv")

    _print_summary("AVR ROBUSTNESS SWEEP", report, elapsed)
    print(f"Configurations: {len(sweep.members)} run, {len(sweep.skipped)} skipped")
    return 0


def cmd_generate(spec: SyntheticSpec, output_path: Path, format: SeriesFormat = SeriesFormat.PLAIN_VALUES) -> int:
    """Write a seeded synthetic series"""
    series = generate_synthetic(spec)
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(serialize_series(series, format))
    logger.info("wrote %d values to %s", len(series), output_path)
    return 0


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _decimals(text: str) -> Optional[int]:
    if text.strip().lower() == "none":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'none', got {text!r}")


def _add_synthetic_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("synthetic series")
    group.add_argument("--length", type=int, default=5000)
    group.add_argument("--mean", type=float, default=0.0)
    group.add_argument("--variance", type=float, default=1.0)
    group.add_argument("--crash-index", type=int, default=None)
    group.add_argument("--crash-magnitude", type=float, default=None)
    group.add_argument("--seed", type=int, default=0, help="seed of the synthetic series")
    group.add_argument(
        "--decimals", type=_decimals, default=DEFAULT_DECIMALS,
        help="decimal places of the synthetic values, 'none' keeps raw draws",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avr-crisis", description="Multifractal area-variation-rate crisis detector")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run_options = argparse.ArgumentParser(add_help=False)
    source = run_options.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", type=Path, help="closing-value file")
    source.add_argument("--synthetic", choices=[k.value for k in SyntheticKind], help="analyze a synthetic series")
    run_options.add_argument("--format", choices=[f.value for f in SeriesFormat], default=SeriesFormat.CSV_TWO_COLUMN.value)
    run_options.add_argument("--out", type=Path, default=Path("avr_output"), help="output directory")
    window = run_options.add_argument_group("window")
    window.add_argument("--window", type=int, default=1000, help="window size N")
    window.add_argument("--lag", type=int, default=1, help="increment lag T")
    window.add_argument("--shift", type=int, default=1, help="window shift l")
    window.add_argument("--t0", type=int, default=0, help="start index of window 1")
    window.add_argument("--warmup", type=int, default=1)
    window.add_argument("--qmin", type=float, default=-5.0)
    window.add_argument("--qmax", type=float, default=5.0)
    window.add_argument("--dq", type=float, default=0.1)
    detection = run_options.add_argument_group("detection")
    detection.add_argument("--noise-floor", type=float, default=1e-3)
    detection.add_argument("--jump-factor", type=float, default=10.0)
    detection.add_argument("--lobe-prominence", type=float, default=0.05)
    detection.add_argument("--persistence", type=float, default=0.8)
    detection.add_argument("--sweep-windows", type=_int_list, default=[500, 1000, 1500])
    detection.add_argument("--sweep-lags", type=_int_list, default=[1, 2, 5])
    detection.add_argument("--sweep-shifts", type=_int_list, default=[1, 5])
    detection.add_argument("--measured-noise-floor", action="store_true", help="use the noise reference maximum as noise floor")
    detection.add_argument("--noise-seed", type=int, default=None, help="seed of the noise reference, defaults to --seed")
    detection.add_argument("--noise-basis", choices=["levels", "increments"], default="levels")
    detection.add_argument("--reference-date", default=None, help="date label or index for lead times")
    run_options.add_argument("--no-spectra", action="store_true")
    run_options.add_argument("--no-noise-reference", action="store_true")
    run_options.add_argument("--workers", type=int, default=1)
    _add_synthetic_arguments(run_options)

    commands.add_parser("analyze", parents=[run_options], help="zeta trace, noise reference and classified events")
    commands.add_parser("sweep", parents=[run_options], help="analyze plus one zeta trace per sweep configuration")

    generate = commands.add_parser("generate", help="write a seeded synthetic series")
    generate.add_argument("--kind", choices=[k.value for k in SyntheticKind], default=SyntheticKind.WHITE_NOISE.value)
    generate.add_argument("--format", choices=[f.value for f in SeriesFormat], default=SeriesFormat.PLAIN_VALUES.value)
    generate.add_argument("--out", type=Path, required=True, help="output file")
    _add_synthetic_arguments(generate)

    return parser


def _synthetic_spec(args, kind: str) -> SyntheticSpec:
    return SyntheticSpec(
        kind=SyntheticKind(kind),
        length=args.length,
        mean=args.mean,
        variance=args.variance,
        seed=args.seed,
        crash_index=args.crash_index,
        crash_magnitude=args.crash_magnitude,
        decimals=args.decimals,
    )


def manifest_from_args(args) -> RunManifest:
    """Validated manifest of an analyze or sweep invocation"""
    config = AnalysisConfig(
        N=args.window,
        T=args.lag,
        l=args.shift,
        grid=QGrid(args.qmin, args.qmax, args.dq),
        t0=args.t0,
        warmup=args.warmup,
    )
    policy = DetectionPolicy(
        noise_floor=args.noise_floor,
        jump_factor=args.jump_factor,
        lobe_prominence=args.lobe_prominence,
        sweep_persistence=args.persistence,
        sweep_N=tuple(args.sweep_windows),
        sweep_T=tuple(args.sweep_lags),
        sweep_l=tuple(args.sweep_shifts),
    )
    reference = args.reference_date
    if reference is not None and reference.lstrip("-").isdigit():
        reference = int(reference)
    return RunManifest(
        config=config,
        policy=policy,
        output_dir=args.out,
        input_path=args.input,
        input_format=SeriesFormat(args.format),
        synthetic=_synthetic_spec(args, args.synthetic) if args.synthetic else None,
        emit_spectra=not args.no_spectra,
        emit_noise_reference=not args.no_noise_reference,
        noise_seed=args.seed if args.noise_seed is None else args.noise_seed,
        noise_basis=args.noise_basis,
        measured_noise_floor=args.measured_noise_floor,
        reference_date=reference,
        workers=args.workers,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the ``avr-crisis`` command

    Exit codes: 0 success, 1 I/O or other failure, 2 parse error, 3 invalid
    configuration, 4 degenerate data.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        if args.command == "generate":
            return cmd_generate(_synthetic_spec(args, args.kind), args.out, SeriesFormat(args.format))
        manifest = manifest_from_args(args)
        if args.command == "sweep":
            return cmd_sweep(manifest)
        return cmd_analyze(manifest)
    except AVRError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("I/O failure: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
