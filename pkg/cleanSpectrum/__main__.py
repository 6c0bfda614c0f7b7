"""
Main entry point for the cleanSpectrum package when run as a module.

Subcommands: gen, train, clean, rie, eval, compare, noise.
Uses Python 3.10+ type annotations.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

import numpy as np

import cleanSpectrum.config
import cleanSpectrum.matcore
from cleanSpectrum.config import DEFAULT_METHOD_MIX, ConfigManager, Settings, get_settings
from cleanSpectrum.dataset import generate_dataset, load_records
from cleanSpectrum.error_formatter import get_error_summary, print_error
from cleanSpectrum.errors import CleanSpectrumError, DatasetError, FileOperationError, PreconditionError
from cleanSpectrum.evaluation import NAMED_SPECTRA, compare_single, evaluate, named_spectrum, noise_profile
from cleanSpectrum.exporters import ResultExporter
from cleanSpectrum.generators import GeneratorTag
from cleanSpectrum.logging_config import configure_logging
from cleanSpectrum.matcore import Rng, derive_seed
from cleanSpectrum.model_io import load_model, save_model
from cleanSpectrum.network import MlpModel, ModelVariant, clean, train
from cleanSpectrum.rie import StieltjesEstimate, rie_clean
from cleanSpectrum.validators import DatasetManifest, NoiseRatio, TrainConfig

# Set up logger
logger = logging.getLogger("cleanSpectrum")


def parse_int_list(text: str) -> list[int]:
    """Parse "300,200" into [300, 200]."""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from e


def parse_t_grid(text: str) -> list[int]:
    """Parse "40:160:8" (inclusive range) or "40,80,160"."""
    if ":" in text:
        try:
            parts = [int(part) for part in text.split(":")]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"invalid T grid '{text}'") from e
        if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] < 1):
            raise argparse.ArgumentTypeError(f"T grid must be start:stop[:step], got '{text}'")
        step = parts[2] if len(parts) == 3 else 1
        return list(range(parts[0], parts[1] + 1, step))
    return parse_int_list(text)


def parse_mix(text: str) -> dict[str, float]:
    """
    Parse a method mix: four weights in generator order
    ("0.25,0.25,0.25,0.25") or name=weight pairs ("spectrum_sketch=1").
    """
    tags = [tag.value for tag in GeneratorTag]
    try:
        if "=" in text:
            mix = {tag: 0.0 for tag in tags}
            for pair in text.split(","):
                name, weight = pair.split("=")
                mix[name.strip()] = float(weight)
            return mix
        weights = [float(part) for part in text.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid method mix '{text}'") from e
    if len(weights) != len(tags):
        raise argparse.ArgumentTypeError(f"method mix needs {len(tags)} weights ({', '.join(tags)})")
    return dict(zip(tags, weights))


def read_spectrum_file(path: str) -> np.ndarray:
    """Read whitespace- or comma-separated eigenvalues."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileOperationError(f"Cannot read spectrum file: {e}", file_path=path) from e
    try:
        values = np.array([float(token) for token in text.replace(",", " ").split()])
    except ValueError as e:
        raise PreconditionError(f"Spectrum file contains a non-numeric value: {e}") from e
    if values.size == 0:
        raise PreconditionError("Spectrum file is empty")
    return values


def print_spectrum(values: Sequence[float]) -> None:
    for value in values:
        print(repr(float(value)))


def setup_argparse() -> argparse.ArgumentParser:
    """
    Set up command-line argument parsing.
    """
    parser = argparse.ArgumentParser(
        prog="cleanspectrum",
        description="Estimate population correlation eigenvalues from noisy sample spectra"
    )

    # Configuration file parameters
    parser.add_argument("--config", help="Path to configuration file (YAML or JSON)")
    parser.add_argument("--profile", default="default",
                        help="Configuration profile to use")
    parser.add_argument("--eigen-method", choices=["lapack", "jacobi"],
                        help="Symmetric eigensolver backend")
    parser.add_argument("--no-progress", action="store_true", help="Disable progress bars")

    # Logging options
    parser.add_argument("--log-level", choices=["debug", "info", "warning", "error", "critical"],
                        default="info", help="Set logging level (default: info)")
    parser.add_argument("--json-logs", action="store_true", help="Output logs in JSON format")
    parser.add_argument("--log-file", help="Write logs to specified file")

    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="Generate a dataset of paired spectra")
    gen.add_argument("--n", type=int, required=True, help="Dimension N")
    gen.add_argument("--t-min", type=int, required=True, help="Smallest sample count T (>= N)")
    gen.add_argument("--t-max", type=int, required=True, help="Largest sample count T")
    gen.add_argument("--count", type=int, required=True, help="Number of records")
    gen.add_argument("--mix", type=parse_mix, default=None,
                     help="Generator weights: 4 numbers or name=weight pairs (default: equal)")
    gen.add_argument("--seed", type=int, required=True, help="Master seed")
    gen.add_argument("--out", required=True, help="Dataset file (JSON lines)")
    gen.add_argument("--workers", type=int, help="Worker processes")
    gen.add_argument("--no-direct", action="store_true",
                     help="Sample spectrum-sketch records through full matrices")

    tr = subparsers.add_parser("train", help="Train an autoencoder on a dataset")
    tr.add_argument("--data", required=True, help="Training dataset")
    tr.add_argument("--n", type=int, help="Dimension N (checked against the data)")
    tr.add_argument("--hidden", type=parse_int_list, help="Hidden widths (default: 300,200)")
    tr.add_argument("--dropout", type=float, help="Drop probability on the second hidden layer")
    tr.add_argument("--epochs", type=int, help="Training epochs")
    tr.add_argument("--lr", type=float, help="Learning rate")
    tr.add_argument("--batch", type=int, help="Mini-batch size")
    tr.add_argument("--seed", type=int, default=0, help="Seed for initialization and shuffling")
    tr.add_argument("--out-model", required=True, help="Model file to write")
    tr.add_argument("--loss-csv", help="Loss history CSV (default: <out-model>.loss.csv)")
    tr.add_argument("--variant", choices=[v.value for v in ModelVariant], default="adjusted")
    tr.add_argument("--optimizer", choices=["adam", "sgd"])
    tr.add_argument("--tied", action="store_true", help="Tie decoder weights to encoder transposes")

    cl = subparsers.add_parser("clean", help="Clean a sample spectrum with a trained model")
    cl.add_argument("--model", required=True)
    cl.add_argument("--spectrum-file", required=True)
    cl.add_argument("--t", type=int, required=True, help="Sample count T")
    cl.add_argument("--no-rescale", action="store_true")

    ri = subparsers.add_parser("rie", help="Clean a sample spectrum with the RIE")
    ri.add_argument("--spectrum-file", required=True)
    ri.add_argument("--n", type=int, required=True)
    ri.add_argument("--t", type=int, required=True)
    ri.add_argument("--no-rescale", action="store_true")
    ri.add_argument("--leave-one-out", action="store_true")
    ri.add_argument("--estimate", choices=[e.value for e in StieltjesEstimate],
                    help="Stieltjes transform estimate (default: kernel)")

    ev = subparsers.add_parser("eval", help="MSE of sample, RIE and model over a T grid")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--t-grid", type=parse_t_grid, required=True, help="start:stop[:step] or list")
    ev.add_argument("--out-csv", required=True)
    ev.add_argument("--resample", action="store_true",
                    help="Re-sample every record at every grid T")

    co = subparsers.add_parser("compare", help="Spectra and L2 distances for one record")
    co.add_argument("--model", required=True)
    co.add_argument("--data", required=True)
    co.add_argument("--record-index", type=int, required=True)
    co.add_argument("--out-json", help="Write the panel data here instead of standard output")

    no = subparsers.add_parser("noise", help="Sample spectra of a named population at several T")
    no.add_argument("--shape", choices=NAMED_SPECTRA, default="exponential")
    no.add_argument("--n", type=int, default=180)
    no.add_argument("--t-values", type=parse_int_list, default=[1800, 360, 180])
    no.add_argument("--seed", type=int, default=0)
    no.add_argument("--out-csv", help="Write CSV here instead of standard output")

    return parser


def handle_gen(args: argparse.Namespace, settings: Settings) -> int:
    manifest = DatasetManifest(
        n=args.n,
        t_min=args.t_min,
        t_max=args.t_max,
        method_mix=args.mix or DEFAULT_METHOD_MIX,
        count=args.count,
        master_seed=args.seed,
        direct_spectrum=not args.no_direct,
        retry_budget=settings.retry_budget,
    )
    metrics = generate_dataset(manifest, args.out, workers=settings.workers,
                               show_progress=settings.show_progress,
                               precision=settings.givens_precision)
    metrics.log_summary()
    return 0


def handle_train(args: argparse.Namespace, settings: Settings) -> int:
    records = load_records(args.data)
    if not records:
        raise DatasetError("Training dataset is empty", file_path=args.data)
    n = records[0].n
    if args.n is not None and args.n != n:
        raise DatasetError(f"--n {args.n} does not match the dataset dimension {n}", file_path=args.data)

    model = MlpModel.build(n, Rng(derive_seed(args.seed, 0)), hidden=settings.hidden,
                           dropout=settings.dropout, variant=ModelVariant(args.variant),
                           tied=args.tied)
    cfg = TrainConfig(
        learning_rate=settings.learning_rate,
        batch_size=settings.batch_size,
        epochs=settings.epochs,
        seed=derive_seed(args.seed, 1),
        optimizer=settings.optimizer,
        dropout=settings.dropout > 0.0,
        show_progress=settings.show_progress,
    )
    result = train(model, records, cfg)

    model_path = save_model(result.model, args.out_model)
    loss_path = Path(args.loss_csv) if args.loss_csv else model_path.with_name(model_path.name + ".loss.csv")
    ResultExporter(loss_path.parent).export_loss_history_csv(result.loss_history, loss_path.name)
    return 0


def handle_clean(args: argparse.Namespace, settings: Settings) -> int:
    model = load_model(args.model)
    spectrum = read_spectrum_file(args.spectrum_file)
    noise = NoiseRatio(n=spectrum.size, t=args.t)
    cleaned = clean(model, spectrum, noise.q, rescale=settings.clean_rescale and not args.no_rescale)
    if cleaned.inversions:
        logger.info("Model output needed re-sorting (%d inversion(s))", cleaned.inversions)
    print_spectrum(cleaned.values)
    return 0


def handle_rie(args: argparse.Namespace, settings: Settings) -> int:
    spectrum = read_spectrum_file(args.spectrum_file)
    if spectrum.size != args.n:
        raise PreconditionError(f"Spectrum file holds {spectrum.size} values but --n is {args.n}",
                                condition="len(spectrum) == N")
    noise = NoiseRatio(n=args.n, t=args.t)
    cleaned = rie_clean(spectrum, noise, rescale=settings.rie_rescale and not args.no_rescale,
                        leave_one_out=settings.rie_leave_one_out or args.leave_one_out,
                        estimate=settings.rie_estimate)
    print_spectrum(cleaned)
    return 0


def handle_eval(args: argparse.Namespace, settings: Settings) -> int:
    model = load_model(args.model)
    report = evaluate(model, load_records(args.data), args.t_grid, resample=args.resample,
                      clean_rescale=settings.clean_rescale, rie_rescale=settings.rie_rescale,
                      leave_one_out=settings.rie_leave_one_out,
                      rie_estimate=settings.rie_estimate,
                      show_progress=settings.show_progress)
    out = Path(args.out_csv)
    ResultExporter(out.parent).export_report_csv(report, out.name)
    if report.rows:
        logger.info("Model beats RIE on %d of %d row(s)",
                    report.rows_where_model_beats_rie(), len(report.rows))
    return 0


def handle_compare(args: argparse.Namespace, settings: Settings) -> int:
    model = load_model(args.model)
    records = load_records(args.data, limit=args.record_index + 1)
    if args.record_index < 0 or args.record_index >= len(records):
        raise DatasetError(f"Record index {args.record_index} is out of range",
                           file_path=args.data, record_index=args.record_index)
    comparison = compare_single(records[args.record_index], model,
                                clean_rescale=settings.clean_rescale,
                                rie_rescale=settings.rie_rescale,
                                leave_one_out=settings.rie_leave_one_out,
                                rie_estimate=settings.rie_estimate)
    if args.out_json:
        out = Path(args.out_json)
        ResultExporter(out.parent).export_comparison_json(comparison.as_dict(), out.name)
    else:
        print(json.dumps(comparison.as_dict(), indent=2))
    return 0


def handle_noise(args: argparse.Namespace, settings: Settings) -> int:
    spectrum = named_spectrum(args.shape, args.n)
    profile = noise_profile(spectrum, args.t_values, Rng(args.seed))
    if args.out_csv:
        out = Path(args.out_csv)
        ResultExporter(out.parent).export_noise_profile_csv(spectrum.values, profile, out.name)
    else:
        t_values = sorted(profile)
        print(",".join(["index", "true"] + [f"t_{t}" for t in t_values]))
        for i, value in enumerate(spectrum.values):
            print(",".join([str(i), repr(float(value))] + [repr(float(profile[t][i])) for t in t_values]))
    return 0


HANDLERS = {
    "gen": handle_gen,
    "train": handle_train,
    "clean": handle_clean,
    "rie": handle_rie,
    "eval": handle_eval,
    "compare": handle_compare,
    "noise": handle_noise,
}


def build_settings(args: argparse.Namespace) -> Settings:
    """Command-line flags take priority over environment and config file."""
    overrides = {
        "eigen_method": args.eigen_method,
        "show_progress": False if args.no_progress else None,
        "workers": getattr(args, "workers", None),
        "hidden": getattr(args, "hidden", None),
        "dropout": getattr(args, "dropout", None),
        "epochs": getattr(args, "epochs", None),
        "learning_rate": getattr(args, "lr", None),
        "batch_size": getattr(args, "batch", None),
        "optimizer": getattr(args, "optimizer", None),
        "rie_estimate": getattr(args, "estimate", None),
    }
    return get_settings(**overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for the cleanSpectrum module.

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    parser = setup_argparse()
    args = parser.parse_args(argv)

    configure_logging(
        level=args.log_level.upper(),
        json_output=args.json_logs,
        log_file=args.log_file
    )

    try:
        if args.config or args.profile != "default":
            cleanSpectrum.config.config_manager = ConfigManager(
                config_file=args.config,
                profile=args.profile
            )
            logger.info("Using configuration %s (profile: %s)", args.config or "search path", args.profile)

        settings = build_settings(args)
        cleanSpectrum.matcore.DEFAULT_EIGEN_METHOD = settings.eigen_method
        logger.debug("cleanSpectrum %s starting", args.command)
        return HANDLERS[args.command](args, settings)

    except KeyboardInterrupt:
        logger.info("Operation cancelled by user")
        return 130
    except (CleanSpectrumError, ValueError) as e:
        logger.debug("Command failed", exc_info=True, extra={"error": get_error_summary(e)})
        print_error(e)
        return 1
    except Exception as e:
        logger.critical("Unhandled exception: %s", str(e), exc_info=True,
                        extra={"error": get_error_summary(e)})
        print_error(e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
