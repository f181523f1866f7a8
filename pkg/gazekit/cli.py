"""
Command line interface of gazekit.

Every subcommand prints a JSON document on stdout (or writes it to
``--out``); logging goes to stderr. Exit codes: 0 on success, 2 for usage
errors, 3 when the data break a contract of the library.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from joblib import Parallel, delayed

from . import __version__
from ._config import config_context, get_config
from .dataset import (active_perf_index, build_splits, check_viewing_schedule,
                      rank_and_allocate, split_manifest)
from .exceptions import (ContractError, EmptyInputError, GazeDataError,
                         GazeParseError, ShapeError)
from .fixation import (D_MAX, T_MIN, detect_fixations, segments_from_records,
                       segments_to_records, summarize)
from .formats import dump_json, read_sgm, write_pgm, write_sgm
from .metrics import evaluate_sequence, fdm_cc, fdm_sim
from .report import (condition_summary, metrics_frame,
                     passive_active_overlap, summary_records)
from .spatial import (FDM_SIGMA, HEATMAP_SIGMA, HEATMAP_TRUNCATE, build_fdm,
                      gaze_hull, gaze_heatmap_sequence)
from .synth import SynthSpec, synth_trace
from .trace import (ACTIVE_RATE, LABEL_SHAPE, MODEL_SHAPE, NATIVE_SHAPE,
                    PASSIVE_RATE, Coords, Modality, read_gaze_csv,
                    read_trials, rescale_trace, validate_trace,
                    write_gaze_csv)

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_DATA = 3

DETECTION_FRAMES = {'native': None, 'model': MODEL_SHAPE,
                    'label': LABEL_SHAPE}


def _read_trace(args):
    return read_gaze_csv(args.input, args.width, args.height,
                         coords=args.coords, nominal_rate=args.rate)


def _detection_trace(trace, detect_at):
    """Trace in the frame where the dispersion threshold is expressed."""
    shape = DETECTION_FRAMES[detect_at]
    if shape is None or shape == (trace.width, trace.height):
        return trace
    return rescale_trace(trace, *shape)


def _detect(trace, args):
    if getattr(args, 'fixations', None):
        return _load_fixations(args.fixations, trace)
    return detect_fixations(trace, t_min=args.t_min, d_max=args.d_max)


def _load_fixations(path, trace):
    try:
        records = _load_json(path)
    except json.JSONDecodeError as exc:
        raise GazeParseError(f"{path}: {exc.msg}", line=exc.lineno) from exc
    if isinstance(records, dict):
        if 'fixations' not in records:
            raise ContractError(f"{path} has no 'fixations' entry")
        records = records['fixations']
    if not isinstance(records, list):
        raise ContractError(f"{path} does not hold a list of fixations")
    try:
        return segments_from_records(records, trace)
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"{path}: bad fixation record ({exc})") from exc


def _load_json(path):
    with open(path) as f:
        return json.load(f)


def _emit(args, payload, to_out=True):
    text = dump_json(payload)
    if to_out and args.out:
        Path(args.out).write_text(text)
        logger.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)


def _fixation_metrics(trace, segments):
    if not trace.valid.any():
        raise EmptyInputError("trace has no valid sample")
    metrics = summarize(trace, segments)
    return metrics.with_hull_area(gaze_hull(trace).area)


def cmd_fixations(args):
    trace = _detection_trace(_read_trace(args), args.detect_at)
    segments = detect_fixations(trace, t_min=args.t_min, d_max=args.d_max)
    logger.info("%d fixations in %d samples", len(segments), len(trace))
    _emit(args, {
        'input': str(args.input),
        'width': trace.width,
        'height': trace.height,
        't_min': args.t_min,
        'd_max': args.d_max,
        'n_fixations': len(segments),
        'fixations': segments_to_records(segments),
    })


def cmd_metrics(args):
    trace = _detection_trace(_read_trace(args), args.detect_at)
    segments = _detect(trace, args)
    _emit(args, {
        'input': str(args.input),
        'validation': validate_trace(trace).to_dict(),
        'metrics': _fixation_metrics(trace, segments).to_dict(),
    })


def cmd_heatmap(args):
    trace = _read_trace(args)
    frames = gaze_heatmap_sequence(trace, grid_w=args.grid_width,
                                   grid_h=args.grid_height, fps=args.fps,
                                   sigma=args.sigma, trunc=args.trunc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for index, frame in enumerate(frames):
        write_sgm(frame, out / f"frame_{index:05d}.sgm")
    _emit(args, {
        'out': str(out),
        'n_frames': len(frames),
        'n_empty_frames': sum(frame.total() == 0 for frame in frames),
    }, to_out=False)


def cmd_fdm(args):
    trace = _detection_trace(_read_trace(args), args.detect_at)
    segments = _detect(trace, args)
    grid_shape = None
    if args.grid_width or args.grid_height:
        grid_shape = (args.grid_width or trace.width,
                      args.grid_height or trace.height)
    fdm = build_fdm(trace, segments, sigma=args.sigma,
                    normalize=args.normalize, grid_shape=grid_shape)
    write_sgm(fdm, args.out)
    _emit(args, {
        'out': str(args.out),
        'width': fdm.width,
        'height': fdm.height,
        'n_fixations': len(segments),
        'total': fdm.total(),
    }, to_out=False)


def cmd_compare_fdm(args):
    a, b = read_sgm(args.a), read_sgm(args.b)
    _emit(args, {
        'fdm_sim': fdm_sim(a.normalized(), b.normalized()),
        'fdm_cc': fdm_cc(a, b),
    })


def _sgm_files(directory):
    files = sorted(Path(directory).glob('*.sgm'))
    if not files:
        if not Path(directory).is_dir():
            raise FileNotFoundError(f"no such directory: {directory}")
        raise EmptyInputError(f"no .sgm file in {directory}")
    return files


def cmd_eval(args):
    gt_files, pred_files = _sgm_files(args.gt_dir), _sgm_files(args.pred_dir)
    if len(gt_files) != len(pred_files):
        raise ShapeError(
            f"{len(gt_files)} ground-truth frames but {len(pred_files)} "
            f"predicted frames")
    renamed = [(g.name, p.name) for g, p in zip(gt_files, pred_files)
               if g.name != p.name]
    if renamed:
        logger.warning("%d frames are paired by sorted order despite "
                       "different names, first %s", len(renamed), renamed[0])
    result = evaluate_sequence([read_sgm(f) for f in gt_files],
                               [read_sgm(f) for f in pred_files],
                               pred_native_w=args.pred_width,
                               pred_native_h=args.pred_height)
    _emit(args, result.to_dict())


def cmd_rank_split(args):
    trials = read_trials(args.manifest)
    check_viewing_schedule(trials)
    quotas = {level: quota for level, quota in
              (('novice', args.quota_novice),
               ('intermediate', args.quota_intermediate))
              if quota is not None}
    groups = rank_and_allocate(trials, quotas)
    assignment = build_splits(trials, fractions=args.fractions,
                              seed=args.seed)
    _emit(args, {
        'perf_index': active_perf_index(trials),
        'rankings': [{'task': group.task.value,
                      'expertise': group.expertise.value,
                      'ranked': list(group.ranked),
                      'allocated': list(group.allocated)}
                     for group in groups],
        'split': split_manifest(assignment),
    })


def cmd_synth(args):
    spec = SynthSpec(seed=args.seed, n_fixations=args.n_fixations,
                     fixation_duration_range=(args.duration_min,
                                              args.duration_max),
                     saccade_duration=args.saccade_duration,
                     jitter_sigma=args.jitter, rate=args.rate or ACTIVE_RATE,
                     width=args.width, height=args.height,
                     t_min=args.t_min, d_max=args.d_max)
    trace, segments = synth_trace(spec)
    csv = write_gaze_csv(trace)
    if args.out:
        Path(args.out).write_text(csv)
        logger.info("wrote %d samples to %s", len(trace), args.out)
    else:
        sys.stdout.write(csv)
    if args.truth:
        Path(args.truth).write_text(dump_json(
            {'n_fixations': len(segments),
             'fixations': segments_to_records(segments)}))


def cmd_export_pgm(args):
    write_pgm(read_sgm(args.input), args.out)
    logger.info("wrote %s", args.out)


def _analyze_trial(trial, path, coords, detect_at, t_min, d_max, fdm_sigma):
    rate = PASSIVE_RATE if trial.modality is Modality.PASSIVE else ACTIVE_RATE
    trace = read_gaze_csv(path, trial.width, trial.height, coords=coords,
                          nominal_rate=rate)
    trace = _detection_trace(trace, detect_at)
    segments = detect_fixations(trace, t_min=t_min, d_max=d_max)
    metrics = _fixation_metrics(trace, segments)
    fdm = build_fdm(trace, segments, sigma=fdm_sigma)
    return trial.trial_id, metrics, fdm


def _safe_analyze(*params):
    try:
        return _analyze_trial(*params)
    except GazeDataError as exc:
        logger.warning("%s skipped: %s", params[0].trial_id, exc)
        return None


def cmd_summary(args):
    trials = {trial.trial_id: trial for trial in read_trials(args.manifest)}
    gaze_dir = Path(args.gaze_dir)
    jobs = []
    for trial in trials.values():
        path = gaze_dir / f"{trial.trial_id}.csv"
        if not path.exists():
            logger.warning("no gaze file for %s", trial.trial_id)
            continue
        jobs.append((trial, path, args.coords, args.detect_at, args.t_min,
                     args.d_max, args.fdm_sigma))
    results = Parallel(n_jobs=get_config()['n_jobs'])(
        delayed(_safe_analyze)(*params) for params in jobs)
    results = [result for result in results if result is not None]
    if not results:
        raise EmptyInputError("no trial could be analyzed")

    metrics = {trial_id: m for trial_id, m, _ in results}
    fdms = {trial_id: fdm for trial_id, _, fdm in results}
    frame = metrics_frame(metrics)
    overlap = passive_active_overlap(fdms, trials)
    _emit(args, {
        'n_trials': len(results),
        'metrics': {trial_id: m.to_dict() for trial_id, m in metrics.items()},
        'conditions': summary_records(condition_summary(frame, trials)),
        'overlap': {
            trial_id: {'source_trial_id': row['source_trial_id'],
                       'condition': row['condition'],
                       'fdm_sim': row['fdm_sim'], 'fdm_cc': row['fdm_cc']}
            for trial_id, row in overlap.iterrows()},
    })


def _positive_int(value):
    number = int(value)
    if number <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got "
                                         f"{value}")
    return number


def _common_parser():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--width', type=_positive_int,
                        default=NATIVE_SHAPE[0],
                        help="stimulus frame width in pixels")
    parser.add_argument('--height', type=_positive_int,
                        default=NATIVE_SHAPE[1],
                        help="stimulus frame height in pixels")
    parser.add_argument('--coords', choices=[c.value for c in Coords],
                        default=Coords.PIXEL.value,
                        help="coordinate convention of gaze CSV files")
    parser.add_argument('--rate', type=float, default=None,
                        help="nominal sampling rate in Hz")
    parser.add_argument('--out', default=None, help="output path")
    parser.add_argument('--jobs', type=int, default=None,
                        help="number of parallel workers")
    parser.add_argument('--seed', type=int, default=0, help="random seed")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    return parser


def _detection_parser():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--t-min', type=float, default=T_MIN,
                        help="minimum fixation duration in seconds")
    parser.add_argument('--d-max', type=float, default=D_MAX,
                        help="maximum fixation dispersion in pixels")
    parser.add_argument('--detect-at', choices=sorted(DETECTION_FRAMES),
                        default='native',
                        help="resolution the dispersion threshold refers to")
    return parser


def build_parser():
    common = _common_parser()
    detection = _detection_parser()
    parser = argparse.ArgumentParser(
        prog='gazekit',
        description="Gaze-trace analytics and saliency evaluation.")
    parser.add_argument('--version', action='version',
                        version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    sub = commands.add_parser('fixations', parents=[common, detection],
                              help="detect fixations in a gaze CSV")
    sub.add_argument('input')
    sub.set_defaults(func=cmd_fixations)

    sub = commands.add_parser('metrics', parents=[common, detection],
                              help="fixation and convex hull metrics")
    sub.add_argument('input')
    sub.add_argument('--fixations', default=None,
                     help="fixation JSON written by the fixations command")
    sub.set_defaults(func=cmd_metrics)

    sub = commands.add_parser('heatmap', parents=[common],
                              help="per-frame gaze heatmaps as SGM files")
    sub.add_argument('input')
    sub.add_argument('--fps', type=float, default=30.)
    sub.add_argument('--sigma', type=float, default=HEATMAP_SIGMA)
    sub.add_argument('--trunc', type=float, default=HEATMAP_TRUNCATE)
    sub.add_argument('--grid-width', type=_positive_int,
                     default=LABEL_SHAPE[0])
    sub.add_argument('--grid-height', type=_positive_int,
                     default=LABEL_SHAPE[1])
    sub.set_defaults(func=cmd_heatmap, out_required=True)

    sub = commands.add_parser('fdm', parents=[common, detection],
                              help="fixation density map as an SGM file")
    sub.add_argument('input')
    sub.add_argument('--fixations', default=None)
    sub.add_argument('--sigma', type=float, default=FDM_SIGMA)
    sub.add_argument('--normalize', action='store_true')
    sub.add_argument('--grid-width', type=_positive_int, default=None)
    sub.add_argument('--grid-height', type=_positive_int, default=None)
    sub.set_defaults(func=cmd_fdm, out_required=True)

    sub = commands.add_parser('compare-fdm', parents=[common],
                              help="FDM-SIM and FDM-CC of two SGM maps")
    sub.add_argument('a')
    sub.add_argument('b')
    sub.set_defaults(func=cmd_compare_fdm)

    sub = commands.add_parser('eval', parents=[common],
                              help="score predicted saliency frames")
    sub.add_argument('gt_dir')
    sub.add_argument('pred_dir')
    sub.add_argument('--pred-width', type=_positive_int, default=None)
    sub.add_argument('--pred-height', type=_positive_int, default=None)
    sub.set_defaults(func=cmd_eval)

    sub = commands.add_parser('rank-split', parents=[common],
                              help="rank demonstrations and split trials")
    sub.add_argument('manifest')
    sub.add_argument('--fractions', type=float, nargs=3,
                     default=(0.6, 0.2, 0.2),
                     metavar=('TRAIN', 'VAL', 'TEST'))
    sub.add_argument('--quota-novice', type=_positive_int, default=None)
    sub.add_argument('--quota-intermediate', type=_positive_int,
                     default=None)
    sub.set_defaults(func=cmd_rank_split)

    sub = commands.add_parser('synth', parents=[common, detection],
                              help="generate a synthetic gaze CSV")
    sub.add_argument('--n-fixations', type=_positive_int, default=3)
    sub.add_argument('--duration-min', type=float, default=0.2)
    sub.add_argument('--duration-max', type=float, default=0.5)
    sub.add_argument('--saccade-duration', type=float, default=0.04)
    sub.add_argument('--jitter', type=float, default=0.)
    sub.add_argument('--truth', default=None,
                     help="where to write the generating fixations")
    sub.set_defaults(func=cmd_synth)

    sub = commands.add_parser('export-pgm', parents=[common],
                              help="convert an SGM grid to a PGM image")
    sub.add_argument('input')
    sub.set_defaults(func=cmd_export_pgm, out_required=True)

    sub = commands.add_parser('summary', parents=[common, detection],
                              help="per-condition summary of a dataset")
    sub.add_argument('--manifest', required=True)
    sub.add_argument('--gaze-dir', required=True)
    sub.add_argument('--fdm-sigma', type=float, default=FDM_SIGMA)
    sub.set_defaults(func=cmd_summary)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, 'out_required', False) and not args.out:
        parser.error(f"{args.command} requires --out")

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr,
        format="%(asctime)s - %(levelname)s - %(message)s")
    logging.captureWarnings(True)

    try:
        if args.jobs is not None:
            with config_context(n_jobs=args.jobs):
                args.func(args)
        else:
            args.func(args)
    except GazeDataError as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    return 0
