"""Command-line front door: calibrate, measure, simulate, serve.

Exit codes: 0 success, 2 usage error, 3 unreadable or invalid input
data, 4 degenerate geometry or failed consensus.
"""
from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from .errors import (
    MeasureError,
    ParseError,
    UndecodableImage,
    UnknownReference,
    ValidationError,
)
from .geometry import Homog3
from .homography import RansacConfig, read_correspondences_csv
from .metrology import (
    calibrate,
    calibration_to_dict,
    load_calibration,
    measure_height,
    measurement_to_dict,
    save_calibration,
)
from .overlay import render_measurement_overlay, render_wireframe
from .reference import bundled_reference, load_reference
from .synthetic import SceneConfig, generate, write_fixture

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_GEOMETRY = 4

_DATA_ERRORS = (ParseError, ValidationError, UnknownReference, UndecodableImage)


def _parse_point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_face_csv(text: str) -> tuple[str, str]:
    face, sep, path = text.partition("=")
    if not sep or not face or not path:
        raise argparse.ArgumentTypeError(
            f"expected 'face_id=path.csv', got {text!r}"
        )
    return face, path


def _parse_heights(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(p) for p in text.split(",") if p)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not values:
        raise argparse.ArgumentTypeError("at least one height required")
    return values


def _add_ransac_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--inlier-threshold", type=float, default=3.0)
    parser.add_argument("--confidence", type=float, default=0.999)
    parser.add_argument("--max-iterations", type=int, default=2000)
    parser.add_argument("--min-inliers", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)


def _ransac_config(args: argparse.Namespace) -> RansacConfig:
    return RansacConfig(
        inlier_threshold=args.inlier_threshold,
        confidence=args.confidence,
        max_iterations=args.max_iterations,
        min_inliers=args.min_inliers,
        seed=args.seed,
    )


def _load_reference_arg(path: str | None):
    if path is None:
        return bundled_reference()
    return load_reference(path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svmeasure",
        description="Measure real-world lengths in a photo of a known reference object.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cal = sub.add_parser("calibrate", help="estimate scene geometry from correspondences")
    p_cal.add_argument("--reference", help="reference spec JSON (default: bundled box_10cm)")
    p_cal.add_argument(
        "--corrs",
        action="append",
        type=_parse_face_csv,
        required=True,
        metavar="FACE=CSV",
        help="correspondence CSV per face; repeatable",
    )
    p_cal.add_argument("--out", required=True, help="output calibration JSON")
    p_cal.add_argument("--json", action="store_true", help="print calibration JSON to stdout")
    _add_ransac_flags(p_cal)

    p_meas = sub.add_parser("measure", help="measure a height from two picked points")
    p_meas.add_argument("--calib", required=True, help="calibration JSON from 'calibrate'")
    p_meas.add_argument("--base", required=True, type=_parse_point, metavar="X,Y")
    p_meas.add_argument("--top", required=True, type=_parse_point, metavar="X,Y")
    p_meas.add_argument("--overlay", help="write an SVG overlay of the measurement")
    p_meas.add_argument("--json", action="store_true", help="print measurement JSON to stdout")

    p_sim = sub.add_parser("simulate", help="generate a ground-truth fixture directory")
    p_sim.add_argument("--reference", help="reference spec JSON (default: bundled box_10cm)")
    p_sim.add_argument("--out", required=True, help="output fixture directory")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--heights", type=_parse_heights, default=(50.0, 100.0, 170.0))
    p_sim.add_argument("--noise-sigma", type=float, default=0.0)
    p_sim.add_argument("--outlier-fraction", type=float, default=0.0)
    p_sim.add_argument("--grid", type=int, default=5)
    p_sim.add_argument("--svg", action="store_true", help="also write a wireframe SVG")

    p_srv = sub.add_parser("serve", help="run the HTTP measurement service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--data-dir", help="session storage directory (or SVMEASURE_DATA_DIR)")
    p_srv.add_argument("--ui-dir", help="static UI bundle directory (or SVMEASURE_UI_DIR)")

    return parser


def _cmd_calibrate(args: argparse.Namespace) -> int:
    ref = _load_reference_arg(args.reference)
    corrs = {face: read_correspondences_csv(path) for face, path in args.corrs}
    cal = calibrate(ref, corrs, _ransac_config(args))
    save_calibration(cal, args.out)
    if args.json:
        print(json.dumps(calibration_to_dict(cal), sort_keys=True))
        return EXIT_OK
    print(f"{'face':<12} {'corrs':>6} {'inliers':>8} {'mean err px':>12} {'iters':>6}")
    for fid, stats in sorted(cal.diagnostics["faces"].items()):
        print(
            f"{fid:<12} {stats['n_correspondences']:>6} {stats['n_inliers']:>8} "
            f"{stats['mean_inlier_error_px']:>12.4f} {stats['iterations_run']:>6}"
        )
    print(f"alpha: {cal.alpha!r} (1/mm)")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_measure(args: argparse.Namespace) -> int:
    cal = load_calibration(args.calib)
    m = measure_height(cal, Homog3.point(*args.base), Homog3.point(*args.top))
    if args.overlay:
        render_measurement_overlay(cal, m, args.overlay)
    if args.json:
        out = measurement_to_dict(m)
        out["height_cm"] = m.Z_x / 10.0
        print(json.dumps(out, sort_keys=True))
        return EXIT_OK
    print(f"Height: {m.Z_x:.3f} mm ({m.Z_x / 10.0:.2f} cm)")
    print(f"Alignment shift: {m.alignment_shift:.3f} px")
    if m.low_confidence:
        print("Warning: low confidence, base point is close to the vanishing line")
    if args.overlay:
        print(f"wrote {args.overlay}")
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    ref = _load_reference_arg(args.reference)
    cfg = SceneConfig(
        reference=ref,
        object_heights=tuple(args.heights),
        noise_sigma=args.noise_sigma,
        outlier_fraction=args.outlier_fraction,
        seed=args.seed,
        grid_size=args.grid,
    )
    scene = generate(cfg)
    write_fixture(scene, args.out)
    if args.svg:
        render_wireframe(scene, Path(args.out) / "wireframe.svg")
    print(f"fixture written to {args.out}")
    for fid in scene.correspondences:
        print(f"  corrs_{fid}.csv: {len(scene.correspondences[fid])} correspondences")
    for obj in scene.objects:
        b = obj.base_image.xy()
        print(
            f"  object h={obj.height_mm:g} mm at ground ({obj.ground_xy[0]:.1f}, "
            f"{obj.ground_xy[1]:.1f}), base pixel ({b[0]:.1f}, {b[1]:.1f})"
        )
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, ui_dir=args.ui_dir)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((args.host, args.port))
    sock.listen(128)
    host, port = sock.getsockname()[:2]
    print(f"svmeasure service listening on http://{host}:{port}", flush=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    server.run(sockets=[sock])
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "calibrate": _cmd_calibrate,
        "measure": _cmd_measure,
        "simulate": _cmd_simulate,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except _DATA_ERRORS as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MeasureError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY


if __name__ == "__main__":
    sys.exit(main())
