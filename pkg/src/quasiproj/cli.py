"""Command-line entry point: qc {tiling2d,freq,windows,lattice3d,overlap-census}."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, EmptyWindowError, QcError, SingularConfigError
from .geometry import make_basis
from .io import (RunConfig, build_tiling_document, cells_obj, frequency_csv,
                 overlap_csv, render_svg, resolve_shift, window_document,
                 write_json, write_text)
from .lattice3d import build_lattice3, cell_instance, find_tips, overlap_census
from .tiling2d import empirical_frequencies
from .window import (build_decagon_Q, build_polytope_P, build_windows,
                     enumerate_accepted_2d, enumerate_accepted_3d, slice_window)

log = logging.getLogger("qc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SINGULAR = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qc",
        description="Generalized Penrose tilings and 3-d quasiperiodic lattices "
                    "by projection of the 5-d integer lattice.")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, text in [
        ("tiling2d", "generate a tiling patch as SVG"),
        ("freq", "measure vertex-type frequencies against the analytic values"),
        ("windows", "export the acceptance geometry as JSON"),
        ("lattice3d", "build the 3-d lattice and export unit cells as OBJ"),
        ("overlap-census", "classify and count the five cell-overlap classes"),
    ]:
        sp = sub.add_parser(mode, help=text)
        sp.add_argument("--c", type=float, default=0.5,
                        help="sum of the grid shifts, in [0, 1) (default 0.5)")
        sp.add_argument("--gamma", default="auto",
                        help="'auto' or five comma-separated reals (default auto)")
        sp.add_argument("--seed", type=int, default=0,
                        help="seed for auto gamma (default 0)")
        sp.add_argument("--radius", type=int, default=20,
                        help="label-box half-width (default 20)")
        sp.add_argument("--tol", type=float, default=1e-9,
                        help="absolute boundary tolerance (default 1e-9)")
        sp.add_argument("--threads", type=int, default=1,
                        help="worker threads for label enumeration (default 1)")
        sp.add_argument("--index", type=int, default=None,
                        help="restrict 'windows' output to one slice index")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", default="auto",
                        help="output format override (default by mode)")
    return parser


def _config_from_args(args) -> RunConfig:
    gamma = args.gamma
    if gamma != "auto":
        try:
            gamma = [float(x) for x in str(gamma).split(",")]
        except ValueError as exc:
            raise ConfigError(f"cannot parse --gamma {args.gamma!r}: {exc}") from exc
        if len(gamma) != 5:
            raise ConfigError(f"--gamma needs 5 components, got {len(gamma)}")
    if not 0.0 <= args.c < 1.0:
        raise ConfigError(f"--c must lie in [0, 1), got {args.c}")
    if args.radius < 1:
        raise ConfigError(f"--radius must be >= 1, got {args.radius}")
    if args.tol <= 0:
        raise ConfigError(f"--tol must be positive, got {args.tol}")
    return RunConfig(mode=args.mode, c=args.c, gamma=gamma, seed=args.seed,
                     radius=args.radius, tol=args.tol, threads=args.threads,
                     index=args.index, out=args.out, format=args.format)


def _emit(config: RunConfig, content: str) -> None:
    if config.out:
        write_text(config.out, content)
        log.info("wrote %s", config.out)
    else:
        sys.stdout.write(content)


def _run_mode(config: RunConfig) -> None:
    basis = make_basis()
    P = build_polytope_P(basis, config.tol)
    Q = build_decagon_Q(basis, config.tol)

    if config.mode == "windows":
        log.info("resolved config: %s", config.to_json())
        wset = build_windows(P, config.c, config.tol)
        if config.index is not None:
            win = slice_window(P, config.index, config.c, config.tol)
            doc = {"c": config.c, "index": config.index, "height": win.height,
                   "polygon": win.polygon.tolist()}
        else:
            doc = window_document(P, Q, wset)
        _emit(config, write_json(doc))
        return

    def probe(shift):
        enumerate_accepted_2d(3, shift, build_windows(P, shift.c, config.tol), basis)
        enumerate_accepted_3d(2, shift, Q, basis, config.tol)

    shift = resolve_shift(config, probe=probe)
    resolved = RunConfig(**{**config.__dict__, "gamma": shift.gamma.tolist(),
                            "c": shift.c})
    log.info("resolved config: %s", resolved.to_json())

    if config.mode == "tiling2d":
        wset = build_windows(P, shift.c, config.tol)
        doc = build_tiling_document(config.radius, shift, wset, basis,
                                    threads=config.threads)
        _emit(config, render_svg(doc))
    elif config.mode == "freq":
        wset = build_windows(P, shift.c, config.tol)
        report = empirical_frequencies(config.radius, shift, wset, basis,
                                       threads=config.threads)
        _emit(config, frequency_csv(report))
    elif config.mode == "lattice3d":
        lat = build_lattice3(config.radius, shift, Q, basis, config.tol,
                             threads=config.threads)
        tips = find_tips(lat, shift, Q, basis, config.tol)
        inner = tips[abs(tips).max(axis=1) <= config.radius - 3]
        cells = [cell_instance(t, lat, P, config.tol) for t in inner]
        _emit(config, cells_obj(cells, P))
        log.info("lattice: %d points, %d tips, %d complete cells",
                 len(lat.labels), len(tips), len(cells))
    elif config.mode == "overlap-census":
        lat = build_lattice3(config.radius, shift, Q, basis, config.tol,
                             threads=config.threads)
        census = overlap_census(lat, shift, Q, P, basis, config.tol,
                                shared_atom_sample=20)
        _emit(config, overlap_csv(census))
        if census.shared_atoms:
            log.info("mean shared atoms with overlapping neighbors: %s",
                     {k: round(v, 2) for k, v in census.shared_atoms.items()})
    else:  # pragma: no cover - argparse restricts the choices
        raise ConfigError(f"unknown mode {config.mode!r}")


def run(argv) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="qc: %(message)s")
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        config = _config_from_args(args)
        _run_mode(config)
    except SingularConfigError as exc:
        log.error("singular configuration: %s", exc)
        return EXIT_SINGULAR
    except (ConfigError, EmptyWindowError, ValueError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except QcError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
