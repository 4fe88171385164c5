"""Command-line front end.

Subcommands mirror the pipeline stages: `certify-map` checks the annulus,
`discretize` builds and archives the truncated transfer matrix,
`certify-spectrum` runs the whole certification, `report` reformats a saved
certificate, and `heatmap` draws the (nonrigorous) pseudospectrum picture
from an archived matrix.

Exit codes: 0 = proven / success, 2 = a certification stage failed,
3 = configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .galerkin import GalerkinOperator
from .pipeline import (
    ConfigError,
    EnclosureCertificate,
    emit_plots,
    emit_report,
    heatmap_grid,
    load_config,
    parse_report,
    preset_names,
    run_certification,
)

log = logging.getLogger(__name__)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-v", "--verbose", action="count", default=0,
                   help="-v: stage logs, -vv: arc-level logs")
    p.add_argument("--config", metavar="PATH", help="INI configuration file")
    p.add_argument("--preset", metavar="NAME",
                   help="named preset (desk, full, or one of: %s); a config "
                        "file on top of it overrides individual keys"
                        % ", ".join(preset_names()))
    p.add_argument("--workers", type=int, metavar="N",
                   help="contour worker threads (result is identical for any N)")
    p.add_argument("--out", metavar="DIR",
                   help="output directory for certificates, archives, plots")
    p.add_argument("--resume", action="store_true",
                   help="reuse a matching archived matrix from --out")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="speccert",
        description="Certified enclosure of transfer-operator spectra for "
                    "analytic expanding circle maps.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify-map",
                       help="certify the annulus geometry for the configured map")
    _add_config_args(p)

    p = sub.add_parser("discretize",
                       help="build the truncated transfer matrix and archive it")
    _add_config_args(p)

    p = sub.add_parser("certify-spectrum",
                       help="run the full certification pipeline")
    _add_config_args(p)

    p = sub.add_parser("report", help="print a saved certificate")
    _add_config_args(p)
    p.add_argument("--cert", metavar="PATH",
                   help="certificate JSON (default: <out>/certificate.json)")
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("heatmap",
                       help="NONRIGOROUS pseudospectrum grid from an archived matrix")
    _add_config_args(p)
    p.add_argument("--matrix", metavar="PATH",
                   help="matrix archive (default: <out>/matrix.spcm)")
    p.add_argument("--grid", type=int, default=100, metavar="N",
                   help="grid points per axis (default 100)")
    p.add_argument("--window", metavar="X0,X1,Y0,Y1", default="-0.6,1.2,-0.6,1.2",
                   help="plot window; pass as --window=X0,X1,Y0,Y1 when X0 "
                        "is negative (default -0.6,1.2,-0.6,1.2)")

    return ap


def _configure_logging(verbosity: int) -> None:
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    logging.basicConfig(level=level,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    if verbosity == 1:
        # stage-level only: silence the per-arc chatter of the contour walk
        logging.getLogger("speccert.contour").setLevel(logging.WARNING)


def _config_from_args(args):
    return load_config(args.config, preset=args.preset, workers=args.workers,
                       out_dir=args.out, resume=args.resume)


def _cmd_certify_map(args) -> int:
    from .maps import CertificationFailed, certify_annulus

    cfg = _config_from_args(args)
    try:
        ann = certify_annulus(cfg.map_spec, cfg.eta, cfg.rho, cfg.subdivisions,
                              max_subdivisions=max(1 << 20, cfg.subdivisions))
    except CertificationFailed as exc:
        print(f"annulus certification FAILED: {exc}")
        return 2
    stats = ann.boundary_stats()
    print(f"annulus certified: eta={ann.eta} rho={ann.rho} "
          f"zero_free={ann.zero_free}")
    print(f"outer circle image modulus in [{stats['m_out']:.6g}, "
          f"{stats['M_out']:.6g}]; inner in [{stats['m_in']:.6g}, "
          f"{stats['M_in']:.6g}]")
    return 0


def _cmd_discretize(args) -> int:
    from .galerkin import fourier_matrix
    from .maps import CertificationFailed, certify_annulus

    cfg = _config_from_args(args)
    if cfg.out_dir is None:
        raise ConfigError("discretize needs --out to archive the matrix")
    try:
        ann = certify_annulus(cfg.map_spec, cfg.eta, cfg.rho, cfg.subdivisions,
                              max_subdivisions=max(1 << 20, cfg.subdivisions)
                              ).with_alpha(cfg.alpha)
        op = fourier_matrix(cfg.map_spec, ann, cfg.K, cfg.fft_size)
    except Exception as exc:  # noqa: BLE001 - report and signal failure
        print(f"discretization FAILED: {type(exc).__name__}: {exc}")
        return 2
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / "matrix.spcm"
    op.save(path)
    print(f"archived {op.n}x{op.n} matrix (K={op.K}, fft {op.fft_size}, "
          f"aliasing bound {op.aliasing_bound:.3g}) to {path}")
    return 0


def _cmd_certify_spectrum(args) -> int:
    cfg = _config_from_args(args)
    cert = run_certification(cfg)
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        emit_report(cert, "json", cfg.out_dir / "certificate.json")
        emit_report(cert, "text", cfg.out_dir / "certificate.txt")
        emit_plots(cert, cfg.out_dir)
        print(f"wrote certificate and plots to {cfg.out_dir}")
    print(emit_report(cert, "text"), end="")
    return 0 if cert.proven else 2


def _cmd_report(args) -> int:
    if args.cert:
        path = Path(args.cert)
    elif args.out:
        path = Path(args.out) / "certificate.json"
    else:
        raise ConfigError("report needs --cert or --out")
    cert = parse_report(path)
    print(emit_report(cert, args.format), end="")
    return 0 if cert.proven else 2


def _cmd_heatmap(args) -> int:
    if args.matrix:
        path = Path(args.matrix)
    elif args.out:
        path = Path(args.out) / "matrix.spcm"
    else:
        raise ConfigError("heatmap needs --matrix or --out")
    try:
        window = tuple(float(t) for t in args.window.split(","))
        if len(window) != 4:
            raise ValueError
    except ValueError:
        raise ConfigError(f"bad --window {args.window!r}; expected X0,X1,Y0,Y1")
    op = GalerkinOperator.load(path)
    out = Path(args.out) if args.out else path.parent
    xs, ys, vals = heatmap_grid(op.matrix.centers, window, args.grid)
    out.mkdir(parents=True, exist_ok=True)
    hm = out / "heatmap.csv"
    rows = ["# NONRIGOROUS pseudospectrum estimate: plain floating-point "
            "1/sigma_min(z - T), no enclosures; for orientation only",
            "x,y,inv_sigma_min"]
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            rows.append(f"{float(x)!r},{float(y)!r},{float(vals[i, j])!r}")
    hm.write_text("\n".join(rows) + "\n")
    print(f"wrote NONRIGOROUS {args.grid}x{args.grid} heatmap to {hm}")
    return 0


_COMMANDS = {
    "certify-map": _cmd_certify_map,
    "discretize": _cmd_discretize,
    "certify-spectrum": _cmd_certify_spectrum,
    "report": _cmd_report,
    "heatmap": _cmd_heatmap,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
