"""End-to-end certification pipeline: config file in, certificate out.

Stage order: certify_annulus -> fourier_matrix -> bounds -> certify_schur ->
pseudospectrum_gate -> certify_circle per disk -> exclosure (matrix level,
then the function-space lift) -> multiplicity_count.  A failed stage still
produces a diagnostic certificate carrying everything computed so far.

The final "proven" verdict asserts, for the configured map T: the spectrum
of the transfer operator on the unit-disk analytic space is contained in
the union of the disks, and each resonance disk holds exactly the reported
number of eigenvalues.  The function-space side of the argument needs the
first disk to be the exclusion ball B(0, frak_r) — its radius is the same
frak_r that enters the eigenfunction-ratio bound — and transfers the
matrix-level contour sups through the Fourier isometry (l1 norm on the
truncation range, norm inflation sqrt(n), and the 1/|z| resolvent of the
zero block on the complement).
"""

from __future__ import annotations

import configparser
import hashlib
import json
import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import _rounding as rd
from .ball import BallArithmeticError
from .bounds import delta_budget, discretization_error, eigenratio_r, op_norm_bound
from .contour import Disk, certify_circle, exclosure, multiplicity_count
from .galerkin import GalerkinOperator, fourier_matrix
from .maps import (
    CircleMapSpec,
    PerturbedDoubling,
    benchmark_blaschke,
    certify_annulus,
    monomial_map,
)
from .schur import certify_schur, gate_threshold, pseudospectrum_gate

__all__ = [
    "ConfigError",
    "RunConfig",
    "EnclosureCertificate",
    "load_config",
    "preset_names",
    "run_certification",
    "emit_report",
    "parse_report",
    "emit_plots",
    "heatmap_grid",
]

log = logging.getLogger(__name__)

SCHEMA_VERSION = "speccert-certificate-1"

_PRESET_ALIASES = {"desk": "blaschke-desk", "full": "blaschke-full"}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _parse_fraction_sum(text: str) -> Fraction:
    """Exact rational parser accepting sums like '5/64+1/128+1/256'."""
    total = Fraction(0)
    for part in text.replace(" ", "").split("+"):
        if not part:
            raise ConfigError(f"empty term in rational value {text!r}")
        total += Fraction(part)
    return total


def _build_map(section) -> CircleMapSpec:
    kind = section.get("type", "").strip()
    if kind == "monomial":
        return monomial_map(section.getint("degree"))
    if kind == "blaschke-benchmark":
        return benchmark_blaschke()
    if kind == "perturbed-doubling":
        return PerturbedDoubling(_parse_fraction_sum(section.get("b")))
    raise ConfigError(f"unknown map type {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of one certification run."""

    map_spec: CircleMapSpec
    eta: float
    alpha: float
    rho: float
    subdivisions: int
    K: int
    fft_size: int
    frak_r: float
    resonance_disks: tuple[Disk, ...]
    workers: int = 1
    max_arcs: int = 1 << 16
    initial_arcs: int = 16
    out_dir: Path | None = None
    resume: bool = False
    preset: str | None = None

    def __post_init__(self):
        if not (0.0 < self.eta < self.alpha < self.rho):
            raise ConfigError("need 0 < eta < alpha < rho")
        if not self.frak_r > 0:
            raise ConfigError("frak_r must be positive")
        if self.K < 1:
            raise ConfigError("K must be at least 1")
        n = self.fft_size
        if n < 2 or n & (n - 1):
            raise ConfigError("fft_size must be a power of two")
        if self.subdivisions < 4:
            raise ConfigError("subdivisions must be at least 4")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        disks = self.disks
        for i in range(len(disks)):
            for j in range(i + 1, len(disks)):
                gap = abs(disks[i].center - disks[j].center)
                if gap <= disks[i].radius + disks[j].radius:
                    raise ConfigError(
                        f"disks {i} and {j} are not disjoint (including F0)")
        if self.out_dir is not None:
            object.__setattr__(self, "out_dir", Path(self.out_dir))

    @property
    def disks(self) -> tuple[Disk, ...]:
        return (Disk(0.0, self.frak_r), *self.resonance_disks)

    @property
    def n(self) -> int:
        return 2 * self.K + 1

    def digest(self) -> str:
        """Hash of everything that affects the mathematical outcome."""
        payload = {
            "map": self.map_spec.describe(),
            "eta": self.eta, "alpha": self.alpha, "rho": self.rho,
            "subdivisions": self.subdivisions,
            "K": self.K, "fft_size": self.fft_size,
            "frak_r": self.frak_r,
            "disks": [[d.center.real, d.center.imag, d.radius]
                      for d in self.resonance_disks],
            "max_arcs": self.max_arcs, "initial_arcs": self.initial_arcs,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def preset_names() -> list[str]:
    base = resources.files("speccert") / "presets"
    names = sorted(p.name[:-4] for p in base.iterdir() if p.name.endswith(".ini"))
    return names


def _read_preset(name: str) -> str:
    name = _PRESET_ALIASES.get(name, name)
    ref = resources.files("speccert") / "presets" / f"{name}.ini"
    try:
        return ref.read_text()
    except FileNotFoundError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}")


def load_config(source: str | Path | None = None, *, preset: str | None = None,
                workers: int | None = None, out_dir: str | Path | None = None,
                resume: bool = False) -> RunConfig:
    """Build a RunConfig from an INI file and/or a named preset.

    When both are given the file is parsed on top of the preset, so it only
    needs to state the keys it wants to override.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if preset is None and source is None:
        raise ConfigError("need a config file or a preset name")
    if preset is not None:
        cp.read_string(_read_preset(preset))
    if source is not None:
        text = Path(source).read_text()
        cp.read_string(text)

    try:
        map_spec = _build_map(cp["map"])
        ann = cp["annulus"]
        eta = ann.getfloat("eta")
        alpha = ann.getfloat("alpha")
        rho = ann.getfloat("rho")
        subdivisions = ann.getint("subdivisions", fallback=4096)
        disc = cp["discretization"]
        K = disc.getint("k")
        fft_size = disc.getint("fft_size")
        dsec = cp["disks"]
        frak_r = dsec.getfloat("f0_radius")
        resonance = []
        for line in dsec.get("resonance", "").strip().splitlines():
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"bad resonance disk line {line!r} "
                                  "(expected: <center> <radius>)")
            resonance.append(Disk(complex(parts[0]), float(parts[1])))
        run = cp["run"] if cp.has_section("run") else {}
        cfg_workers = int(run.get("workers", 1))
        max_arcs = int(run.get("max_arcs", 1 << 16))
        initial_arcs = int(run.get("initial_arcs", 16))
    except ConfigError:
        raise
    except Exception as exc:  # missing keys, bad literals, bad sections
        raise ConfigError(f"invalid configuration: {exc}") from exc

    return RunConfig(map_spec=map_spec, eta=eta, alpha=alpha, rho=rho,
                     subdivisions=subdivisions, K=K, fft_size=fft_size,
                     frak_r=frak_r, resonance_disks=tuple(resonance),
                     workers=workers if workers is not None else cfg_workers,
                     max_arcs=max_arcs, initial_arcs=initial_arcs,
                     out_dir=Path(out_dir) if out_dir is not None else None,
                     resume=resume, preset=preset)


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

def _up(v: float) -> dict:
    return {"value": float(v), "rounding": "upper"}


def _down(v: float) -> dict:
    return {"value": float(v), "rounding": "lower"}


def _exact(v: float) -> dict:
    return {"value": float(v), "rounding": "exact"}


@dataclass(frozen=True)
class EnclosureCertificate:
    """Machine-readable outcome of run_certification.

    Every float that resulted from directed rounding is wrapped as
    {"value": v, "rounding": "upper"|"lower"|"exact"} stating which side of
    the true quantity it lies on.  `verdict` is "proven" or
    "failed(<stage>)"; a failed run keeps all blocks computed before the
    failing stage and describes the failure itself.
    """

    schema_version: str
    map: dict
    config_digest: str
    verdict: str
    annulus: dict | None
    constants: dict | None
    schur: dict | None
    gate: dict | None
    disks: tuple[dict, ...]
    stats: dict
    failure: dict | None = None

    @property
    def proven(self) -> bool:
        return self.verdict == "proven"

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "map": self.map,
            "config_digest": self.config_digest,
            "verdict": self.verdict,
            "annulus": self.annulus,
            "constants": self.constants,
            "schur": self.schur,
            "gate": self.gate,
            "disks": list(self.disks),
            "stats": self.stats,
            "failure": self.failure,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "EnclosureCertificate":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported certificate schema "
                             f"{d.get('schema_version')!r}")
        return cls(schema_version=d["schema_version"], map=d["map"],
                   config_digest=d["config_digest"], verdict=d["verdict"],
                   annulus=d["annulus"], constants=d["constants"],
                   schur=d["schur"], gate=d["gate"],
                   disks=tuple(d["disks"]), stats=d["stats"],
                   failure=d.get("failure"))


# ---------------------------------------------------------------------------
# the run itself
# ---------------------------------------------------------------------------

def _annulus_block(ann) -> dict:
    stats = ann.boundary_stats()
    return {
        "eta": _exact(ann.eta), "alpha": _exact(ann.alpha),
        "rho": _exact(ann.rho), "certified": bool(ann.certified),
        "zero_free": bool(ann.zero_free),
        "boundary": {"m_out": _down(stats["m_out"]), "M_out": _up(stats["M_out"]),
                     "m_in": _down(stats["m_in"]), "M_in": _up(stats["M_in"])},
    }


def _load_or_build_matrix(config: RunConfig, ann) -> tuple[GalerkinOperator, bool]:
    path = (config.out_dir / "matrix.spcm") if config.out_dir else None
    if config.resume and path is not None and path.exists():
        op = GalerkinOperator.load(path)
        same = (op.K == config.K and op.fft_size == config.fft_size
                and op.annulus.eta == ann.eta and op.annulus.rho == ann.rho
                and op.annulus.alpha == ann.alpha
                and op.meta.get("map_fingerprint") == config.map_spec.fingerprint())
        if same:
            log.info("reusing archived matrix %s", path)
            return op, True
        log.warning("archived matrix %s does not match the configuration; "
                    "rebuilding", path)
    op = fourier_matrix(config.map_spec, ann, config.K, config.fft_size)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        op.save(path)
        log.info("archived matrix to %s", path)
    return op, False


def run_certification(config: RunConfig) -> EnclosureCertificate:
    """Execute the full pipeline for one configuration."""
    t0 = time.perf_counter()
    disks = config.disks
    labels = [f"F{i}" for i in range(len(disks))]
    disk_rows: list[dict] = [
        {"label": lab, "center": [d.center.real, d.center.imag],
         "radius": d.radius, "sup_bound": None, "transferred": None,
         "a0_bound": None, "multiplicity": None, "arcs": None}
        for lab, d in zip(labels, disks)]
    annulus_block = constants = schur_block = gate_block = None
    total_svd = 0
    total_arcs = 0
    stage = "certify_annulus"

    def finish(verdict: str, failure: dict | None) -> EnclosureCertificate:
        stats = {"wall_clock_s": time.perf_counter() - t0,
                 "svd_calls": total_svd, "arcs": total_arcs,
                 "workers": config.workers}
        map_block = dict(config.map_spec.describe())
        map_block["fingerprint"] = config.map_spec.fingerprint()
        cert = EnclosureCertificate(
            schema_version=SCHEMA_VERSION, map=map_block,
            config_digest=config.digest(), verdict=verdict,
            annulus=annulus_block, constants=constants, schur=schur_block,
            gate=gate_block, disks=tuple(disk_rows), stats=stats,
            failure=failure)
        log.info("verdict: %s (%.2f s, %d SVD calls)", verdict,
                 stats["wall_clock_s"], total_svd)
        return cert

    try:
        log.info("stage certify_annulus: eta=%g rho=%g subdivisions=%d",
                 config.eta, config.rho, config.subdivisions)
        ann = certify_annulus(
            config.map_spec, config.eta, config.rho, config.subdivisions,
            max_subdivisions=max(1 << 20, config.subdivisions),
        ).with_alpha(config.alpha)
        annulus_block = _annulus_block(ann)

        stage = "fourier_matrix"
        log.info("stage fourier_matrix: K=%d fft_size=%d", config.K,
                 config.fft_size)
        op, reused = _load_or_build_matrix(config, ann)
        ann = op.annulus  # archived runs must reuse the archived certificate

        stage = "bounds"
        B = op_norm_bound(ann)
        Delta = discretization_error(ann, config.K)
        ratio_r = eigenratio_r(ann, config.frak_r)
        budget = delta_budget(ratio_r, Delta, config.frak_r)
        constants = {"B": _up(B), "Delta": _up(Delta), "r": _up(ratio_r),
                     "delta": _up(budget.delta),
                     "delta_inv": _down(budget.delta_inv),
                     "frak_r": _exact(config.frak_r),
                     "aliasing_bound": _up(op.aliasing_bound),
                     "matrix_reused": reused}
        log.info("stage bounds: B<=%.6g Delta<=%.6g r<=%.6g delta<=%.6g "
                 "(1/delta >= %.6g)", B, Delta, ratio_r, budget.delta,
                 budget.delta_inv)

        stage = "certify_schur"
        cs = certify_schur(op.matrix)
        schur_block = {"epsilon": _up(cs.epsilon), "C0": _up(cs.C0),
                       "n": cs.n, "source": cs.source}
        log.info("stage certify_schur: epsilon<=%.3g C0<=%.6g", cs.epsilon,
                 cs.C0)

        stage = "pseudospectrum_gate"
        foursq = rd.mul_up(4.0, cs.one_plus_eps_sq_upper())
        delta0 = max(gate_threshold(cs), rd.mul_up(foursq, budget.delta))
        usable = pseudospectrum_gate(cs, delta0)
        if usable < budget.delta:
            raise BallArithmeticError(
                f"gate delta {usable} fell below the budget delta "
                f"{budget.delta}")
        inv_delta0 = rd.div_down(1.0, delta0)
        ell1_cap = rd.div_down(budget.delta_inv, rd.sqrt_up(float(cs.n)))
        target = rd.mul_down(rd.div_down(min(inv_delta0, ell1_cap), foursq),
                             1.0 - 2.0 ** -20)
        gate_block = {"threshold": _up(gate_threshold(cs)),
                      "delta0": _up(delta0), "usable_delta": _down(usable),
                      "contour_target": _down(target)}
        log.info("stage pseudospectrum_gate: delta0=%.6g usable=%.6g "
                 "contour target=%.6g", delta0, usable, target)
        if not target > 0:
            raise BallArithmeticError("contour target underflowed to zero")

        stage = "certify_circle"
        cache: dict = {}
        contours = []
        for i, d in enumerate(disks):
            log.info("stage certify_circle: disk %s center %s radius %g "
                     "target %.6g", labels[i], d.center, d.radius, target)
            ct = certify_circle(cs, d, target, config.max_arcs,
                                workers=config.workers, cache=cache,
                                initial_arcs=config.initial_arcs)
            contours.append(ct)
            total_svd += ct.svd_calls
            total_arcs += len(ct.arcs)
            disk_rows[i]["sup_bound"] = _up(ct.sup_bound)
            disk_rows[i]["arcs"] = len(ct.arcs)

        stage = "exclosure"
        ex = exclosure(cs, disks, delta0, contours)
        for i, bound in enumerate(ex.transferred):
            disk_rows[i]["transferred"] = _up(bound)
            if bound > budget.delta_inv:
                raise BallArithmeticError(
                    f"disk {i}: transferred bound {bound} exceeds "
                    f"1/delta >= {budget.delta_inv}")
        # lift to the function space: l1 <= sqrt(n) l2 on the truncation
        # range, and the complement block contributes the scalar resolvent
        # 1/|z|, largest at the circle point closest to 0
        sqrt_n = rd.sqrt_up(float(cs.n))
        for i, (d, bound) in enumerate(zip(disks, ex.transferred)):
            if i == 0:
                dist0 = config.frak_r
            else:
                dist0 = rd.sub_down(rd.cabs_down(d.center.real, d.center.imag),
                                    d.radius)
            if not dist0 > 0:
                raise BallArithmeticError(
                    f"disk {i} is not certifiably separated from 0")
            a0 = max(rd.mul_up(sqrt_n, bound), rd.div_up(1.0, dist0))
            disk_rows[i]["a0_bound"] = _up(a0)
            if a0 > budget.delta_inv:
                raise BallArithmeticError(
                    f"disk {i}: function-space resolvent bound {a0} exceeds "
                    f"1/delta >= {budget.delta_inv}")

        stage = "multiplicity_count"
        for i in range(1, len(disks)):
            m = multiplicity_count(cs, disks[i])
            disk_rows[i]["multiplicity"] = m
            log.info("stage multiplicity_count: disk %s holds %d eigenvalue(s)",
                     labels[i], m)

    except Exception as exc:  # noqa: BLE001 - every stage error becomes a verdict
        log.warning("stage %s failed: %s", stage, exc)
        return finish(f"failed({stage})",
                      {"stage": stage, "error": type(exc).__name__,
                       "detail": str(exc)})

    return finish("proven", None)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _fmt_wrapped(d: dict | None) -> str:
    if d is None:
        return "-"
    arrow = {"upper": "<=", "lower": ">=", "exact": "="}[d["rounding"]]
    return f"{arrow} {d['value']:.9g}"


def emit_report(cert: EnclosureCertificate, format: str = "json",
                path: str | Path | None = None):
    """Serialize the certificate; returns the string, or the Path if given.

    The JSON form is canonical (sorted keys, fixed separators) so identical
    certificates serialize to identical bytes.
    """
    if format == "json":
        text = json.dumps(cert.to_json_dict(), sort_keys=True, indent=1,
                          separators=(",", ": ")) + "\n"
    elif format == "text":
        lines = [f"certificate schema {cert.schema_version}",
                 f"map: {cert.map}",
                 f"config: {cert.config_digest}",
                 f"verdict: {cert.verdict}"]
        if cert.failure:
            lines.append(f"failure: {cert.failure['stage']}: "
                         f"{cert.failure['error']}: {cert.failure['detail']}")
        if cert.constants:
            c = cert.constants
            lines.append(f"operator norm B {_fmt_wrapped(c['B'])}; "
                         f"discretization Delta {_fmt_wrapped(c['Delta'])}; "
                         f"ratio r {_fmt_wrapped(c['r'])}")
            lines.append(f"delta {_fmt_wrapped(c['delta'])}; "
                         f"delta^-1 {_fmt_wrapped(c['delta_inv'])}")
        if cert.schur:
            lines.append(f"Schur epsilon {_fmt_wrapped(cert.schur['epsilon'])}; "
                         f"C0 {_fmt_wrapped(cert.schur['C0'])}; "
                         f"n = {cert.schur['n']}")
        for row in cert.disks:
            c = row["center"]
            lines.append(
                f"{row['label']}: center {c[0]:+.12g}{c[1]:+.12g}j "
                f"radius {row['radius']:g}; sup {_fmt_wrapped(row['sup_bound'])}; "
                f"transferred {_fmt_wrapped(row['transferred'])}; "
                f"A0 {_fmt_wrapped(row['a0_bound'])}; "
                f"multiplicity {row['multiplicity'] if row['multiplicity'] is not None else '-'}")
        s = cert.stats
        lines.append(f"stats: {s['svd_calls']} SVD calls, {s['arcs']} arcs, "
                     f"{s['wall_clock_s']:.2f} s, workers {s['workers']}")
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown report format {format!r}")
    if path is None:
        return text
    path = Path(path)
    path.write_text(text)
    return path


def parse_report(source: str | Path) -> EnclosureCertificate:
    """Inverse of emit_report(..., format='json')."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    return EnclosureCertificate.from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# plots
# ---------------------------------------------------------------------------

def heatmap_grid(tri: np.ndarray, window=(-0.6, 1.2, -0.6, 1.2), n: int = 100):
    """NONRIGOROUS grid of 1/sigma_min(z - T) estimates (plain LAPACK, round
    to nearest, no enclosures) for quick-look pseudospectrum pictures."""
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    vals = np.empty((n, n))
    eye = np.eye(tri.shape[0], dtype=np.complex128)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            s = np.linalg.svd(complex(x, y) * eye - tri, compute_uv=False)
            vals[i, j] = 1.0 / s[-1] if s[-1] > 0 else np.inf
    return xs, ys, vals


def _svg_disks(cert: EnclosureCertificate) -> str:
    rows = cert.disks
    cx = [r["center"][0] for r in rows]
    cy = [r["center"][1] for r in rows]
    rr = [r["radius"] for r in rows]
    pad = 0.2 + max(rr)
    x0, x1 = min(cx) - pad, max(cx) + pad
    y0, y1 = min(cy) - pad, max(cy) + pad
    scale = 400.0 / max(x1 - x0, y1 - y0)

    def sx(x):
        return (x - x0) * scale

    def sy(y):
        return (y1 - y) * scale  # flip: SVG y grows downward

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{sx(x1):.0f}" '
             f'height="{sy(y0):.0f}" viewBox="0 0 {sx(x1):.1f} {sy(y0):.1f}">',
             f'<line x1="{sx(x0):.1f}" y1="{sy(0):.1f}" x2="{sx(x1):.1f}" '
             f'y2="{sy(0):.1f}" stroke="#ccc"/>',
             f'<line x1="{sx(0):.1f}" y1="{sy(y0):.1f}" x2="{sx(0):.1f}" '
             f'y2="{sy(y1):.1f}" stroke="#ccc"/>']
    for row in rows:
        x, y = row["center"]
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" '
                     f'r="{row["radius"] * scale:.2f}" fill="none" '
                     f'stroke="#1f77b4" stroke-width="1.5"/>')
        parts.append(f'<text x="{sx(x):.2f}" y="{sy(y):.2f}" '
                     f'font-size="12" text-anchor="middle">{row["label"]}</text>')
    parts.append(f'<text x="6" y="14" font-size="12">verdict: '
                 f'{cert.verdict}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plots(cert: EnclosureCertificate, out_dir: str | Path, *,
               triangular: np.ndarray | None = None,
               heatmap_window=(-0.6, 1.2, -0.6, 1.2),
               heatmap_n: int = 0) -> list[Path]:
    """Write disk geometry CSV, an SVG of the disks, and (optionally, when a
    triangular factor is supplied and heatmap_n > 0) a nonrigorous
    pseudospectrum heatmap CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out / "disks.csv"
    lines = ["label,center_re,center_im,radius,sup_bound,transferred,"
             "a0_bound,multiplicity"]
    for row in cert.disks:
        def val(key):
            return "" if row[key] is None else repr(row[key]["value"])
        mult = "" if row["multiplicity"] is None else str(row["multiplicity"])
        lines.append(f"{row['label']},{row['center'][0]!r},{row['center'][1]!r},"
                     f"{row['radius']!r},{val('sup_bound')},{val('transferred')},"
                     f"{val('a0_bound')},{mult}")
    csv_path.write_text("\n".join(lines) + "\n")
    written.append(csv_path)

    svg_path = out / "disks.svg"
    svg_path.write_text(_svg_disks(cert))
    written.append(svg_path)

    if triangular is not None and heatmap_n > 0:
        xs, ys, vals = heatmap_grid(triangular, heatmap_window, heatmap_n)
        hm = out / "heatmap.csv"
        rows = ["# NONRIGOROUS pseudospectrum estimate: plain floating-point "
                "1/sigma_min(z - T), no enclosures; for orientation only",
                "x,y,inv_sigma_min"]
        for i, y in enumerate(ys):
            for j, x in enumerate(xs):
                rows.append(f"{float(x)!r},{float(y)!r},{float(vals[i, j])!r}")
        hm.write_text("\n".join(rows) + "\n")
        written.append(hm)
    return written
